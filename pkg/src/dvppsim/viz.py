"""Static plot panels of a run: frequencies vs their estimates, unmeasured
power vs its estimate, battery setpoint vs measured power, tie-line
injections, and the average grid frequency."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .engine import SimulationTrace, derived_metrics  # noqa: E402


def _panel(ax, trace, signal, label, nodes=None, dashed_signal=None):
    nodes = nodes or trace.node_ids
    for node in nodes:
        line, = ax.plot(trace.t, trace.series(signal, node), label=f"node {node}")
        if dashed_signal is not None:
            ax.plot(trace.t, trace.series(dashed_signal, node), "--",
                    color=line.get_color(), alpha=0.7)
    ax.set_xlabel("time (s)")
    ax.set_ylabel(label)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)


def _dvpp_nodes(trace: SimulationTrace):
    cfg = trace.header.get("config")
    if cfg:
        return [nd["id"] for nd in cfg.get("nodes", []) if nd.get("kind") == "DVPP"]
    return list(trace.node_ids)


def plot_trace(trace: SimulationTrace, outdir, stem: str = "trace") -> list:
    """Write the panel PNGs into outdir and return their paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    dvpp = _dvpp_nodes(trace)
    panels = [
        ("freq", "omega", "frequency deviation (p.u.)", None, "omega_est"),
        ("unmeasured", "p_unmeasured", "unmeasured power (p.u.)", dvpp, "p_unmeasured_est"),
        ("bess", "bess_setpoint", "BESS setpoint vs measured (p.u.)", dvpp, "bess_power"),
        ("tie", "tie_flow", "net tie-line injection (p.u.)", None, None),
    ]
    written = []
    for tag, sig, label, nodes, dashed in panels:
        fig, ax = plt.subplots(figsize=(7, 3.2), constrained_layout=True)
        _panel(ax, trace, sig, label, nodes, dashed)
        p = outdir / f"{stem}_{tag}.png"
        fig.savefig(p, dpi=130)
        plt.close(fig)
        written.append(p)

    metrics = derived_metrics(trace)
    fig, ax = plt.subplots(figsize=(7, 3.2), constrained_layout=True)
    ax.plot(trace.t, metrics.mean_omega, color="k")
    ax.set_xlabel("time (s)")
    ax.set_ylabel("mean grid frequency (p.u.)")
    ax.grid(alpha=0.3)
    p = outdir / f"{stem}_mean_freq.png"
    fig.savefig(p, dpi=130)
    plt.close(fig)
    written.append(p)
    return written
