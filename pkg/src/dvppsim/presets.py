"""Built-in scenario presets for the 4-bus study system.

Nodes 1-3 are DVPP buses (low inertia, battery + FCR assets), node 4 is a
synchronous generator providing droop support. Unmeasured power steps hit
the three DVPP buses in sequence; scenario s2 adds stochastic load/renewable
fluctuations, a generator trip and a simultaneous virtual-inertia increase
at the DVPP buses. s2-no-support is the s2 baseline without the inertia
increase.
"""
from __future__ import annotations

from .engine import (ControlOptions, EstimatorSetup, InertiaSwitch, ScenarioSpec,
                     SgTrip, StochasticSpec, UnmeasuredPowerStep)
from .grid import GridTopology, NodeParams
from .signals import BmrConfig, PrbsConfig

PRESET_NAMES = ("s1", "s2", "s2-no-support")

DT = 5e-4                 # s
S1_HORIZON = 60.0         # s
S2_HORIZON = 40.0         # s
DEFAULT_SEED = 20260810

DVPP_H = 0.01             # s
DVPP_H_SUPPORT = 0.1      # s, virtual-inertia level after the trip
SG_H = 4.0                # s
SG_H_TRIPPED = 0.005      # s
BESS_TAU = 0.1            # s
COMM_DELAY = 0.5          # s
FCR_PMAX = (0.005, 0.003, 0.001)   # p.u., nodes 1..3
BESS_LIMIT = (0.02, 0.05, 0.01)    # p.u., symmetric
BETA = (1.0, 2.0, 3.0)
ALPHA = 1.0
R_IBR = 0.05
R_SG = 0.05               # governor droop; assumed equal to the inverter droop
T_G = 2.0                 # s
STEP_TAU = 0.2            # s, first-order lag of the unmeasured power steps

# (time, node, target) of the unmeasured power steps shared by all presets
UNMEASURED_STEPS = ((5.0, "1", 0.015), (15.0, "2", 0.01), (25.0, "3", 0.02))


def _topology() -> GridTopology:
    return GridTopology.build(
        node_ids=("1", "2", "3", "4"),
        electrical_edges=(("1", "2", 0.1), ("2", "3", 0.1),
                          ("3", "1", 0.1), ("3", "4", 0.02)),
        comm_edges=(("1", "2", 1.0), ("2", "3", 1.0)),
        comm_delay=COMM_DELAY,
    )


def _node_params() -> dict:
    params = {}
    for k in range(3):
        params[str(k + 1)] = NodeParams.dvpp(
            H=DVPP_H, bess_tau=BESS_TAU, bess_limit=BESS_LIMIT[k],
            fcr_pmax=FCR_PMAX[k], beta=BETA[k], alpha=ALPHA)
    params["4"] = NodeParams.sg(H=SG_H, R_ibr=R_IBR, R_sg=R_SG, T_g=T_G)
    return params


def _step_events():
    return [UnmeasuredPowerStep(time=t, node=n, target=p, tau=STEP_TAU)
            for t, n, p in UNMEASURED_STEPS]


def _stochastic() -> StochasticSpec:
    return StochasticSpec(
        nodes=("1", "2", "3"),
        prbs=PrbsConfig(n_components=8, magnitude=0.002, switch_scale=1e4),
        bmr=BmrConfig(sigma=0.005, threshold=0.02, decay=0.5, dt=DT),
    )


def preset(name: str, seed: int = DEFAULT_SEED) -> ScenarioSpec:
    """Build one of the named presets; unknown names list the valid ones."""
    if name == "s1":
        return ScenarioSpec(
            name="s1", horizon=S1_HORIZON, dt=DT, topology=_topology(),
            node_params=_node_params(), events=tuple(_step_events()),
            estimator=EstimatorSetup(), control=ControlOptions(), seed=seed)
    if name in ("s2", "s2-no-support"):
        events = _step_events()
        events.append(SgTrip(time=10.0, node="4", post_h=SG_H_TRIPPED))
        if name == "s2":
            events.extend(InertiaSwitch(time=10.0, node=str(k), new_h=DVPP_H_SUPPORT)
                          for k in (1, 2, 3))
        events.sort(key=lambda e: e.time)
        return ScenarioSpec(
            name=name, horizon=S2_HORIZON, dt=DT, topology=_topology(),
            node_params=_node_params(), events=tuple(events),
            stochastic=_stochastic(), estimator=EstimatorSetup(),
            control=ControlOptions(), seed=seed)
    raise LookupError(f"unknown preset {name!r}; valid presets: {', '.join(PRESET_NAMES)}")
