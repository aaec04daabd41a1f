"""Scenario config files: JSON with strict validation.

Configs round-trip losslessly (parse -> emit -> parse gives the identical
scenario), unknown keys are rejected with their location, and every problem
in a file is reported in one pass rather than one at a time.
"""
from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path
from typing import Dict, List, Optional

from .engine import (ControlOptions, EstimatorSetup, InertiaSwitch, OutputOptions,
                     ScenarioSpec, SgTrip, StochasticSpec, UnmeasuredPowerStep)
from .errors import ConfigError, ParameterError, ValidationError
from .grid import GridTopology, NodeKind, NodeParams
from .signals import BmrConfig, PrbsConfig

_TOP_KEYS = {"name", "horizon", "dt", "seed", "network", "nodes", "estimator",
             "control", "events", "stochastic", "output"}
_REQUIRED = ("name", "horizon", "dt", "network", "nodes")
_NETWORK_KEYS = {"nodes", "electrical_edges", "comm_edges", "comm_delay"}
_DVPP_KEYS = {"id", "kind", "H", "bess_tau", "bess_min", "bess_max",
              "fcr_pmax", "beta", "alpha"}
_SG_KEYS = {"id", "kind", "H", "R_ibr", "R_sg", "T_g"}
_ESTIMATOR_KEYS = {"exo_a", "exo_c", "kappa", "h_scale", "allow_uncertified"}
_CONTROL_KEYS = {"omega_n", "fcr_literal_branch", "dapi_feedback"}
_EVENT_KEYS = {
    "unmeasured_power_step": {"kind", "time", "node", "target", "tau"},
    "sg_trip": {"kind", "time", "node", "post_h"},
    "inertia_switch": {"kind", "time", "node", "new_h"},
}
_STOCHASTIC_KEYS = {"nodes", "prbs", "bmr"}
_PRBS_KEYS = {"n_components", "magnitude", "switch_scale"}
_BMR_KEYS = {"sigma", "threshold", "decay", "dt", "reset_state"}
_OUTPUT_KEYS = {"decimation", "format", "plots"}


class _Collector:
    def __init__(self):
        self.problems: List[str] = []

    def add(self, path: str, msg: str):
        self.problems.append(f"{path}: {msg}")

    def unknown(self, path: str, data: dict, allowed: set):
        for key in sorted(set(data) - allowed):
            self.add(f"{path}.{key}" if path else key, "unknown key")

    def number(self, data: dict, key: str, path: str, default=None):
        if key not in data:
            if default is not None:
                return default
            self.add(f"{path}.{key}" if path else key, "missing required value")
            return None
        v = data[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.add(f"{path}.{key}" if path else key, f"expected a number, got {v!r}")
            return None
        return float(v)


def scenario_to_dict(spec: ScenarioSpec) -> Dict:
    """Plain-data form of a scenario, the exact config-file schema."""
    topo = spec.topology
    nodes = []
    for n in topo.node_ids:
        p = spec.node_params[n]
        if p.kind is NodeKind.DVPP:
            nodes.append({"id": n, "kind": "DVPP", "H": p.H, "bess_tau": p.bess_tau,
                          "bess_min": p.bess_min, "bess_max": p.bess_max,
                          "fcr_pmax": p.fcr_pmax, "beta": p.beta, "alpha": p.alpha})
        else:
            nodes.append({"id": n, "kind": "SG", "H": p.H, "R_ibr": p.R_ibr,
                          "R_sg": p.R_sg, "T_g": p.T_g})
    events = []
    for ev in spec.events:
        d = {"kind": ev.kind, "time": ev.time, "node": ev.node}
        if isinstance(ev, UnmeasuredPowerStep):
            d.update(target=ev.target, tau=ev.tau)
        elif isinstance(ev, SgTrip):
            d.update(post_h=ev.post_h)
        elif isinstance(ev, InertiaSwitch):
            d.update(new_h=ev.new_h)
        events.append(d)
    sto: Dict = {"nodes": list(spec.stochastic.nodes)}
    if spec.stochastic.prbs is not None:
        p = spec.stochastic.prbs
        sto["prbs"] = {"n_components": p.n_components, "magnitude": p.magnitude,
                       "switch_scale": p.switch_scale}
    if spec.stochastic.bmr is not None:
        b = spec.stochastic.bmr
        sto["bmr"] = {"sigma": b.sigma, "threshold": b.threshold, "decay": b.decay,
                      "dt": b.dt, "reset_state": b.reset_state}
    est = spec.estimator
    return {
        "name": spec.name,
        "horizon": spec.horizon,
        "dt": spec.dt,
        "seed": spec.seed,
        "network": {
            "nodes": list(topo.node_ids),
            "electrical_edges": [[i, j, x] for (i, j), x in topo.electrical_edges.items()],
            "comm_edges": [[i, j, w] for (i, j), w in topo.comm_edges.items()],
            "comm_delay": topo.comm_delay,
        },
        "nodes": nodes,
        "estimator": {
            "exo_a": [list(row) for row in est.exo_a],
            "exo_c": list(est.exo_c),
            "kappa": list(est.kappa),
            "h_scale": est.h_scale,
            "allow_uncertified": est.allow_uncertified,
        },
        "control": {
            "omega_n": spec.control.omega_n,
            "fcr_literal_branch": spec.control.fcr_literal_branch,
            "dapi_feedback": spec.control.dapi_feedback,
        },
        "events": events,
        "stochastic": sto,
        "output": {
            "decimation": spec.output.decimation,
            "format": spec.output.format,
            "plots": spec.output.plots,
        },
    }


def scenario_from_dict(data: Dict, source: str = "<config>") -> ScenarioSpec:
    """Build and fully validate a scenario; raises ValidationError listing
    every problem found."""
    if not isinstance(data, dict):
        raise ValidationError([f"{source}: top level must be an object"])
    c = _Collector()
    c.unknown("", data, _TOP_KEYS)
    for key in _REQUIRED:
        if key not in data:
            c.add(key, "missing required section")

    name = data.get("name", "")
    if not isinstance(name, str):
        c.add("name", "must be a string")
        name = str(name)
    horizon = c.number(data, "horizon", "") if "horizon" in data else None
    dt = c.number(data, "dt", "") if "dt" in data else None
    seed = data.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        c.add("seed", f"must be an integer, got {seed!r}")
        seed = 0

    topology = None
    net = data.get("network")
    if isinstance(net, dict):
        pre_network = len(c.problems)
        c.unknown("network", net, _NETWORK_KEYS)
        node_ids = net.get("nodes")
        if not isinstance(node_ids, list) or not node_ids:
            c.add("network.nodes", "must be a non-empty list of node ids")
            node_ids = []
        edges, comm = [], []
        for label, out, allow in (("electrical_edges", edges, True),
                                  ("comm_edges", comm, False)):
            for k, item in enumerate(net.get(label, [])):
                path = f"network.{label}[{k}]"
                if (not isinstance(item, list) or len(item) != 3
                        or not all(isinstance(e, (str, int, float)) for e in item)):
                    c.add(path, "expected [node, node, value]")
                    continue
                i, j, v = str(item[0]), str(item[1]), item[2]
                if not isinstance(v, (int, float)) or isinstance(v, bool):
                    c.add(path, f"edge value must be a number, got {v!r}")
                    continue
                if allow and v <= 0:
                    c.add(path, f"reactance must be positive, got {v}")
                    continue
                if not allow and v < 0:
                    c.add(path, f"comm weight must be nonnegative, got {v}")
                    continue
                out.append((i, j, float(v)))
        delay = c.number(net, "comm_delay", "network", default=0.0)
        if len(c.problems) == pre_network:
            try:
                topology = GridTopology.build([str(n) for n in node_ids], edges,
                                              comm, delay)
            except ParameterError as e:
                c.add("network", str(e))
    elif net is not None:
        c.add("network", "must be an object")

    node_params: Dict[str, NodeParams] = {}
    for k, nd in enumerate(data.get("nodes", [])):
        path = f"nodes[{k}]"
        if not isinstance(nd, dict):
            c.add(path, "must be an object")
            continue
        nid = str(nd.get("id", k))
        kind = nd.get("kind")
        if kind == "DVPP":
            c.unknown(path, nd, _DVPP_KEYS)
            fields = {f: c.number(nd, f, path) for f in
                      ("H", "bess_tau", "bess_min", "bess_max", "fcr_pmax",
                       "beta", "alpha")}
            if all(v is not None for v in fields.values()):
                try:
                    node_params[nid] = NodeParams(kind=NodeKind.DVPP, **fields)
                except ParameterError as e:
                    c.add(path, str(e))
        elif kind == "SG":
            c.unknown(path, nd, _SG_KEYS)
            fields = {f: c.number(nd, f, path) for f in ("H", "R_ibr", "R_sg", "T_g")}
            if all(v is not None for v in fields.values()):
                try:
                    node_params[nid] = NodeParams(kind=NodeKind.SG, **fields)
                except ParameterError as e:
                    c.add(path, str(e))
        else:
            c.add(path, f"kind must be 'DVPP' or 'SG', got {kind!r}")

    est = EstimatorSetup()
    ed = data.get("estimator")
    if isinstance(ed, dict):
        c.unknown("estimator", ed, _ESTIMATOR_KEYS)
        try:
            est = EstimatorSetup(
                exo_a=tuple(tuple(float(x) for x in row) for row in ed.get("exo_a", [[0.0]])),
                exo_c=tuple(float(x) for x in ed.get("exo_c", [1.0])),
                kappa=tuple(float(x) for x in ed.get("kappa", [20.0, 100.0])),
                h_scale=float(ed.get("h_scale", 1.0)),
                allow_uncertified=bool(ed.get("allow_uncertified", False)),
            )
        except (TypeError, ValueError) as e:
            c.add("estimator", f"malformed section: {e}")
    elif ed is not None:
        c.add("estimator", "must be an object")

    ctrl = ControlOptions()
    cd = data.get("control")
    if isinstance(cd, dict):
        c.unknown("control", cd, _CONTROL_KEYS)
        omega_n = c.number(cd, "omega_n", "control", default=ctrl.omega_n)
        ctrl = ControlOptions(
            omega_n=omega_n if omega_n is not None else ctrl.omega_n,
            fcr_literal_branch=bool(cd.get("fcr_literal_branch", False)),
            dapi_feedback=str(cd.get("dapi_feedback", "deficit")),
        )
    elif cd is not None:
        c.add("control", "must be an object")

    events = []
    for k, evd in enumerate(data.get("events", [])):
        path = f"events[{k}]"
        if not isinstance(evd, dict):
            c.add(path, "must be an object")
            continue
        kind = evd.get("kind")
        if kind not in _EVENT_KEYS:
            c.add(path, f"kind must be one of {sorted(_EVENT_KEYS)}, got {kind!r}")
            continue
        c.unknown(path, evd, _EVENT_KEYS[kind])
        time = c.number(evd, "time", path)
        node = str(evd.get("node", ""))
        if time is None:
            continue
        if kind == "unmeasured_power_step":
            target = c.number(evd, "target", path)
            tau = c.number(evd, "tau", path, default=0.2)
            if target is not None:
                events.append(UnmeasuredPowerStep(time=time, node=node,
                                                  target=target, tau=tau))
        elif kind == "sg_trip":
            post_h = c.number(evd, "post_h", path, default=0.005)
            events.append(SgTrip(time=time, node=node, post_h=post_h))
        else:
            new_h = c.number(evd, "new_h", path)
            if new_h is not None:
                events.append(InertiaSwitch(time=time, node=node, new_h=new_h))

    sto = StochasticSpec()
    sd = data.get("stochastic")
    if isinstance(sd, dict):
        c.unknown("stochastic", sd, _STOCHASTIC_KEYS)
        prbs = bmr = None
        if isinstance(sd.get("prbs"), dict):
            c.unknown("stochastic.prbs", sd["prbs"], _PRBS_KEYS)
            try:
                prbs = PrbsConfig(
                    n_components=int(sd["prbs"].get("n_components", 8)),
                    magnitude=float(sd["prbs"].get("magnitude", 0.002)),
                    switch_scale=float(sd["prbs"].get("switch_scale", 1e4)))
            except (ParameterError, TypeError, ValueError) as e:
                c.add("stochastic.prbs", str(e))
        if isinstance(sd.get("bmr"), dict):
            c.unknown("stochastic.bmr", sd["bmr"], _BMR_KEYS)
            try:
                bmr = BmrConfig(
                    sigma=float(sd["bmr"].get("sigma", 0.005)),
                    threshold=float(sd["bmr"].get("threshold", 0.02)),
                    decay=float(sd["bmr"].get("decay", 0.5)),
                    dt=float(sd["bmr"].get("dt", dt if dt else 5e-4)),
                    reset_state=bool(sd["bmr"].get("reset_state", False)))
            except (ParameterError, TypeError, ValueError) as e:
                c.add("stochastic.bmr", str(e))
        sto = StochasticSpec(nodes=tuple(str(n) for n in sd.get("nodes", [])),
                             prbs=prbs, bmr=bmr)
    elif sd is not None:
        c.add("stochastic", "must be an object")

    out = OutputOptions()
    od = data.get("output")
    if isinstance(od, dict):
        c.unknown("output", od, _OUTPUT_KEYS)
        try:
            out = OutputOptions(decimation=int(od.get("decimation", 1)),
                                format=str(od.get("format", "csv")),
                                plots=bool(od.get("plots", False)))
        except (TypeError, ValueError) as e:
            c.add("output", f"malformed section: {e}")
    elif od is not None:
        c.add("output", "must be an object")

    if c.problems or topology is None or horizon is None or dt is None:
        raise ValidationError([f"{source}: {p}" for p in c.problems]
                              or [f"{source}: invalid config"])

    spec = ScenarioSpec(name=name, horizon=horizon, dt=dt, topology=topology,
                        node_params=node_params, events=tuple(events),
                        stochastic=sto, estimator=est, control=ctrl,
                        output=out, seed=seed)
    problems = spec.validate()
    if problems:
        raise ValidationError([f"{source}: {p}" for p in problems])
    return spec


def dumps_scenario(spec: ScenarioSpec) -> str:
    """Canonical config text (stable key order, full float precision)."""
    return json.dumps(scenario_to_dict(spec), indent=2, sort_keys=True) + "\n"


def config_hash(spec: ScenarioSpec) -> str:
    payload = json.dumps(scenario_to_dict(spec), sort_keys=True,
                         separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def save_scenario(spec: ScenarioSpec, path) -> None:
    Path(path).write_text(dumps_scenario(spec), encoding="utf-8")


def load_scenario(path) -> ScenarioSpec:
    """Parse and validate a scenario config file."""
    text = Path(path).read_text(encoding="utf-8")
    if not text.strip():
        raise ValidationError(
            [f"{path}: missing required section '{k}'" for k in _REQUIRED])
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(
            f"{path}: parse error at line {e.lineno}, column {e.colno}: {e.msg}"
        ) from None
    return scenario_from_dict(data, source=str(path))
