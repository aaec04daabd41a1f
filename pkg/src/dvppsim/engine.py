"""Fixed-step simulation engine.

Advances the coupled multi-node system with explicit forward Euler on a
uniform grid, applying scheduled events and recording every signal. The
order of operations inside a step is part of the external contract:

  1. apply events due at this step
  2. sample stochastic load / renewable signals
  3. tie-line injections from current phases
  4. FCR responses from current frequencies
  5. observer updates computed from current measurements
  6. control: local law + delayed consensus reads -> battery setpoints
  7. physical, consensus and disturbance-lag derivatives on current state
  8. simultaneous Euler commit of every continuous state
  9. push current integrator values into the delay buffers
 10. record the trace row

All derivatives use pre-update values; nothing is updated in place mid-step.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ._version import __version__ as _pkg_version
from .control import DapiState, dapi_derivative, dapi_mismatch, final_setpoint
from .dynamics import DvppInputs, FcrParams, dvpp_derivatives, fcr_response, sg_derivatives
from .errors import NumericFault, ParameterError, ValidationError
from .estimator import (AugmentedModel, ExoModel, build_augmented, certify_gain,
                        estimator_step, power_estimate)
from .grid import GridTopology, NodeKind, NodeParams, NodeState, tie_line_flow
from .signals import (RNG_ALGORITHM_ID, BmrConfig, BmrGenerator, PrbsConfig,
                      PrbsGenerator, RandomStream, substream_seed)

log = logging.getLogger(__name__)

DAPI_FEEDBACK_MODES = ("deficit", "literal", "net_imbalance")

# Signals recorded per node per step.
TRACE_SIGNALS = (
    "theta", "omega", "omega_est", "p_unmeasured", "p_unmeasured_est",
    "p_load", "p_renewable", "p_fcr", "bess_setpoint", "bess_power",
    "dapi_integral", "dapi_mismatch", "tie_flow", "p_mech", "inertia",
)


@dataclass(frozen=True)
class UnmeasuredPowerStep:
    """Start a first-order transition of a node's unmeasured power."""
    time: float
    node: str
    target: float
    tau: float = 0.2  # s

    kind = "unmeasured_power_step"


@dataclass(frozen=True)
class SgTrip:
    """Trip an SG node: inertia drops, the governor reference is removed."""
    time: float
    node: str
    post_h: float = 0.005  # s

    kind = "sg_trip"


@dataclass(frozen=True)
class InertiaSwitch:
    """Change a node's inertia constant (virtual inertia support)."""
    time: float
    node: str
    new_h: float

    kind = "inertia_switch"


Event = object  # any of the three dataclasses above


@dataclass(frozen=True)
class StochasticSpec:
    """Which nodes receive stochastic load/renewable signals and with what
    parameters. Streams are derived per (seed, node, signal), so enabling a
    node does not perturb any other node's realization."""

    nodes: Tuple[str, ...] = ()
    prbs: Optional[PrbsConfig] = None
    bmr: Optional[BmrConfig] = None


@dataclass(frozen=True)
class EstimatorSetup:
    """Observer configuration shared by all DVPP nodes. exo_a / exo_c define
    the internal disturbance model; h_scale deliberately mis-scales the
    inertia used by the observer (robustness experiments)."""

    exo_a: Tuple[Tuple[float, ...], ...] = ((0.0,),)
    exo_c: Tuple[float, ...] = (1.0,)
    kappa: Tuple[float, ...] = (20.0, 100.0)
    h_scale: float = 1.0
    allow_uncertified: bool = False

    def exo_model(self) -> ExoModel:
        return ExoModel(a_matrix=np.array(self.exo_a, dtype=float),
                        c_matrix=np.array([self.exo_c], dtype=float))


@dataclass(frozen=True)
class ControlOptions:
    """Plant-wide control settings."""

    omega_n: float = 0.2 * math.pi / 50.0
    fcr_literal_branch: bool = False
    # Feedback composition of the distributed layer:
    #   deficit       -alpha * (u_m - required_local + consensus); stable, default
    #   literal       -alpha * (required_local - u_m + consensus); unstable, kept
    #                 for fidelity experiments
    #   net_imbalance like deficit but measured tie flows are folded into the
    #                 mismatch; shares in exact beta proportion but settles slowly
    dapi_feedback: str = "deficit"


TRACE_FORMATS = ("csv", "npz", "both")


@dataclass(frozen=True)
class OutputOptions:
    """Persistence preferences; the engine itself always records every step."""

    decimation: int = 1
    format: str = "csv"
    plots: bool = False


@dataclass(frozen=True)
class ScenarioSpec:
    """Complete description of one deterministic run."""

    name: str
    horizon: float
    topology: GridTopology
    node_params: Dict[str, NodeParams]
    dt: float = 5e-4
    events: Tuple[Event, ...] = ()
    stochastic: StochasticSpec = field(default_factory=StochasticSpec)
    estimator: EstimatorSetup = field(default_factory=EstimatorSetup)
    control: ControlOptions = field(default_factory=ControlOptions)
    output: OutputOptions = field(default_factory=OutputOptions)
    seed: int = 0

    def validate(self) -> List[str]:
        problems = []
        if not (math.isfinite(self.dt) and self.dt > 0):
            problems.append(f"dt must be positive, got {self.dt}")
        if not (math.isfinite(self.horizon) and self.horizon >= 0):
            problems.append(f"horizon must be nonnegative, got {self.horizon}")
        ids = set(self.topology.node_ids)
        if set(self.node_params) != ids:
            problems.append("node_params keys must match topology node ids "
                            f"({sorted(self.node_params)} vs {sorted(ids)})")

        def kind_of(node):
            p = self.node_params.get(node)
            return p.kind if p is not None else None

        last_t = -math.inf
        for k, ev in enumerate(self.events):
            where = f"events[{k}]"
            if ev.time < last_t:
                problems.append(f"{where}: events must be sorted by time")
            last_t = ev.time
            if not (0.0 <= ev.time <= self.horizon):
                problems.append(f"{where}: time {ev.time} outside [0, {self.horizon}]")
            if ev.node not in ids:
                problems.append(f"{where}: unknown node {ev.node!r}")
                continue
            if isinstance(ev, UnmeasuredPowerStep):
                if kind_of(ev.node) is not NodeKind.DVPP:
                    problems.append(f"{where}: unmeasured power steps apply to DVPP nodes")
                if ev.tau <= 0:
                    problems.append(f"{where}: tau must be positive, got {ev.tau}")
            elif isinstance(ev, SgTrip):
                if kind_of(ev.node) is not NodeKind.SG:
                    problems.append(f"{where}: sg_trip applies to SG nodes")
                if ev.post_h <= 0:
                    problems.append(f"{where}: post_h must be positive")
            elif isinstance(ev, InertiaSwitch):
                if ev.new_h <= 0:
                    problems.append(f"{where}: new_h must be positive")
            else:
                problems.append(f"{where}: unknown event type {type(ev).__name__}")

        for (i, j) in self.topology.comm_edges:
            for end in (i, j):
                if end in self.node_params and kind_of(end) is not NodeKind.DVPP:
                    problems.append(f"comm edge ({i},{j}): endpoint {end!r} is not a DVPP node")

        for node in self.stochastic.nodes:
            if node not in ids:
                problems.append(f"stochastic node {node!r} unknown")
            elif kind_of(node) is not NodeKind.DVPP:
                problems.append(f"stochastic signals attach to DVPP nodes, {node!r} is not one")
        if self.stochastic.nodes:
            if self.stochastic.prbs is None and self.stochastic.bmr is None:
                problems.append("stochastic nodes enabled but no signal configured")
            if (self.stochastic.bmr is not None
                    and abs(self.stochastic.bmr.dt - self.dt) > 1e-15):
                problems.append(
                    f"bmr dt {self.stochastic.bmr.dt} differs from simulation dt {self.dt}")

        exo_order = len(self.estimator.exo_a)
        if len(self.estimator.kappa) != exo_order + 1:
            problems.append(f"kappa must have length {exo_order + 1}, "
                            f"got {len(self.estimator.kappa)}")
        if self.estimator.h_scale <= 0:
            problems.append("estimator h_scale must be positive")
        if self.control.dapi_feedback not in DAPI_FEEDBACK_MODES:
            problems.append(f"dapi_feedback must be one of {DAPI_FEEDBACK_MODES}, "
                            f"got {self.control.dapi_feedback!r}")
        if not (math.isfinite(self.control.omega_n) and self.control.omega_n > 0):
            problems.append("omega_n must be positive")
        if self.output.decimation < 1:
            problems.append(f"output decimation must be >= 1, got {self.output.decimation}")
        if self.output.format not in TRACE_FORMATS:
            problems.append(f"output format must be one of {TRACE_FORMATS}")
        return problems


@dataclass
class SimulationTrace:
    """Time-indexed record of every signal, one row per step."""

    t: np.ndarray
    node_ids: Tuple[str, ...]
    signals: Dict[str, np.ndarray]  # name -> (n_records, n_nodes)
    header: Dict

    @property
    def n_records(self) -> int:
        return len(self.t)

    def series(self, signal: str, node: str) -> np.ndarray:
        return self.signals[signal][:, self.node_ids.index(node)]

    def final(self, signal: str, node: str) -> float:
        return float(self.series(signal, node)[-1])


def unmeasured_power_dynamics(current: float, target: float, tau: float) -> float:
    """First-order lag rate (target - current)/tau driving the unmeasured
    power toward each event's target."""
    if not (math.isfinite(tau) and tau > 0):
        raise ParameterError(f"tau must be positive, got {tau}")
    return (target - current) / tau


def certification_report(spec: ScenarioSpec) -> List[Dict]:
    """Certify the observer gain for every DVPP node at its configured
    inertia (including any inertia values introduced by events)."""
    exo = spec.estimator.exo_model()
    kappa = np.array(spec.estimator.kappa, dtype=float)
    report = []
    for node in spec.topology.node_ids:
        params = spec.node_params[node]
        if params.kind is not NodeKind.DVPP:
            continue
        h_values = [params.H]
        for ev in spec.events:
            if isinstance(ev, InertiaSwitch) and ev.node == node:
                h_values.append(ev.new_h)
        for h in h_values:
            model = build_augmented(exo, h * spec.estimator.h_scale)
            gains = certify_gain(model, kappa)
            report.append({
                "node": node,
                "H": h,
                "kappa": [float(x) for x in kappa],
                "certified": bool(gains.certified),
                "cert_margin": float(gains.cert_margin),
                "method": gains.method,
            })
    return report


class Simulation:
    """Owns all mutable run state; single-threaded, one step per call."""

    def __init__(self, spec: ScenarioSpec):
        problems = spec.validate()
        if problems:
            raise ValidationError(problems)
        self.spec = spec
        self.dt = spec.dt
        self.nodes = spec.topology.node_ids
        self.n_nodes = len(self.nodes)
        self.params: Dict[str, NodeParams] = dict(spec.node_params)
        self.tripped: Dict[str, bool] = {n: False for n in self.nodes}
        self.dvpp_nodes = [n for n in self.nodes
                           if self.params[n].kind is NodeKind.DVPP]

        exo = spec.estimator.exo_model()
        self._exo = exo
        self.kappa = np.array(spec.estimator.kappa, dtype=float)
        self.est_models: Dict[str, AugmentedModel] = {}
        self.states: Dict[str, NodeState] = {}
        for n in self.nodes:
            st = NodeState()
            if self.params[n].kind is NodeKind.DVPP:
                st.est_state = np.zeros(exo.order + 1)
                self.est_models[n] = build_augmented(
                    exo, self.params[n].H * spec.estimator.h_scale)
            self.states[n] = st

        self.cert_report = certification_report(spec)
        uncertified = [c for c in self.cert_report if not c["certified"]]
        if uncertified:
            msg = ", ".join(f"{c['node']} (H={c['H']}, margin={c['cert_margin']:.3g})"
                            for c in uncertified)
            if spec.estimator.allow_uncertified:
                log.warning("observer gain not certified for: %s", msg)
            else:
                raise ValidationError([f"observer gain not certified for: {msg}"])

        self.fcr_params = {
            n: FcrParams(fcr_pmax=self.params[n].fcr_pmax,
                         omega_n=spec.control.omega_n,
                         literal_branch=spec.control.fcr_literal_branch)
            for n in self.dvpp_nodes
        }

        # static index structures
        self._node_index = {n: k for k, n in enumerate(self.nodes)}
        self._edges = [(i, j, x) for (i, j), x in spec.topology.electrical_edges.items()]
        self._comm = {
            n: [(m, w) for (m, w) in spec.topology.comm_neighbors(n)]
            for n in self.dvpp_nodes
        }
        self.dapi = DapiState.create(self.dvpp_nodes, spec.topology.comm_delay, spec.dt)

        # unmeasured-power first-order lag per DVPP node
        self.p_unmeasured = {n: 0.0 for n in self.dvpp_nodes}
        self._pq_target = {n: 0.0 for n in self.dvpp_nodes}
        self._pq_tau = {n: 0.2 for n in self.dvpp_nodes}

        self._events = sorted(spec.events, key=lambda e: e.time)
        self._event_cursor = 0

        self._prbs: Dict[str, PrbsGenerator] = {}
        self._bmr: Dict[str, BmrGenerator] = {}
        for n in spec.stochastic.nodes:
            if spec.stochastic.prbs is not None:
                self._prbs[n] = PrbsGenerator(
                    spec.stochastic.prbs,
                    RandomStream(substream_seed(spec.seed, n, "load")))
            if spec.stochastic.bmr is not None:
                self._bmr[n] = BmrGenerator(
                    spec.stochastic.bmr,
                    RandomStream(substream_seed(spec.seed, n, "res")))

        self.step_index = 0

    # -- event handling ----------------------------------------------------

    def _apply_events(self, t: float) -> None:
        while (self._event_cursor < len(self._events)
               and self._events[self._event_cursor].time <= t + 1e-9):
            ev = self._events[self._event_cursor]
            self._event_cursor += 1
            if isinstance(ev, UnmeasuredPowerStep):
                self._pq_target[ev.node] = ev.target
                self._pq_tau[ev.node] = ev.tau
            elif isinstance(ev, SgTrip):
                self.tripped[ev.node] = True
                self.params[ev.node] = replace(self.params[ev.node], H=ev.post_h)
            elif isinstance(ev, InertiaSwitch):
                old = self.params[ev.node]
                if old.H == ev.new_h:
                    continue  # no-op by contract
                self.params[ev.node] = replace(old, H=ev.new_h)
                if old.kind is NodeKind.DVPP:
                    # the observer knows the node's own inertia
                    self.est_models[ev.node] = build_augmented(
                        self._exo, ev.new_h * self.spec.estimator.h_scale)

    # -- main loop ----------------------------------------------------------

    def run(self) -> SimulationTrace:
        spec = self.spec
        dt = self.dt
        n_steps = int(round(spec.horizon / dt))
        n_records = n_steps + 1
        t_axis = np.arange(n_records) * dt
        arrays = {sig: np.zeros((n_records, self.n_nodes)) for sig in TRACE_SIGNALS}

        nodes = self.nodes
        idx = self._node_index
        states = self.states
        dvpp = self.dvpp_nodes

        for n in range(n_records):
            t = n * dt
            # 1. events
            self._apply_events(t)
            # 2. stochastic signals
            p_load = {m: (self._prbs[m].sample() if m in self._prbs else 0.0)
                      for m in nodes}
            p_res = {m: (self._bmr[m].sample() if m in self._bmr else 0.0)
                     for m in nodes}
            # 3. tie-line injections
            tie = {m: 0.0 for m in nodes}
            for i, j, x in self._edges:
                f = tie_line_flow(states[i].theta, states[j].theta, x)
                tie[i] += f
                tie[j] -= f
            # 4. FCR responses
            p_fcr = {m: 0.0 for m in nodes}
            for m in dvpp:
                p_fcr[m] = fcr_response(states[m].omega, self.fcr_params[m])
            # 5. observer updates (committed in phase 8)
            p_hat = {m: 0.0 for m in nodes}
            est_next = {}
            for m in dvpp:
                st = states[m]
                model = self.est_models[m]
                f_meas = -p_load[m] + p_res[m] - p_fcr[m] - tie[m]
                p_hat[m] = power_estimate(st.est_state, model)
                est_next[m] = estimator_step(
                    st.est_state, st.omega, st.bess_power, f_meas,
                    model, self.kappa, dt)
            # 6. control
            mode = spec.control.dapi_feedback
            mismatch = {m: 0.0 for m in nodes}
            u_star = {m: 0.0 for m in nodes}
            drive = {}
            for m in dvpp:
                mismatch[m] = dapi_mismatch(p_load[m], p_hat[m], p_res[m],
                                            states[m].bess_power)
                if mode == "literal":
                    drive[m] = mismatch[m]
                elif mode == "net_imbalance":
                    drive[m] = -(mismatch[m] - tie[m])
                else:  # deficit
                    drive[m] = -mismatch[m]
                u_star[m] = final_setpoint(states[m].dapi_integral, p_load[m],
                                           p_hat[m], p_res[m])
            # 7. derivatives on current state
            deriv = {}
            for m in nodes:
                st = states[m]
                prm = self.params[m]
                if prm.kind is NodeKind.DVPP:
                    inp = DvppInputs(p_load=p_load[m],
                                     p_unmeasured=self.p_unmeasured[m],
                                     p_renewable=p_res[m],
                                     bess_setpoint=u_star[m],
                                     tie_injection=tie[m])
                    dth, dom, dum = dvpp_derivatives(st, inp, prm, self.fcr_params[m])
                    neighbors = [(self.dapi.delayed(o, states[o].dapi_integral),
                                  self.params[o].beta, w)
                                 for o, w in self._comm[m]]
                    dud = dapi_derivative(m, drive[m], st.dapi_integral,
                                          neighbors, prm)
                    dpq = unmeasured_power_dynamics(self.p_unmeasured[m],
                                                    self._pq_target[m],
                                                    self._pq_tau[m])
                    deriv[m] = (dth, dom, dum, dud, dpq)
                else:
                    dth, dom, dpm = sg_derivatives(st, p_load[m], tie[m], prm,
                                                   self.tripped[m])
                    deriv[m] = (dth, dom, dpm)

            # record the row for time t (pre-update state + its algebraic signals)
            for m in nodes:
                k = idx[m]
                st = states[m]
                arrays["theta"][n, k] = st.theta
                arrays["omega"][n, k] = st.omega
                arrays["bess_power"][n, k] = st.bess_power
                arrays["dapi_integral"][n, k] = st.dapi_integral
                arrays["p_mech"][n, k] = st.p_mech
                arrays["p_load"][n, k] = p_load[m]
                arrays["p_renewable"][n, k] = p_res[m]
                arrays["p_fcr"][n, k] = p_fcr[m]
                arrays["tie_flow"][n, k] = tie[m]
                arrays["inertia"][n, k] = self.params[m].H
                arrays["p_unmeasured"][n, k] = self.p_unmeasured.get(m, 0.0)
                arrays["p_unmeasured_est"][n, k] = p_hat[m]
                arrays["omega_est"][n, k] = (states[m].est_state[0]
                                             if m in self.est_models else 0.0)
                arrays["bess_setpoint"][n, k] = u_star[m]
                arrays["dapi_mismatch"][n, k] = mismatch[m]

            if n == n_steps:
                break

            # 8. simultaneous Euler commit
            ud_now = {m: states[m].dapi_integral for m in dvpp}
            check = 0.0
            for m in nodes:
                st = states[m]
                prm = self.params[m]
                if prm.kind is NodeKind.DVPP:
                    dth, dom, dum, dud, dpq = deriv[m]
                    st.theta += dt * dth
                    st.omega += dt * dom
                    um = st.bess_power + dt * dum
                    if um > prm.bess_max:
                        um = prm.bess_max
                    elif um < prm.bess_min:
                        um = prm.bess_min
                    st.bess_power = um
                    st.dapi_integral += dt * dud
                    st.est_state = est_next[m]
                    self.p_unmeasured[m] += dt * dpq
                    check += (st.theta + st.omega + um + st.dapi_integral
                              + float(est_next[m][0]) + self.p_unmeasured[m])
                else:
                    dth, dom, dpm = deriv[m]
                    st.theta += dt * dth
                    st.omega += dt * dom
                    st.p_mech += dt * dpm
                    check += st.theta + st.omega + st.p_mech
            if not math.isfinite(check):
                raise self._diagnose_fault(n, t)
            # 9. delay buffers receive the pre-update integrator values
            for m in dvpp:
                self.dapi.push(m, ud_now[m])
            self.step_index = n + 1

        header = {
            "scenario": spec.name,
            "package_version": _pkg_version,
            "seed": spec.seed,
            "rng_algorithm": RNG_ALGORITHM_ID,
            "dt": dt,
            "horizon": spec.horizon,
            "n_records": n_records,
            "node_ids": list(nodes),
            "dapi_feedback": spec.control.dapi_feedback,
            "certification": self.cert_report,
            "signals": list(TRACE_SIGNALS),
        }
        # deferred import: the config layer builds on this module
        from .config import config_hash, scenario_to_dict
        header["config"] = scenario_to_dict(spec)
        header["config_hash"] = config_hash(spec)
        return SimulationTrace(t=t_axis, node_ids=tuple(nodes),
                               signals=arrays, header=header)

    def _diagnose_fault(self, n: int, t: float) -> NumericFault:
        for m in self.nodes:
            st = self.states[m]
            pairs = [("theta", st.theta), ("omega", st.omega),
                     ("bess_power", st.bess_power),
                     ("dapi_integral", st.dapi_integral), ("p_mech", st.p_mech)]
            if st.est_state is not None:
                pairs.extend((f"est_state[{k}]", float(v))
                             for k, v in enumerate(st.est_state))
            for name, value in pairs:
                if not math.isfinite(value):
                    return NumericFault(n, t, f"{name}@{m}")
        return NumericFault(n, t, "state")


def run(spec: ScenarioSpec) -> SimulationTrace:
    """Run a scenario to completion and return its trace. Deterministic for a
    fixed spec and seed."""
    return Simulation(spec).run()


@dataclass
class Metrics:
    """Derived quantities: grid-average frequency and rates of change."""

    t: np.ndarray
    mean_omega: np.ndarray          # per record
    rocof: np.ndarray               # (n_records - 1, n_nodes), forward difference
    rocof_mean: np.ndarray          # forward difference of the mean frequency
    node_ids: Tuple[str, ...]

    def rms_rocof_mean(self, t0: float, t1: float) -> float:
        """RMS of the mean-frequency RoCoF over the window [t0, t1)."""
        tt = self.t[:-1]
        mask = (tt >= t0) & (tt < t1)
        if not np.any(mask):
            raise ParameterError(f"empty RoCoF window [{t0}, {t1})")
        return float(np.sqrt(np.mean(self.rocof_mean[mask] ** 2)))


def derived_metrics(trace: SimulationTrace, inertia_weighted: bool = False) -> Metrics:
    """Mean grid frequency (unweighted by default) and per-node / mean RoCoF
    via forward differences of the recorded frequency."""
    if trace.n_records == 0:
        raise ParameterError("empty trace")
    omega = trace.signals["omega"]
    if inertia_weighted:
        h = trace.signals["inertia"]
        mean_omega = np.sum(omega * h, axis=1) / np.sum(h, axis=1)
    else:
        mean_omega = np.mean(omega, axis=1)
    if trace.n_records > 1:
        dt_grid = np.diff(trace.t)[:, None]
        rocof = np.diff(omega, axis=0) / dt_grid
        rocof_mean = np.diff(mean_omega) / np.diff(trace.t)
    else:
        rocof = np.zeros((0, omega.shape[1]))
        rocof_mean = np.zeros(0)
    return Metrics(t=trace.t, mean_omega=mean_omega, rocof=rocof,
                   rocof_mean=rocof_mean, node_ids=trace.node_ids)


def settling_time(trace: SimulationTrace, signal: str, node: str,
                  tol: float) -> Optional[float]:
    """Earliest time after which |signal| stays below tol, None if it never
    settles."""
    series = np.abs(trace.series(signal, node))
    above = np.nonzero(series >= tol)[0]
    if len(above) == 0:
        return float(trace.t[0])
    if above[-1] + 1 >= len(series):
        return None
    return float(trace.t[above[-1] + 1])


def summary_dict(trace: SimulationTrace, rocof_window: Optional[Tuple[float, float]] = None,
                 settle_tol: float = 1e-4) -> Dict:
    """Human-readable run summary: final per-node values, settling times and
    the RMS RoCoF of the mean frequency."""
    metrics = derived_metrics(trace)
    if rocof_window is None:
        rocof_window = (float(trace.t[0]), float(trace.t[-1]) + 1e-12)
    final = {}
    for node in trace.node_ids:
        final[node] = {
            "omega": trace.final("omega", node),
            "bess_power": trace.final("bess_power", node),
            "dapi_integral": trace.final("dapi_integral", node),
            "tie_flow": trace.final("tie_flow", node),
            "p_unmeasured": trace.final("p_unmeasured", node),
            "p_unmeasured_est": trace.final("p_unmeasured_est", node),
            "settling_time_omega": settling_time(trace, "omega", node, settle_tol),
        }
    return {
        "scenario": trace.header.get("scenario"),
        "final": final,
        "mean_omega_final": float(metrics.mean_omega[-1]),
        "rms_rocof_mean": (metrics.rms_rocof_mean(*rocof_window)
                           if trace.n_records > 1 else 0.0),
        "rocof_window": list(rocof_window),
        "settle_tol": settle_tol,
    }
