"""Network topology, per-node parameters, and tie-line power flow.

The electrical graph carries line reactances, the communication graph the
consensus weights used by the distributed control layer. Both graphs are
undirected and stored with canonical (lower index first) edge keys so the
symmetry invariant is structural rather than checked.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import NodeKindError, ParameterError


class NodeKind(Enum):
    DVPP = "DVPP"
    SG = "SG"


def _check_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise ParameterError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class GridTopology:
    """Static electrical and communication graphs of the multi-node grid.

    electrical_edges maps canonical (i, j) pairs to reactance X_ij (p.u.);
    comm_edges maps canonical pairs to nonnegative consensus weights.
    comm_delay is the communication latency in seconds applied to neighbour
    values read by the distributed controller.
    """

    node_ids: Tuple[str, ...]
    electrical_edges: Mapping[Tuple[str, str], float]
    comm_edges: Mapping[Tuple[str, str], float]
    comm_delay: float = 0.0

    @classmethod
    def build(
        cls,
        node_ids: Sequence[str],
        electrical_edges: Iterable[Tuple[str, str, float]],
        comm_edges: Iterable[Tuple[str, str, float]] = (),
        comm_delay: float = 0.0,
    ) -> "GridTopology":
        ids = tuple(str(n) for n in node_ids)
        if len(set(ids)) != len(ids):
            raise ParameterError("duplicate node ids")
        order = {n: k for k, n in enumerate(ids)}

        def canonical(edges, value_name, positive):
            out = {}
            for i, j, val in edges:
                i, j = str(i), str(j)
                if i not in order or j not in order:
                    raise ParameterError(f"edge ({i},{j}) references undeclared node")
                if i == j:
                    raise ParameterError(f"self-loop on node {i}")
                _check_finite(value_name, val)
                if positive and val <= 0:
                    raise ParameterError(f"{value_name} must be positive, got {val} on ({i},{j})")
                if not positive and val < 0:
                    raise ParameterError(f"{value_name} must be nonnegative, got {val} on ({i},{j})")
                key = (i, j) if order[i] < order[j] else (j, i)
                if key in out:
                    raise ParameterError(f"duplicate edge ({i},{j})")
                out[key] = float(val)
            return out

        _check_finite("comm_delay", comm_delay)
        if comm_delay < 0:
            raise ParameterError(f"comm_delay must be nonnegative, got {comm_delay}")
        return cls(
            node_ids=ids,
            electrical_edges=canonical(electrical_edges, "reactance", positive=True),
            comm_edges=canonical(comm_edges, "comm weight", positive=False),
            comm_delay=float(comm_delay),
        )

    def index(self, node: str) -> int:
        try:
            return self.node_ids.index(node)
        except ValueError:
            raise LookupError(f"unknown node id {node!r}") from None

    def reactance(self, i: str, j: str) -> float:
        key = (i, j) if self.node_ids.index(i) < self.node_ids.index(j) else (j, i)
        try:
            return self.electrical_edges[key]
        except KeyError:
            raise LookupError(f"no electrical edge between {i} and {j}") from None

    def electrical_neighbors(self, node: str):
        """Neighbours of `node` in the electrical graph as (other, X) pairs,
        in canonical edge-storage order."""
        self.index(node)
        out = []
        for (i, j), x in self.electrical_edges.items():
            if i == node:
                out.append((j, x))
            elif j == node:
                out.append((i, x))
        return out

    def comm_neighbors(self, node: str):
        self.index(node)
        out = []
        for (i, j), w in self.comm_edges.items():
            if i == node:
                out.append((j, w))
            elif j == node:
                out.append((i, w))
        return out


@dataclass(frozen=True)
class NodeParams:
    """Static per-node parameters. Fields that do not apply to the node's
    kind are left as None (DVPP nodes have battery/consensus settings, SG
    nodes governor/droop settings)."""

    kind: NodeKind
    H: float  # inertia constant, s
    # DVPP only
    bess_tau: Optional[float] = None    # battery tracking time constant, s
    bess_min: Optional[float] = None    # p.u., < 0
    bess_max: Optional[float] = None    # p.u., > 0
    fcr_pmax: Optional[float] = None    # contracted FCR-N capacity, p.u.
    beta: Optional[float] = None        # consensus sharing factor
    alpha: Optional[float] = None       # consensus integrator gain
    # SG only
    R_ibr: Optional[float] = None       # inverter droop gain
    R_sg: Optional[float] = None        # governor droop gain
    T_g: Optional[float] = None         # turbine-governor time constant, s

    def __post_init__(self):
        _check_finite("H", self.H)
        if self.H <= 0:
            raise ParameterError(f"H must be positive, got {self.H}")
        if self.kind is NodeKind.DVPP:
            for name in ("bess_tau", "bess_min", "bess_max", "fcr_pmax", "beta", "alpha"):
                if getattr(self, name) is None:
                    raise ParameterError(f"DVPP node missing {name}")
            if self.bess_tau <= 0:
                raise ParameterError("bess_tau must be positive")
            if not (self.bess_min < 0 < self.bess_max):
                raise ParameterError(
                    f"battery limits must straddle zero, got [{self.bess_min}, {self.bess_max}]"
                )
            if self.fcr_pmax < 0:
                raise ParameterError("fcr_pmax must be nonnegative")
            if self.beta <= 0 or self.alpha <= 0:
                raise ParameterError("beta and alpha must be positive")
        elif self.kind is NodeKind.SG:
            for name in ("R_ibr", "R_sg", "T_g"):
                if getattr(self, name) is None:
                    raise ParameterError(f"SG node missing {name}")
            if self.R_ibr <= 0 or self.R_sg <= 0:
                raise ParameterError("droop gains must be positive")
            if self.T_g <= 0:
                raise ParameterError("T_g must be positive")
        else:
            raise ParameterError(f"unknown node kind {self.kind!r}")

    @classmethod
    def dvpp(cls, H, bess_tau, bess_limit, fcr_pmax, beta, alpha=1.0):
        """DVPP node with symmetric battery limits +/- bess_limit."""
        return cls(
            kind=NodeKind.DVPP, H=H, bess_tau=bess_tau,
            bess_min=-abs(bess_limit), bess_max=abs(bess_limit),
            fcr_pmax=fcr_pmax, beta=beta, alpha=alpha,
        )

    @classmethod
    def sg(cls, H, R_ibr, R_sg, T_g):
        return cls(kind=NodeKind.SG, H=H, R_ibr=R_ibr, R_sg=R_sg, T_g=T_g)


@dataclass
class NodeState:
    """Dynamic state of one node. Everything starts at zero (the declared
    initial equilibrium); est_state is the observer state [omega_est, zeta_est]
    for DVPP nodes and None for SG nodes."""

    theta: float = 0.0         # voltage phase angle, rad
    omega: float = 0.0         # frequency deviation, p.u.
    bess_power: float = 0.0    # measured battery consumption u_m, p.u.
    dapi_integral: float = 0.0  # distributed-control integrator, p.u.
    p_mech: float = 0.0        # SG mechanical power, p.u.
    est_state: Optional[np.ndarray] = None


def tie_line_flow(theta_i: float, theta_j: float, x_ij: float) -> float:
    """Active power flowing i -> j over a line of reactance x_ij:
    (1/x_ij) * sin(theta_i - theta_j). Antisymmetric in its angle arguments."""
    _check_finite("theta_i", theta_i)
    _check_finite("theta_j", theta_j)
    _check_finite("x_ij", x_ij)
    if x_ij <= 0:
        raise ParameterError(f"reactance must be positive, got {x_ij}")
    return math.sin(theta_i - theta_j) / x_ij


def net_tie_line_injection(node: str, all_theta: Sequence[float], topology: GridTopology) -> float:
    """Total power flowing out of `node` over its electrical edges, given the
    phase vector aligned with topology.node_ids."""
    idx = topology.index(node)
    if len(all_theta) != len(topology.node_ids):
        raise ParameterError(
            f"phase vector has length {len(all_theta)}, expected {len(topology.node_ids)}"
        )
    total = 0.0
    for other, x in topology.electrical_neighbors(node):
        total += tie_line_flow(all_theta[idx], all_theta[topology.index(other)], x)
    return total
