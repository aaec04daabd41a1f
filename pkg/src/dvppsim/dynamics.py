"""Continuous-time derivatives for the two node types.

DVPP nodes follow a swing equation driven by the net power imbalance
(load, unmeasured injection, renewables, FCR response, battery power, tie
flows); the battery tracks its setpoint through a first-order lag with
hold-at-limit anti-windup. SG nodes follow a swing equation with inverter
droop plus a first-order turbine-governor.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NodeKindError, ParameterError
from .grid import NodeKind, NodeParams, NodeState

# Default edge of the proportional FCR-N band, p.u.
OMEGA_N_DEFAULT = 0.2 * math.pi / 50.0


@dataclass(frozen=True)
class DvppInputs:
    """Algebraic inputs to one DVPP node at a given step (all p.u.)."""

    p_load: float = 0.0         # electrical load
    p_unmeasured: float = 0.0   # unmeasured active power injection
    p_renewable: float = 0.0    # renewable generation incl. non-BESS storage
    bess_setpoint: float = 0.0  # commanded battery consumption u*
    tie_injection: float = 0.0  # net power flowing out over tie-lines


@dataclass(frozen=True)
class FcrParams:
    """Proportional frequency-containment response with capacity saturation.

    Slope k_n = fcr_pmax / omega_n so that the response reaches the full
    contracted capacity exactly at the band edge. Beyond the band the default
    is a hard clamp at +/- fcr_pmax; `literal_branch` switches to the
    discontinuous fcr_pmax * omega form for fidelity experiments.
    """

    fcr_pmax: float
    omega_n: float = OMEGA_N_DEFAULT
    k_n: float = None  # filled in __post_init__ when not given
    literal_branch: bool = False

    def __post_init__(self):
        if not math.isfinite(self.omega_n) or self.omega_n <= 0:
            raise ParameterError(f"omega_n must be positive, got {self.omega_n}")
        if not math.isfinite(self.fcr_pmax) or self.fcr_pmax < 0:
            raise ParameterError(f"fcr_pmax must be nonnegative, got {self.fcr_pmax}")
        if self.k_n is None:
            object.__setattr__(self, "k_n", self.fcr_pmax / self.omega_n)
        elif abs(self.k_n * self.omega_n - self.fcr_pmax) > 1e-12 * max(1.0, self.fcr_pmax):
            raise ParameterError("k_n * omega_n must equal fcr_pmax")


def fcr_response(omega: float, params: FcrParams) -> float:
    """FCR-N active power response to a frequency deviation (odd in omega,
    magnitude never above the contracted capacity in the default branch)."""
    if not math.isfinite(omega):
        raise ParameterError(f"omega must be finite, got {omega!r}")
    if abs(omega) <= params.omega_n:
        return params.k_n * omega
    if params.literal_branch:
        return params.fcr_pmax * omega
    return math.copysign(params.fcr_pmax, omega)


def bess_derivative(u_m: float, u_star: float, params: NodeParams) -> float:
    """Battery power slew (u* - u_m)/tau, held at zero when the battery sits
    at a limit and the drive points further outside."""
    if params.kind is not NodeKind.DVPP:
        raise NodeKindError("bess_derivative applies to DVPP nodes only")
    d = (u_star - u_m) / params.bess_tau
    if (u_m >= params.bess_max and d > 0) or (u_m <= params.bess_min and d < 0):
        return 0.0
    return d


def dvpp_derivatives(state: NodeState, inputs: DvppInputs, params: NodeParams,
                     fcr: FcrParams):
    """Swing + battery derivatives of a DVPP node.

    Returns (dtheta, domega, du_m). The net imbalance is
    -p_load + p_unmeasured + p_renewable - fcr_response(omega) - u_m - ties,
    and accelerates frequency through 1/(2H).
    """
    if params.kind is not NodeKind.DVPP:
        raise NodeKindError("dvpp_derivatives applies to DVPP nodes only")
    p_fcr = fcr_response(state.omega, fcr)
    imbalance = (-inputs.p_load + inputs.p_unmeasured + inputs.p_renewable
                 - p_fcr - state.bess_power - inputs.tie_injection)
    dtheta = state.omega
    domega = imbalance / (2.0 * params.H)
    du_m = bess_derivative(state.bess_power, inputs.bess_setpoint, params)
    return dtheta, domega, du_m


def sg_derivatives(state: NodeState, p_load: float, tie_injection: float,
                   params: NodeParams, tripped: bool = False):
    """Swing + governor derivatives of an SG node.

    Returns (dtheta, domega, dp_mech). When tripped the governor reference is
    removed so mechanical power relaxes to zero through T_g, while the
    inverter droop term stays active; the inertia reduction that accompanies
    a trip is an engine-level parameter change.
    """
    if params.kind is not NodeKind.SG:
        raise NodeKindError("sg_derivatives applies to SG nodes only")
    dtheta = state.omega
    domega = (state.p_mech - p_load - tie_injection
              - state.omega / params.R_ibr) / (2.0 * params.H)
    if tripped:
        dp_mech = -state.p_mech / params.T_g
    else:
        dp_mech = (-state.omega / params.R_sg - state.p_mech) / params.T_g
    return dtheta, domega, dp_mech
