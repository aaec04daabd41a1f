"""Augmented-state disturbance estimator.

The unmeasured active power at a DVPP node is modeled as the output of a
small linear generator (constant by default). Augmenting the node's
frequency state with that generator's state yields a linear system driven
by measured quantities only, for which a Luenberger observer reconstructs
both the local frequency and the unmeasured power. Gains are certified by
checking that the observer error dynamics are Hurwitz, either directly via
eigenvalues or through a Lyapunov-equation solve.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import ParameterError


@dataclass(frozen=True)
class ExoModel:
    """Linear generator of the unmeasured power: zeta' = A zeta, p = C zeta."""

    a_matrix: np.ndarray  # (m, m)
    c_matrix: np.ndarray  # (1, m)

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.a_matrix, dtype=float))
        c = np.atleast_2d(np.asarray(self.c_matrix, dtype=float))
        if a.shape[0] != a.shape[1]:
            raise ParameterError(f"A must be square, got shape {a.shape}")
        if c.shape != (1, a.shape[0]):
            raise ParameterError(f"C must be 1x{a.shape[0]}, got shape {c.shape}")
        if not (np.isfinite(a).all() and np.isfinite(c).all()):
            raise ParameterError("exo-model matrices must be finite")
        object.__setattr__(self, "a_matrix", a)
        object.__setattr__(self, "c_matrix", c)

    @property
    def order(self) -> int:
        return self.a_matrix.shape[0]

    @classmethod
    def constant(cls) -> "ExoModel":
        """First-order model of a constant disturbance (A = 0, C = 1)."""
        return cls(a_matrix=np.zeros((1, 1)), c_matrix=np.ones((1, 1)))


@dataclass(frozen=True)
class AugmentedModel:
    """State-space model over x = [omega; zeta] with theta = 1/(2H):

        A_aug = [[0, theta*C], [0, A]],  B_aug = [theta; 0],  C_out = [1, 0...].
    """

    a_aug: np.ndarray
    b_aug: np.ndarray
    c_out: np.ndarray
    theta: float
    exo: ExoModel


def build_augmented(exo: ExoModel, H: float) -> AugmentedModel:
    """Assemble the augmented model for a node of inertia H (seconds)."""
    if not np.isfinite(H) or H <= 0:
        raise ParameterError(f"H must be positive, got {H}")
    m = exo.order
    theta = 1.0 / (2.0 * H)
    a_aug = np.zeros((m + 1, m + 1))
    a_aug[0, 1:] = theta * exo.c_matrix[0]
    a_aug[1:, 1:] = exo.a_matrix
    b_aug = np.zeros(m + 1)
    b_aug[0] = theta
    c_out = np.zeros(m + 1)
    c_out[0] = 1.0
    return AugmentedModel(a_aug=a_aug, b_aug=b_aug, c_out=c_out, theta=theta, exo=exo)


@dataclass(frozen=True)
class EstimatorGains:
    """Observer gain vector with its stability certification result."""

    kappa: np.ndarray
    certified: bool
    cert_margin: float          # max real part of the error-dynamics eigenvalues
    method: str = "eigenvalues"
    lyapunov_p: Optional[np.ndarray] = None  # certificate matrix when solved


def _closed_loop(model: AugmentedModel, kappa: np.ndarray) -> np.ndarray:
    kappa = np.asarray(kappa, dtype=float).reshape(-1)
    n = model.a_aug.shape[0]
    if kappa.shape != (n,):
        raise ParameterError(f"kappa must have length {n}, got {kappa.shape}")
    return model.a_aug - np.outer(kappa, model.c_out)


def certify_gain(model: AugmentedModel, kappa, method: str = "eigenvalues") -> EstimatorGains:
    """Certify an observer gain: the error dynamics A_aug - kappa*C_out must
    be Hurwitz. `method` is "eigenvalues" (default) or "lyapunov" (solves
    A_cl' P + P A_cl = -I and checks P > 0; P is attached to the result)."""
    kappa = np.asarray(kappa, dtype=float).reshape(-1)
    a_cl = _closed_loop(model, kappa)
    margin = float(np.max(np.linalg.eigvals(a_cl).real))
    if method == "eigenvalues":
        return EstimatorGains(kappa=kappa, certified=margin < 0.0, cert_margin=margin)
    if method == "lyapunov":
        n = a_cl.shape[0]
        try:
            p = scipy.linalg.solve_continuous_lyapunov(a_cl.T, -np.eye(n))
        except np.linalg.LinAlgError:
            return EstimatorGains(kappa=kappa, certified=False, cert_margin=margin,
                                  method=method)
        p = 0.5 * (p + p.T)
        residual = a_cl.T @ p + p @ a_cl + np.eye(n)
        ok = (np.linalg.norm(residual) < 1e-6 * max(1.0, np.linalg.norm(p))
              and bool(np.all(np.linalg.eigvalsh(p) > 0)))
        return EstimatorGains(kappa=kappa, certified=ok, cert_margin=margin,
                              method=method, lyapunov_p=p if ok else None)
    raise ParameterError(f"unknown certification method {method!r}")


def estimator_step(x_hat: np.ndarray, omega_meas: float, u_m: float, f: float,
                   model: AugmentedModel, kappa: np.ndarray, dt: float) -> np.ndarray:
    """One forward-Euler step of the observer.

    f gathers the measured imbalance terms (load, renewables, FCR response,
    tie flows); the unmeasured power is exactly what the observer's internal
    model channel reconstructs, so it is not part of f. Returns the updated
    [omega_est; zeta_est]; the power estimate is C @ zeta_est.
    """
    innovation = omega_meas - x_hat[0]
    dx = model.a_aug @ x_hat + model.b_aug * (f - u_m) + kappa * innovation
    return x_hat + dt * dx


def power_estimate(x_hat: np.ndarray, model: AugmentedModel) -> float:
    """Unmeasured-power estimate carried by the observer state."""
    return float(model.exo.c_matrix[0] @ x_hat[1:])
