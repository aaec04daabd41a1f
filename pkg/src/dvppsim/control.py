"""Local battery setpoint and the distributed redistribution layer.

The local law commands the battery to absorb the node's own estimated
imbalance. When a battery saturates, the distributed layer shares the
shortfall: each node integrates a mismatch signal together with a weighted
consensus term on the scaled integrators u_delta / beta, exchanged with
communication neighbours under a fixed delay.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Tuple

from .errors import NodeKindError, ParameterError
from .grid import NodeKind, NodeParams


def local_setpoint(p_load: float, p_unmeasured_est: float, p_renewable: float) -> float:
    """Battery consumption that cancels the node's internal imbalance:
    -p_load + p_unmeasured_est + p_renewable."""
    return -p_load + p_unmeasured_est + p_renewable


def dapi_mismatch(p_load: float, p_unmeasured_est: float, p_renewable: float,
                  u_m: float) -> float:
    """Local mismatch between required and measured battery consumption,
    -p_load + p_unmeasured_est + p_renewable - u_m (positive = shortfall)."""
    return -p_load + p_unmeasured_est + p_renewable - u_m


def dapi_derivative(node: str, mismatch: float, u_delta_self: float,
                    delayed_neighbors: Iterable[Tuple[float, float, float]],
                    params: NodeParams) -> float:
    """Integrator rate -alpha * [mismatch + sum_j w_ij (u_i/beta_i - u_j/beta_j)]
    where the neighbour values u_j are the delayed samples.

    delayed_neighbors yields (u_delta_j at t - delay, beta_j, w_ij) triples.
    """
    if params.kind is not NodeKind.DVPP:
        raise NodeKindError(f"node {node!r}: distributed control runs on DVPP nodes only")
    if params.beta is None or params.beta <= 0:
        raise ParameterError(f"node {node!r}: beta must be positive")
    consensus = 0.0
    v_self = u_delta_self / params.beta
    for u_j, beta_j, w_ij in delayed_neighbors:
        if beta_j <= 0:
            raise ParameterError(f"node {node!r}: neighbour beta must be positive")
        consensus += w_ij * (v_self - u_j / beta_j)
    return -params.alpha * (mismatch + consensus)


def final_setpoint(u_delta: float, p_load: float, p_unmeasured_est: float,
                   p_renewable: float) -> float:
    """Battery setpoint with the distributed correction added on top of the
    local law. Saturation is applied by the battery dynamics, not here."""
    return u_delta + local_setpoint(p_load, p_unmeasured_est, p_renewable)


class DelayBuffer:
    """Fixed-length ring buffer: read() returns the sample pushed exactly
    `length` calls ago, zero before warm-up. Call read() before push() within
    a step."""

    def __init__(self, length: int):
        if length < 1:
            raise ParameterError(f"buffer length must be >= 1, got {length}")
        self.length = length
        self._ring = [0.0] * length
        self._idx = 0

    def read(self) -> float:
        return self._ring[self._idx]

    def push(self, value: float) -> None:
        self._ring[self._idx] = value
        self._idx += 1
        if self._idx == self.length:
            self._idx = 0


@dataclass
class DapiState:
    """Delay plumbing of the distributed layer.

    One ring buffer per publishing node (every neighbour reads the same
    delayed sample, since the delay is uniform). The integrator values
    themselves live in the per-node dynamic state; with zero delay reads
    fall through to the live values supplied to `delayed`.
    """

    delay_steps: int
    buffers: Dict[str, DelayBuffer] = field(default_factory=dict)

    @classmethod
    def create(cls, node_ids: Iterable[str], comm_delay: float, dt: float) -> "DapiState":
        if dt <= 0:
            raise ParameterError("dt must be positive")
        steps = int(math.ceil(comm_delay / dt)) if comm_delay > 0 else 0
        buffers = {n: DelayBuffer(steps) for n in node_ids} if steps > 0 else {}
        return cls(delay_steps=steps, buffers=buffers)

    def delayed(self, node: str, live_value: float) -> float:
        if self.delay_steps == 0:
            return live_value
        return self.buffers[node].read()

    def push(self, node: str, value: float) -> None:
        if self.delay_steps > 0:
            self.buffers[node].push(value)
