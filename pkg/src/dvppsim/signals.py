"""Seeded stochastic signal generators: PRBS load variation and a Brownian
walk with soft reset for renewable fluctuation.

Randomness convention (recorded in trace headers as RNG_ALGORITHM_ID):

* Base generator: splitmix64. Output i of a stream seeded with s is
  mix64(s + (i+1) * 0x9E3779B97F4A7C15 mod 2^64) where mix64 is the standard
  xor-shift-multiply finalizer (constants 0xBF58476D1CE4E5B9 and
  0x94D049BB133111EB, shifts 30/27/31). Counter-based, so scalar and block
  generation produce bit-identical streams.
* Uniforms: the top 53 bits of an output, scaled by 2^-53 (values in [0, 1)).
* Standard normals: Box-Muller, cosine branch only. Each normal consumes two
  consecutive uniforms u1, u2 and returns sqrt(-2 ln(1 - u1)) * cos(2 pi u2).
* Sub-streams: derived from (master seed, node id, signal tag) by hashing the
  text labels with FNV-1a 64 and folding them through mix64, so every node
  and signal gets an independent reproducible stream.

All of this is plain integer/float arithmetic with no hidden state, so traces
reproduce bit-for-bit across platforms and are easy to port.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .errors import ParameterError

RNG_ALGORITHM_ID = "splitmix64+boxmuller-cos:v1"

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_TWO_PI = 2.0 * math.pi
_INV_2_53 = 2.0 ** -53


def mix64(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


def fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h = ((h ^ b) * 0x100000001B3) & _MASK64
    return h


def substream_seed(master_seed: int, *tags: str) -> int:
    """Derive an independent stream seed from a master seed and text tags."""
    s = mix64(master_seed & _MASK64)
    for tag in tags:
        s = mix64(s ^ fnv1a64(tag.encode("utf-8")))
    return s


class RandomStream:
    """Counter-based splitmix64 stream with scalar and block access.

    Block methods advance the same counter as their scalar counterparts, so
    interleaving them (or regenerating a run in one block) yields identical
    sequences.
    """

    def __init__(self, seed: int):
        self.seed = seed & _MASK64
        self.counter = 0

    def next_u64(self) -> int:
        self.counter += 1
        return mix64((self.seed + self.counter * _GAMMA) & _MASK64)

    def uniform(self) -> float:
        """Uniform draw in [0, 1)."""
        return (self.next_u64() >> 11) * _INV_2_53

    def normal(self) -> float:
        """Standard normal draw (Box-Muller cosine branch, two uniforms)."""
        u1 = self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(1.0 - u1)) * math.cos(_TWO_PI * u2)

    def u64_block(self, n: int) -> np.ndarray:
        idx = np.arange(self.counter + 1, self.counter + n + 1, dtype=np.uint64)
        self.counter += n
        z = (np.uint64(self.seed) + idx * np.uint64(_GAMMA))
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
        return z ^ (z >> np.uint64(31))

    def uniform_block(self, n: int) -> np.ndarray:
        return (self.u64_block(n) >> np.uint64(11)).astype(np.float64) * _INV_2_53

    def normal_block(self, n: int) -> np.ndarray:
        u = self.uniform_block(2 * n)
        u1, u2 = u[0::2], u[1::2]
        return np.sqrt(-2.0 * np.log(1.0 - u1)) * np.cos(_TWO_PI * u2)


@dataclass(frozen=True)
class PrbsConfig:
    """Sum of scaled pseudo-random binary sequences.

    Component k holds +/- a_k with a_1 = magnitude and a_k = magnitude/(2(k-1))
    for k >= 2, and flips sign each step with probability k / switch_scale.
    """

    n_components: int = 8
    magnitude: float = 0.002     # p.u.
    switch_scale: float = 1e4    # larger -> rarer switching

    def __post_init__(self):
        if self.n_components < 1:
            raise ParameterError("n_components must be >= 1")
        if not (math.isfinite(self.magnitude) and self.magnitude > 0):
            raise ParameterError("magnitude must be positive")
        if not (math.isfinite(self.switch_scale) and self.switch_scale > 0):
            raise ParameterError("switch_scale must be positive")
        for p in self.flip_probs():
            if not (0.0 < p < 1.0):
                raise ParameterError(f"flip probability {p} outside (0, 1)")

    def amplitudes(self) -> List[float]:
        return [self.magnitude if k == 1 else self.magnitude / (2.0 * (k - 1))
                for k in range(1, self.n_components + 1)]

    def flip_probs(self) -> List[float]:
        return [k / self.switch_scale for k in range(1, self.n_components + 1)]


def prbs_initial(config: PrbsConfig) -> Tuple[List[int], float]:
    """Initial component signs (all +1) and the corresponding output sum."""
    signs = [1] * config.n_components
    value = 0.0
    for a in config.amplitudes():
        value += a
    return signs, value


def prbs_step(signs: Sequence[int], config: PrbsConfig, rng: RandomStream):
    """Advance every component one step (flip with its probability, ascending
    component order) and return (new_signs, output sum)."""
    amps = config.amplitudes()
    probs = config.flip_probs()
    new_signs = list(signs)
    value = 0.0
    for k in range(config.n_components):
        if rng.uniform() < probs[k]:
            new_signs[k] = -new_signs[k]
        value += new_signs[k] * amps[k]
    return new_signs, value


class PrbsGenerator:
    """Stateful per-step sampler. The first sample is the initial sum of
    amplitudes (no randomness consumed); later samples advance the sequence."""

    def __init__(self, config: PrbsConfig, rng: RandomStream):
        self.config = config
        self.rng = rng
        self.signs, self._initial = prbs_initial(config)
        self._started = False

    def sample(self) -> float:
        if not self._started:
            self._started = True
            return self._initial
        self.signs, value = prbs_step(self.signs, self.config, self.rng)
        return value


def prbs_series(config: PrbsConfig, rng: RandomStream, n_steps: int) -> np.ndarray:
    """Vectorized equivalent of n_steps PrbsGenerator samples (bit-identical)."""
    amps = config.amplitudes()
    probs = config.flip_probs()
    m = config.n_components
    out = np.empty(n_steps)
    if n_steps == 0:
        return out
    out[0] = prbs_initial(config)[1]
    if n_steps == 1:
        return out
    u = rng.uniform_block((n_steps - 1) * m).reshape(n_steps - 1, m)
    acc = np.zeros(n_steps - 1)
    for k in range(m):
        flips = np.where(u[:, k] < probs[k], -1, 1)
        signs = np.cumprod(flips)
        acc = acc + signs * amps[k]
    out[1:] = acc
    return out


@dataclass(frozen=True)
class BmrConfig:
    """Brownian walk with a soft reset on the emitted value.

    Each step adds sigma*sqrt(dt)*xi to the walk; whenever the walk magnitude
    exceeds `threshold` the emitted value is scaled by (1 - decay). By default
    the decay affects the output only; with reset_state=True the decayed value
    is written back into the walk, which bounds the excursion.
    """

    sigma: float = 0.005
    threshold: float = 0.02
    decay: float = 0.5
    dt: float = 5e-4
    reset_state: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma >= 0):
            raise ParameterError("sigma must be nonnegative")
        if not (math.isfinite(self.threshold) and self.threshold > 0):
            raise ParameterError("threshold must be positive")
        if not (0.0 <= self.decay <= 1.0):
            raise ParameterError("decay must lie in [0, 1]")
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ParameterError("dt must be positive")


def bmr_step(walk_prev: float, config: BmrConfig, rng: RandomStream):
    """One walk step. Returns (next walk state, emitted value)."""
    if not math.isfinite(walk_prev):
        raise ParameterError(f"walk state must be finite, got {walk_prev!r}")
    walk = walk_prev + config.sigma * math.sqrt(config.dt) * rng.normal()
    if abs(walk) > config.threshold:
        out = (1.0 - config.decay) * walk
    else:
        out = walk
    if config.reset_state:
        return out, out
    return walk, out


class BmrGenerator:
    """Stateful per-step sampler; the first sample is the zero initial value
    (no randomness consumed)."""

    def __init__(self, config: BmrConfig, rng: RandomStream):
        self.config = config
        self.rng = rng
        self.walk = 0.0
        self._started = False

    def sample(self) -> float:
        if not self._started:
            self._started = True
            return 0.0
        self.walk, value = bmr_step(self.walk, self.config, self.rng)
        return value


def bmr_series(config: BmrConfig, rng: RandomStream, n_steps: int) -> np.ndarray:
    """Vectorized equivalent of n_steps BmrGenerator samples.

    Bit-identical to the scalar path: without state reset the walk from zero
    is a plain running sum (cumsum reproduces the scalar rounding exactly);
    with reset_state the feedback forces a scalar loop over precomputed
    increments.
    """
    out = np.empty(n_steps)
    if n_steps == 0:
        return out
    out[0] = 0.0
    if n_steps == 1:
        return out
    inc = config.sigma * math.sqrt(config.dt) * rng.normal_block(n_steps - 1)
    if not config.reset_state:
        walk = np.cumsum(inc)
        out[1:] = np.where(np.abs(walk) > config.threshold,
                           (1.0 - config.decay) * walk, walk)
        return out
    w = 0.0
    scale = 1.0 - config.decay
    th = config.threshold
    vals = inc.tolist()
    res = out[1:]
    for n, x in enumerate(vals):
        w = w + x
        if abs(w) > th:
            w = scale * w
        res[n] = w
    return out
