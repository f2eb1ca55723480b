"""Seeded Rayleigh fading channels with imperfect transmitter-side estimates.

The true channel of every user splits into an estimate and an error with
per-entry variances 1 - sigma2 and sigma2; the split holds bit-exactly on
every draw.  Streams are counter-based (Philox keyed by (seed, stream_id)),
so distinct ids give independent sequences without coordination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Tuple

import numpy as np

from .results import RateEstimate

__all__ = [
    "SystemConfig",
    "ChannelDraw",
    "RngStream",
    "draw_channel",
    "draw_channel_batch",
    "per_user_snr",
    "min_norm_statistic",
    "exact_min_mean",
    "squared_row_norms",
    "scalars_per_draw",
    "batch_counts",
]

PLACEMENTS = ("centralized", "decentralized")

# recursion guard for exact_min_mean; beyond this the sum has too many terms
MAX_EXACT_MIN_TERMS = 200

# target scalar draws per batch, shared by every estimator so that paired-seed
# runs of different modules consume the stream identically
_BATCH_TARGET = 4_000_000


@dataclass(frozen=True)
class SystemConfig:
    """Scenario parameters; power is linear SNR with unit noise."""

    num_users: int
    num_tx_antennas: int
    total_power: float
    num_subchannels: int = 1
    normalized_cache: float = 0.0
    csit_error_var: float = 0.0
    placement: str = "decentralized"

    def __post_init__(self) -> None:
        if self.num_users < 1:
            raise ValueError("num_users must be >= 1")
        if self.num_tx_antennas < 1:
            raise ValueError("num_tx_antennas must be >= 1")
        if self.num_subchannels < 1:
            raise ValueError("num_subchannels must be >= 1")
        if self.total_power < 0.0:
            raise ValueError("total_power must be nonnegative")
        if not 0.0 <= self.normalized_cache <= 1.0:
            raise ValueError("normalized_cache must be in [0, 1]")
        if not 0.0 <= self.csit_error_var <= 1.0:
            raise ValueError("csit_error_var must be in [0, 1]")
        if self.placement not in PLACEMENTS:
            raise ValueError(f"placement must be one of {PLACEMENTS}")


@dataclass(frozen=True)
class RngStream:
    """Counter-based splittable stream identity."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def derive(self, index: int) -> "RngStream":
        """Deterministic disjoint substream (e.g. one per grid point)."""
        return RngStream(self.seed, self.stream_id * 1_000_003 + index + 1)


@dataclass(frozen=True)
class ChannelDraw:
    """One realization; arrays have shape (L, K, nt)."""

    true_h: np.ndarray
    est_h: np.ndarray
    err_h: np.ndarray


def _complex_normal(gen: np.random.Generator, shape: tuple, var: float) -> np.ndarray:
    parts = gen.standard_normal(size=shape + (2,))
    scale = math.sqrt(var / 2.0)
    return (parts[..., 0] + 1j * parts[..., 1]) * scale


def draw_channel_batch(
    cfg: SystemConfig, gen: np.random.Generator, n: int
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """n independent realizations: (true, est, err), each (n, L, K, nt).

    The degenerate variances skip the redundant normal draws, so the stream
    consumption is a deterministic function of (cfg, n).
    """
    shape = (n, cfg.num_subchannels, cfg.num_users, cfg.num_tx_antennas)
    s2 = cfg.csit_error_var
    if s2 == 0.0:
        est = _complex_normal(gen, shape, 1.0)
        err = np.zeros(shape, dtype=np.complex128)
        return est, est, err
    if s2 == 1.0:
        err = _complex_normal(gen, shape, 1.0)
        est = np.zeros(shape, dtype=np.complex128)
        return err, est, err
    est = _complex_normal(gen, shape, 1.0 - s2)
    err = _complex_normal(gen, shape, s2)
    return est + err, est, err


def draw_channel(cfg: SystemConfig, rng: RngStream) -> ChannelDraw:
    """Single seeded realization with the estimate/error split applied."""
    true, est, err = draw_channel_batch(cfg, rng.generator(), 1)
    return ChannelDraw(true_h=true[0], est_h=est[0], err_h=err[0])


def squared_row_norms(h: np.ndarray) -> np.ndarray:
    """Sum of |entry|^2 along the last (antenna) axis."""
    return (h.real * h.real + h.imag * h.imag).sum(axis=-1)


def per_user_snr(cfg: SystemConfig, draw: ChannelDraw, l: int = 1) -> np.ndarray:
    """(P/nt) * ||H_k||^2 for every user on sub-channel l (1-based)."""
    if not 1 <= l <= cfg.num_subchannels:
        raise IndexError(f"sub-channel index {l} out of range [1, {cfg.num_subchannels}]")
    norms = squared_row_norms(draw.true_h[l - 1])
    return (cfg.total_power / cfg.num_tx_antennas) * norms


def scalars_per_draw(cfg: SystemConfig) -> int:
    """Normal scalars one realization consumes; fixes the batch partition."""
    base = 2 * cfg.num_subchannels * cfg.num_users * cfg.num_tx_antennas
    return base if cfg.csit_error_var in (0.0, 1.0) else 2 * base


def batch_counts(samples: int, scalars_per_sample: int) -> Iterator[int]:
    """Deterministic batch partition targeting ~4e6 scalars per batch."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    per_batch = max(1, _BATCH_TARGET // max(scalars_per_sample, 1))
    left = samples
    while left > 0:
        n = min(per_batch, left)
        yield n
        left -= n


def min_norm_statistic(
    nt: int,
    num_users: int,
    rng: RngStream,
    samples: int,
    dtype=np.float64,
) -> RateEstimate:
    """Monte-Carlo estimate of E[min_k ||H_k||^2 / nt].

    ||H_k||^2 / nt is a sum of nt unit-mean exponentials scaled by 1/nt, so
    the minimum is sampled directly from exponentials; float32 halves the
    cost of the very large (K, samples) grids without hurting a mean
    estimate at MC precision.
    """
    if nt < 1 or num_users < 1:
        raise ValueError("nt and num_users must be >= 1")
    gen = rng.generator()
    mins = np.empty(samples, dtype=np.float64)
    pos = 0
    for n in batch_counts(samples, num_users * nt):
        # leading antenna axis: reducing over it is contiguous and cheap
        draws = gen.standard_exponential((nt, n, num_users), dtype=dtype)
        batch = draws.sum(axis=0).min(axis=1) / nt
        mins[pos : pos + n] = batch
        pos += n
    return RateEstimate.from_values(mins, seed=rng.seed)


def exact_min_mean(nt: int, num_users: int) -> float:
    """Exact E[min_k ||H_k||^2 / nt] via the power-series expansion.

    The survival function of the minimum is exp(-K*y) * f(y)^K with
    f(y) = sum_{j<nt} y^j / j! and y = nt*x; integrating termwise gives
    (1/nt) * sum_i c_i * i! * K^(-i-1) where c_i are the series coefficients
    of f^K, computed with the power-of-a-series recurrence
    c_i = (1/i) * sum_j ((K+1) j - i) / j! * c_{i-j}.  Exact rationals keep
    the alternating-sign cancellation lossless.
    """
    K = num_users
    if nt < 1 or K < 1:
        raise ValueError("nt and num_users must be >= 1")
    n_terms = K * (nt - 1)
    if n_terms > MAX_EXACT_MIN_TERMS:
        raise ValueError(
            f"K*(nt-1) = {n_terms} exceeds the stability guard {MAX_EXACT_MIN_TERMS}"
        )
    coeffs = [Fraction(0)] * (n_terms + 1)
    coeffs[0] = Fraction(1)
    for i in range(1, n_terms + 1):
        acc = Fraction(0)
        for j in range(1, min(i, nt - 1) + 1):
            acc += Fraction((K + 1) * j - i, math.factorial(j)) * coeffs[i - j]
        coeffs[i] = acc / i
    total = sum(
        c * Fraction(math.factorial(i)) / Fraction(K) ** (i + 1)
        for i, c in enumerate(coeffs)
    )
    return float(total) / nt
