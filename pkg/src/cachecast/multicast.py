"""Average multicast rate: Monte-Carlo estimators and large-K asymptotics.

Under isotropic signaling the instantaneous multicast rate is the log-rate
of the worst user, averaged over the L sub-channels a codeword spans.  The
asymptotic table is driven by the extreme-value normalizer
a_K = nt * (K / nt!)^(1/nt).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .channel import (
    RngStream,
    SystemConfig,
    batch_counts,
    draw_channel_batch,
    scalars_per_draw,
    squared_row_norms,
)
from .results import RateEstimate

__all__ = [
    "AsymptoticParams",
    "AsymptoticRate",
    "extreme_value_scale",
    "avg_rate_quasistatic",
    "avg_rate_parallel",
    "parallel_rate_bounds",
    "asymptotic_rate",
]


def extreme_value_scale(nt: int, num_users: int) -> float:
    """a_K = nt * (K / nt!)^(1/nt), evaluated in log space."""
    return nt * math.exp((math.log(num_users) - math.lgamma(nt + 1)) / nt)


@dataclass(frozen=True)
class AsymptoticParams:
    a_k: float
    regime: str  # "small_array" | "large_array"
    power_regime: str  # "vanishing" | "constant" | "growing"

    @classmethod
    def classify(cls, cfg: SystemConfig) -> "AsymptoticParams":
        nt, K, P = cfg.num_tx_antennas, cfg.num_users, cfg.total_power
        a_k = extreme_value_scale(nt, K)
        if nt >= math.log(K):
            regime = "large_array"
            # large-array rows split on P alone
            if P < 1.0:
                power = "vanishing"
            elif P > 10.0:
                power = "growing"
            else:
                power = "constant"
        else:
            regime = "small_array"
            ratio = P * K ** (-1.0 / nt)
            if ratio < 1.0:
                power = "vanishing"
            elif ratio > 10.0:
                power = "growing"
            else:
                power = "constant"
        return cls(a_k=a_k, regime=regime, power_regime=power)


@dataclass(frozen=True)
class AsymptoticRate:
    value: float
    regime: str
    power_regime: str
    a_k: float


def _parallel_rate_values(cfg: SystemConfig, gen: np.random.Generator, n: int) -> np.ndarray:
    true, _, _ = draw_channel_batch(cfg, gen, n)
    norms = squared_row_norms(true)  # (n, L, K)
    snr = (cfg.total_power / cfg.num_tx_antennas) * norms
    return np.log1p(snr).mean(axis=1).min(axis=1)


def _collect(cfg: SystemConfig, rng: RngStream, samples: int, fn) -> np.ndarray:
    gen = rng.generator()
    per_sample = scalars_per_draw(cfg)
    out = np.empty(samples, dtype=np.float64)
    pos = 0
    for n in batch_counts(samples, per_sample):
        out[pos : pos + n] = fn(cfg, gen, n)
        pos += n
    return out


def avg_rate_parallel(cfg: SystemConfig, rng: RngStream, samples: int) -> RateEstimate:
    """MC mean of min_k (1/L) sum_l ln(1 + snr_{k,l}) over fresh draws."""
    values = _collect(cfg, rng, samples, _parallel_rate_values)
    return RateEstimate.from_values(values, seed=rng.seed)


def avg_rate_quasistatic(cfg: SystemConfig, rng: RngStream, samples: int) -> RateEstimate:
    """MC mean of ln(1 + (P/nt) min_k ||H_k||^2); quasi-static (L = 1) only."""
    if cfg.num_subchannels != 1:
        raise ValueError("quasi-static estimator requires num_subchannels == 1")
    return avg_rate_parallel(cfg, rng, samples)


def _bound_values(
    cfg: SystemConfig, gen: np.random.Generator, n: int
) -> Tuple[np.ndarray, np.ndarray]:
    true, _, _ = draw_channel_batch(cfg, gen, n)
    # per-antenna SNR terms P * |h_{j,k,l}|^2, flattened over (l, j)
    per_antenna = cfg.total_power * (true.real**2 + true.imag**2)  # (n, L, K, nt)
    avg_snr = per_antenna.mean(axis=(1, 3))  # (n, K)
    lower = np.log1p(per_antenna).mean(axis=(1, 3)).min(axis=1)
    upper = np.log1p(avg_snr.min(axis=1))
    return lower, upper


def parallel_rate_bounds(
    cfg: SystemConfig, rng: RngStream, samples: int
) -> Tuple[RateEstimate, RateEstimate]:
    """Jensen-style (lower, upper) bounds on the parallel multicast rate.

    Computed from the same draws, so paired-seed comparisons against
    avg_rate_parallel are sandwich-tight up to MC error.
    """
    gen = rng.generator()
    per_sample = scalars_per_draw(cfg)
    lows = np.empty(samples, dtype=np.float64)
    ups = np.empty(samples, dtype=np.float64)
    pos = 0
    for n in batch_counts(samples, per_sample):
        lo, up = _bound_values(cfg, gen, n)
        lows[pos : pos + n] = lo
        ups[pos : pos + n] = up
        pos += n
    return (
        RateEstimate.from_values(lows, seed=rng.seed),
        RateEstimate.from_values(ups, seed=rng.seed),
    )


def asymptotic_rate(cfg: SystemConfig) -> AsymptoticRate:
    """Closed-form large-K representative of the average multicast rate.

    Small arrays return (P/a_K) Gamma(1 + 1/nt), or its ln(1 + .) once the
    power outgrows K^(1/nt); large arrays return the bounded-power
    representatives P and ln(1 + P).  Theta-rows carry a representative
    value, not a constant-accurate prediction.
    """
    params = AsymptoticParams.classify(cfg)
    nt, P = cfg.num_tx_antennas, cfg.total_power
    if params.regime == "small_array":
        mean_snr = (P / params.a_k) * math.gamma(1.0 + 1.0 / nt)
        value = mean_snr if params.power_regime == "vanishing" else math.log1p(mean_snr)
    else:
        value = P if params.power_regime == "vanishing" else math.log1p(P)
    return AsymptoticRate(
        value=value,
        regime=params.regime,
        power_regime=params.power_regime,
        a_k=params.a_k,
    )
