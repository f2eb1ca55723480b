"""Coded-caching transmission load and delivery-rate composition.

The load T(m, K) counts file-size-normalized multicast transmissions needed
to serve all K demands; dividing any underlying link rate by T/K turns it
into an equivalent content delivery rate.  Rates are in nats/s/Hz and a full
cache (m = 1) yields an infinite delivery rate by convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import RngStream
from .results import RateEstimate

__all__ = [
    "CacheLoad",
    "transmissions",
    "delivery_rate_multicast",
    "delivery_rate_unicast",
    "delivery_rate_selection",
    "selection_rate_samples",
]


@dataclass(frozen=True)
class CacheLoad:
    placement: str
    m: float
    num_users: int
    load: float

    @classmethod
    def compute(cls, placement: str, m: float, num_users: int) -> "CacheLoad":
        return cls(placement, m, num_users, transmissions(placement, m, num_users))


def transmissions(placement: str, m: float, num_users: int) -> float:
    """Normalized number of multicast transmissions T(m, K).

    Centralized: (1 - m) / (1/K + m).  Decentralized:
    (1 - m)(1 - (1 - m)^K) / m, with the m -> 0 limit K and the m -> 1
    limit 0 applied by continuity.
    """
    if not 0.0 <= m <= 1.0:
        raise ValueError("m must be in [0, 1]")
    if num_users < 1:
        raise ValueError("num_users must be >= 1")
    K = num_users
    if placement == "centralized":
        return (1.0 - m) / (1.0 / K + m)
    if placement == "decentralized":
        if m == 0.0:
            return float(K)
        if m == 1.0:
            return 0.0
        # -expm1(K log1p(-m)) = 1 - (1-m)^K without cancellation at small m
        return (1.0 - m) * -math.expm1(K * math.log1p(-m)) / m
    raise ValueError(f"unknown placement {placement!r}")


def delivery_rate_multicast(load: float, multicast_rate: float, num_users: int) -> float:
    """Equivalent content delivery rate (K / T) * r0; +inf when T = 0."""
    if load < 0.0:
        raise ValueError("load must be nonnegative")
    if load == 0.0:
        return 0.0 if multicast_rate == 0.0 else math.inf
    return num_users * multicast_rate / load


def delivery_rate_unicast(m: float, symmetric_rate: float, num_users: int) -> float:
    """Equivalent content delivery rate K * rsym / (1 - m); +inf at m = 1."""
    if not 0.0 <= m <= 1.0:
        raise ValueError("m must be in [0, 1]")
    if m == 1.0:
        return 0.0 if symmetric_rate == 0.0 else math.inf
    return num_users * symmetric_rate / (1.0 - m)


def selection_rate_samples(
    m: float,
    num_users: int,
    above_prob: float,
    log_term: float,
    gen: np.random.Generator,
    samples: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample delivery rates and selected counts (decentralized load).

    Each sample draws the binomial number of selected users n and evaluates
    (m/(1-m)) * n / (1 - (1-m)^n) * log_term, with the empty-selection
    samples contributing zero.
    """
    if not 0.0 < m < 1.0:
        raise ValueError("selection requires 0 < m < 1")
    counts = gen.binomial(num_users, above_prob, size=samples)
    values = np.zeros(samples, dtype=np.float64)
    active = counts > 0
    n = counts[active].astype(np.float64)
    values[active] = (m / (1.0 - m)) * n / (1.0 - (1.0 - m) ** n) * log_term
    return values, counts


def delivery_rate_selection(
    m: float,
    threshold: float,
    total_power: float,
    num_users: int,
    rng: RngStream,
    samples: int,
) -> RateEstimate:
    """Monte-Carlo delivery rate of single-antenna threshold selection.

    The random selected-user count enters both the numerator and the
    decentralized load, exactly as the finite-K expectation is written; the
    s = 0 threshold gives rate 0 through the vanishing log factor.
    """
    if threshold < 0.0:
        raise ValueError("threshold must be nonnegative")
    if total_power <= 0.0:
        raise ValueError("total_power must be positive")
    above = math.exp(-threshold / total_power)
    values, _ = selection_rate_samples(
        m, num_users, above, math.log1p(threshold), rng.generator(), samples
    )
    return RateEstimate.from_values(values, seed=rng.seed)
