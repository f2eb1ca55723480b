"""Zero-forcing spatial multiplexing under imperfect transmitter CSIT.

Each private beam is forced into the null space of the other users'
*estimated* channels, so residual interference comes only from the
estimation error.  The exact Monte-Carlo path, a distributional surrogate
for the symmetric SINR, and the large-system closed form are all exposed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .channel import (
    RngStream,
    SystemConfig,
    _complex_normal,
    batch_counts,
    draw_channel_batch,
    scalars_per_draw,
    squared_row_norms,
)
from .results import RateEstimate

__all__ = [
    "ZfPrecoder",
    "SinrSample",
    "AsymptoticSymmetricRate",
    "build_zf_precoder",
    "symmetric_rate_mc",
    "symmetric_rate_surrogate",
    "symmetric_rate_asymptotic",
]

# cross-talk above this (relative) level means the estimate rows were
# numerically dependent and the null-space projection is meaningless
_RANK_RTOL = 1e-10


@dataclass(frozen=True)
class ZfPrecoder:
    """Unit-norm beamforming columns (nt, K) and their normalizers."""

    columns: np.ndarray
    normalizers: np.ndarray


@dataclass(frozen=True)
class SinrSample:
    signal_gain: float
    interference: float
    sinr: float

    @classmethod
    def from_gains(
        cls,
        signal_gain: float,
        interference: float,
        signal_power: float,
        interference_power: float,
    ) -> "SinrSample":
        sinr = signal_gain * signal_power / (1.0 + interference * interference_power)
        return cls(signal_gain=signal_gain, interference=interference, sinr=sinr)


@dataclass(frozen=True)
class AsymptoticSymmetricRate:
    """Large-system symmetric rate with the case-selecting proxy recorded."""

    value: float
    regime: str  # "bounded_gain" | "growing_gain"
    proxy: float  # (nt - K + 1)(1 - sigma2), decides the case at finite size
    extrapolated: bool  # nt == K sits outside the nt/K > 1 guarantee


def build_zf_precoder(est_h: np.ndarray) -> ZfPrecoder:
    """Beamformers w_k from the estimated channel matrix (K rows of length nt).

    w_k is the unit-norm projection of conj(est_h[k]) onto the orthogonal
    complement of the other conjugated rows, obtained from a full QR of the
    stacked other-rows; H_l^T w_k = 0 for l != k by construction.
    """
    est_h = np.asarray(est_h, dtype=np.complex128)
    K, nt = est_h.shape
    if nt < K:
        raise ValueError("zero forcing requires num_tx_antennas >= num_users")
    scale = float(np.abs(est_h).max())
    if scale == 0.0:
        raise ValueError("estimated channel matrix is zero")
    cols = np.empty((nt, K), dtype=np.complex128)
    alphas = np.empty(K, dtype=np.float64)
    for k in range(K):
        target = est_h[k].conj()
        if K == 1:
            proj = target
        else:
            others = np.delete(est_h, k, axis=0).conj().T  # (nt, K-1)
            q, r = np.linalg.qr(others, mode="complete")
            if np.abs(np.diagonal(r)).min() < _RANK_RTOL * scale:
                raise ValueError("estimated rows are numerically rank deficient")
            basis = q[:, K - 1 :]
            proj = basis @ (basis.conj().T @ target)
        norm = float(np.linalg.norm(proj))
        if norm < _RANK_RTOL * scale:
            raise ValueError("estimated rows are numerically rank deficient")
        alphas[k] = 1.0 / norm
        cols[:, k] = alphas[k] * proj
    return ZfPrecoder(columns=cols, normalizers=alphas)


def _zf_batch_stats(
    cfg: SystemConfig, gen: np.random.Generator, n: int
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-draw (||H_k||^2, |G_k|^2, sum_{l!=k}|Gt_{k,l}|^2), each (n, K).

    Uses the pseudo-inverse form of the per-user null-space projections
    (identical beams up to normalization, much cheaper than K QR passes).
    When the estimate carries no information (sigma2 = 1) the beams are
    drawn from an auxiliary isotropic matrix, consumed after the channel
    batch so the channel stream position stays a function of (cfg, n).
    """
    true, est, err = draw_channel_batch(cfg, gen, n)
    h = true[:, 0]
    e = err[:, 0]
    a = est[:, 0]
    if cfg.csit_error_var == 1.0:
        a = _complex_normal(gen, h.shape, 1.0)
    w = np.linalg.pinv(a)  # (n, nt, K)
    w /= np.linalg.norm(w, axis=1, keepdims=True)
    idx = np.arange(cfg.num_users)
    g = h @ w
    g2 = np.abs(g[:, idx, idx]) ** 2
    gt = e @ w
    gt2 = gt.real * gt.real + gt.imag * gt.imag
    inter = gt2.sum(axis=2) - gt2[:, idx, idx]
    return squared_row_norms(h), g2, inter


def symmetric_rate_mc(cfg: SystemConfig, rng: RngStream, samples: int) -> RateEstimate:
    """Exact MC mean of ln(1 + SINR_k) with uniform power p = P/K.

    The precoder is rebuilt from the estimate on every draw and applied to
    the true channel; the rate is averaged over users and draws.
    """
    if cfg.num_tx_antennas < cfg.num_users:
        raise ValueError("zero forcing requires num_tx_antennas >= num_users")
    if cfg.num_subchannels != 1:
        raise ValueError("spatial multiplexing runs on the quasi-static channel (L = 1)")
    gen = rng.generator()
    p = cfg.total_power / cfg.num_users
    values = np.empty(samples, dtype=np.float64)
    pos = 0
    for n in batch_counts(samples, scalars_per_draw(cfg)):
        _, g2, inter = _zf_batch_stats(cfg, gen, n)
        values[pos : pos + n] = np.log1p(g2 * p / (1.0 + inter * p)).mean(axis=1)
        pos += n
    return RateEstimate.from_values(values, seed=rng.seed)


def symmetric_rate_surrogate(cfg: SystemConfig, rng: RngStream, samples: int) -> RateEstimate:
    """Distributional shortcut for the symmetric SINR.

    SINR ~ |sigma*A + sqrt((nt-K+1)(1-sigma2) B)|^2 / (1/p + (K-1) sigma2),
    A ~ CN(0,1), B ~ Gamma(nt-K+1, 1/(nt-K+1)); the interference factor is
    pinned to its unit mean.  Trust it only for nt/K >= 1.2, where the
    neglected correlations are small.
    """
    nt, K = cfg.num_tx_antennas, cfg.num_users
    if nt < K:
        raise ValueError("zero forcing requires num_tx_antennas >= num_users")
    gen = rng.generator()
    s2 = cfg.csit_error_var
    p = cfg.total_power / K
    shape = nt - K + 1
    b = gen.gamma(shape, scale=1.0 / shape, size=samples)
    a = _complex_normal(gen, (samples,), 1.0)
    amp = math.sqrt(s2) * a + np.sqrt(shape * (1.0 - s2) * b)
    denom = 1.0 / p + (K - 1) * s2
    sinr = (amp.real * amp.real + amp.imag * amp.imag) / denom
    return RateEstimate.from_values(np.log1p(sinr), seed=rng.seed)


def symmetric_rate_asymptotic(cfg: SystemConfig) -> AsymptoticSymmetricRate:
    """Large-system symmetric rate with the two-case gain dichotomy.

    Bounded effective gain x = (nt-K+1)(1-sigma2):  (1 + x)/(1/p + K - 1);
    growing gain: ln(1 + x/(1/p + (K-1) sigma2)).  The finite proxy x <> 1
    selects the case; nt = K is served with an extrapolation flag since the
    derivation assumes strictly more antennas than users.
    """
    nt, K = cfg.num_tx_antennas, cfg.num_users
    if nt < K:
        raise ValueError("zero forcing requires num_tx_antennas >= num_users")
    s2 = cfg.csit_error_var
    p = cfg.total_power / K
    proxy = (nt - K + 1) * (1.0 - s2)
    if proxy < 1.0:
        value = (1.0 + proxy) / (1.0 / p + K - 1.0)
        regime = "bounded_gain"
    else:
        value = math.log1p(proxy / (1.0 / p + (K - 1) * s2))
        regime = "growing_gain"
    return AsymptoticSymmetricRate(
        value=value, regime=regime, proxy=proxy, extrapolated=nt == K
    )
