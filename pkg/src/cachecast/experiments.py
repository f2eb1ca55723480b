"""Desk-scale experiment sweeps and the machine-readable property suite.

Every sweep row records the scheme, the full parameter point, and the
(seed, samples) pair, so any row can be regenerated bit-identically.  All
internal math is linear; decibels appear only in the row metadata.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Iterable, Optional, Sequence, TextIO

import numpy as np

from . import caching, channel, mathx, mixed, multicast, multiplex, selection
from .channel import RngStream, SystemConfig

__all__ = [
    "SweepRow",
    "SweepResult",
    "PropertyCheck",
    "PropertySuiteReport",
    "CSV_SCHEMA",
    "db_to_linear",
    "linear_to_db",
    "default_samples",
    "run_fig1",
    "run_fig2",
    "run_fig3_4_5",
    "run_property_suite",
]

CSV_SCHEMA = "cachecast-sweep-v1"

COLUMNS = (
    "scheme",
    "K",
    "nt",
    "L",
    "P_dB",
    "m",
    "sigma2",
    "P0_frac",
    "mean_nats",
    "std_err",
    "samples",
    "seed",
    "flags",
)


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    if x <= 0.0:
        raise ValueError("dB conversion needs a positive value")
    return 10.0 * math.log10(x)


def default_samples(num_users: int) -> int:
    """Desk-scale sample budget: shrink with K to keep sweeps interactive."""
    return 100_000 if num_users <= 1_000 else 10_000


@dataclass(frozen=True)
class SweepRow:
    scheme: str
    K: int
    nt: int
    L: int
    P_dB: float
    m: float
    sigma2: float
    P0_frac: float
    mean_nats: float
    std_err: float
    samples: int
    seed: int
    flags: str = ""


def _cell(value) -> str:
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


@dataclass(frozen=True)
class SweepResult:
    rows: tuple

    def sorted(self) -> "SweepResult":
        return SweepResult(rows=tuple(sorted(self.rows, key=lambda r: (r.scheme, r.K, r.P_dB, r.m))))

    def write_csv(self, fh: TextIO) -> None:
        fh.write(f"# {CSV_SCHEMA}\n")
        writer = csv.writer(fh)
        writer.writerow(COLUMNS)
        for row in self.rows:
            writer.writerow([_cell(getattr(row, c)) for c in COLUMNS])

    def write_json(self, fh: TextIO) -> None:
        payload = []
        for row in self.rows:
            d = asdict(row)
            for k, v in d.items():
                if isinstance(v, float) and math.isinf(v):
                    d[k] = "inf" if v > 0 else "-inf"
            payload.append(d)
        json.dump({"schema": CSV_SCHEMA, "rows": payload}, fh, indent=2)
        fh.write("\n")


def _map(fn: Callable, items: Sequence, workers: int) -> list:
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# --- Fig. 1: multicasting schemes vs K ------------------------------------

FIG1_K_GRID = (50, 100, 200, 400, 800)
FIG1_P_DB = (30.0, 40.0)
FIG1_M = 0.05


def _multicast_row(
    scheme: str, cfg: SystemConfig, p_db: float, rng: RngStream, samples: int
) -> SweepRow:
    if cfg.num_subchannels == 1:
        est = multicast.avg_rate_quasistatic(cfg, rng, samples)
    else:
        est = multicast.avg_rate_parallel(cfg, rng, samples)
    load = caching.transmissions(cfg.placement, cfg.normalized_cache, cfg.num_users)
    delivered = est.scaled(cfg.num_users / load)
    return SweepRow(
        scheme=scheme,
        K=cfg.num_users,
        nt=cfg.num_tx_antennas,
        L=cfg.num_subchannels,
        P_dB=p_db,
        m=cfg.normalized_cache,
        sigma2=cfg.csit_error_var,
        P0_frac=1.0,
        mean_nats=delivered.mean,
        std_err=delivered.std_err,
        samples=samples,
        seed=rng.seed,
    )


def run_fig1(
    seed: int = 42,
    samples: Optional[int] = None,
    k_grid: Sequence[int] = FIG1_K_GRID,
    p_db_grid: Sequence[float] = FIG1_P_DB,
    m: float = FIG1_M,
    workers: int = 1,
) -> SweepResult:
    """Delivery rate of the four multicasting schemes vs K at m = 5%.

    Schemes: single antenna; single antenna with threshold selection;
    nt = floor(ln K) antennas; single antenna over L = floor(ln K)
    sub-channels.
    """
    del workers  # points are cheap; kept for interface uniformity
    base = RngStream(seed)
    rows = []
    idx = 0
    for p_db in p_db_grid:
        P = db_to_linear(p_db)
        for K in k_grid:
            n = samples if samples is not None else default_samples(K)
            n_log = max(1, int(math.floor(math.log(K))))
            cfg1 = SystemConfig(num_users=K, num_tx_antennas=1, total_power=P, normalized_cache=m)
            rows.append(_multicast_row("mc_nt1", cfg1, p_db, base.derive(idx), n))
            s_star = selection.optimal_threshold_rayleigh(P)
            sel = caching.delivery_rate_selection(m, s_star, P, K, base.derive(idx + 1), n)
            rows.append(
                SweepRow(
                    scheme="mc_select",
                    K=K,
                    nt=1,
                    L=1,
                    P_dB=p_db,
                    m=m,
                    sigma2=0.0,
                    P0_frac=1.0,
                    mean_nats=sel.mean,
                    std_err=sel.std_err,
                    samples=n,
                    seed=seed,
                )
            )
            cfg3 = SystemConfig(num_users=K, num_tx_antennas=n_log, total_power=P, normalized_cache=m)
            rows.append(_multicast_row("mc_ntlog", cfg3, p_db, base.derive(idx + 2), n))
            cfg4 = SystemConfig(
                num_users=K,
                num_tx_antennas=1,
                total_power=P,
                num_subchannels=n_log,
                normalized_cache=m,
            )
            rows.append(_multicast_row("mc_parallel", cfg4, p_db, base.derive(idx + 3), n))
            idx += 4
    return SweepResult(rows=tuple(rows)).sorted()


# --- Fig. 2: optimal selection threshold, empirical vs closed form --------

FIG2_K_GRID = (100, 1_000, 10_000)
FIG2_P_DB = (30.0, 40.0, 50.0)


def run_fig2(
    seed: int = 42,
    samples: Optional[int] = None,
    k_grid: Sequence[int] = FIG2_K_GRID,
    p_db_grid: Sequence[float] = FIG2_P_DB,
    m: float = FIG1_M,
    workers: int = 1,
) -> SweepResult:
    """Optimal SNR threshold vs K: simulated argmax against P/W(P) - 1."""
    del workers
    base = RngStream(seed)
    rows = []
    idx = 0
    for p_db in p_db_grid:
        P = db_to_linear(p_db)
        s_closed = selection.optimal_threshold_rayleigh(P)
        for K in k_grid:
            n = samples if samples is not None else default_samples(K)
            cfg = SystemConfig(
                num_users=K, num_tx_antennas=1, total_power=P, normalized_cache=m
            )
            s_emp = selection.empirical_optimal_threshold(
                cfg, base.derive(idx), n, bracket=(1.0, 3.0 * s_closed)
            )
            common = dict(
                K=K, nt=1, L=1, P_dB=p_db, m=m, sigma2=0.0, P0_frac=1.0, samples=n, seed=seed
            )
            rows.append(
                SweepRow(scheme="threshold_empirical", mean_nats=s_emp, std_err=0.0, **common)
            )
            rows.append(
                SweepRow(scheme="threshold_closed", mean_nats=s_closed, std_err=0.0, **common)
            )
            idx += 1
    return SweepResult(rows=tuple(rows)).sorted()


# --- Figs. 3-5: mixed delivery at nt = K = 100 ----------------------------

FIG345_M_GRID = (0.01, 0.02, 0.03, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.4, 0.5)
FIG345_P_DB = (10.0, 20.0)
FIG345_USERS = 100
FIG345_SAMPLES = 200


def fig345_config(per_user_p_db: float, m: float, num_users: int = FIG345_USERS) -> SystemConfig:
    """Numerics preset: nt = K, fixed per-user power, sigma2 = (P/K)^-1."""
    per_user = db_to_linear(per_user_p_db)
    return SystemConfig(
        num_users=num_users,
        num_tx_antennas=num_users,
        total_power=per_user * num_users,
        normalized_cache=m,
        csit_error_var=1.0 / per_user,
    )


def _fig345_point(args) -> list:
    seed, idx, p_db, m, n = args
    cfg = fig345_config(p_db, m)
    sub = RngStream(seed).derive(idx)
    K, P = cfg.num_users, cfg.total_power
    load = caching.transmissions(cfg.placement, m, K)
    mc = multicast.avg_rate_quasistatic(cfg, sub.derive(0), n).scaled(K / load)
    uc = multiplex.symmetric_rate_mc(cfg, sub.derive(1), n).scaled(K / (1.0 - m))
    opt = mixed.optimal_split_numeric(cfg, sub.derive(2), n)
    common = dict(K=K, nt=K, L=1, P_dB=p_db, m=m, sigma2=cfg.csit_error_var, samples=n, seed=seed)
    flags = []
    if opt.at_boundary:
        flags.append("boundary")
    if opt.saturated(P):
        flags.append("all_common")
    if mc.mean >= uc.mean:
        flags.append("mc_preferred")
    return [
        SweepRow(scheme="multicast", P0_frac=1.0, mean_nats=mc.mean, std_err=mc.std_err, **common),
        SweepRow(scheme="multiplex", P0_frac=0.0, mean_nats=uc.mean, std_err=uc.std_err, **common),
        SweepRow(
            scheme="mixed_opt",
            P0_frac=opt.common_power / P,
            mean_nats=opt.rate,
            std_err=0.0,
            flags=";".join(flags),
            **common,
        ),
    ]


def run_fig3_4_5(
    seed: int = 42,
    samples: Optional[int] = None,
    p_db_grid: Sequence[float] = FIG345_P_DB,
    m_grid: Sequence[float] = FIG345_M_GRID,
    workers: int = 1,
) -> SweepResult:
    """m-sweeps of the three delivery rates plus the optimal power split.

    The P_dB column carries *per-user* power here, matching the preset
    parameterization; the regime classification lives in the flags of the
    mixed_opt rows.
    """
    n = samples if samples is not None else FIG345_SAMPLES
    tasks = [
        (seed, i, p_db, m, n)
        for i, (p_db, m) in enumerate((p, m) for p in p_db_grid for m in m_grid)
    ]
    rows = [row for chunk in _map(_fig345_point, tasks, workers) for row in chunk]
    return SweepResult(rows=tuple(rows)).sorted()


# --- Property suite -------------------------------------------------------


@dataclass(frozen=True)
class PropertyCheck:
    name: str
    passed: bool
    margin: float  # slack of the inequality / mismatch of the identity
    detail: str = ""


@dataclass(frozen=True)
class PropertySuiteReport:
    checks: tuple
    all_passed: bool

    def rows(self) -> list:
        return [asdict(c) for c in self.checks]


def _check(name: str, passed: bool, margin: float, detail: str = "") -> PropertyCheck:
    return PropertyCheck(name=name, passed=bool(passed), margin=float(margin), detail=detail)


def run_property_suite(seed: int = 42) -> PropertySuiteReport:
    """Fast cross-module invariant checks, reported as machine-readable rows."""
    base = RngStream(seed)
    checks = []

    # tail bound of the normalized channel gain around its mean
    worst = max(
        mathx.reg_lower_gamma(nt, 0.1586 * nt) * math.exp(nt) for nt in range(1, 65)
    )
    checks.append(_check("gain_tail_bound", worst <= 1.0, 1.0 - worst))

    # Lambert W inverse identity on a log grid
    grid = [10.0**e for e in range(-3, 7)]
    err = max(abs(mathx.lambert_w(x) * math.exp(mathx.lambert_w(x)) - x) / x for x in grid)
    checks.append(_check("lambert_w_identity", err < 1e-10, 1e-10 - err))

    # load limits: m -> 0 gives K transmissions, m = 1 gives none
    lim0 = abs(caching.transmissions("decentralized", 1e-12, 64) - 64.0)
    lim1 = caching.transmissions("decentralized", 1.0, 64)
    checks.append(_check("load_limits", lim0 < 1e-6 and lim1 == 0.0, 1e-6 - max(lim0, lim1)))

    # exact series mean of the worst normalized gain vs Monte-Carlo
    exact = channel.exact_min_mean(2, 5)
    mc = channel.min_norm_statistic(2, 5, base.derive(1), 200_000)
    dev = abs(mc.mean - exact)
    checks.append(_check("worst_gain_exact_mean", dev < 4.0 * mc.std_err, 4.0 * mc.std_err - dev))

    # Jensen sandwich around the parallel multicast rate on paired draws
    cfg = SystemConfig(num_users=8, num_tx_antennas=2, total_power=10.0, num_subchannels=3)
    mid = multicast.avg_rate_parallel(cfg, base.derive(2), 20_000)
    lo, hi = multicast.parallel_rate_bounds(cfg, base.derive(2), 20_000)
    ok = lo.mean <= mid.mean <= hi.mean
    checks.append(_check("parallel_rate_sandwich", ok, min(mid.mean - lo.mean, hi.mean - mid.mean)))

    # zero-forcing cross-talk
    gen = base.derive(3).generator()
    worst_xtalk = 0.0
    for K, nt in ((2, 4), (8, 16)):
        for _ in range(50):
            est = channel._complex_normal(gen, (K, nt), 1.0)
            pre = multiplex.build_zf_precoder(est)
            cross = est @ pre.columns
            np.fill_diagonal(cross, 0.0)
            worst_xtalk = max(worst_xtalk, float(np.abs(cross).max() / np.abs(est).max()))
    checks.append(_check("zf_orthogonality", worst_xtalk < 1e-10, 1e-10 - worst_xtalk))

    # leaked interference has the predicted mean (K-1) sigma2
    cfg = SystemConfig(num_users=16, num_tx_antennas=32, total_power=16.0, csit_error_var=0.3)
    _, _, inter = multiplex._zf_batch_stats(cfg, base.derive(4).generator(), 2_000)
    ratio = float(inter.mean()) / ((cfg.num_users - 1) * cfg.csit_error_var)
    se = float(inter.std(ddof=1)) / (
        (cfg.num_users - 1) * cfg.csit_error_var * math.sqrt(inter.size)
    )
    checks.append(_check("zf_interference_mean", abs(ratio - 1.0) < 3.0 * se, 3.0 * se - abs(ratio - 1.0)))

    # mixed endpoints collapse to the standalone schemes bit-exactly
    cfg = SystemConfig(
        num_users=8, num_tx_antennas=16, total_power=8.0, normalized_cache=0.2, csit_error_var=0.1
    )
    full = mixed.mixed_rates_mc(cfg, mixed.PowerSplit.compute(cfg, cfg.total_power), base.derive(5), 500)
    none = mixed.mixed_rates_mc(cfg, mixed.PowerSplit.compute(cfg, 0.0), base.derive(5), 500)
    r0 = multicast.avg_rate_quasistatic(cfg, base.derive(5), 500)
    rsym = multiplex.symmetric_rate_mc(cfg, base.derive(5), 500)
    exact_red = (
        full.common_rate == r0.mean
        and full.private_rate == 0.0
        and none.common_rate == 0.0
        and none.private_rate == rsym.mean
    )
    checks.append(_check("mixed_endpoint_reduction", exact_red, 0.0 if exact_red else -1.0))

    # aggregated mixed rate is the sum of its two scaled flows
    split = mixed.PowerSplit.compute(cfg, 0.5 * cfg.total_power)
    rates = mixed.mixed_rates_mc(cfg, split, base.derive(6), 500)
    load = caching.transmissions(cfg.placement, cfg.normalized_cache, cfg.num_users)
    recomputed = (
        cfg.num_users * rates.common_rate / load
        + cfg.num_users * rates.private_rate / (1.0 - cfg.normalized_cache)
    )
    add_err = abs(recomputed - rates.total) / max(rates.total, 1e-300)
    checks.append(_check("mixed_rate_additivity", add_err < 1e-12, 1e-12 - add_err))

    return PropertySuiteReport(checks=tuple(checks), all_passed=all(c.passed for c in checks))
