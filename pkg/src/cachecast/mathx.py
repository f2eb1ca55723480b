"""Scalar special functions and a 1-D maximizer.

Everything here is hand-rolled on purpose: these routines back both the
closed-form rate expressions and the verification oracles, and they are
cross-checked against independent quadrature in the test suite.  All
functions are pure and thread-safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Tuple

__all__ = [
    "ToleranceSpec",
    "DEFAULT_TOL",
    "lambert_w",
    "reg_lower_gamma",
    "reg_upper_gamma",
    "exp_integral_e1",
    "maximize_1d",
]

_EULER_GAMMA = 0.5772156649015328606
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ToleranceSpec:
    """Stopping rule shared by the iterative routines."""

    rel_tol: float = 1e-12
    abs_tol: float = 1e-12
    max_iter: int = 200

    def __post_init__(self) -> None:
        if self.rel_tol <= 0.0 or self.abs_tol <= 0.0:
            raise ValueError("tolerances must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


DEFAULT_TOL = ToleranceSpec()


def lambert_w(x: float, tol: ToleranceSpec = DEFAULT_TOL) -> float:
    """Principal branch of w * exp(w) = x for x >= 0.

    Halley iteration seeded with log1p(x); the seed is already exact at the
    endpoints w(0) = 0 and asymptotically tight for large x, so a handful of
    iterations reach |w e^w - x| <= abs_tol * (1 + x).
    """
    if x < 0.0:
        raise ValueError(f"lambert_w requires x >= 0, got {x}")
    if x == 0.0:
        return 0.0
    w = math.log1p(x)
    for _ in range(tol.max_iter):
        ew = math.exp(w)
        f = w * ew - x
        if abs(f) <= tol.abs_tol * (1.0 + x):
            break
        wp1 = w + 1.0
        # Halley step for f(w) = w e^w - x
        w -= f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
    return w


def _lower_gamma_series(shape: float, x: float, tol: ToleranceSpec) -> float:
    # series for P(a, x), valid and fast for x < a + 1
    term = 1.0 / shape
    total = term
    a = shape
    for _ in range(tol.max_iter * 10):
        a += 1.0
        term *= x / a
        total += term
        if abs(term) < abs(total) * tol.rel_tol:
            break
    log_prefactor = shape * math.log(x) - x - math.lgamma(shape)
    return total * math.exp(log_prefactor)


def _upper_gamma_cf(shape: float, x: float, tol: ToleranceSpec) -> float:
    # Lentz continued fraction for Q(a, x), valid for x >= a + 1
    tiny = 1e-300
    b = x + 1.0 - shape
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, tol.max_iter * 10):
        an = -i * (i - shape)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < tol.rel_tol:
            break
    log_prefactor = shape * math.log(x) - x - math.lgamma(shape)
    return h * math.exp(log_prefactor)


def reg_lower_gamma(shape: float, x: float, tol: ToleranceSpec = DEFAULT_TOL) -> float:
    """Regularized lower incomplete gamma P(shape, x) in [0, 1]."""
    if shape <= 0.0:
        raise ValueError(f"shape must be positive, got {shape}")
    if x < 0.0:
        raise ValueError(f"x must be nonnegative, got {x}")
    if x == 0.0:
        return 0.0
    if x < shape + 1.0:
        return min(_lower_gamma_series(shape, x, tol), 1.0)
    return max(1.0 - _upper_gamma_cf(shape, x, tol), 0.0)


def reg_upper_gamma(shape: float, x: float, tol: ToleranceSpec = DEFAULT_TOL) -> float:
    """Regularized upper incomplete gamma Q(shape, x) = 1 - P(shape, x)."""
    if shape <= 0.0:
        raise ValueError(f"shape must be positive, got {shape}")
    if x < 0.0:
        raise ValueError(f"x must be nonnegative, got {x}")
    if x == 0.0:
        return 1.0
    if x < shape + 1.0:
        return max(1.0 - _lower_gamma_series(shape, x, tol), 0.0)
    return min(_upper_gamma_cf(shape, x, tol), 1.0)


def exp_integral_e1(x: float, tol: ToleranceSpec = DEFAULT_TOL) -> float:
    """Exponential integral E1(x) = int_x^inf exp(-t)/t dt for x > 0.

    Power series below 1, continued fraction above; both converge to the
    requested relative tolerance in a few dozen terms.
    """
    if x <= 0.0:
        raise ValueError(f"exp_integral_e1 requires x > 0, got {x}")
    if x <= 1.0:
        total = -_EULER_GAMMA - math.log(x)
        term = 1.0
        for n in range(1, tol.max_iter * 10):
            term *= -x / n
            contrib = -term / n
            total += contrib
            if abs(contrib) < abs(total) * tol.rel_tol + tol.abs_tol:
                break
        return total
    tiny = 1e-300
    b = x + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, tol.max_iter * 10):
        an = -(i * i)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < tol.rel_tol:
            break
    return h * math.exp(-x)


def maximize_1d(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: ToleranceSpec = DEFAULT_TOL,
    grid_points: int = 65,
) -> Tuple[float, float]:
    """Grid scan followed by golden-section refinement of a 1-D maximum.

    The coarse scan makes the refinement target the global maximum of the
    scanned landscape; the golden stage then localizes it.  On flat or
    pathological objectives the best scanned point is returned.
    """
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    if grid_points < 3:
        grid_points = 3
    step = (hi - lo) / (grid_points - 1)
    best_x, best_f = lo, -math.inf
    values = []
    for i in range(grid_points):
        x = lo + i * step
        fx = f(x)
        values.append(fx)
        if fx > best_f:
            best_x, best_f = x, fx

    i_best = values.index(best_f)
    a = lo + max(i_best - 1, 0) * step
    b = lo + min(i_best + 1, grid_points - 1) * step

    # golden-section on [a, b]
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(tol.max_iter):
        if b - a <= tol.abs_tol + tol.rel_tol * max(abs(a), abs(b), 1.0):
            break
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
    for x, fx in ((x1, f1), (x2, f2)):
        if fx > best_f:
            best_x, best_f = x, fx
    return best_x, best_f
