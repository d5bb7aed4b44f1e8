"""Legendre polynomials, the Gauss hypergeometric series and real-degree
Legendre functions on [0, 1].

All functions accept scalars or numpy arrays for the spatial argument and
return the same shape.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "ConvergenceError",
    "hyp2f1",
    "legendre_p",
    "legendre_p_explicit",
    "legendre_p_nu",
    "legendre_p_nu_deriv",
]

REL_TOL = 1e-15
ABS_FLOOR = 1e-300
MAX_TERMS = 1_000_000

# Degrees below this are summed directly; above it the series cancels badly
# at z = 1/2 and values are carried up by the degree recurrence instead.
_SERIES_MAX_DEGREE = 2.0


class ConvergenceError(ArithmeticError):
    """Raised when a series fails to converge within the term budget."""


def _is_nonpositive_int(v: float) -> bool:
    return v <= 0 and float(v).is_integer()


def hyp2f1(a: float, b: float, c: float, z):
    """Gauss hypergeometric function 2F1(a, b; c; z) by direct summation.

    Pochhammer ratios are applied term to term so nothing grows factorially.
    Summation stops when every |term| is below ``REL_TOL * |sum|`` (floored
    at ``ABS_FLOOR``) or when the series terminates because ``a`` or ``b`` is
    a non-positive integer.

    Restricted to |z| <= 0.5, which covers every argument (1 - x) / 2 with
    x in [0, 1].
    """
    if _is_nonpositive_int(c):
        raise ValueError(f"c must not be zero or a negative integer, got {c}")
    zz = np.asarray(z, dtype=float)
    if np.any(np.abs(zz) > 0.5 + 1e-15):
        raise ValueError("hyp2f1 is only supported for |z| <= 0.5")

    total = np.ones_like(zz)
    term = np.ones_like(zz)
    terminating = _is_nonpositive_int(a) or _is_nonpositive_int(b)
    r = 0
    while True:
        ratio = (a + r) * (b + r) / ((c + r) * (r + 1.0))
        if ratio == 0.0:
            break
        term = term * ratio * zz
        total = total + term
        r += 1
        if not terminating:
            scale = np.maximum(np.abs(total), ABS_FLOOR)
            if np.all(np.abs(term) <= REL_TOL * scale):
                break
        if r > MAX_TERMS:
            raise ConvergenceError(
                f"2F1({a}, {b}; {c}; z) did not converge in {MAX_TERMS} terms"
            )
    return total if total.ndim else float(total)


def _check_unit(x, lo: float = -1.0):
    xx = np.asarray(x, dtype=float)
    if np.any(xx < lo - 1e-12) or np.any(xx > 1.0 + 1e-12):
        raise ValueError(f"argument outside [{lo}, 1]")
    return np.clip(xx, lo, 1.0)


def legendre_p(n: int, x):
    """Legendre polynomial P_n(x) via Bonnet's three-term recurrence."""
    if n < 0 or int(n) != n:
        raise ValueError("n must be a non-negative integer")
    xx = _check_unit(x)
    p_prev = np.ones_like(xx)
    if n == 0:
        return p_prev if p_prev.ndim else float(p_prev)
    p = xx.copy()
    for k in range(1, int(n)):
        p_prev, p = p, ((2 * k + 1) * xx * p - k * p_prev) / (k + 1)
    return p if p.ndim else float(p)


def legendre_p_explicit(n: int, x):
    """P_n(x) from the finite power sum; kept as an independent check."""
    xx = np.asarray(x, dtype=float)
    total = np.zeros_like(xx)
    for k in range(n // 2 + 1):
        c = (-1) ** k * math.factorial(2 * n - 2 * k) / (
            2**n * math.factorial(k) * math.factorial(n - k) * math.factorial(n - 2 * k)
        )
        total = total + c * xx ** (n - 2 * k)
    return total if total.ndim else float(total)


def _p_series(nu: float, z):
    return hyp2f1(-nu, nu + 1.0, 1.0, z)


def _dp_series(nu: float, z):
    if nu == 0.0:
        return np.zeros_like(np.asarray(z, dtype=float)) + 0.0
    return 0.5 * nu * (nu + 1.0) * hyp2f1(1.0 - nu, nu + 2.0, 2.0, z)


def _base_degree(nu: float) -> tuple[float, int]:
    steps = int(math.floor(nu))
    return nu - steps, steps


def _p_recur(nu: float, x):
    """P_nu(x) for nu >= 2 by the upward degree recurrence."""
    base, steps = _base_degree(nu)
    z = (1.0 - x) / 2.0
    p_lo = np.asarray(_p_series(base, z), dtype=float)
    p_hi = np.asarray(_p_series(base + 1.0, z), dtype=float)
    v = base + 1.0
    for _ in range(steps - 1):
        p_lo, p_hi = p_hi, ((2.0 * v + 1.0) * x * p_hi - v * p_lo) / (v + 1.0)
        v += 1.0
    return p_hi


def legendre_p_nu(nu: float, xi):
    """Legendre function of the first kind P_nu(xi) for real nu >= 0, xi in [0, 1].

    Defined through P_nu(xi) = 2F1(-nu, nu + 1; 1; (1 - xi) / 2).  For
    nu >= 2 the series is only evaluated at the fractional base degrees and
    the result is carried up with (v + 1) P_{v+1} = (2v + 1) x P_v - v P_{v-1}.
    """
    if not math.isfinite(nu) or nu < 0:
        raise ValueError("degree must be finite and non-negative")
    x = _check_unit(xi, lo=0.0)
    if nu < _SERIES_MAX_DEGREE:
        out = np.asarray(_p_series(nu, (1.0 - x) / 2.0), dtype=float)
    else:
        out = _p_recur(nu, x)
    return out if out.ndim else float(out)


def legendre_p_nu_deriv(nu: float, xi):
    """d/dxi P_nu(xi) = nu (nu + 1) / 2 * 2F1(1 - nu, nu + 2; 2; (1 - xi) / 2).

    Large degrees use P'_{v+1} = P'_{v-1} + (2v + 1) P_v, seeded by the
    series at the two lowest degrees of the same fractional part.
    """
    if not math.isfinite(nu) or nu < 0:
        raise ValueError("degree must be finite and non-negative")
    x = _check_unit(xi, lo=0.0)
    z = (1.0 - x) / 2.0
    if nu < _SERIES_MAX_DEGREE:
        out = np.asarray(_dp_series(nu, z), dtype=float)
        return out if out.ndim else float(out)

    base, steps = _base_degree(nu)
    d_lo = np.asarray(_dp_series(base, z), dtype=float)
    d_hi = np.asarray(_dp_series(base + 1.0, z), dtype=float)
    p_lo = np.asarray(_p_series(base, z), dtype=float)
    p_hi = np.asarray(_p_series(base + 1.0, z), dtype=float)
    v = base + 1.0
    for _ in range(steps - 1):
        d_lo, d_hi = d_hi, d_lo + (2.0 * v + 1.0) * p_hi
        p_lo, p_hi = p_hi, ((2.0 * v + 1.0) * x * p_hi - v * p_lo) / (v + 1.0)
        v += 1.0
    return d_hi if d_hi.ndim else float(d_hi)
