"""Incomplete gamma and confluent hypergeometric functions for complex argument.

The central object is the entire function

    g(s, z) = z**(-s) * gamma(s, z) = sum_n (-1)**n z**n / (n! (s + n)),

evaluated for a fixed real ``s`` (not a non-positive integer) and arbitrary
complex ``z``.  Three regimes are used:

* the alternating Taylor series, for ``Re z <= 0`` close to the real axis;
* the exponentially weighted series ``exp(-z) sum z**n / (s)_{n+1}``, for
  ``Re z > 0`` close to the real axis;
* the Legendre continued fraction for ``Gamma(s, z)`` otherwise, combined as
  ``g = z**(-s) Gamma(s) - exp(-z) * [exp(z) z**(-s) Gamma(s, z)]``.

Both series lose roughly ``|z| - |Re z|`` e-folds of precision through
cancellation, which is the quantity compared against
``SeriesControl.large_arg_threshold``.

All functions accept scalars or numpy arrays and return the same shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .errors import ConvergenceError, DomainError

__all__ = [
    "SeriesControl",
    "DEFAULT_CONTROL",
    "gamma_real",
    "regularized_lower_gamma",
    "regularized_lower_gamma_prime",
    "confluent_1f1",
]


@dataclass(frozen=True)
class SeriesControl:
    """Numerical controls for the series / continued-fraction evaluators.

    ``large_arg_threshold`` is the cancellation budget, in e-folds, that a
    power series may spend before the large-argument method takes over.
    """

    max_terms: int = 5000
    rel_tol: float = 1e-14
    large_arg_threshold: float = 6.0

    def __post_init__(self):
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")
        if not 0.0 < self.rel_tol < 1.0:
            raise ValueError("rel_tol must lie in (0, 1)")
        if self.large_arg_threshold <= 0:
            raise ValueError("large_arg_threshold must be positive")


DEFAULT_CONTROL = SeriesControl()

# Above this real part the continued fraction is both faster and exact enough.
_CF_REAL_PART = 30.0
# Optimal truncation of the 1F1 expansion is ~exp(-|z|); 40 keeps it below 1e-17.
_ASYMPTOTIC_ABS = 40.0


def _check_s(s):
    if s <= 0 and float(s).is_integer():
        raise DomainError(f"s={s} is a non-positive integer")


def gamma_real(s: float) -> float:
    """Gamma function for real, non-pole ``s``."""
    _check_s(s)
    return math.gamma(s)


def _as_complex(z):
    arr = np.asarray(z, dtype=complex)
    return arr, arr.ndim == 0


def _series_alternating(s, z, ctl):
    # sum (-z)^n / (n! (s+n)) with Kahan compensation
    total = np.full(z.shape, 1.0 / s, dtype=complex)
    comp = np.zeros_like(total)
    term = np.ones_like(total)
    absz = np.abs(z)
    for n in range(1, ctl.max_terms + 1):
        term = term * (-z) / n
        add = term / (s + n)
        y = add - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if n > absz.max() and np.all(np.abs(add) <= ctl.rel_tol * np.abs(total)):
            return total
    raise ConvergenceError(
        "alternating incomplete-gamma series did not converge",
        partial=total, terms=ctl.max_terms)


def _series_weighted(s, z, ctl):
    # exp(-z) * sum z^n / (s)_{n+1}
    term = np.full(z.shape, 1.0 / s, dtype=complex)
    total = term.copy()
    comp = np.zeros_like(total)
    absz = np.abs(z)
    for n in range(1, ctl.max_terms + 1):
        term = term * z / (s + n)
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if n > absz.max() and np.all(np.abs(term) <= ctl.rel_tol * np.abs(total)):
            return np.exp(-z) * total
    raise ConvergenceError(
        "weighted incomplete-gamma series did not converge",
        partial=np.exp(-z) * total, terms=ctl.max_terms)


def _upper_cf(s, z, ctl):
    """exp(z) z**(-s) Gamma(s, z) by modified Lentz on the Legendre fraction."""
    tiny = 1e-300
    b = z + 1.0 - s
    f = np.where(b == 0, tiny, b)
    c = f.copy()
    d = np.zeros_like(f)
    active = np.ones(z.shape, dtype=bool)
    for i in range(1, ctl.max_terms + 1):
        a = -i * (i - s)
        b = z + (2 * i + 1) - s
        d = b + a * d
        d = np.where(d == 0, tiny, d)
        c = b + a / c
        c = np.where(c == 0, tiny, c)
        d = 1.0 / d
        delta = c * d
        f = np.where(active, f * delta, f)
        active &= np.abs(delta - 1.0) > ctl.rel_tol
        if not active.any():
            return 1.0 / f
    raise ConvergenceError(
        "incomplete-gamma continued fraction did not converge",
        partial=1.0 / f, terms=ctl.max_terms)


def _regimes(z, ctl):
    absz = np.abs(z)
    cancel = absz - np.abs(z.real)
    series = (absz <= 1.0) | ((cancel <= ctl.large_arg_threshold) & (z.real <= _CF_REAL_PART))
    alternating = series & (z.real <= 0)
    weighted = series & (z.real > 0)
    return alternating, weighted, ~series


def regularized_lower_gamma(s: float, z, ctl: SeriesControl = DEFAULT_CONTROL, regime=None):
    """Entire function ``z**(-s) * gamma(s, z)``.

    Parameters
    ----------
    s : float
        Real order, not a non-positive integer.
    z : complex or array_like
        Argument.
    ctl : SeriesControl
        Convergence controls.
    regime : {None, "series", "cf"}
        Force one evaluation route (testing aid); ``None`` picks automatically.
    """
    _check_s(s)
    z, scalar = _as_complex(z)
    out = np.empty(z.shape, dtype=complex)
    alt, wtd, cf = _regimes(z, ctl)
    if regime == "series":
        alt, wtd, cf = z.real <= 0, z.real > 0, np.zeros(z.shape, dtype=bool)
    elif regime == "cf":
        alt = wtd = np.zeros(z.shape, dtype=bool)
        cf = np.ones(z.shape, dtype=bool)
    elif regime is not None:
        raise ValueError(f"unknown regime {regime!r}")
    if alt.any():
        out[alt] = _series_alternating(s, z[alt], ctl)
    if wtd.any():
        out[wtd] = _series_weighted(s, z[wtd], ctl)
    if cf.any():
        zc = z[cf]
        if np.any(zc == 0):
            raise DomainError("continued fraction requested at z = 0")
        out[cf] = zc ** (-s) * math.gamma(s) - np.exp(-zc) * _upper_cf(s, zc, ctl)
    return out[()] if scalar else out


def regularized_lower_gamma_prime(s: float, z, ctl: SeriesControl = DEFAULT_CONTROL):
    """d/dz of ``regularized_lower_gamma``; equals ``-g(s + 1, z)``."""
    return -regularized_lower_gamma(s + 1.0, z, ctl)


def _hyp1f1_series(a, b, z, ctl):
    total = np.ones(z.shape, dtype=complex)
    comp = np.zeros_like(total)
    term = np.ones_like(total)
    absz = np.abs(z)
    for n in range(ctl.max_terms):
        term = term * (a + n) / (b + n) * z / (n + 1)
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if (n > absz.max() or not term.any()) and np.all(np.abs(term) <= ctl.rel_tol * np.abs(total)):
            return total
    raise ConvergenceError("1F1 series did not converge", partial=total, terms=ctl.max_terms)


def _hyp1f1_asymptotic(a, b, z, ctl):
    """Large-|z| expansion of 1F1 (both exponential and algebraic parts)."""

    def tail(p, r, w):
        # sum_n (p)_n (r)_n / (n! w^n), truncated at the smallest term
        total = np.ones(w.shape, dtype=complex)
        term = np.ones_like(total)
        last = np.full(w.shape, np.inf)
        live = np.ones(w.shape, dtype=bool)
        for n in range(ctl.max_terms):
            term = term * (p + n) * (r + n) / ((n + 1) * w)
            mag = np.abs(term)
            live &= mag < last
            live &= mag > ctl.rel_tol * np.abs(total)
            if not live.any():
                break
            total = np.where(live, total + term, total)
            last = np.where(live, mag, last)
        return total

    # (-z)^(-a) on the principal branch; sign of Im z picks the Stokes side
    sign = np.where(z.imag >= 0, 1.0, -1.0)
    minus_z_pow = np.exp(-a * (np.log(z) - 1j * np.pi * sign))
    part1 = 0.0
    if not (a <= 0 and float(a).is_integer()):
        part1 = np.exp(z) * z ** (a - b) * tail(b - a, 1 - a, z) * (math.gamma(b) / math.gamma(a))
    part2 = 0.0
    if not (b - a <= 0 and float(b - a).is_integer()):
        part2 = minus_z_pow * tail(a, a - b + 1, -z) * (math.gamma(b) / math.gamma(b - a))
    return part1 + part2


def _hyp1f1_mp(a, b, z, ctl):
    extra = int(np.max(np.abs(z) - np.abs(z.real)) / 2.3) + 20 if z.size else 20
    with mpmath.workdps(16 + extra):
        vals = [complex(mpmath.hyp1f1(a, b, mpmath.mpc(w.real, w.imag))) for w in z.ravel()]
    return np.array(vals, dtype=complex).reshape(z.shape)


def confluent_1f1(a: float, b: float, z, ctl: SeriesControl = DEFAULT_CONTROL):
    """Kummer's confluent hypergeometric function ``1F1(a; b; z)``.

    Uses the power series (after Kummer's transformation when ``Re z < 0``)
    while cancellation stays inside the control budget, the large-argument
    expansion for ``|z| >= 40``, and an extended-precision series in the
    remaining band near the imaginary axis.
    """
    if b <= 0 and float(b).is_integer():
        raise DomainError(f"b={b} is a non-positive integer")
    z, scalar = _as_complex(z)
    out = np.empty(z.shape, dtype=complex)
    absz = np.abs(z)
    cancel = absz - np.abs(z.real)
    series = cancel <= ctl.large_arg_threshold
    asym = ~series & (absz >= _ASYMPTOTIC_ABS)
    mp = ~series & ~asym
    if series.any():
        zs = z[series]
        neg = zs.real < 0
        vals = np.empty(zs.shape, dtype=complex)
        if (~neg).any():
            vals[~neg] = _hyp1f1_series(a, b, zs[~neg], ctl)
        if neg.any():
            vals[neg] = np.exp(zs[neg]) * _hyp1f1_series(b - a, b, -zs[neg], ctl)
        out[series] = vals
    if asym.any():
        out[asym] = _hyp1f1_asymptotic(a, b, z[asym], ctl)
    if mp.any():
        out[mp] = _hyp1f1_mp(a, b, z[mp], ctl)
    return out[()] if scalar else out
