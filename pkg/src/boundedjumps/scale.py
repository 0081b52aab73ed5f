"""Scale functions W^(q) of spectrally negative processes with bounded jumps.

For x > 0,

    W(x) = exp(Phi x) / psi'(Phi) + exp(-zeta_0 x) / psi'(-zeta_0)
           + 2 sum_n Re[exp(-zeta_n x) / psi'(-zeta_n)]

where psi is the Laplace exponent of Y, Phi = Phi(q) its positive root of
psi = q, and {zeta_n} the roots of the dual exponent psi(-z) = q.  The terms
decay like n^(-b - x (a + b)/k), so the series converges uniformly on
[eps, inf) but slowly near 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import DegenerateRootError, DomainError, UnsupportedModelError
from .models import SpectrallyNegativeModel
from .roots import DEFAULT_CONFIG, RootConfig, RootSet, assemble_roots, find_zeta0, verify_simple

__all__ = [
    "ScaleContext",
    "build_scale_context",
    "scale_function",
    "scale_laplace_check",
    "DEFAULT_X_MIN",
]

DEFAULT_X_MIN = 1e-4


@dataclass(frozen=True)
class ScaleContext:
    model: SpectrallyNegativeModel
    q: float
    phi_q: float
    dual_roots: RootSet
    n_terms: int
    x_min: float = DEFAULT_X_MIN

    @property
    def lead_coef(self):
        return 1.0 / float(np.real(self.model.psi_prime(self.phi_q)))

    @property
    def coef0(self):
        return 1.0 / float(np.real(self.model.psi_prime(-self.dual_roots.zeta0)))

    @property
    def coefs(self):
        """1 / psi'(-zeta_n) for the first ``n_terms`` dual roots."""
        c = self.__dict__.get("_coefs")
        if c is None:
            zs = self.dual_roots.zetas[:self.n_terms]
            c = 1.0 / self.model.psi_prime(-zs)
            self.__dict__["_coefs"] = c
        return c


def _phi_of_q(model, q):
    if q > 0:
        return find_zeta0(model, q)
    # q = 0: the positive zero of a convex psi that dips below 0
    hi = 1.0 / model.k
    while float(np.real(model.psi(hi))) <= 0:
        hi *= 2
        if hi > 700 / model.k:
            raise UnsupportedModelError("psi stays negative; no positive root")
    res = minimize_scalar(lambda x: float(np.real(model.psi(x))), bounds=(0.0, hi), method="bounded")
    lo = res.x
    if not float(np.real(model.psi(lo))) < 0:
        raise UnsupportedModelError("q = 0 requires Phi(0) > 0 (negative mean)")
    return brentq(lambda x: float(np.real(model.psi(x))), lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def build_scale_context(model: SpectrallyNegativeModel, q: float, n_terms: int = 1000,
                        cfg: RootConfig = DEFAULT_CONFIG, x_min: float = DEFAULT_X_MIN) -> ScaleContext:
    """Phi(q) and the dual roots needed by :func:`scale_function`."""
    if not isinstance(model, SpectrallyNegativeModel):
        raise UnsupportedModelError("spectrally negative required")
    if q < 0:
        raise DomainError("q must be >= 0")
    if q == 0 and not float(np.real(model.psi_prime(0.0))) < 0:
        raise UnsupportedModelError("q = 0 is supported only when Phi(0) > 0, i.e. psi'(0+) < 0")
    phi = _phi_of_q(model, q)
    if abs(float(np.real(model.psi(phi))) - q) > 1e-11 * (1 + q):
        raise DomainError(f"Phi(q) residual too large at {phi}")
    rs = assemble_roots(model.dual(), q, n_terms, cfg)
    rep = verify_simple(model.dual(), rs)
    if not rep.ok:
        raise DegenerateRootError(f"dual roots with |psi'| below {rep.floor}: {rep.flagged}")
    return ScaleContext(model=model, q=q, phi_q=phi, dual_roots=rs, n_terms=n_terms, x_min=x_min)


def _series(ctx, x, n_terms=None):
    """(value, last paired term magnitude) on an array of x > 0, no range checks."""
    zs = ctx.dual_roots.zetas[:ctx.n_terms]
    c = ctx.coefs
    if n_terms is not None:
        zs, c = zs[:n_terms], c[:n_terms]
    val = ctx.lead_coef * np.exp(ctx.phi_q * x) + ctx.coef0 * np.exp(-ctx.dual_roots.zeta0 * x)
    step = max(1, (1 << 21) // max(len(zs), 1))
    tail = np.zeros(x.shape)
    for i in range(0, len(x), step):
        e = np.exp(-np.outer(x[i:i + step], zs))
        val[i:i + step] += 2 * np.real(e @ c)
        if len(zs):
            tail[i:i + step] = 2 * np.abs(e[:, -1] * c[-1])
    return val, tail


def scale_function(ctx: ScaleContext, x, with_error=False, x_min: float | None = None):
    """W^(q)(x) from the root series.

    Returns 0 for x <= 0.  Points in (0, x_min) are refused because the
    truncated series is unreliable there; pass ``x_min=0`` to override.
    With ``with_error`` the magnitude of the last included term is returned
    as a heuristic truncation estimate.
    """
    x_min = ctx.x_min if x_min is None else x_min
    xa = np.asarray(x, dtype=float)
    xs = np.atleast_1d(xa)
    if np.any((xs > 0) & (xs < x_min)):
        raise DomainError(f"x below x_min={x_min}; the truncated series is unreliable there")
    out = np.zeros(xs.shape)
    err = np.zeros(xs.shape)
    pos = xs > 0
    if pos.any():
        out[pos], err[pos] = _series(ctx, xs[pos])
    if xa.ndim == 0:
        out, err = out[0], err[0]
    return (out, err) if with_error else out


def unpaired_series(ctx: ScaleContext, x):
    """The series summed over both conjugate halves separately, as a complex number.

    Its imaginary part measures how well conjugate pairing cancels.
    """
    zs = ctx.dual_roots.zetas[:ctx.n_terms]
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    up = np.exp(-np.outer(xs, zs)) @ (1.0 / ctx.model.psi_prime(-zs))
    down = np.exp(-np.outer(xs, zs.conj())) @ (1.0 / ctx.model.psi_prime(-zs.conj()))
    total = ctx.lead_coef * np.exp(ctx.phi_q * xs) + ctx.coef0 * np.exp(-ctx.dual_roots.zeta0 * xs) + up + down
    return total


def _adaptive_simpson(f, a, b, tol, max_level=40):
    """Integral of a vectorized f over [a, b]; intervals are refined breadth-first."""
    lo = np.array([a])
    hi = np.array([b])
    flo, fhi = f(lo), f(hi)
    fmid = f(0.5 * (lo + hi))
    total = 0.0
    width = b - a
    for _ in range(max_level):
        mid = 0.5 * (lo + hi)
        q1 = f(0.5 * (lo + mid))
        q3 = f(0.5 * (mid + hi))
        h = hi - lo
        whole = h / 6 * (flo + 4 * fmid + fhi)
        halves = h / 12 * (flo + 4 * q1 + 2 * fmid + 4 * q3 + fhi)
        err = np.abs(halves - whole)
        done = err <= 15 * tol * h / width
        total += float(np.sum(halves[done] + (halves[done] - whole[done]) / 15))
        if done.all():
            return total
        k = ~done
        lo, mid, hi = lo[k], mid[k], hi[k]
        flo, fmid, fhi, q1, q3 = flo[k], fmid[k], fhi[k], q1[k], q3[k]
        lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])
        flo, fhi = np.concatenate([flo, fmid]), np.concatenate([fmid, fhi])
        fmid = np.concatenate([q1, q3])
    raise DomainError("adaptive Simpson did not reach the tolerance")


def scale_laplace_check(ctx: ScaleContext, z: float, upper: float = 30.0, tol: float = 1e-10):
    """(numeric int_0^upper exp(-z x) W(x) dx, 1/(psi(z) - q)).

    The series is evaluated down to x = 0 here (its right limit there is
    finite), since the refusal threshold only guards pointwise accuracy.
    """
    if not z > ctx.phi_q:
        raise DomainError("z must exceed Phi(q) for the transform to converge")
    if math.exp((ctx.phi_q - z) * upper) > 1e-8:
        raise DomainError("upper too small for exp((Phi - z) upper) < 1e-8")

    def f(x):
        return np.exp(-z * x) * _series(ctx, x)[0]

    numeric = _adaptive_simpson(f, 0.0, upper, tol)
    analytic = 1.0 / (float(np.real(ctx.model.psi(z))) - ctx.q)
    return numeric, analytic
