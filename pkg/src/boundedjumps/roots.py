"""Solutions of psi(z) = q: the real root zeta_0 and the first-quadrant roots.

Small complex roots are located with the argument principle (count roots in
a rectangle, Newton when there is exactly one, otherwise subdivide).  Large
roots are obtained by Newton's method started from their asymptotic
approximation

    z_n = (1/k) [log|B/A| + (a+b) log(2 n pi / k)]
          + (i/k) [arg(B/A) + ((a+b)/2 + 2n + 1) pi].

Pure-jump lattice models are solved exactly through the polynomial obtained
from the substitution w = exp(h z).
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (BoundaryRootError, DomainError, EnumerationError, ModelError,
                     MultipleRootError, PrecisionError)
from .models import AsymptoticProfile, LatticeCompoundPoissonModel, LevyModel

log = logging.getLogger(__name__)

__all__ = [
    "Rectangle",
    "RootConfig",
    "RootSet",
    "SimplicityReport",
    "newton",
    "find_zeta0",
    "winding_count",
    "subdivision_search",
    "asymptotic_seed",
    "assemble_roots",
    "verify_simple",
    "relative_residual",
]

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(3)


@dataclass(frozen=True)
class Rectangle:
    lo: complex
    hi: complex

    def __post_init__(self):
        lo, hi = complex(self.lo), complex(self.hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if not (lo.real < hi.real and lo.imag < hi.imag):
            raise ValueError(f"degenerate rectangle {lo} .. {hi}")

    @property
    def diameter(self):
        return abs(self.hi - self.lo)

    @property
    def center(self):
        return 0.5 * (self.lo + self.hi)

    def corners(self):
        lo, hi = self.lo, self.hi
        return [lo, complex(hi.real, lo.imag), hi, complex(lo.real, hi.imag)]

    def contains(self, z):
        return (self.lo.real < z.real < self.hi.real) and (self.lo.imag < z.imag < self.hi.imag)

    def shifted(self, dz):
        return Rectangle(self.lo + dz, self.hi + dz)

    def split(self, tx=0.5, ty=0.5):
        lo, hi = self.lo, self.hi
        xm = lo.real + tx * (hi.real - lo.real)
        ym = lo.imag + ty * (hi.imag - lo.imag)
        return [
            Rectangle(lo, complex(xm, ym)),
            Rectangle(complex(xm, lo.imag), complex(hi.real, ym)),
            Rectangle(complex(xm, ym), hi),
            Rectangle(complex(lo.real, ym), complex(xm, hi.imag)),
        ]


@dataclass(frozen=True)
class RootConfig:
    """Tuning knobs for root location."""

    max_depth: int = 40
    n_switch: int = 20
    strip_sample: int = 50
    newton_max_iter: int = 50
    residual_tol: float = 1e-9
    dedup_distance: float = 1e-8
    boundary_retries: int = 5
    max_refine: int = 40


DEFAULT_CONFIG = RootConfig()


def relative_residual(model, q, z):
    """``|psi(z) - q|`` scaled by the evaluation's rounding floor ``1 + q + |z psi'(z)|``."""
    z = np.asarray(z, dtype=complex)
    return np.abs(model.psi(z) - q) / (1.0 + q + np.abs(z * model.psi_prime(z)))


# ---------------------------------------------------------------------------
# Newton
# ---------------------------------------------------------------------------


def newton(model: LevyModel, q: float, z0, max_iter: int = 50, tol: float = 1e-13):
    """Damped Newton iteration on ``psi(z) - q`` for an array of starting points.

    Returns ``(z, converged)``.  A step is halved (up to 30 times) while it
    increases ``|psi - q|`` and is still large compared with ``|z|``.
    """
    z = np.array(z0, dtype=complex, ndmin=1)
    f = model.psi(z) - q
    done = np.zeros(z.shape, dtype=bool)
    for _ in range(max_iter):
        act = ~done
        if not act.any():
            break
        za, fa = z[act], f[act]
        step = fa / model.psi_prime(za)
        bad = ~np.isfinite(step)
        step[bad] = 0.0
        lam = np.ones(za.shape)
        cand = za - step
        with np.errstate(all="ignore"):
            try:
                fc = model.psi(cand) - q
            except DomainError:
                fc = np.full(cand.shape, np.inf, dtype=complex)
        for _ in range(30):
            worse = ~(np.abs(fc) <= np.abs(fa)) & (np.abs(lam * step) > 1e-10 * (1 + np.abs(za)))
            if not worse.any():
                break
            lam[worse] *= 0.5
            cand[worse] = za[worse] - lam[worse] * step[worse]
            with np.errstate(all="ignore"):
                try:
                    fc[worse] = model.psi(cand[worse]) - q
                except DomainError:
                    fc[worse] = np.inf
        small = np.abs(lam * step) < tol * (1 + np.abs(za))
        z[act] = cand
        f[act] = fc
        idx = np.flatnonzero(act)
        done[idx[small | (fa == 0) | bad]] = True
    conv = done & np.isfinite(z)
    return z, conv


# ---------------------------------------------------------------------------
# zeta_0
# ---------------------------------------------------------------------------


def _real_psi(model, x):
    return float(np.real(model.psi(x)))


def find_zeta0(model: LevyModel, q: float) -> float:
    """Unique positive solution of ``psi(x) = q``: bracket, bisect, polish."""
    if not q > 0:
        raise DomainError("q must be > 0")
    lo, hi = 0.0, 1.0 / max(getattr(model, "k", 1.0), 1e-300)
    fhi = _real_psi(model, hi)
    while fhi <= q:
        lo = hi
        hi *= 2.0
        if hi > 700.0 / model.k:
            raise ModelError("psi(x) stays below q up to the overflow bound; inadmissible model")
        fhi = _real_psi(model, hi)
    while hi - lo > 1e-3:
        mid = 0.5 * (lo + hi)
        if _real_psi(model, mid) > q:
            hi = mid
        else:
            lo = mid
    x = 0.5 * (lo + hi)
    for _ in range(60):
        fx = _real_psi(model, x) - q
        if fx > 0:
            hi = min(hi, x)
        else:
            lo = max(lo, x)
        dfx = float(np.real(model.psi_prime(x)))
        step = fx / dfx if dfx > 0 else math.inf
        nx = x - step
        if not lo <= nx <= hi:
            nx = 0.5 * (lo + hi)
        if abs(nx - x) <= 1e-15 * max(1.0, abs(x)):
            x = nx
            break
        x = nx
    return x


# ---------------------------------------------------------------------------
# Argument principle
# ---------------------------------------------------------------------------


def _edge_phase(model, q, a, b, n_init, max_refine, min_len):
    """Total change of arg(psi - q) along the segment a -> b.

    Phase jumps between samples are kept below pi/3, and every interval is
    cross-checked against a 3-point Gauss-Legendre value of
    Im int psi'/(psi - q) dz to rule out aliasing.
    """
    t = np.linspace(0.0, 1.0, n_init + 1)
    pts = a + (b - a) * t
    fv = model.psi(pts) - q
    za, zb = pts[:-1], pts[1:]
    fa, fb = fv[:-1], fv[1:]
    total = 0.0
    scale = 1.0 + q
    for _ in range(max_refine):
        if np.any(np.abs(fa) <= 1e-13 * scale) or np.any(np.abs(fb) <= 1e-13 * scale):
            raise BoundaryRootError("psi - q vanishes on the contour")
        dphi = np.angle(fb / fa)
        bad = np.abs(dphi) > np.pi / 3
        ok = ~bad
        if ok.any():
            h = 0.5 * (zb[ok] - za[ok])
            mid = 0.5 * (zb[ok] + za[ok])
            nodes = mid[:, None] + h[:, None] * _GL_NODES[None, :]
            ratio = model.psi_prime(nodes) / (model.psi(nodes) - q)
            quad = h * (ratio @ _GL_WEIGHTS)
            alias = np.abs(quad.imag - dphi[ok]) > 0.1
            bad[np.flatnonzero(ok)[alias]] = True
        good = ~bad
        total += float(np.sum(dphi[good]))
        if not bad.any():
            return total
        za, zb, fa, fb = za[bad], zb[bad], fa[bad], fb[bad]
        if np.min(np.abs(zb - za)) < min_len:
            raise BoundaryRootError("phase refinement collapsed; root on or near the contour")
        zm = 0.5 * (za + zb)
        fm = model.psi(zm) - q
        za, zb = np.concatenate([za, zm]), np.concatenate([zm, zb])
        fa, fb = np.concatenate([fa, fm]), np.concatenate([fm, fb])
    raise PrecisionError("edge phase did not resolve within the refinement budget")


def winding_count(model: LevyModel, q: float, rect: Rectangle, cfg: RootConfig = DEFAULT_CONFIG) -> int:
    """Number of roots of ``psi - q`` inside ``rect`` (with multiplicity)."""
    corners = rect.corners()
    k = getattr(model, "k", 1.0)
    total = 0.0
    min_len = 1e-10 * rect.diameter
    for a, b in zip(corners, corners[1:] + corners[:1]):
        n_init = 8 + int(2.0 * k * abs(b - a))
        total += _edge_phase(model, q, a, b, n_init, cfg.max_refine, min_len)
    turns = total / (2 * np.pi)
    n = int(round(turns))
    if abs(turns - n) > 0.25:
        raise PrecisionError(f"non-integer winding {turns:.4f}")
    return n


def _count_with_retry(model, q, rect, cfg):
    """Winding count, nudging the rectangle off roots that sit on its boundary."""
    for attempt in range(cfg.boundary_retries + 1):
        try:
            return winding_count(model, q, rect, cfg), rect
        except BoundaryRootError:
            if attempt == cfg.boundary_retries:
                raise
            rect = rect.shifted(1e-4 * (1 + 1j) * rect.diameter)
    raise AssertionError("unreachable")


def subdivision_search(model: LevyModel, q: float, rect: Rectangle, cfg: RootConfig = DEFAULT_CONFIG,
                       start=None, _count=None):
    """All roots of ``psi - q`` inside ``rect``, each polished by Newton.

    ``start`` optionally supplies a Newton starting point used when the
    rectangle holds a single root (defaults to the centroid).
    """
    found = []
    if _count is None:
        n, rect = _count_with_retry(model, q, rect, cfg)
    else:
        n = _count
    stack = [(rect, n, 0, start)]
    while stack:
        r, n, depth, z0 = stack.pop()
        if n == 0:
            continue
        if depth > cfg.max_depth:
            raise MultipleRootError(f"subdivision depth exceeded in cell {r}", cell=r)
        if n == 1:
            guess = z0 if (z0 is not None and r.contains(z0)) else r.center
            z, conv = newton(model, q, [guess], cfg.newton_max_iter)
            zr = z[0]
            if conv[0] and r.contains(zr):
                found.append(zr)
                continue
        children = _split_clear(model, q, r, cfg)
        total = sum(c for _, c in children)
        if total != n:
            log.debug("child counts %d != parent %d in %s", total, n, r)
        for child, c in children:
            stack.append((child, c, depth + 1, z0))
    return found


def _split_clear(model, q, rect, cfg):
    """Quadrisect, moving the split lines if a root sits on one of them."""
    for attempt in range(cfg.boundary_retries + 1):
        t = 0.5 + 1e-4 * attempt * (1 + attempt)
        try:
            kids = rect.split(t, t)
            return [(kid, winding_count(model, q, kid, cfg)) for kid in kids]
        except BoundaryRootError:
            if attempt == cfg.boundary_retries:
                raise
    raise AssertionError("unreachable")


# ---------------------------------------------------------------------------
# Asymptotic seeds and assembly
# ---------------------------------------------------------------------------


def asymptotic_seed(profile: AsymptoticProfile, n):
    """Asymptotic approximation of the n-th large root (n >= 1); vectorized in n."""
    n_arr = np.asarray(n, dtype=float)
    if np.any(n_arr < 1):
        raise DomainError("seed index must be >= 1")
    A, a, B, b, k = profile.A, profile.a, profile.B, profile.b, profile.k
    ratio = B / A
    re = (math.log(abs(ratio)) + (a + b) * np.log(2 * n_arr * math.pi / k)) / k
    im = (cmath.phase(ratio) + (0.5 * (a + b) + 2 * n_arr + 1) * math.pi) / k
    out = re + 1j * im
    return out[()] if n_arr.ndim == 0 else out


@dataclass
class RootSet:
    """zeta_0 and the ordered first-quadrant roots of psi(z) = q.

    ``residual_sup`` is the largest relative residual (see
    :func:`relative_residual`).  Conjugate roots are implied, not stored.
    """

    q: float
    zeta0: float
    zetas: np.ndarray
    residual_sup: float
    min_prime: float
    seed_offset: int = 0
    k: float = 1.0
    profile: AsymptoticProfile | None = None
    lattice: tuple | None = None
    abs_residuals: np.ndarray = field(default=None, repr=False)

    def __len__(self):
        return len(self.zetas)

    def extension(self, n_from: int, n_to: int) -> np.ndarray:
        """Roots with indices ``n_from..n_to`` (1-based), computed or approximated.

        Stored roots are returned as-is; beyond them lattice models use exact
        roots and other models the asymptotic seeds shifted by the offset.
        """
        out = []
        stored = self.zetas
        if n_from <= len(stored):
            out.append(stored[n_from - 1:min(n_to, len(stored))])
            n_from = len(stored) + 1
        if n_from <= n_to:
            if self.lattice is not None:
                h, ws = self.lattice
                out.append(_lattice_enumerate(h, ws, n_to)[n_from - 1:n_to])
            elif self.profile is not None:
                idx = np.arange(n_from, n_to + 1) - self.seed_offset
                idx = np.maximum(idx, 1)
                out.append(asymptotic_seed(self.profile, idx))
            else:
                raise DomainError("no way to extend this root set beyond the stored roots")
        return np.concatenate(out) if out else np.empty(0, dtype=complex)

    def tail_model(self):
        """(c0, c1, density): Re zeta ~ c0 + c1 log(Im zeta) and roots per unit height."""
        density = self.k / (2 * math.pi)
        if self.lattice is not None:
            h, ws = self.lattice
            res = np.log(np.abs(ws)) / h
            return float(np.mean(res)), 0.0, density
        if self.profile is not None:
            p = self.profile
            c1 = (p.a + p.b) / p.k
            c0 = math.log(abs(p.B / p.A)) / p.k
            return c0, c1, density
        return float(np.mean(self.zetas.real[-10:])), 0.0, density


def _lattice_enumerate(h, ws, count):
    """First ``count`` first-quadrant roots log(w)/h + 2 pi i n / h, ordered by modulus."""
    per_line = count + 2
    n = np.arange(-1, per_line + 1)
    cand = (np.log(ws)[:, None] + 2j * np.pi * n[None, :]) / h
    cand = cand.ravel()
    cand = cand[(cand.imag > 0) & (cand.real > 0)]
    cand = cand[np.argsort(np.abs(cand), kind="stable")]
    return cand[:count]


def _lattice_rootset(model: LatticeCompoundPoissonModel, q, count, cfg):
    ws = model.lattice_roots(q).astype(complex)
    outer = ws[np.abs(ws) > 1.0]
    real_pos = outer[(np.abs(outer.imag) < 1e-10 * np.abs(outer)) & (outer.real > 0)]
    if len(real_pos) != 1:
        raise EnumerationError("expected exactly one real root w > 1", count=len(real_pos))
    zeta0 = float(np.log(real_pos[0].real) / model.h)
    zeta0 = float(newton(model, q, [zeta0], cfg.newton_max_iter)[0][0].real)
    zetas = _lattice_enumerate(model.h, outer, count)
    zetas, _ = newton(model, q, zetas, cfg.newton_max_iter)
    return zeta0, zetas, outer


def _x_right(seed_re, zeta0, k):
    return 1.5 * max(seed_re, zeta0) + 4.0 / k


def assemble_roots(model: LevyModel, q: float, count: int, cfg: RootConfig = DEFAULT_CONFIG) -> RootSet:
    """The first ``count`` first-quadrant roots of ``psi(z) = q`` and ``zeta_0``."""
    if count < 1:
        raise DomainError("count must be >= 1")
    if q < 0 or (q == 0 and not float(np.real(model.psi_prime(0.0))) > 0):
        raise DomainError("q must be > 0, or q = 0 with psi'(0) > 0")
    k = model.k
    if isinstance(model, LatticeCompoundPoissonModel) and model.is_pure_jump:
        zeta0, zetas, outer = _lattice_rootset(model, q, count, cfg)
        return _finish(model, q, zeta0, zetas, 0, None, (model.h, outer), cfg)

    profile = model.profile()
    if q == 0:
        # psi increases through 0, so zeta_0 = 0 and the complex roots lie in Re z > 0
        zeta0, x_lo = 0.0, -0.25 / k
    else:
        zeta0 = find_zeta0(model, q)
        x_lo = 0.5 * zeta0
    half = math.pi / k
    n_sw = cfg.n_switch
    seeds_low = asymptotic_seed(profile, np.arange(1, n_sw + 1))

    # no complex roots hug the real axis: the thin box around zeta0 holds only zeta0
    y_lo = min(1e-2 / k, 0.25 * (seeds_low[0].imag - half))
    x_hi0 = _x_right(max(s.real for s in seeds_low), zeta0, k)
    thin = Rectangle(complex(x_lo, -y_lo), complex(x_hi0, y_lo))
    n_thin = winding_count(model, q, thin, cfg)
    if n_thin != 1:
        raise EnumerationError(f"{n_thin} roots near the real axis, expected only zeta_0", strip=-1, count=n_thin)

    boxed = []
    bottom_top = seeds_low[0].imag - half
    boxed += subdivision_search(model, q, Rectangle(complex(x_lo, y_lo), complex(x_hi0, bottom_top)), cfg)
    for j, s in enumerate(seeds_low, start=1):
        strip = Rectangle(complex(x_lo, s.imag - half), complex(_x_right(s.real, zeta0, k), s.imag + half))
        boxed += subdivision_search(model, q, strip, cfg, start=s)
    n_box = len(boxed)
    offset = n_box - n_sw

    n_more = max(count - n_box, 0) + 2
    idx = np.arange(n_sw + 1, n_sw + 1 + n_more)
    seeds = asymptotic_seed(profile, idx)
    z, conv = newton(model, q, seeds, cfg.newton_max_iter)
    in_strip = conv & (np.abs(z.imag - seeds.imag) < half) & (z.real > 0)
    for i in np.flatnonzero(~in_strip):
        s = seeds[i]
        strip = Rectangle(complex(x_lo, s.imag - half), complex(_x_right(s.real, zeta0, k), s.imag + half))
        got = subdivision_search(model, q, strip, cfg, start=s)
        if len(got) != 1:
            raise EnumerationError(f"strip of seed {idx[i]} holds {len(got)} roots", strip=int(idx[i]), count=len(got))
        z[i] = got[0]
    # sampled strip audit: each strip around a large seed holds exactly one root
    for i in range(0, n_more, max(cfg.strip_sample, 1)):
        s = seeds[i]
        strip = Rectangle(complex(x_lo, s.imag - half), complex(_x_right(s.real, zeta0, k), s.imag + half))
        c, _ = _count_with_retry(model, q, strip, cfg)
        if c != 1:
            raise EnumerationError(f"strip of seed {idx[i]} holds {c} roots", strip=int(idx[i]), count=c)
    zetas = np.concatenate([np.array(boxed, dtype=complex), z])
    return _finish(model, q, zeta0, zetas, offset, profile, None, cfg, count)


def _finish(model, q, zeta0, zetas, offset, profile, lattice, cfg, count=None):
    zetas = np.asarray(zetas, dtype=complex)
    zetas = zetas[np.argsort(np.abs(zetas), kind="stable")]
    keep = np.ones(len(zetas), dtype=bool)
    for i in range(1, len(zetas)):
        lo = max(0, i - 3)
        if np.any(np.abs(zetas[lo:i][keep[lo:i]] - zetas[i]) < cfg.dedup_distance):
            keep[i] = False
    zetas = zetas[keep]
    if count is not None:
        if len(zetas) < count:
            raise EnumerationError(f"only {len(zetas)} roots assembled, {count} requested", count=len(zetas))
        zetas = zetas[:count]
    bad = (zetas.imag <= 0) | (zetas.real <= 0)
    if bad.any():
        raise EnumerationError("root left the first quadrant", count=int(bad.sum()))
    rel = relative_residual(model, q, zetas)
    rel0 = float(relative_residual(model, q, zeta0))
    res_sup = float(max(rel.max(initial=0.0), rel0))
    if res_sup > cfg.residual_tol:
        raise EnumerationError(f"root residual {res_sup:.3e} exceeds {cfg.residual_tol:.1e}")
    primes = np.abs(model.psi_prime(np.concatenate([[zeta0], zetas])))
    rs = RootSet(q=q, zeta0=float(zeta0), zetas=zetas, residual_sup=res_sup,
                 min_prime=float(primes.min()), seed_offset=int(offset), k=float(model.k),
                 profile=profile, lattice=lattice,
                 abs_residuals=np.abs(model.psi(zetas) - q))
    return rs


@dataclass(frozen=True)
class SimplicityReport:
    min_prime: float
    flagged: tuple
    floor: float

    @property
    def ok(self):
        return not self.flagged


def verify_simple(model: LevyModel, rs: RootSet, floor: float = 1e-6) -> SimplicityReport:
    """Flag roots whose derivative magnitude falls below ``floor``.

    Index 0 refers to zeta_0 and index n to the n-th complex root.
    """
    pts = np.concatenate([[rs.zeta0], rs.zetas])
    mags = np.abs(model.psi_prime(pts))
    flagged = tuple(int(i) for i in np.flatnonzero(mags < floor))
    return SimplicityReport(min_prime=float(mags.min()), flagged=flagged, floor=floor)
