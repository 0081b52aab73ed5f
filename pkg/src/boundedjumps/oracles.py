"""Brute-force references: Monte Carlo extrema, Bromwich inversion, closed forms.

None of these share code paths with the root-based evaluators, which is the
point: they exist to cross-check them.
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator

from .errors import DomainError, ModelError, UnsupportedModelError
from .models import (LatticeCompoundPoissonModel, SpectrallyNegativeModel,
                     TruncatedKobolModel)

__all__ = [
    "McConfig",
    "McResult",
    "JumpComponents",
    "jump_components",
    "simulate_extrema",
    "mc_supremum",
    "bromwich_scale",
    "PoissonReference",
    "closed_form_poisson",
    "psi_quadrature",
    "bisection_root",
    "ks_statistic",
    "GENERATOR_NAME",
]

GENERATOR_NAME = "PCG64"
_BLOCK = 8192
_TABLE_NODES = 4096
_FINE_NODES = 1 << 15


@dataclass(frozen=True)
class McConfig:
    n_paths: int = 100_000
    jump_cutoff_eps: float = 1e-2
    seed: int = 12345
    antithetic: bool = False
    threads: int = 1

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")
        if not self.jump_cutoff_eps > 0:
            raise ValueError("jump_cutoff_eps must be > 0")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")


class _TailSampler:
    """Inverse-transform sampler for a Levy density restricted to (lo, hi)."""

    def __init__(self, density, lo, hi):
        u = np.linspace(math.log(lo), math.log(hi), _FINE_NODES)
        x = np.exp(u)
        w = density(x) * x  # density in log-coordinates
        cum = integrate.cumulative_trapezoid(w, u, initial=0.0)
        self.rate = float(cum[-1])
        self.mean = float(integrate.trapezoid(w * x, u))
        self.second = float(integrate.trapezoid(w * x * x, u))
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise ModelError("jump tail has no finite positive mass")
        p = cum / self.rate
        keep = np.concatenate([[True], np.diff(p) > 0])
        grid = np.linspace(0.0, 1.0, _TABLE_NODES)
        logx = np.interp(grid, p[keep], u[keep])
        self._inv = PchipInterpolator(grid, logx)

    def sample(self, uni):
        return np.exp(self._inv(uni))


@dataclass
class JumpComponents:
    """Levy triplet pieces used by the simulator.

    ``drift`` already absorbs the mean of the discarded small jumps; the
    Gaussian coefficient ``sigma`` includes their variance when they are
    replaced by a Brownian motion.
    """

    sigma: float = 0.0
    drift: float = 0.0
    up: _TailSampler | None = None
    down: _TailSampler | None = None
    atoms: tuple = ()  # (sizes, probabilities, total rate) for lattice models
    eps: float = 0.0
    small_variance: float = 0.0
    notes: dict = field(default_factory=dict)

    @property
    def rate(self):
        r = 0.0
        if self.up is not None:
            r += self.up.rate
        if self.down is not None:
            r += self.down.rate
        if self.atoms:
            r += self.atoms[2]
        return r


def _small_moments(density, eps):
    """(mean, second moment, |first| moment) of the jumps in (0, eps) for a one-sided density."""
    lo = eps * 1e-12
    u = np.linspace(math.log(lo), math.log(eps), 4096)
    x = np.exp(u)
    w = density(x) * x
    return float(integrate.trapezoid(w * x, u)), float(integrate.trapezoid(w * x * x, u))


def jump_components(model, eps: float) -> JumpComponents:
    """Split the model into Gaussian part, big-jump samplers and drift."""
    mean = float(np.real(model.psi_prime(0.0)))
    if isinstance(model, LatticeCompoundPoissonModel):
        sizes = model.h * np.array(list(model.masses.keys()), dtype=float)
        mass = np.array(list(model.masses.values()), dtype=float)
        total = float(mass.sum())
        drift = mean - float(np.sum(sizes * mass))
        return JumpComponents(sigma=model.sigma, drift=drift, atoms=(sizes, np.cumsum(mass) / total, total))

    if isinstance(model, TruncatedKobolModel):
        sides = []
        if model.c_pos > 0:
            sides.append(("up", lambda x: model.levy_density(x), model.k, model.alpha_pos))
        if model.c_neg > 0:
            far = eps + 60.0 / model.beta_neg
            sides.append(("down", lambda x: model.levy_density(-x), far, model.alpha_neg))
    elif isinstance(model, SpectrallyNegativeModel):
        sides = []
        if model.c > 0:
            sides.append(("down", lambda x: model.levy_density(-x), model.k, model.alpha))
    else:
        raise UnsupportedModelError(f"no simulator for {type(model).__name__}")

    comp = JumpComponents(sigma=model.sigma, eps=eps)
    big_mean = 0.0
    var_small = 0.0
    for name, dens, far, alpha in sides:
        if eps >= far:
            raise ModelError("jump_cutoff_eps must be below the jump range")
        sampler = _TailSampler(dens, eps, far)
        sign = 1.0 if name == "up" else -1.0
        big_mean += sign * sampler.mean
        setattr(comp, name, sampler)
        if alpha > 1:
            # unbounded variation: small jumps become a Brownian motion with matching variance
            var_small += _small_moments(dens, eps)[1]
    comp.small_variance = var_small
    comp.sigma = math.sqrt(model.sigma ** 2 + var_small)
    comp.drift = mean - big_mean
    return comp


def _block_extrema(comp: JumpComponents, q: float, n: int, rng: np.random.Generator, antithetic: bool):
    """Supremum and infimum of n paths run to independent exponential(q) times."""
    u_t = 1.0 - rng.random(n)
    if antithetic:
        half = (n + 1) // 2
        u_t[half:] = 1.0 - u_t[:n - half] + 1e-300
    horizon = -np.log(u_t) / q
    rate = comp.rate
    counts = rng.poisson(rate * horizon) if rate > 0 else np.zeros(n, dtype=np.int64)
    total = int(counts.sum())
    pid = np.repeat(np.arange(n), counts)
    # jump times sorted within each path
    tt = rng.random(total)
    order = np.argsort(pid + tt, kind="stable")
    tt = tt[order] * horizon[pid]
    # jump sizes
    sizes = np.empty(total)
    pick = rng.random(total) * rate
    unif = rng.random(total)
    lo = 0.0
    for sampler, sign in ((comp.up, 1.0), (comp.down, -1.0)):
        if sampler is None:
            continue
        sel = (pick >= lo) & (pick < lo + sampler.rate)
        sizes[sel] = sign * sampler.sample(unif[sel])
        lo += sampler.rate
    if comp.atoms:
        atom_sizes, cum, arate = comp.atoms
        sel = pick >= lo
        idx = np.searchsorted(cum, unif[sel], side="right")
        sizes[sel] = atom_sizes[np.minimum(idx, len(atom_sizes) - 1)]

    # segments: n_i jumps give n_i + 1 Gaussian stretches
    nseg = counts + 1
    first = np.concatenate([[0], np.cumsum(nseg)[:-1]])
    seg_pid = np.repeat(np.arange(n), nseg)
    is_last = np.zeros(total + n, dtype=bool)
    is_last[first + nseg - 1] = True
    bounds_end = np.empty(total + n)
    bounds_end[~is_last] = tt
    bounds_end[is_last] = horizon
    bounds_start = np.empty_like(bounds_end)
    bounds_start[1:] = bounds_end[:-1]
    bounds_start[first] = 0.0
    dt = np.maximum(bounds_end - bounds_start, 0.0)
    jump_after = np.zeros(total + n)
    jump_after[~is_last] = sizes

    z = rng.standard_normal(total + n)
    if antithetic:
        # mirrored paths reuse the horizon uniform and flip their Gaussian increments
        z = np.where(seg_pid >= (n + 1) // 2, -z, z)
    gauss = comp.drift * dt + comp.sigma * np.sqrt(dt) * z
    inc = gauss + jump_after
    cs = np.cumsum(inc)
    base = cs[first] - inc[first]
    start = cs - inc - base[seg_pid]
    end = start + gauss
    if comp.sigma > 0:
        spread = (end - start) ** 2
        lu1 = np.log(1.0 - rng.random(total + n))
        lu2 = np.log(1.0 - rng.random(total + n))
        s2 = comp.sigma ** 2
        seg_max = 0.5 * (start + end + np.sqrt(spread - 2 * s2 * dt * lu1))
        seg_min = 0.5 * (start + end - np.sqrt(spread - 2 * s2 * dt * lu2))
    else:
        seg_max = np.maximum(start, end)
        seg_min = np.minimum(start, end)
    sup = np.maximum(np.maximum.reduceat(seg_max, first), 0.0)
    inf = np.minimum(np.minimum.reduceat(seg_min, first), 0.0)
    return sup, inf


@dataclass(frozen=True)
class McResult:
    sup: np.ndarray
    inf: np.ndarray
    generator: str
    eps: float
    n_paths: int

    def sorted_sup(self):
        return np.sort(self.sup)


def simulate_extrema(model, q: float, cfg: McConfig, components: JumpComponents | None = None) -> McResult:
    """Simulate (sup, inf) of X on [0, e_q] for ``cfg.n_paths`` independent paths.

    Paths are generated in fixed-size blocks, block b drawing from the b-th
    child of ``SeedSequence(cfg.seed)``, so results do not depend on
    ``cfg.threads``.  Between jumps the maximum of the Brownian bridge is
    sampled exactly.
    """
    if not q > 0:
        raise DomainError("q must be > 0")
    comp = components if components is not None else jump_components(model, cfg.jump_cutoff_eps)
    n_blocks = -(-cfg.n_paths // _BLOCK)
    seqs = np.random.SeedSequence(cfg.seed).spawn(n_blocks)
    sizes = [min(_BLOCK, cfg.n_paths - b * _BLOCK) for b in range(n_blocks)]

    def run(b):
        rng = np.random.Generator(np.random.PCG64(seqs[b]))
        return _block_extrema(comp, q, sizes[b], rng, cfg.antithetic)

    if cfg.threads > 1 and n_blocks > 1:
        with ThreadPoolExecutor(cfg.threads) as ex:
            parts = list(ex.map(run, range(n_blocks)))
    else:
        parts = [run(b) for b in range(n_blocks)]
    sup = np.concatenate([p[0] for p in parts])
    inf = np.concatenate([p[1] for p in parts])
    return McResult(sup=sup, inf=inf, generator=GENERATOR_NAME, eps=comp.eps, n_paths=cfg.n_paths)


def mc_supremum(model, q: float, cfg: McConfig) -> np.ndarray:
    """Sorted sample of the supremum of X over an exponential(q) horizon."""
    return simulate_extrema(model, q, cfg).sorted_sup()


# ---------------------------------------------------------------------------
# Bromwich inversion
# ---------------------------------------------------------------------------


def bromwich_scale(model: SpectrallyNegativeModel, q: float, x: float, c: float | None = None,
                   im_cutoff: float = 5000.0, n_nodes: int = 200_000, phi_q: float | None = None,
                   with_error: bool = False):
    """W^(q)(x) by trapezoidal inversion of 1/(psi(z) - q) along Re z = c.

    The leading large-|z| behaviour is subtracted and inverted exactly:
    2/(sigma^2 (z-p)^2) when sigma > 0, or 1/(mu (z-p)) for bounded
    variation, with p = c - 1.  The remainder decays fast enough that the
    integral over [0, im_cutoff] is accurate.
    """
    if not x > 0:
        raise DomainError("x must be > 0")
    if phi_q is None:
        from .roots import find_zeta0
        phi_q = find_zeta0(model, q) if q > 0 else 0.0
    if c is None:
        c = phi_q + 1.0
    if not c > phi_q:
        raise DomainError(f"contour abscissa c={c} must exceed Phi(q)={phi_q}")
    p = c - 1.0
    sigma = model.sigma
    mu = getattr(model, "mu", 0.0)
    if sigma > 0:
        def lead(z):
            return 2.0 / (sigma ** 2 * (z - p) ** 2)
        lead_inv = 2.0 / sigma ** 2 * x * math.exp(p * x)
    elif getattr(model, "variation_class", None) is not None and model.variation_class.name == "BOUNDED" and mu != 0:
        def lead(z):
            return 1.0 / (mu * (z - p))
        lead_inv = math.exp(p * x) / mu
    else:
        def lead(z):
            return 0.0
        lead_inv = 0.0

    t = np.linspace(0.0, im_cutoff, n_nodes + 1)
    z = c + 1j * t
    g = np.real(np.exp(z * x) * (1.0 / (model.psi(z) - q) - lead(z)))
    h = t[1] - t[0]
    val = h * (np.sum(g) - 0.5 * (g[0] + g[-1])) / math.pi + lead_inv
    tail = abs(g[-1]) * im_cutoff / math.pi
    return (val, tail) if with_error else val


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PoissonReference:
    """Exact quantities for psi(z) = exp(k z) - 1."""

    q: float
    k: float

    def root(self, n):
        return math.log1p(self.q) / self.k + 2j * math.pi * n / self.k if n else math.log1p(self.q) / self.k

    def phi_plus_exact(self, z):
        c = math.log1p(self.q)
        z = np.asarray(z, dtype=complex)
        return np.exp(self.k * z / 2) * math.sinh(c / 2) / np.sinh((self.k * z + c) / 2)

    @property
    def a0_exact(self):
        return self.q / (self.k * (1 + self.q))


def closed_form_poisson(q: float, k: float) -> PoissonReference:
    if not (q > 0 and k > 0):
        raise DomainError("q and k must be > 0")
    return PoissonReference(q=q, k=k)


def psi_quadrature(model: TruncatedKobolModel, z, tol: float = 1e-12) -> complex:
    """Levy-Khintchine integral for a bounded-variation KoBoL model (cutoff h = 0).

    ``sigma^2 z^2/2 + mu z + int (e^{z x} - 1) nu(dx)`` with the integrable
    x^(-1-alpha) singularity handled by an algebraic-weight rule.
    """
    if not isinstance(model, TruncatedKobolModel):
        raise UnsupportedModelError("quadrature oracle covers the truncated KoBoL family")
    if (model.c_pos > 0 and model.alpha_pos > 1) or (model.c_neg > 0 and model.alpha_neg > 1):
        raise UnsupportedModelError("quadrature oracle needs alpha < 1 on both sides")
    z = complex(z)

    def part(fn, a, b, weight_alpha=None):
        kw = dict(epsabs=tol, epsrel=tol, limit=400)
        if weight_alpha is not None:
            kw.update(weight="alg", wvar=(-weight_alpha, 0.0))
        re = integrate.quad(lambda x: fn(x).real, a, b, **kw)[0]
        im = integrate.quad(lambda x: fn(x).imag, a, b, **kw)[0]
        return complex(re, im)

    def bracket(zz, x):
        # (e^{zz x} - 1)/x, continuous at 0
        return (cmath.exp(zz * x) - 1) / x if x > 0 else zz

    total = 0.5 * model.sigma ** 2 * z * z + model.mu * z
    if model.c_pos > 0:
        ap, bp = model.alpha_pos, model.beta_pos
        # (e^{zx}-1) x^{-1-a} = [(e^{zx}-1)/x] x^{-a}; the bracket is smooth
        total += model.c_pos * ap * part(
            lambda x: bracket(z, x) * math.exp(-bp * x), 0.0, model.k,
            weight_alpha=ap)
    if model.c_neg > 0:
        an, bn = model.alpha_neg, model.beta_neg
        f = lambda x: bracket(-z, x) * math.exp(-bn * x)
        total += model.c_neg * an * part(f, 0.0, 1.0, weight_alpha=an)
        total += model.c_neg * an * part(lambda x: f(x) * x ** (-an), 1.0, np.inf)
    return total


def bisection_root(f, lo: float, hi: float, iters: int = 60) -> float:
    """Plain bisection for a sign change of real f on [lo, hi]."""
    flo = f(lo)
    if flo * f(hi) > 0:
        raise DomainError("no sign change on the bracket")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def ks_statistic(sample, cdf, n_grid: int = 20001, n_audit: int = 200, seed: int = 0):
    """Kolmogorov-Smirnov distance between a sample and a continuous cdf.

    The cdf is evaluated on ``n_grid`` equispaced points and interpolated
    linearly; the largest interpolation error seen on ``n_audit`` sample
    points is added to the distance, so the result never understates it.
    """
    x = np.sort(np.asarray(sample, dtype=float))
    n = len(x)
    lo, hi = max(x[0], 0.0), x[-1]
    if hi > lo:
        grid = np.linspace(lo, hi, n_grid)
        fg = cdf(grid)
        fx = np.interp(x, grid, fg)
        pick = np.random.default_rng(seed).choice(n, size=min(n_audit, n), replace=False)
        slack = float(np.max(np.abs(cdf(x[pick]) - fx[pick])))
    else:
        fx = cdf(x)
        slack = 0.0
    d = max(np.max(np.arange(1, n + 1) / n - fx), np.max(fx - np.arange(n) / n))
    return float(d) + slack
