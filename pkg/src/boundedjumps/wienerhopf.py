"""Wiener-Hopf factors and the residue series for the supremum density.

With roots zeta_0 > 0 and {zeta_n} (first quadrant) of psi(z) = q,

    E[exp(-z S)] = exp(k z / 2) (1 + z/zeta_0)^-1
                   prod_n (1 + z/zeta_n)^-1 (1 + z/conj(zeta_n))^-1

where S is the supremum of X up to an independent exponential(q) time.
Assuming the product has a partial-fraction expansion with residues a_n at
-zeta_n (this is conjectural), S has density

    p(x) = a_0 exp(-zeta_0 x) + 2 sum_n Re[a_n exp(-zeta_n x)].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRootError, DomainError, UnsupportedModelError
from .roots import RootSet

__all__ = [
    "SupremumDensity",
    "phi_plus",
    "phi_minus",
    "compute_residues",
    "supremum_density",
    "supremum_cdf",
]

_CHUNK = 1 << 21  # complex entries per block in pairwise products
TAIL_FACTOR = 20


def _pair_log_sum(z, zetas):
    """sum_n log(1 + z/zeta_n) + log(1 + z/conj(zeta_n)) for each entry of z."""
    out = np.zeros(z.shape, dtype=complex)
    if len(zetas) == 0 or z.size == 0:
        return out
    zf = z.ravel()
    step = max(1, _CHUNK // max(zf.size, 1))
    acc = np.zeros(zf.shape, dtype=complex)
    for i in range(0, len(zetas), step):
        zs = zetas[i:i + step]
        inv = 1.0 / zs
        acc += np.sum(np.log1p(zf[:, None] * inv[None, :]) + np.log1p(zf[:, None] * inv.conj()[None, :]), axis=1)
    return acc.reshape(z.shape)


def _log_phi_plus(rs: RootSet, z, n_pairs: int, tail: bool):
    if n_pairs > len(rs.zetas):
        raise DomainError(f"n_pairs={n_pairs} exceeds the {len(rs.zetas)} stored roots")
    out = rs.k * z / 2 - np.log1p(z / rs.zeta0) - _pair_log_sum(z, rs.zetas[:n_pairs])
    if tail:
        m_far = max(TAIL_FACTOR * n_pairs, n_pairs + 1000)
        ext = rs.extension(n_pairs + 1, m_far)
        out -= _pair_log_sum(z, ext)
        c0, c1, rho = rs.tail_model()
        y = ext[-1].imag + math.pi / rs.k
        out -= rho * (2 * z * (c0 + c1 * (math.log(y) + 1)) + z * z) / y
    return out


def phi_plus(rs: RootSet, z, n_pairs: int | None = None, tail: bool = True):
    """Laplace transform ``E[exp(-z S)]`` of the supremum, from the root product.

    The product is accumulated in log space.  With ``tail=True`` the roots
    beyond ``n_pairs`` are accounted for: exactly (lattice models) or by
    their asymptotic approximations up to ``20 * n_pairs``, and beyond that
    by the integral of the leading-order log-factor over the root density.
    ``tail=False`` gives the plain truncated product.
    """
    n_pairs = len(rs.zetas) if n_pairs is None else int(n_pairs)
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    if np.any(z == -rs.zeta0) or np.any(np.isin(z, -rs.zetas[:n_pairs])):
        raise DomainError("z is a pole of the Wiener-Hopf factor")
    val = np.exp(_log_phi_plus(rs, z, n_pairs, tail))
    val[z == 0] = 1.0
    return val[0] if scalar else val


def phi_minus(model, rs: RootSet, z, n_pairs: int | None = None, tail: bool = True):
    """``E[exp(z I)]`` for the infimum I, via ``q / (q - psi(z)) / phi_plus(-z)``."""
    n_pairs = len(rs.zetas) if n_pairs is None else int(n_pairs)
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    roots = np.concatenate([[rs.zeta0], rs.zetas, rs.zetas.conj()])
    if np.min(np.abs(z[:, None] - roots[None, :])) < 1e-8:
        raise DomainError("z is within 1e-8 of a root of psi - q")
    q = rs.q
    val = q / (q - model.psi(z)) * np.exp(-_log_phi_plus(rs, -z, n_pairs, tail))
    val[z == 0] = 1.0
    return val[0] if scalar else val


@dataclass(frozen=True)
class SupremumDensity:
    """Residues of the Wiener-Hopf factor at -zeta_0 and -zeta_n, n <= truncation."""

    roots: RootSet
    a0: float
    residues: np.ndarray
    truncation: int
    has_atom: bool = False

    def __post_init__(self):
        if not self.a0 > 0:
            raise DomainError(f"a0={self.a0} must be positive")
        if len(self.residues) != self.truncation:
            raise ValueError("residue count does not match truncation")
        if not np.all(np.isfinite(self.residues)):
            raise DegenerateRootError("non-finite residue")

    @property
    def zetas(self):
        return self.roots.zetas[:self.truncation]

    def _series(self, x, weights_over_zeta=False):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        zs = self.zetas
        an = self.residues / zs if weights_over_zeta else self.residues
        a0 = self.a0 / self.roots.zeta0 if weights_over_zeta else self.a0
        step = max(1, _CHUNK // max(len(zs), 1))
        head = np.empty(x.shape)
        last = np.empty(x.shape)
        for i in range(0, len(x), step):
            xs = x[i:i + step]
            e = np.exp(-np.outer(xs, zs))
            if weights_over_zeta:
                head[i:i + step] = a0 * -np.expm1(-self.roots.zeta0 * xs) + 2 * np.real((1 - e) @ an)
                last[i:i + step] = 2 * np.abs(an[-1] * (1 - e[:, -1])) if len(zs) else 0.0
            else:
                head[i:i + step] = a0 * np.exp(-self.roots.zeta0 * xs) + 2 * np.real(e @ an)
                last[i:i + step] = 2 * np.abs(an[-1] * e[:, -1]) if len(zs) else 0.0
        return head, last

    def density(self, x, with_error=False):
        """Density of S at x > 0; optionally with the last-term magnitude as a truncation estimate."""
        self._refuse_atom()
        xa = np.asarray(x, dtype=float)
        if np.any(xa <= 0):
            raise DomainError("density requires x > 0")
        val, err = self._series(xa)
        if xa.ndim == 0:
            val, err = val[0], err[0]
        return (val, err) if with_error else val

    def _refuse_atom(self):
        if self.has_atom:
            raise UnsupportedModelError(
                "the supremum has an atom at 0 for this model (compound Poisson with drift <= 0); "
                "the density series does not apply, use the distribution function instead")

    def density_at_zero(self):
        """Right limit at 0 of the truncated series, a_0 + 2 sum Re(a_n)."""
        self._refuse_atom()
        return float(self.a0 + 2 * np.sum(self.residues.real))

    def simpson_mass(self, x_max=10.0, n_intervals=2000):
        """Composite Simpson integral of the truncated density over (0, x_max].

        The left endpoint uses the finite right limit of the truncated series.
        """
        from scipy.integrate import simpson

        x = np.linspace(0.0, x_max, n_intervals + 1)
        p = np.concatenate([[self.density_at_zero()], self.density(x[1:])])
        return float(simpson(p, x=x))

    @property
    def atom(self):
        """P(S = 0) = lim phi_plus(z) as z -> inf, read off at z = 40/k; 0 without an atom."""
        if not self.has_atom:
            return 0.0
        return float(np.real(phi_plus(self.roots, 40.0 / self.roots.k)))

    @property
    def mass(self):
        """Total mass a_0/zeta_0 + 2 sum Re(a_n/zeta_n) of the truncated series."""
        return float(self.a0 / self.roots.zeta0 + 2 * np.sum(np.real(self.residues / self.zetas)))

    def cdf(self, x, with_error=False):
        """Termwise-integrated series, clamped to [0, max(1, mass)].

        When the supremum has an atom at 0 the series describes P(S > x) and
        the distribution function is returned as one minus that tail; at x = 0
        it is the atom itself.  At points where the law jumps the Fourier-type
        series converges to the midpoint of the jump, so for lattice laws the
        value at a lattice point is the average of the left and right limits.
        """
        xa = np.asarray(x, dtype=float)
        if np.any(xa < 0):
            raise DomainError("cdf requires x >= 0")
        val, err = self._series(xa, weights_over_zeta=True)
        if self.has_atom:
            val = 1.0 - (self.mass - val)
        val = np.clip(val, 0.0, max(1.0, self.mass))
        val[np.atleast_1d(xa) == 0] = self.atom
        if xa.ndim == 0:
            val, err = val[0], err[0]
        return (val, err) if with_error else val


def compute_residues(model, rs: RootSet, n_pairs: int | None = None) -> SupremumDensity:
    """Residues a_0, a_n from the root product truncated at ``n_pairs`` pairs.

    a_0 = zeta_0 exp(-k zeta_0/2) prod_m |1 - zeta_0/zeta_m|^-2
    a_n = zeta_0 |zeta_n|^2 exp(-k zeta_n/2) / (2i Im(zeta_n) (zeta_n - zeta_0))
          prod_{m != n} [(1 - zeta_n/zeta_m)(1 - zeta_n/conj(zeta_m))]^-1
    """
    n_pairs = len(rs.zetas) if n_pairs is None else int(n_pairs)
    if n_pairs > len(rs.zetas):
        raise DomainError(f"n_pairs={n_pairs} exceeds the {len(rs.zetas)} stored roots")
    zs = rs.zetas[:n_pairs]
    z0, k = rs.zeta0, rs.k
    if n_pairs > 1:
        order = np.argsort(zs.imag)
        if np.min(np.abs(np.diff(zs[order]))) < 1e-8:
            raise DegenerateRootError("coincident roots within 1e-8")
    inv = 1.0 / zs
    log_a0 = math.log(z0) - 0.5 * k * z0 - np.sum(np.log(np.abs(1 - z0 * inv) ** 2))
    a0 = float(np.exp(log_a0))

    logs = np.empty(n_pairs, dtype=complex)
    step = max(1, _CHUNK // max(n_pairs, 1))
    for i in range(0, n_pairs, step):
        zn = zs[i:i + step]
        terms = np.log1p(-zn[:, None] * inv[None, :]) + np.log1p(-zn[:, None] * inv.conj()[None, :])
        rows = np.arange(len(zn))
        # m = n: only the conjugate factor belongs to the product
        terms[rows, i + rows] = np.log1p(-zn / zn.conj())
        logs[i:i + step] = -np.sum(terms, axis=1)
    # residue of (1 + z/zeta_n)^-1 is zeta_n; (1 + z/zeta_0)^-1 at -zeta_n is zeta_0/(zeta_0 - zeta_n)
    pref = np.log(z0 * zs) - np.log(z0 - zs) - 0.5 * k * zs
    residues = np.exp(pref + logs)
    atom = bool(model is not None and getattr(model, "has_atom_at_zero", False))
    return SupremumDensity(roots=rs, a0=a0, residues=residues, truncation=n_pairs, has_atom=atom)


def supremum_density(sd: SupremumDensity, x, with_error=False):
    return sd.density(x, with_error=with_error)


def supremum_cdf(sd: SupremumDensity, x, with_error=False):
    return sd.cdf(x, with_error=with_error)
