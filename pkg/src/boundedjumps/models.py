"""Levy model families with bounded positive jumps.

Every model exposes the Laplace exponent ``psi(z) = log E[exp(z X_1)]`` on its
analyticity domain together with ``psi_prime`` and ``psi_second``, the right
end ``k`` of the positive-jump support and, where it exists, the asymptotic
profile ``(A, a, B, b)`` for which

    psi(z) = A exp(k z) z**(-a) + B z**b + o(...)   as z -> infinity in Q1.

All evaluations accept scalars or numpy arrays.  Models are immutable.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .errors import DomainError, ModelError, UnsupportedModelError
from .specfun import regularized_lower_gamma

__all__ = [
    "VariationClass",
    "AsymptoticProfile",
    "LevyModel",
    "TruncatedKobolModel",
    "SpectrallyNegativeModel",
    "LatticeCompoundPoissonModel",
    "CustomModel",
    "psi",
    "psi_prime",
    "asymptotic_profile",
    "dual",
]


class VariationClass(enum.Enum):
    BOUNDED = "bounded_variation"
    UNBOUNDED = "unbounded_variation"


@dataclass(frozen=True)
class AsymptoticProfile:
    """Growth profile ``A e^{kz} z^{-a} + B z^b`` of psi in the first quadrant."""

    A: complex
    a: float
    B: complex
    b: float
    k: float

    def __post_init__(self):
        if self.a < 0:
            raise ValueError("a must be >= 0")
        if self.b <= 0:
            raise ValueError("b must be > 0")
        if self.A == 0 or self.B == 0:
            raise ValueError("A and B must be nonzero")
        if self.k <= 0:
            raise ValueError("k must be > 0")

    def evaluate(self, z):
        z = np.asarray(z, dtype=complex)
        return self.A * np.exp(self.k * z) * z ** (-self.a) + self.B * z ** self.b


def _out(arr, scalar):
    return arr[()] if scalar else arr


class LevyModel:
    """Interface shared by the built-in families and user models."""

    k: float
    eta: float = 0.0

    @property
    def variation_class(self) -> VariationClass:
        raise NotImplementedError

    def psi(self, z):
        raise NotImplementedError

    def psi_prime(self, z):
        raise NotImplementedError

    def psi_second(self, z):
        raise NotImplementedError

    def psi_scale(self, z):
        """Sum of the magnitudes of the terms making up psi(z).

        Used to express root residuals relative to the rounding floor of the
        evaluation, which grows like |psi'(z) z|.
        """
        z = np.asarray(z, dtype=complex)
        return np.abs(self.psi(z)) + np.abs(z * self.psi_prime(z))

    def profile(self) -> AsymptoticProfile:
        raise NotImplementedError

    @property
    def has_atom_at_zero(self) -> bool:
        """Whether S_e(q) may carry an atom at 0 (0 irregular for (0, inf))."""
        return False

    def mean(self) -> float:
        return float(np.real(self.psi_prime(0.0)))


# ---------------------------------------------------------------------------
# Truncated KoBoL / generalized tempered stable
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TruncatedKobolModel(LevyModel):
    """Tempered-stable process with the positive jumps truncated at ``k``.

    Levy density ``c_neg alpha_neg e^{beta_neg x} |x|^{-1-alpha_neg}`` on
    ``x < 0`` and ``c_pos alpha_pos e^{-beta_pos x} x^{-1-alpha_pos}`` on
    ``0 < x < k``.  The exponent is

        sigma^2 z^2 / 2 + mu z - c_neg Gamma(1-alpha_neg) (beta_neg + z)^alpha_neg
            + c_pos alpha_pos k^{-alpha_pos} g(-alpha_pos, k (beta_pos - z)) + eta

    with ``g(s, w) = w^{-s} gamma(s, w)`` entire, so the only branch cut is the
    one of the negative-jump term along ``Re z <= -beta_neg``.
    """

    sigma: float = 0.0
    mu: float = 0.0
    c_pos: float = 0.0
    c_neg: float = 0.0
    alpha_pos: float = 0.5
    alpha_neg: float = 0.5
    beta_pos: float = 1.0
    beta_neg: float = 1.0
    k: float = 1.0
    eta: float = field(init=False, default=0.0)

    def __post_init__(self):
        if self.sigma < 0:
            raise ModelError("sigma must be >= 0")
        if self.c_pos < 0 or self.c_neg < 0:
            raise ModelError("c_pos and c_neg must be >= 0")
        for name in ("alpha_pos", "alpha_neg"):
            val = getattr(self, name)
            if not val < 2 or val in (0.0, 1.0):
                raise ModelError(f"{name}={val} must lie in (-inf, 2) minus {{0, 1}}")
        if self.beta_pos <= 0 or self.beta_neg <= 0:
            raise ModelError("beta_pos and beta_neg must be > 0")
        if self.k <= 0:
            raise ModelError("k must be > 0")
        infinite_activity = (self.c_pos > 0 and self.alpha_pos > 0) or (
            self.c_neg > 0 and self.alpha_neg > 0)
        if self.sigma == 0 and self.mu == 0 and not infinite_activity:
            raise ModelError("compound Poisson process without drift is not admissible")
        object.__setattr__(self, "eta", 0.0)
        object.__setattr__(self, "eta", -float(np.real(self._raw(0.0))))

    @property
    def variation_class(self):
        if (self.sigma > 0 or (self.c_pos > 0 and self.alpha_pos > 1)
                or (self.c_neg > 0 and self.alpha_neg > 1)):
            return VariationClass.UNBOUNDED
        return VariationClass.BOUNDED

    def _check_domain(self, z):
        if self.c_neg > 0 and np.any(z.real <= -self.beta_neg):
            raise DomainError(
                f"Re(z) must exceed -beta_neg={-self.beta_neg} for the negative-jump term")

    def _raw(self, z):
        z = np.asarray(z, dtype=complex)
        val = 0.5 * self.sigma ** 2 * z ** 2 + self.mu * z
        if self.c_neg > 0:
            val = val - self.c_neg * math.gamma(1 - self.alpha_neg) * (self.beta_neg + z) ** self.alpha_neg
        if self.c_pos > 0:
            ap = self.alpha_pos
            val = val + self.c_pos * ap * self.k ** (-ap) * regularized_lower_gamma(
                -ap, self.k * (self.beta_pos - z))
        return val

    def psi(self, z):
        z = np.asarray(z, dtype=complex)
        self._check_domain(z)
        return _out(self._raw(z) + self.eta, z.ndim == 0)

    def psi_prime(self, z):
        z = np.asarray(z, dtype=complex)
        self._check_domain(z)
        val = self.sigma ** 2 * z + self.mu
        if self.c_neg > 0:
            an = self.alpha_neg
            val = val - self.c_neg * math.gamma(1 - an) * an * (self.beta_neg + z) ** (an - 1)
        if self.c_pos > 0:
            ap = self.alpha_pos
            val = val + self.c_pos * ap * self.k ** (1 - ap) * regularized_lower_gamma(
                1 - ap, self.k * (self.beta_pos - z))
        return _out(np.asarray(val, dtype=complex), z.ndim == 0)

    def psi_second(self, z):
        z = np.asarray(z, dtype=complex)
        self._check_domain(z)
        val = np.full(z.shape, self.sigma ** 2, dtype=complex)
        if self.c_neg > 0:
            an = self.alpha_neg
            val = val - self.c_neg * math.gamma(1 - an) * an * (an - 1) * (self.beta_neg + z) ** (an - 2)
        if self.c_pos > 0:
            ap = self.alpha_pos
            val = val + self.c_pos * ap * self.k ** (2 - ap) * regularized_lower_gamma(
                2 - ap, self.k * (self.beta_pos - z))
        return _out(val, z.ndim == 0)

    def levy_density(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        pos = (x > 0) & (x < self.k)
        neg = x < 0
        if self.c_pos > 0:
            xp = x[pos]
            out[pos] = self.c_pos * self.alpha_pos * np.exp(-self.beta_pos * xp) * xp ** (-1 - self.alpha_pos)
        if self.c_neg > 0:
            xn = -x[neg]
            out[neg] = self.c_neg * self.alpha_neg * np.exp(-self.beta_neg * xn) * xn ** (-1 - self.alpha_neg)
        return out

    def profile(self):
        if self.c_pos <= 0:
            raise UnsupportedModelError("model has no positive jumps; k is undefined")
        ap = self.alpha_pos
        # density at the truncation point: n = 1 in the regularity definition
        A = self.c_pos * ap * math.exp(-self.beta_pos * self.k) * self.k ** (-1 - ap)
        if self.sigma > 0:
            B, b = 0.5 * self.sigma ** 2, 2.0
        elif self.variation_class is VariationClass.BOUNDED and self.mu != 0:
            B, b = self.mu, 1.0
        else:
            pos_idx = ap if self.c_pos > 0 else -math.inf
            neg_idx = self.alpha_neg if self.c_neg > 0 else -math.inf
            b = max(pos_idx, neg_idx)
            if b <= 0:
                raise UnsupportedModelError("compound Poisson without drift has no profile (b = 0)")
            pos_B = -self.c_pos * cmath.exp(-1j * math.pi * ap) * math.gamma(1 - ap)
            neg_B = -self.c_neg * math.gamma(1 - self.alpha_neg)
            if pos_idx > neg_idx:
                B = pos_B
            elif neg_idx > pos_idx:
                B = neg_B
            else:
                B = pos_B + neg_B
        return AsymptoticProfile(A=complex(A), a=1.0, B=complex(B), b=float(b), k=self.k)

    def dual(self):
        if self.c_neg > 0:
            raise UnsupportedModelError("only models without negative jumps have a spectrally negative dual")
        return SpectrallyNegativeModel(sigma=self.sigma, mu=-self.mu, c=self.c_pos,
                                       alpha=self.alpha_pos, beta=self.beta_pos, k=self.k)


# ---------------------------------------------------------------------------
# Spectrally negative family
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectrallyNegativeModel(LevyModel):
    """Spectrally negative process with jumps in ``(-k, 0)``.

    Levy density ``c alpha e^{beta x} |x|^{-1-alpha}`` on ``-k < x < 0``.  Its
    dual ``-Y`` is a truncated KoBoL model without negative jumps, and
    ``psi_Y(z) = psi_dual(-z)``.
    """

    sigma: float = 0.0
    mu: float = 0.0
    c: float = 0.0
    alpha: float = 0.5
    beta: float = 1.0
    k: float = 1.0
    _dual: TruncatedKobolModel = field(init=False, repr=False, compare=False, default=None)

    def __post_init__(self):
        if self.sigma < 0 or self.c < 0:
            raise ModelError("sigma and c must be >= 0")
        if not self.alpha < 2 or self.alpha in (0.0, 1.0):
            raise ModelError(f"alpha={self.alpha} must lie in (-inf, 1) U (1, 2) minus {{0}}")
        if self.beta <= 0 or self.k <= 0:
            raise ModelError("beta and k must be > 0")
        if self.sigma == 0 and self.alpha < 1 and self.mu <= 0:
            raise ModelError("with sigma = 0 and alpha < 1 the drift mu must be positive")
        object.__setattr__(self, "_dual", TruncatedKobolModel(
            sigma=self.sigma, mu=-self.mu, c_pos=self.c, c_neg=0.0, alpha_pos=self.alpha,
            beta_pos=self.beta, k=self.k))

    @property
    def eta(self):
        return self._dual.eta

    @property
    def variation_class(self):
        return self._dual.variation_class

    def psi(self, z):
        return self._dual.psi(-np.asarray(z, dtype=complex))

    def psi_prime(self, z):
        return -self._dual.psi_prime(-np.asarray(z, dtype=complex))

    def psi_second(self, z):
        return self._dual.psi_second(-np.asarray(z, dtype=complex))

    def levy_density(self, x):
        return self._dual.levy_density(-np.asarray(x, dtype=float))

    def profile(self):
        """Profile of ``psi_Y(-z)``, i.e. of the dual model."""
        return self._dual.profile()

    def dual(self):
        return self._dual


# ---------------------------------------------------------------------------
# Lattice compound Poisson
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LatticeCompoundPoissonModel(LevyModel):
    """Compound Poisson process on the lattice ``h Z`` plus optional drift and Gaussian part.

    ``masses`` maps a nonzero integer ``j`` to ``Pi({j h}) > 0``.
    """

    h: float = 1.0
    masses: Mapping[int, float] = field(default_factory=dict)
    drift: float = 0.0
    sigma: float = 0.0

    def __post_init__(self):
        if self.h <= 0:
            raise ModelError("h must be > 0")
        if self.sigma < 0:
            raise ModelError("sigma must be >= 0")
        items = tuple(sorted((int(j), float(m)) for j, m in dict(self.masses).items()))
        if not items:
            raise ModelError("at least one lattice mass is required")
        for j, m in items:
            if j == 0:
                raise ModelError("lattice index 0 is not a jump")
            if not m > 0:
                raise ModelError(f"mass at j={j} must be > 0")
        if items[-1][0] <= 0:
            raise ModelError("at least one positive jump is required")
        object.__setattr__(self, "masses", dict(items))

    @property
    def _j(self):
        return np.array(list(self.masses.keys()), dtype=float)

    @property
    def _m(self):
        return np.array(list(self.masses.values()), dtype=float)

    @property
    def k(self):
        return self.h * max(self.masses)

    @property
    def is_pure_jump(self):
        return self.drift == 0 and self.sigma == 0

    @property
    def has_atom_at_zero(self):
        return self.sigma == 0 and self.drift <= 0

    @property
    def variation_class(self):
        return VariationClass.UNBOUNDED if self.sigma > 0 else VariationClass.BOUNDED

    def psi(self, z):
        z = np.asarray(z, dtype=complex)
        x = self.h * z[..., None] * self._j
        val = np.sum(self._m * np.expm1(x), axis=-1) + self.drift * z + 0.5 * self.sigma ** 2 * z ** 2
        return _out(val, z.ndim == 0)

    def psi_prime(self, z):
        z = np.asarray(z, dtype=complex)
        x = self.h * z[..., None] * self._j
        val = np.sum(self._m * self.h * self._j * np.exp(x), axis=-1) + self.drift + self.sigma ** 2 * z
        return _out(val, z.ndim == 0)

    def psi_second(self, z):
        z = np.asarray(z, dtype=complex)
        x = self.h * z[..., None] * self._j
        val = np.sum(self._m * (self.h * self._j) ** 2 * np.exp(x), axis=-1) + self.sigma ** 2
        return _out(val, z.ndim == 0)

    def profile(self):
        A = self.masses[max(self.masses)]
        if self.sigma > 0:
            B, b = 0.5 * self.sigma ** 2, 2.0
        elif self.drift != 0:
            B, b = self.drift, 1.0
        else:
            raise UnsupportedModelError("compound Poisson without drift has no profile (b = 0)")
        return AsymptoticProfile(A=complex(A), a=0.0, B=complex(B), b=b, k=self.k)

    def lattice_roots(self, q):
        """Solutions ``w`` of ``psi(log(w)/h) = q`` (pure-jump case only).

        Multiplying through by ``w^m`` (``m`` the deepest negative index)
        gives a polynomial of degree ``m + l``.
        """
        if not self.is_pure_jump:
            raise UnsupportedModelError("lattice polynomial route needs drift = sigma = 0")
        lo = min(0, min(self.masses))
        hi = max(self.masses)
        coeffs = np.zeros(hi - lo + 1)
        # coefficient index i corresponds to power w^(i) after shifting by -lo
        total = sum(self.masses.values())
        for j, m in self.masses.items():
            coeffs[j - lo] += m
        coeffs[0 - lo] -= total + q
        return np.roots(coeffs[::-1])


# ---------------------------------------------------------------------------
# User-supplied model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CustomModel(LevyModel):
    """Wrap user callables as a model; regularity is the caller's responsibility."""

    psi_fn: Callable = None
    psi_prime_fn: Callable = None
    k: float = 1.0
    asymptotics: AsymptoticProfile = None
    psi_second_fn: Callable = None
    variation: VariationClass = VariationClass.UNBOUNDED

    def __post_init__(self):
        if self.psi_fn is None or self.psi_prime_fn is None:
            raise ModelError("psi_fn and psi_prime_fn are required")
        if self.k <= 0:
            raise ModelError("k must be > 0")

    @property
    def variation_class(self):
        return self.variation

    def psi(self, z):
        return self.psi_fn(z)

    def psi_prime(self, z):
        return self.psi_prime_fn(z)

    def psi_second(self, z):
        if self.psi_second_fn is None:
            raise NotImplementedError("psi_second_fn not supplied")
        return self.psi_second_fn(z)

    def profile(self):
        if self.asymptotics is None:
            raise UnsupportedModelError("custom model supplied no asymptotic profile")
        return self.asymptotics


# module-level spellings of the operations


def psi(model: LevyModel, z):
    return model.psi(z)


def psi_prime(model: LevyModel, z):
    return model.psi_prime(z)


def asymptotic_profile(model: LevyModel) -> AsymptoticProfile:
    return model.profile()


def dual(model):
    return model.dual()
