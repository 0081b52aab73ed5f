"""Wiener-Hopf factorization, supremum densities and scale functions for
Levy processes whose positive jumps are bounded."""

__version__ = "0.1.0"

from .errors import (BoundaryRootError, BoundedJumpsError, ConvergenceError, DegenerateRootError,
                     DomainError, EnumerationError, ModelError, MultipleRootError, PrecisionError,
                     UnsupportedModelError)
from .models import (AsymptoticProfile, CustomModel, LatticeCompoundPoissonModel, LevyModel,
                     SpectrallyNegativeModel, TruncatedKobolModel, VariationClass)
from .roots import Rectangle, RootConfig, RootSet, assemble_roots, asymptotic_seed, find_zeta0
from .scale import ScaleContext, build_scale_context, scale_function, scale_laplace_check
from .specfun import SeriesControl, confluent_1f1, regularized_lower_gamma
from .wienerhopf import SupremumDensity, compute_residues, phi_minus, phi_plus, supremum_cdf, supremum_density
