import numpy as np
import pytest

from boundedjumps import (LatticeCompoundPoissonModel, SpectrallyNegativeModel, TruncatedKobolModel,
                          assemble_roots, build_scale_context, compute_residues)
from boundedjumps.oracles import McConfig, simulate_extrema

KOBOL = dict(sigma=1.0, mu=-2.0, c_pos=1.0, c_neg=1.0, alpha_pos=0.5, alpha_neg=0.5,
             beta_pos=1.0, beta_neg=2.0, k=1.0)
SN = dict(mu=2.0, c=1.0, alpha=0.5, beta=1.0, k=1.0)


@pytest.fixture(scope="session")
def kobol():
    return TruncatedKobolModel(**KOBOL)


@pytest.fixture(scope="session")
def poisson():
    return LatticeCompoundPoissonModel(h=1.0, masses={1: 1.0})


@pytest.fixture(scope="session")
def sn0():
    return SpectrallyNegativeModel(sigma=0.0, **SN)


@pytest.fixture(scope="session")
def sn1():
    return SpectrallyNegativeModel(sigma=1.0, **SN)


@pytest.fixture(scope="session")
def kobol_roots(kobol):
    return assemble_roots(kobol, 1.0, 5000)


@pytest.fixture(scope="session")
def poisson_roots(poisson):
    return assemble_roots(poisson, 1.0, 2000)


@pytest.fixture(scope="session")
def kobol_sd1000(kobol, kobol_roots):
    return compute_residues(kobol, kobol_roots, 1000)


@pytest.fixture(scope="session")
def kobol_sd5000(kobol, kobol_roots):
    return compute_residues(kobol, kobol_roots, 5000)


@pytest.fixture(scope="session")
def kobol_mc(kobol):
    return simulate_extrema(kobol, 1.0, McConfig(n_paths=100_000, seed=2024))


@pytest.fixture(scope="session")
def ctx0(sn0):
    return build_scale_context(sn0, 1.0, n_terms=5000)


@pytest.fixture(scope="session")
def ctx1(sn1):
    return build_scale_context(sn1, 1.0, n_terms=5000)


@pytest.fixture
def rng():
    return np.random.default_rng(7)
