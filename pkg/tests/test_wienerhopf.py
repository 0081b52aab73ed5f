import math

import numpy as np
import pytest

from boundedjumps import (DomainError, UnsupportedModelError, compute_residues, phi_minus, phi_plus,
                          supremum_cdf, supremum_density)
from boundedjumps.oracles import closed_form_poisson


def test_phi_plus_at_zero(poisson_roots, kobol_roots):
    for rs in (poisson_roots, kobol_roots):
        assert phi_plus(rs, 0.0) == 1.0
        assert phi_plus(rs, 0.0, n_pairs=10, tail=False) == 1.0


@pytest.mark.parametrize("z", [0.5, 2.0, 5.0])
def test_phi_plus_poisson_closed_form(poisson_roots, z):
    ref = closed_form_poisson(1.0, 1.0).phi_plus_exact(z)
    assert abs(phi_plus(poisson_roots, z, n_pairs=1000) - ref) < 1e-6


def test_phi_plus_tail_improves(poisson_roots):
    ref = closed_form_poisson(1.0, 1.0).phi_plus_exact(5.0)
    raw = abs(phi_plus(poisson_roots, 5.0, n_pairs=1000, tail=False) - ref)
    comp = abs(phi_plus(poisson_roots, 5.0, n_pairs=1000) - ref)
    assert comp < 1e-3 * raw


def test_phi_plus_bounded_on_right_half_plane(kobol_roots, rng):
    z = rng.uniform(0, 20, 200) + 1j * rng.uniform(-50, 50, 200)
    assert np.max(np.abs(phi_plus(kobol_roots, z, n_pairs=1000))) <= 1 + 1e-3


def test_phi_plus_completely_monotone(kobol_roots):
    x = np.linspace(0, 8, 81)
    v = np.real(phi_plus(kobol_roots, x, n_pairs=1000))
    for order in (1, 2, 3):
        d = np.diff(v, order)
        assert np.all((-1) ** order * d > 0)


def test_phi_plus_pole_rejected(poisson_roots):
    with pytest.raises(DomainError):
        phi_plus(poisson_roots, -poisson_roots.zeta0)


def test_phi_minus_subordinator_is_one(poisson, poisson_roots):
    z = np.array([0.3, 1.0, 2.5])
    assert np.max(np.abs(phi_minus(poisson, poisson_roots, z) - 1)) < 1e-8
    assert phi_minus(poisson, poisson_roots, 0.0) == 1.0


def test_phi_minus_near_root(poisson, poisson_roots):
    with pytest.raises(DomainError):
        phi_minus(poisson, poisson_roots, poisson_roots.zeta0 + 1e-10)


def test_factorization_identity(kobol, kobol_roots):
    # q/(q - psi(z)) = phi_plus(-z) phi_minus(z) off the real axis, 2000 pairs
    z = np.array([0.5 + 3j, 1.5 - 2j, 2 + 10j, -0.5 + 1j])
    lhs = 1.0 / (1.0 - kobol.psi(z))
    rhs = phi_plus(kobol_roots, -z, n_pairs=2000) * phi_minus(kobol, kobol_roots, z, n_pairs=2000)
    assert np.max(np.abs(lhs - rhs)) < 1e-10
    # phi_minus is a transform of a law on (-inf, 0]: in (0, 1) and decreasing for z > 0
    v = np.real(phi_minus(kobol, kobol_roots, np.linspace(0.2, 1.9, 20), n_pairs=2000))
    assert np.all((v > 0) & (v < 1)) and np.all(np.diff(v) < 0)


def test_phi_against_mc(kobol, kobol_roots, kobol_mc):
    s = np.exp(-kobol_mc.sup)
    se = s.std(ddof=1) / math.sqrt(len(s))
    assert abs(s.mean() - phi_plus(kobol_roots, 1.0, n_pairs=1000)) < 3 * se
    i = np.exp(kobol_mc.inf)
    se = i.std(ddof=1) / math.sqrt(len(i))
    assert abs(i.mean() - phi_minus(kobol, kobol_roots, 1.0, n_pairs=1000)) < 3 * se


def test_poisson_a0(poisson, poisson_roots):
    sd = compute_residues(poisson, poisson_roots, 2000)
    assert abs(sd.a0 - closed_form_poisson(1.0, 1.0).a0_exact) < 1e-4


def test_residue_by_contour(kobol_roots):
    n_pairs = 200
    sd = compute_residues(None, kobol_roots, n_pairs)
    c = -kobol_roots.zetas[4]
    r = 1e-3
    t = np.exp(2j * np.pi * np.arange(64) / 64)
    vals = phi_plus(kobol_roots, c + r * t, n_pairs=n_pairs, tail=False)
    res = np.mean(vals * r * t)
    assert abs(res - sd.residues[4]) < 1e-5 * abs(sd.residues[4])
    # the conjugate residue is the conjugate
    res_c = np.mean(phi_plus(kobol_roots, np.conj(c) + r * t, n_pairs=n_pairs, tail=False) * r * t)
    assert abs(res_c - np.conj(sd.residues[4])) < 1e-5 * abs(sd.residues[4])


def test_a0_by_contour(kobol_roots):
    sd = compute_residues(None, kobol_roots, 200)
    r = 1e-3
    t = np.exp(2j * np.pi * np.arange(64) / 64)
    res = np.mean(phi_plus(kobol_roots, -kobol_roots.zeta0 + r * t, n_pairs=200, tail=False) * r * t)
    assert abs(res - sd.a0) < 1e-10


def test_mass_values(kobol_sd1000, kobol_sd5000):
    assert kobol_sd1000.simpson_mass() == pytest.approx(0.985, abs=0.005)
    assert kobol_sd5000.simpson_mass() == pytest.approx(0.995, abs=0.005)
    assert kobol_sd1000.mass < kobol_sd5000.mass < 1


def test_density_nonnegative(kobol_sd5000):
    x = np.linspace(0.005, 10, 2000)
    assert np.min(supremum_density(kobol_sd5000, x)) >= -1e-4


def test_density_converges_in_n(kobol, kobol_roots):
    x = np.array([0.5, 1.0, 2.0])
    vals = [compute_residues(kobol, kobol_roots, n).density(x) for n in (500, 1000, 2000, 4000)]
    steps = [np.max(np.abs(b - a)) for a, b in zip(vals, vals[1:])]
    assert steps[0] > steps[1] > steps[2]
    assert steps[2] < 1e-3


def test_density_dominated_by_real_root(kobol_sd1000):
    sd = kobol_sd1000
    assert sd.density(20.0) / (sd.a0 * math.exp(-sd.roots.zeta0 * 20)) == pytest.approx(1, abs=1e-3)


def test_density_domain(kobol_sd1000):
    with pytest.raises(DomainError):
        kobol_sd1000.density(0.0)
    val, err = kobol_sd1000.density(1.0, with_error=True)
    assert 0 <= err < 1e-3 * abs(val)


def test_cdf_basics(kobol_sd1000, kobol_sd5000):
    assert supremum_cdf(kobol_sd1000, 0.0) == 0.0
    with pytest.raises(DomainError):
        supremum_cdf(kobol_sd1000, -1.0)
    assert supremum_cdf(kobol_sd1000, 60.0) == pytest.approx(kobol_sd1000.mass, abs=1e-12)
    assert supremum_cdf(kobol_sd5000, 60.0) == pytest.approx(0.995, abs=0.005)
    v = supremum_cdf(kobol_sd5000, np.linspace(0.01, 10, 500))
    assert np.all(np.diff(v) >= -1e-6)


def test_cdf_against_mc(kobol_sd5000, kobol_mc):
    # the truncated series misses 1 - mass in total, most of it near 0
    e = (kobol_mc.sup <= 2.0).astype(float)
    se = e.std(ddof=1) / math.sqrt(len(e))
    assert abs(e.mean() - kobol_sd5000.cdf(2.0)) < 3 * se + (1 - kobol_sd5000.mass)


def test_atom_refusal(poisson, poisson_roots):
    sd = compute_residues(poisson, poisson_roots, 2000)
    with pytest.raises(UnsupportedModelError):
        sd.density(1.0)
    # unit-rate Poisson subordinator: S = X_e, and P(S = 0) = P(no jump before e_q) = q/(q + 1)
    assert sd.cdf(0.0) == pytest.approx(0.5, abs=1e-9)
    # between lattice points the series is exact: P(S <= j + 1/2) = 1 - 2^-(j+1)
    x = np.array([0.5, 1.5, 2.5])
    assert np.max(np.abs(sd.cdf(x) - (1 - 0.5 ** (x + 0.5)))) < 2e-3
    assert sd.cdf(50.0) == pytest.approx(1.0, abs=1e-9)


def test_degenerate_roots_rejected(kobol_roots):
    from boundedjumps import DegenerateRootError
    from dataclasses import replace

    bad = replace(kobol_roots, zetas=np.concatenate([kobol_roots.zetas[:3], kobol_roots.zetas[2:3] + 1e-10]))
    with pytest.raises(DegenerateRootError):
        compute_residues(None, bad)
