import math

import mpmath
import numpy as np
import pytest

from boundedjumps import ConvergenceError, DomainError
from boundedjumps.specfun import (SeriesControl, confluent_1f1, gamma_real, regularized_lower_gamma,
                                  regularized_lower_gamma_prime)

# 300-term series in 60-digit arithmetic, computed once and frozen
G_NEG_HALF_2P3I = -5.9105092672024378127 - 3.193458441593625277j
HYP_NEG_HALF_HALF_M2 = 2.5279113098818290978


def test_g_at_s1_is_one_minus_exp():
    assert abs(regularized_lower_gamma(1.0, 1.0) - (1 - math.exp(-1))) < 1e-15


def test_g_at_zero_argument():
    assert regularized_lower_gamma(0.5, 0.0) == pytest.approx(2.0, abs=1e-15)


def test_g_negative_order_complex_argument():
    val = regularized_lower_gamma(-0.5, 2 + 3j)
    assert abs(val - G_NEG_HALF_2P3I) < 1e-13 * abs(G_NEG_HALF_2P3I)


def test_g_nonpositive_integer_order_rejected():
    for s in (0.0, -1.0, -3.0):
        with pytest.raises(DomainError):
            regularized_lower_gamma(s, 1.0)


def test_g_convergence_error_carries_partial_sum():
    with pytest.raises(ConvergenceError) as exc:
        regularized_lower_gamma(-0.5, 3.0 + 0j, SeriesControl(max_terms=3))
    assert exc.value.terms == 3
    assert exc.value.partial is not None


@pytest.mark.parametrize("z", [8 + 2j, 10 - 3j, 25 + 5j, 31 + 1j, -3 + 2j, 0.5 + 6.5j, 40 + 0j, 5 + 20j])
def test_g_routes_agree_near_regime_boundary(z):
    s = -0.5
    a = regularized_lower_gamma(s, z, regime="series", ctl=SeriesControl(max_terms=20000))
    b = regularized_lower_gamma(s, z, regime="cf")
    ref = complex(mpmath.mpf(1) * mpmath.mpc(z) ** 0.5 * mpmath.gammainc(s, 0, mpmath.mpc(z)))
    scale = max(abs(ref), 1.0)
    assert abs(b - ref) < 1e-11 * scale
    if abs(z) - abs(z.real) <= 12:
        assert abs(a - ref) < 1e-9 * scale


def test_g_continuous_across_switch(rng):
    # points straddling the cancellation budget |z| - |Re z| = 6
    x = rng.uniform(-20, 20, 50)
    y = np.sqrt((np.abs(x) + 6) ** 2 - x ** 2)
    for eps in (-1e-9, 1e-9):
        z = x + 1j * y * (1 + eps)
        v = regularized_lower_gamma(-0.5, z)
        ref = np.array([complex(mpmath.mpc(w) ** 0.5 * mpmath.gammainc(-0.5, 0, mpmath.mpc(w))) for w in z])
        assert np.max(np.abs(v - ref) / np.maximum(np.abs(ref), 1)) < 1e-10


def test_g_equals_hypergeometric_form(rng):
    z = rng.uniform(-8, 8, 20) + 1j * rng.uniform(-8, 8, 20)
    for s in (-0.5, 0.3, 1.7):
        lhs = regularized_lower_gamma(s, z)
        rhs = np.exp(-z) * confluent_1f1(1.0, s + 1, z) / s
        assert np.max(np.abs(lhs - rhs) / np.maximum(np.abs(rhs), 1)) < 1e-11


def test_g_large_real_limit_is_gamma():
    for s in (0.5, 1.5, 2.5):
        assert abs(50.0 ** s * regularized_lower_gamma(s, 50.0) - math.gamma(s)) < 1e-8


def test_g_derivative():
    z = np.array([1 + 1j, -2 + 0.5j, 12 + 9j])
    h = 1e-6
    fd = (regularized_lower_gamma(-0.5, z + h) - regularized_lower_gamma(-0.5, z - h)) / (2 * h)
    assert np.max(np.abs(regularized_lower_gamma_prime(-0.5, z) - fd)) < 1e-7


def test_1f1_trivial_cases():
    assert confluent_1f1(-0.5, 0.5, 0.0) == 1.0
    z = np.array([1.0, -3 + 2j, 7j, 45 + 10j])
    assert np.max(np.abs(confluent_1f1(0.7, 0.7, z) / np.exp(z) - 1)) < 1e-12


def test_1f1_oracle_value():
    assert abs(confluent_1f1(-0.5, 0.5, -2.0) - HYP_NEG_HALF_HALF_M2) < 1e-13


@pytest.mark.parametrize("z", [3 + 10j, 20j, -10 + 30j, 50 + 5j, -60 + 2j, 35 + 20j])
def test_1f1_against_mpmath(z):
    val = confluent_1f1(-0.5, 1.5, z)
    ref = complex(mpmath.hyp1f1(-0.5, 1.5, mpmath.mpc(z)))
    assert abs(val - ref) < 1e-11 * max(abs(ref), 1)


def test_1f1_pole_rejected():
    with pytest.raises(DomainError):
        confluent_1f1(0.5, -2.0, 1.0)


def test_gamma_real():
    assert gamma_real(-0.5) == pytest.approx(-2 * math.sqrt(math.pi), rel=1e-15)
    with pytest.raises(DomainError):
        gamma_real(-2.0)
