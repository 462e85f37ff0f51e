import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import KOU, hejd_params, interior_points
from occpricer.errors import BarrierOrder, DomainError
from occpricer.model import levy_exponent
from occpricer.occupation import (build_system, cauchy_determinant, cauchy_matrix,
                                  interval_occupation_transform, knockout_coefficients,
                                  knockout_transform, residual_check,
                                  single_barrier_occupation_transform, single_barrier_values,
                                  two_barrier_occupation_transform, two_barrier_values)

barriers = st.tuples(st.floats(-1.0, 0.3), st.floats(0.05, 1.5))
rates = st.floats(0.0, 20.0)


@settings(max_examples=25, deadline=None)
@given(hejd_params(), st.floats(0.3, 15.0), rates, barriers, st.floats(0.0, 0.5))
def test_interval_residual_and_smoothness(params, alpha, rho, hw, gfrac):
    h, H = hw[0], hw[0] + hw[1]
    gamma = gfrac * min(params.eta[0], params.theta[0])
    alpha = max(alpha, float(levy_exponent(params, gamma)) + 0.3)
    w = interval_occupation_transform(params, alpha, rho, gamma, h, H)
    xs = interior_points(np.random.default_rng(0), h - 1.5, H + 1.5, (h, H), 30)
    assert residual_check(w, params, xs) < 1e-7
    for b in (h, H):
        lo, hi = w.side_values(b)
        assert abs(lo - hi) <= 1e-9 * (1 + abs(hi))
        dlo, dhi = w.side_values(b, 1)
        assert abs(dlo - dhi) <= 1e-7 * (1 + abs(dhi))


@settings(max_examples=25, deadline=None)
@given(hejd_params(), st.floats(0.3, 15.0), st.floats(-20.0, 20.0), rates, rates, barriers)
def test_two_barrier_residual_complex_alpha(params, re, im, r1, r2, hw):
    h, H = hw[0], hw[0] + hw[1]
    w = two_barrier_occupation_transform(params, complex(re, im), r1, r2, 0.0, h, H)
    xs = interior_points(np.random.default_rng(1), h - 1.5, H + 1.5, (h, H), 30)
    assert residual_check(w, params, xs) < 1e-7


@settings(max_examples=25, deadline=None)
@given(hejd_params(), st.floats(0.3, 10.0), st.floats(0.1, 5.0), barriers)
def test_probability_bounds_and_monotone_in_rho(params, alpha, rho, hw):
    # gamma = 0, real alpha: the transform is E[e^{-rho A}] under an Exp(alpha) horizon
    h, H = hw[0], hw[0] + hw[1]
    xs = np.linspace(h - 1, H + 1, 15)
    a = interval_occupation_transform(params, alpha, rho, 0.0, h, H)(xs)
    b = interval_occupation_transform(params, alpha, 2 * rho, 0.0, h, H)(xs)
    assert np.all(np.abs(a.imag) < 1e-10)
    assert np.all((b.real <= a.real + 1e-10) & (a.real <= 1 + 1e-10) & (b.real >= -1e-10))


def test_reflection_symmetry():
    rng = np.random.default_rng(3)
    for _ in range(5):
        from helpers import random_hejd
        p = random_hejd(rng)
        h, H, g = -0.4, 0.3, 0.2
        xs = np.array([-1.0, -0.2, 0.1, 0.9])
        w = two_barrier_occupation_transform(p, 2.0, 1.5, 0.7, g, h, H)
        v = two_barrier_occupation_transform(p.reflected(), 2.0, 0.7, 1.5, -g, -H, -h)
        np.testing.assert_allclose(w(xs), v(-xs), rtol=1e-9)


def test_block_structure():
    sysm = build_system(KOU, (2.5, 1.0, 3.0), -0.2, 0.4)
    p = sysm.block_permutation()
    np.testing.assert_allclose(sysm.B[:, p], sysm.block_matrix(), rtol=1e-13, atol=1e-15)
    assert sysm.B.shape == (2 * sysm.S, 2 * sysm.S)


def test_vectorised_evaluators_agree():
    gammas = np.array([0.0, 0.5 + 2j, 1.0 - 1j])
    for x in (-0.5, 0.1, 0.6):
        vals = two_barrier_values(KOU, 3.0 + 1j, 0.5, 2.0, gammas, -0.2, 0.3, x=x)
        ref = [complex(two_barrier_occupation_transform(KOU, 3.0 + 1j, 0.5, 2.0, g, -0.2, 0.3)(x))
               for g in gammas]
        np.testing.assert_allclose(vals, ref, rtol=1e-10)
        vals = single_barrier_values(KOU, 3.0 + 1j, 0.5, 2.0, gammas, -0.2, x=x)
        ref = [complex(single_barrier_occupation_transform(KOU, 3.0 + 1j, 0.5, 2.0, g, -0.2)(x))
               for g in gammas]
        np.testing.assert_allclose(vals, ref, rtol=1e-10)


def test_knockout_limit():
    h, xs = -0.3, np.array([-0.1, 0.0, 0.8])
    ko = knockout_transform(KOU, 2.0, 0.5, h)(xs)
    strong = single_barrier_occupation_transform(KOU, 2.0, 1e7, 0.0, 0.5, h)(xs)
    np.testing.assert_allclose(strong, ko, rtol=1e-3)
    np.testing.assert_allclose(knockout_coefficients(KOU, 2.0, [0.5], h), ko[1], rtol=1e-12)
    assert np.all(knockout_transform(KOU, 2.0, 0.5, h)(np.array([-0.5])) == 0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 3), st.integers(0, 3), st.integers(0, 2**31))
def test_cauchy_determinant(m, n, seed):
    rng = np.random.default_rng(seed)
    eta = 1.0 + np.cumsum(rng.uniform(0.5, 3.0, m))
    theta = 1.0 + np.cumsum(rng.uniform(0.5, 3.0, n))
    a = np.linspace(-5, 5, m + n + 2) + rng.uniform(-0.2, 0.2, m + n + 2)
    direct = np.linalg.det(cauchy_matrix(eta, theta, a)).real
    assert cauchy_determinant(eta, theta, a) == pytest.approx(direct, rel=1e-9)


def test_input_checks():
    with pytest.raises(BarrierOrder):
        interval_occupation_transform(KOU, 1.0, 1.0, 0.0, 0.5, 0.5)
    with pytest.raises(DomainError):
        interval_occupation_transform(KOU, 1.0, -1.0, 0.0, 0.0, 0.5)
    with pytest.raises(DomainError):
        interval_occupation_transform(KOU, 0.1, 1.0, 3.0, 0.0, 0.5)   # alpha below G(gamma)
    with pytest.raises(DomainError):
        cauchy_determinant([2.0], [], [0.1, 0.2])
