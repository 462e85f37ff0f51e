import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import KOU, hejd_params
from occpricer.errors import RootCountMismatch
from occpricer.model import MEJDParams, levy_exponent
from occpricer.roots import characteristic_polynomial, find_roots


@settings(max_examples=30, deadline=None)
@given(hejd_params(), st.floats(0.05, 50.0))
def test_real_alpha_roots(params, alpha):
    rs = find_roots(params, alpha)
    assert rs.betas.size == params.m + 1 and rs.gammas.size == params.n + 1
    assert np.all(rs.betas.real > 0) and np.all(rs.gammas.real < 0)
    assert np.allclose(rs.all.imag, 0.0)
    assert rs.interlaced
    res = np.abs(levy_exponent(params, rs.all) - alpha)
    assert res.max() <= 1e-10 * (1 + alpha)


@settings(max_examples=30, deadline=None)
@given(hejd_params(), st.floats(0.05, 20.0), st.floats(-30.0, 30.0))
def test_complex_alpha_roots(params, re, im):
    alpha = complex(re, im)
    rs = find_roots(params, alpha)
    assert rs.size == params.m + params.n + 2
    res = np.abs(levy_exponent(params, rs.all) - alpha)
    assert res.max() <= 1e-10 * (1 + abs(alpha))


def test_conjugate_symmetry():
    a = find_roots(KOU, 2 + 3j)
    b = find_roots(KOU, 2 - 3j)
    np.testing.assert_allclose(np.sort_complex(a.all.conj()), np.sort_complex(b.all), atol=1e-12)


def test_polynomial_vanishes_at_roots():
    rs = find_roots(KOU, 1.5)
    p = characteristic_polynomial(KOU, 1.5)
    assert len(p) == KOU.m + KOU.n + 3
    assert np.max(np.abs(np.polyval(p, rs.all))) < 1e-8 * np.max(np.abs(p))


def test_brownian_roots():
    bm = MEJDParams(0.1, 0.4, 0.0, 0.0, 0.0)
    rs = find_roots(bm, 1.0)
    disc = np.sqrt(0.1**2 + 2 * 0.16)
    assert rs.betas[0].real == pytest.approx((-0.1 + disc) / 0.16)
    assert rs.gammas[0].real == pytest.approx((-0.1 - disc) / 0.16)


def test_bad_alpha():
    with pytest.raises(RootCountMismatch):
        find_roots(KOU, -1.0)
