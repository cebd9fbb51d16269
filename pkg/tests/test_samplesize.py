import itertools
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import ndtr

from fwci import samplesize as ss
from fwci.errors import DomainError
from fwci.samplesize import Selector

ALPHA_T = 1 - math.sqrt(0.99)
GRID = list(itertools.product([0.1, 1.0, 10.0], [0.01, 0.1], [1.0, 2.0, 10.0]))


def be_lhs(n, ratio, m3):
    """Berry-Esseen coverage bound written out independently of the package."""
    n = np.asarray(n, dtype=np.float64)
    x = np.sqrt(n) * ratio
    uniform = 0.3328 * (m3 + 0.429)
    nonuniform = 18.1139 * m3 / (1 + x**3)
    return ndtr(-x) + np.minimum(uniform, nonuniform) / np.sqrt(n)


def linear_scan(ratio, alpha, m3):
    n = 1
    while be_lhs(n, ratio, m3) > alpha / 2:
        n += 1
    return n


def test_alpha_tilde():
    assert math.isclose(ss.alpha_tilde(0.01), ALPHA_T, rel_tol=1e-12)
    mpmath.mp.dps = 40
    exact = 1 - mpmath.sqrt(1 - mpmath.mpf("1e-12"))
    assert math.isclose(ss.alpha_tilde(1e-12), float(exact), rel_tol=1e-14)


@pytest.mark.parametrize("target,expected", [(2, 6593), (10, 59311), (100, 652417)])
def test_min_n_sigma_table(target, expected):
    n = ss.min_n_sigma(target, ALPHA_T, 1.1)
    assert n == expected
    assert ss.kappa_max(ALPHA_T, n, 1.1) >= target > ss.kappa_max(ALPHA_T, n - 1, 1.1)


def _kappa_max_mp(alpha, n, c):
    mpmath.mp.dps = 50
    a, n, c = mpmath.mpf(alpha), mpmath.mpf(n), mpmath.mpf(c)
    return (n - 3) / (n - 1) + (a * n / (1 - a)) * (1 - 1 / c**2) ** 2


@pytest.mark.parametrize("n", [8192, 2**18, 10, 2])
def test_kappa_max_against_high_precision(n):
    a = 1 - mpmath.sqrt(mpmath.mpf("0.99"))
    ref = _kappa_max_mp(a, n, mpmath.mpf("1.1"))
    assert math.isclose(ss.kappa_max(ALPHA_T, n, 1.1), float(ref), rel_tol=1e-13)


def test_kappa_max_at_8192():
    assert abs(ss.kappa_max(ALPHA_T, 8192, 1.1) - 2.24) <= 0.01


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-4, 0.5), st.integers(2, 10**7), st.floats(1.001, 5.0))
def test_kappa_max_increasing(alpha, n, c):
    k = ss.kappa_max(alpha, n, c)
    assert ss.kappa_max(alpha, n + 1, c) > k
    assert ss.kappa_max(alpha * 1.01, n, c) > k
    assert ss.kappa_max(alpha, n, c * 1.01) > k


def test_inflation_for_kappa_inverts():
    c = ss.inflation_for_kappa(ALPHA_T, 400_000, 100.0)
    assert c > 1
    assert ss.kappa_max(ALPHA_T, 400_000, c) >= 100.0
    assert ss.kappa_max(ALPHA_T, 400_000, math.nextafter(c, 0)) < 100.0
    assert math.isinf(ss.inflation_for_kappa(ALPHA_T, 100, 100.0))


def test_n_clt_examples():
    assert ss.n_clt(1.0, 10.0, 0.01) == 664
    assert ss.n_clt(1.0, 0.0, 0.01) == 1


def test_n_cheb_examples():
    assert ss.n_cheb(1.0, 10.0, 0.01) == 10000
    assert ss.n_cheb(1.0, 0.0, 0.01) == 1


def test_be_delta_examples():
    assert math.isclose(ss.be_delta(1, 0.0, 1.0), 0.4755712, rel_tol=1e-12)
    for x in (0.3, 2.0, 7.5):
        assert ss.be_delta(9, x, 2.0) == ss.be_delta(9, -x, 2.0)
        assert math.isclose(ss.be_delta(100, x, 2.0) * 10, ss.be_delta(1, x, 2.0), rel_tol=1e-14)


def test_n_be_zero_sigma():
    assert ss.n_be(1.0, 0.0, 0.01, 1.0) == 1


def test_n_be_reference_point():
    m3 = 2.24**0.75
    n = ss.n_be(1.0, 10.0, 0.01, m3)
    assert be_lhs(n, 0.1, m3) <= 0.005 < be_lhs(n - 1, 0.1, m3)
    assert n == linear_scan(0.1, 0.01, m3)


@pytest.mark.parametrize("ratio,alpha,m3", GRID)
def test_n_be_matches_linear_scan(ratio, alpha, m3):
    assert ss.n_be(1.0, 1.0 / ratio, alpha, m3) == linear_scan(ratio, alpha, m3)


@pytest.mark.parametrize("ratio,alpha,m3", GRID)
def test_be_bound_strictly_decreasing(ratio, alpha, m3):
    v = be_lhs(np.arange(1, 10**6 + 1), ratio, m3)
    assert np.all(np.diff(v) < 0)


def test_n_be_rejects_small_m3():
    with pytest.raises(DomainError):
        ss.n_be(1.0, 1.0, 0.01, 0.9)


@pytest.mark.parametrize("c", [1e-3, 1.0, 1e3])
@pytest.mark.parametrize("ratio", [0.37, 4.0, 55.0])
def test_scale_invariance(c, ratio):
    eps, sigma = 1.0, ratio
    for fn in (ss.n_clt, ss.n_cheb):
        assert fn(eps, sigma, 0.01) == fn(c * eps, c * sigma, 0.01)
    assert ss.n_be(eps, sigma, 0.01, 1.5) == ss.n_be(c * eps, c * sigma, 0.01, 1.5)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.01, 200), st.floats(1.0, 1.5), st.floats(1e-3, 0.3), st.floats(1.0, 5.0))
def test_monotone(ratio, bump, alpha, m3):
    for fn in (ss.n_clt, ss.n_cheb, lambda e, s, a: ss.n_be(e, s, a, m3)):
        base = fn(1.0, ratio, alpha)
        assert fn(1.0, ratio * bump, alpha) >= base
        assert fn(bump, ratio, alpha) <= base
        assert fn(1.0, ratio, min(alpha * bump, 0.5)) <= base


@settings(max_examples=60, deadline=None)
@given(st.floats(0.01, 1e3), st.floats(1e-4, 0.5))
def test_cheb_at_least_clt(ratio, alpha):
    assert ss.n_cheb(1.0, ratio, alpha) >= ss.n_clt(1.0, ratio, alpha)


def test_n_mu_selectors():
    assert ss.n_mu(1.0, 0.0, 0.01, 1.0, floor=1) == (1, Selector.FLOOR)
    # small sigma/eps: Chebyshev wins
    size, sel = ss.n_mu(1.0, 0.5, 0.01, 2.0)
    assert sel is Selector.CHEB and size == ss.n_cheb(1.0, 0.5, 0.01) < ss.n_be(1.0, 0.5, 0.01, 2.0)
    # large sigma/eps: Berry-Esseen wins
    size, sel = ss.n_mu(1.0, 200.0, 0.01, 2.0)
    assert sel is Selector.BE and size == ss.n_be(1.0, 200.0, 0.01, 2.0)
    # floor at n_sigma swallows tiny variances
    assert ss.n_mu(1.0, 1e-3, 0.01, 2.0, floor=8192) == (8192, Selector.FLOOR)


def test_n_mu_ties_prefer_floor():
    n = ss.n_cheb(1.0, 0.5, 0.01)
    assert ss.n_mu(1.0, 0.5, 0.01, 2.0, floor=n) == (n, Selector.FLOOR)


def test_floor_certifies_small_variance():
    # sigma^2 <= eps^2 alpha n_sigma means Chebyshev already fits inside the floor
    eps, alpha, n_sig = 0.1, 0.01, 8192
    sigma = math.sqrt(eps * eps * alpha * n_sig)
    assert ss.n_mu(eps, sigma, alpha, 50.0, floor=n_sig) == (n_sig, Selector.FLOOR)
