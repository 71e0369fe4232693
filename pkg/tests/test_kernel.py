import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracfast.kernel import (
    DEFAULT_DEGREE,
    EPS_INFLATION,
    KernelPolynomial,
    certify_eps,
    kernel_shape,
    taylor_weights,
)

ALPHAS = (0.1, 0.25, 0.5, 0.75, 0.9)
alphas = st.floats(0.01, 0.99)


def test_zeroth_weight_is_one():
    assert taylor_weights(0.37, 0).tolist() == [1.0]


@pytest.mark.parametrize("K, expected", [
    (2, [1.0, 0.5, 0.375]),
    (4, [1.0, 0.5, 0.375, 0.3125, 0.2734375]),
])
def test_half_order_weights(K, expected):
    assert taylor_weights(0.5, K) == pytest.approx(expected, rel=1e-15)


@given(alphas, st.integers(0, 20))
def test_weights_match_binomial_coefficients(alpha, K):
    # (1 - tau)**(-alpha) = sum_k binom(alpha + k - 1, k) tau**k
    w = taylor_weights(alpha, K)
    ref = [float(mpmath.binomial(alpha + k - 1, k)) for k in range(K + 1)]
    assert np.allclose(w, ref, rtol=1e-13, atol=0)


@given(alphas, st.integers(1, 20))
def test_weights_positive_and_decreasing(alpha, K):
    w = taylor_weights(alpha, K)
    assert np.all(w > 0)
    assert np.all(np.diff(w) < 0)
    k = np.arange(1, K + 1)
    assert np.allclose(w[1:] * k, w[:-1] * (alpha + k - 1), rtol=1e-14, atol=0)


@pytest.mark.parametrize("alpha", [0.0, 1.0, -0.2, 1.5])
def test_alpha_domain(alpha):
    with pytest.raises(ValueError):
        taylor_weights(alpha, 3)


def test_negative_degree_rejected():
    with pytest.raises(ValueError):
        taylor_weights(0.5, -1)


def test_kernel_shape_values():
    assert kernel_shape(0.5, 0.0) == 1.0
    assert kernel_shape(0.5, 1.0 / 3.0) == pytest.approx(1.224744871391589, rel=1e-15)
    assert kernel_shape(0.9, -1.0 / 3.0) == pytest.approx((4.0 / 3.0) ** -0.9, rel=1e-15)


def test_kernel_shape_domain():
    with pytest.raises(ValueError):
        kernel_shape(0.5, 0.34)
    with pytest.raises(ValueError):
        kernel_shape(0.5, np.array([0.0, -0.5]))


def test_eps_of_default_pairings():
    assert KernelPolynomial.build(0.5, 4).eps == pytest.approx(1.45e-3, rel=0.02)
    eps9 = KernelPolynomial.build(0.5, 9).eps
    assert 1e-7 < eps9 < 1e-5
    assert DEFAULT_DEGREE == {1: 4, 2: 9}


@pytest.mark.parametrize("alpha", ALPHAS)
def test_eps_self_consistent_and_monotone(alpha):
    tau = np.linspace(-1 / 3, 1 / 3, 4097)
    prev = math.inf
    for K in range(13):
        poly = KernelPolynomial.build(alpha, K)
        assert np.max(np.abs(kernel_shape(alpha, tau) - poly(tau))) <= poly.eps
        assert poly.eps <= prev
        prev = poly.eps


@pytest.mark.parametrize("alpha", ALPHAS)
@pytest.mark.parametrize("K", [0, 4, 9, 12])
def test_eps_bounds_true_remainder(alpha, K):
    # the sampled sup is attained at tau = 1/3, where the remainder is largest;
    # compare with a high-precision evaluation there and at interior points
    poly = KernelPolynomial.build(alpha, K)
    mpmath.mp.dps = 40
    worst = 0.0
    for tau in np.linspace(-1 / 3, 1 / 3, 301):
        t = mpmath.mpf(tau)
        exact = (1 - t) ** (-mpmath.mpf(alpha))
        approx = sum(mpmath.binomial(alpha + k - 1, k) * t**k for k in range(K + 1))
        worst = max(worst, float(abs(exact - approx)))
    # float evaluation of a 1e-9 remainder carries ~1e-7 relative rounding
    assert worst <= poly.eps <= EPS_INFLATION * worst * (1 + 1e-6)


def test_certify_needs_two_samples():
    poly = KernelPolynomial.build(0.5, 3)
    with pytest.raises(ValueError):
        certify_eps(poly, 1)


def test_high_degree_eps_nonnegative():
    eps = [KernelPolynomial.build(0.3, K).eps for K in (60, 61)]
    assert 0.0 <= eps[1] <= eps[0]


def test_kernel_is_immutable():
    poly = KernelPolynomial.build(0.5, 4)
    with pytest.raises(ValueError):
        poly.weights[0] = 2.0
    with pytest.raises(AttributeError):
        poly.eps = 0.0
