"""Polynomial approximation of the kernel shape ``(1 - tau)**(-alpha)``.

On every history subinterval the fractional kernel, rescaled about the
subinterval midpoint, has its argument confined to ``[-1/3, 1/3]``.  The shape
function is replaced there by its Taylor polynomial about ``tau = 0`` and the
sup-norm error of that replacement is certified numerically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

#: Half-width of the interval on which the kernel shape is approximated.
TAU_MAX = 1.0 / 3.0

#: Safety factor applied to the sampled sup-norm error.
EPS_INFLATION = 1.01

#: Default kernel degree for each interpolation order.
DEFAULT_DEGREE = {1: 4, 2: 9}


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")


def taylor_weights(alpha: float, K: int) -> np.ndarray:
    """Binomial-series coefficients of ``(1 - tau)**(-alpha)`` up to degree *K*."""
    _check_alpha(alpha)
    if K < 0:
        raise ValueError(f"degree must be nonnegative, got {K!r}")

    w = np.empty(K + 1)
    w[0] = 1.0
    for k in range(1, K + 1):
        w[k] = w[k - 1] * (alpha + k - 1) / k

    return w


def kernel_shape(alpha: float, tau):
    """Exact kernel shape ``(1 - tau)**(-alpha)`` for ``|tau| <= 1/3``."""
    tau_arr = np.asarray(tau, dtype=float)
    if np.any(np.abs(tau_arr) > TAU_MAX * (1.0 + 1.0e-14)):
        raise ValueError("kernel_shape is only defined on [-1/3, 1/3]")

    result = (1.0 - tau_arr) ** (-alpha)
    return float(result) if result.ndim == 0 else result


def _sup_error(alpha: float, weights: np.ndarray, samples: int) -> float:
    tau = np.linspace(-TAU_MAX, TAU_MAX, samples)
    approx = np.polynomial.polynomial.polyval(tau, weights)
    return float(np.max(np.abs((1.0 - tau) ** (-alpha) - approx)))


@dataclass(frozen=True)
class KernelPolynomial:
    """Taylor approximation of the kernel shape together with its error bound.

    Use :meth:`build` rather than the constructor; it fills in the weights and
    certifies :attr:`eps`.
    """

    alpha: float
    K: int
    weights: np.ndarray = field(repr=False)
    eps: float

    @classmethod
    def build(cls, alpha: float, K: int, samples: int = 4097) -> KernelPolynomial:
        w = taylor_weights(alpha, K)
        w.setflags(write=False)
        poly = cls(alpha=alpha, K=K, weights=w, eps=np.inf)
        return cls(alpha=alpha, K=K, weights=w, eps=certify_eps(poly, samples))

    def __call__(self, tau):
        return np.polynomial.polynomial.polyval(tau, self.weights)


def certify_eps(poly: KernelPolynomial, samples: int = 4097) -> float:
    """Inflated sup-norm error of *poly* over a uniform grid on ``[-1/3, 1/3]``.

    The grid contains both endpoints, where the remainder of the binomial
    series is largest.
    """
    if samples < 2:
        raise ValueError(f"need at least two samples, got {samples!r}")

    return EPS_INFLATION * _sup_error(poly.alpha, np.asarray(poly.weights), samples)
