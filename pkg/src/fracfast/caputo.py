"""Discrete Caputo derivatives on a uniform grid.

Five evaluators share one split of the integral at ``t_{n-1}``: the local
part on ``[t_{n-1}, t_n]`` is always evaluated exactly for the interpolant,
while the history part on ``[0, t_{n-1}]`` is

* ``direct``  -- summed interval by interval (L1 for ``J = 1``, L1-2 for ``J = 2``),
* ``cutoff``  -- summed over the newest ``Sbar`` intervals only,
* ``faom``    -- averaged over a compressed ledger of subintervals,
* ``faompk``  -- a degree-``K`` kernel polynomial applied to stored moments.

All kernel integrals are closed-form.  The pure functions at the top take a
sample vector ``u^0..u^n`` and return the derivative at ``t_n``; the
:class:`CaputoStepper` evaluates the same quantities incrementally inside a
time loop, where ``u^n`` is still unknown.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from fracfast.history import MERGE_ORDERS, HistoryLedger
from fracfast.kernel import DEFAULT_DEGREE, KernelPolynomial, taylor_weights

KINDS = ("direct", "cutoff", "faom", "faompk")

#: Number of binomial terms used for the first-moment kernel integrals.
_SERIES_TERMS = 48


@dataclass(frozen=True)
class SchemeConfig:
    """Choice of Caputo evaluator.

    ``J`` is the interpolation order (1: piecewise linear, 2: piecewise
    quadratic), ``Ntau`` the merge arity of the ledger, ``K`` the kernel
        degree of ``faompk`` and ``Sbar`` the window of ``cutoff``.  ``merge``
    selects the ledger merge order (see :mod:`fracfast.history`).
    ``history_J`` overrides the interpolation order used to build the stored
    history moments of the fast evaluators; by default it equals ``J``.
    """

    alpha: float
    kind: str = "direct"
    J: int = 1
    Ntau: int = 2
    K: int | None = None
    Sbar: int = 10
    merge: str = "cascade"
    history_J: int | None = None

    def __post_init__(self):
        if self.history_J not in (None, 1, 2):
            raise ValueError(f"history interpolation order must be 1 or 2, got {self.history_J!r}")
        if self.merge not in MERGE_ORDERS:
            raise ValueError(f"unknown merge order {self.merge!r}; expected one of {MERGE_ORDERS}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if self.kind not in KINDS:
            raise ValueError(f"unknown evaluator {self.kind!r}; expected one of {KINDS}")
        if self.J not in (1, 2):
            raise ValueError(f"interpolation order must be 1 or 2, got {self.J!r}")
        if self.Ntau < 2:
            raise ValueError(f"Ntau must be at least 2, got {self.Ntau!r}")
        if self.kind == "cutoff":
            if self.Sbar < 1:
                raise ValueError(f"Sbar must be at least 1, got {self.Sbar!r}")
            if self.J != 1:
                raise ValueError("the cut-off evaluator uses linear interpolation only")
        if self.kind == "faompk" and self.K is None:
            object.__setattr__(self, "K", DEFAULT_DEGREE[self.J])

    @classmethod
    def from_name(cls, name: str, alpha: float, **kwargs) -> SchemeConfig:
        """Build from a column label such as ``L1``, ``L1-2``, ``FAOM-P4``."""
        key = name.strip().upper()
        if key == "L1":
            return cls(alpha, "direct", J=1, **kwargs)
        if key in ("L1-2", "L12"):
            return cls(alpha, "direct", J=2, **kwargs)
        if key in ("CUTOFF", "CUT-OFF"):
            return cls(alpha, "cutoff", J=1, **kwargs)
        if key == "FAOM":
            return cls(alpha, "faom", **kwargs)
        if key.startswith("FAOM-P"):
            K = int(key[len("FAOM-P"):])
            kwargs.setdefault("J", 1 if K < DEFAULT_DEGREE[2] else 2)
            kwargs.setdefault("K", K)
            return cls(alpha, "faompk", **kwargs)
        raise ValueError(f"unknown scheme name {name!r}")

    @property
    def label(self) -> str:
        if self.kind == "direct":
            return "L1" if self.J == 1 else "L1-2"
        if self.kind == "cutoff":
            return "cutoff"
        if self.kind == "faom":
            return "FAOM"
        return f"FAOM-P{self.K}"

    def kernel(self) -> KernelPolynomial | None:
        if self.kind != "faompk":
            return None
        return _cached_kernel(self.alpha, self.K)


_KERNELS: dict = {}


def _cached_kernel(alpha: float, K: int) -> KernelPolynomial:
    key = (alpha, K)
    if key not in _KERNELS:
        _KERNELS[key] = KernelPolynomial.build(alpha, K)
    return _KERNELS[key]


class LocalCoefficients(NamedTuple):
    """Weights of ``u^n, u^{n-1}, u^{n-2}`` in the local part, scaled by ``1/Gamma(1-alpha)``."""

    a_n: float
    a_n1: float
    a_n2: float


# {{{ closed-form kernel integrals


def slope_weights(alpha: float, h: float, m) -> np.ndarray:
    """``int (t_n - tau)**(-alpha) dtau`` over ``[t_{n-m-1}, t_{n-m}]``."""
    m = np.asarray(m, dtype=float)
    scale = h ** (1.0 - alpha) / (1.0 - alpha)
    with np.errstate(divide="ignore", invalid="ignore"):
        inner = m ** (1.0 - alpha) * np.expm1((1.0 - alpha) * np.log1p(1.0 / m))
    return scale * np.where(m == 0, 1.0, inner)


def curvature_weights(alpha: float, h: float, m) -> np.ndarray:
    """``int (tau - mid) (t_n - tau)**(-alpha) dtau`` over ``[t_{n-m-1}, t_{n-m}]``,
    with ``mid`` the midpoint of that interval.

    The direct difference of closed-form antiderivatives cancels badly for
    large ``m``; for ``m >= 1`` the binomial series in ``1 / (m + 1/2)`` is
    summed instead.
    """
    m = np.asarray(m, dtype=float)
    mu = m + 0.5
    w = taylor_weights(alpha, _SERIES_TERMS)
    series = np.zeros_like(mu)
    for k in range(_SERIES_TERMS, 0, -1):
        if k % 2 == 1:
            series = series + w[k] * 0.5 ** (k + 1) / (k + 2) * mu ** (-k)
    far = h ** (2.0 - alpha) * mu ** (-alpha) * series
    near = h ** (2.0 - alpha) * alpha / (2.0 * (1.0 - alpha) * (2.0 - alpha))
    return np.where(m == 0, near, far)


def interval_kernel_integral(alpha: float, t_n: float, lower, upper) -> np.ndarray:
    """``int_lower^upper (t_n - tau)**(-alpha) dtau`` for ``upper < t_n``."""
    near = t_n - np.asarray(upper, dtype=float)
    far = t_n - np.asarray(lower, dtype=float)
    return near ** (1.0 - alpha) * np.expm1((1.0 - alpha) * np.log(far / near)) / (1.0 - alpha)


# }}}

# {{{ sample-vector evaluators


def _samples(u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape[0] < 2:
        raise ValueError("need at least two samples u^0, u^1")
    return u


def _contract(weights: np.ndarray, values: np.ndarray):
    return np.tensordot(weights, values, axes=(0, 0))


def direct_l1(u, alpha: float, h: float):
    """L1 approximation of the Caputo derivative at ``t_n``, ``n = len(u) - 1``."""
    u = _samples(u)
    n = u.shape[0] - 1
    slopes = np.diff(u, axis=0) / h
    b = slope_weights(alpha, h, np.arange(n - 1, -1, -1))
    return _contract(b, slopes) / math.gamma(1.0 - alpha)


def direct_l12(u, alpha: float, h: float):
    """L1-2 approximation: quadratic interpolation on every interval but the first."""
    u = _samples(u)
    n = u.shape[0] - 1
    slopes = np.diff(u, axis=0) / h
    m = np.arange(n - 1, -1, -1)
    total = _contract(slope_weights(alpha, h, m), slopes)
    if n >= 2:
        curv = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / h**2
        total = total + _contract(curvature_weights(alpha, h, m[1:]), curv)
    return total / math.gamma(1.0 - alpha)


def cutoff_eval(u, alpha: float, h: float, Sbar: int):
    """L1 sum restricted to the newest ``Sbar`` intervals."""
    u = _samples(u)
    n = u.shape[0] - 1
    j0 = max(0, n - Sbar)
    return direct_l1(u[j0:], alpha, h)


def caputo_power_oracle(p: float, alpha: float, t):
    """Exact Caputo derivative of ``t**p``."""
    if p <= 0:
        raise ValueError(f"power must be positive, got {p!r}")
    t = np.asarray(t, dtype=float)
    value = math.gamma(p + 1.0) / math.gamma(p + 1.0 - alpha) * t ** (p - alpha)
    return float(value) if value.ndim == 0 else value


# }}}

# {{{ local part, payloads, ledger evaluation


def local_coefficients(alpha: float, h: float, J: int, n: int) -> LocalCoefficients:
    g = math.gamma(1.0 - alpha)
    g1 = h ** (-alpha) / math.gamma(2.0 - alpha)
    if J == 1 or n < 2:
        return LocalCoefficients(g1, -g1, 0.0)
    g2 = h ** (-alpha) * alpha / (2.0 * (1.0 - alpha) * (2.0 - alpha) * g)
    return LocalCoefficients(g1 + g2, -g1 - 2.0 * g2, g2)


def moment_basis(h: float, K: int) -> tuple[np.ndarray, np.ndarray]:
    """Moments of a unit slope and a unit curvature on one interval of length ``h``."""
    k = np.arange(K + 1)
    even = np.where(k % 2 == 0, h / (k + 1), 0.0)
    odd = np.where(k % 2 == 1, 0.5 * h**2 / (k + 2), 0.0)
    return even, odd


def build_payload(samples, h: float, J: int, K: int) -> np.ndarray:
    """Moments of ``(Pi_J u)'`` on the interval ending at the newest sample.

    *samples* holds the two (``J = 1``) or three (``J = 2``) newest values,
    oldest first.  With ``J = 2`` and only two samples the interval is the
    first one, where the interpolant is linear.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.shape[0] < 2:
        raise ValueError("a payload needs at least two samples")
    if J == 2 and samples.shape[0] >= 3:
        u2, u1, u0 = samples[-3], samples[-2], samples[-1]
        slope = (u0 - u1) / h
        curv = (u0 - 2.0 * u1 + u2) / h**2
    else:
        slope = (samples[-1] - samples[-2]) / h
        curv = None

    even, odd = moment_basis(h, K)
    payload = np.multiply.outer(even, slope)
    if curv is not None:
        payload = payload + np.multiply.outer(odd, curv)
    return payload


def faom_history(ledger: HistoryLedger, alpha: float, t_n: float):
    """History integral with ``(Pi u)'`` replaced by its average on each subinterval."""
    if ledger.M == 0:
        return 0.0
    _, r, lower, upper = ledger.geometry()
    kint = interval_kernel_integral(alpha, t_n, lower, upper)
    total = 0.0
    for i, payload in enumerate(ledger.payloads):
        total = total + kint[i] / (2.0 * r[i]) * payload[0]
    return total


def faompk_weights(ledger: HistoryLedger, kernel: KernelPolynomial, t_n: float) -> np.ndarray:
    """``w_k r_i**k / (t_n - c_i)**(k + alpha)`` for every subinterval ``i``."""
    c, r, _, _ = ledger.geometry()
    dist = t_n - c
    k = np.arange(kernel.K + 1)
    return np.asarray(kernel.weights) * (r / dist)[:, None] ** k * dist[:, None] ** (-kernel.alpha)


def faompk_history(ledger: HistoryLedger, kernel: KernelPolynomial, t_n: float):
    if ledger.M == 0:
        return 0.0
    if ledger.K != kernel.K:
        raise ValueError(f"kernel degree {kernel.K} does not match payload degree {ledger.K}")
    W = faompk_weights(ledger, kernel, t_n)
    stacked = np.stack(ledger.payloads)
    flat = stacked.reshape(W.size, -1)
    total = W.ravel() @ flat
    return total.reshape(stacked.shape[2:]) if stacked.ndim > 2 else float(total[0])


def faom_eval(ledger: HistoryLedger, local, alpha: float, t_n: float | None = None):
    """Local part plus the averaged history part."""
    t_n = ledger.n * ledger.h if t_n is None else t_n
    return local + faom_history(ledger, alpha, t_n) / math.gamma(1.0 - alpha)


def faompk_eval(ledger: HistoryLedger, local, kernel: KernelPolynomial,
                alpha: float, t_n: float | None = None):
    """Local part plus the kernel-polynomial history part."""
    if abs(kernel.alpha - alpha) > 0.0:
        raise ValueError("kernel was built for a different alpha")
    t_n = ledger.n * ledger.h if t_n is None else t_n
    return local + faompk_history(ledger, kernel, t_n) / math.gamma(1.0 - alpha)


# }}}

# {{{ incremental evaluation


class CaputoStepper:
    """Incremental Caputo evaluator for a time loop.

    At step ``n`` the discrete derivative is split as
    ``D u^n = a_n u^n + explicit(n)``; after ``u^n`` is solved for, call
    :meth:`advance`.  Values may be scalars or arrays of fixed shape.

    Counters: ``flops`` accumulates kernel-weighted multiply-adds of the
    history evaluation, ``slots`` the largest number of stored reals any
    evaluation reads.
    """

    block = 64

    def __init__(self, config: SchemeConfig, h: float, shape=(), capacity: int = 256):
        self.config = config
        self.h = h
        self.alpha = config.alpha
        self.shape = tuple(shape)
        self.width = int(np.prod(self.shape)) if self.shape else 1
        self.gamma = math.gamma(1.0 - config.alpha)
        self.flops = 0
        self.slots = 0
        self.n = 0
        self._recent: deque = deque(maxlen=3)

        kind = config.kind
        if kind == "direct":
            self._capacity = max(capacity, 8) + 1
            self._S = np.zeros((self._capacity, self.width))
            self._D = np.zeros((self._capacity, self.width)) if config.J == 2 else None
            self._block_start = None
            self._block_sum = None
            self._b = slope_weights(self.alpha, h, np.arange(self._capacity))
            self._c = curvature_weights(self.alpha, h, np.arange(self._capacity)) if config.J == 2 else None
        elif kind == "cutoff":
            self._window: deque = deque(maxlen=max(config.Sbar - 1, 0))
            self._b = slope_weights(self.alpha, h, np.arange(config.Sbar + 1))
        else:
            K = 0 if kind == "faom" else config.K
            self.ledger = HistoryLedger(h=h, Ntau=config.Ntau, K=K, merge_order=config.merge)
            self.kernel = config.kernel()

    # -- bookkeeping

    def _flat(self, value) -> np.ndarray:
        return np.broadcast_to(np.asarray(value, dtype=float), self.shape).reshape(self.width)

    def _shaped(self, flat: np.ndarray):
        return float(flat[0]) if not self.shape else flat.reshape(self.shape)

    def begin(self, u0) -> None:
        self._recent.clear()
        self._recent.append(self._flat(u0).copy())
        self.n = 0

    def coefficients(self, n: int) -> LocalCoefficients:
        return local_coefficients(self.alpha, self.h, self.config.J, n)

    def coefficient(self, n: int) -> float:
        return self.coefficients(n).a_n

    def explicit(self, n: int):
        """Everything in ``D u^n`` except the ``a_n u^n`` term."""
        if n != self.n + 1:
            raise ValueError(f"stepper is at step {self.n}, cannot evaluate step {n}")
        a = self.coefficients(n)
        recent = self._recent
        lower = a.a_n1 * recent[-1]
        if a.a_n2 != 0.0:
            lower = lower + a.a_n2 * recent[-2]
        hist = self._history(n)
        self.slots = max(self.slots, self._stored(n))
        return self._shaped(lower + hist / self.gamma)

    def advance(self, u_n) -> None:
        u_n = self._flat(u_n).copy()
        self._recent.append(u_n)
        self.n += 1
        n = self.n
        kind = self.config.kind
        slope = (u_n - self._recent[-2]) / self.h

        if kind == "direct":
            self._ensure_capacity(n)
            self._S[n] = slope
            if self._D is not None and n >= 2:
                self._D[n] = (u_n - 2.0 * self._recent[-2] + self._recent[-3]) / self.h**2
        elif kind == "cutoff":
            self._window.append(slope)
        else:
            samples = np.stack(list(self._recent))
            J = self.config.J if self.config.history_J is None else self.config.history_J
            payload = build_payload(samples, self.h, J, self.ledger.K)
            self.ledger.push(payload)

    # -- history parts

    def _stored(self, n: int) -> int:
        """Reals held for the history evaluation at step ``n``."""
        kind = self.config.kind
        if kind == "direct":
            return n * self.width
        if kind == "cutoff":
            return (len(self._window) + 1) * self.width
        return (self.ledger.K + 1) * self.ledger.M * self.width

    def _history(self, n: int) -> np.ndarray:
        kind = self.config.kind
        if n == 1:
            return np.zeros(self.width)
        if kind == "direct":
            return self._direct_history(n)
        if kind == "cutoff":
            window = list(self._window)
            if not window:
                return np.zeros(self.width)
            m = np.arange(len(window), 0, -1)
            self.flops += len(window) * self.width
            return np.tensordot(self._b[m], np.stack(window), axes=(0, 0))
        ledger = self.ledger
        t_n = n * self.h
        if kind == "faom":
            self.flops += ledger.M * self.width
            return np.asarray(faom_history(ledger, self.alpha, t_n))
        self.flops += ledger.M * (ledger.K + 1) * self.width
        return np.asarray(faompk_history(ledger, self.kernel, t_n))

    def _ensure_capacity(self, n: int) -> None:
        if n < self._capacity:
            return
        new = self._capacity
        while new <= n:
            new *= 2
        extra = new - self._capacity
        self._S = np.concatenate([self._S, np.zeros((extra, self.width))])
        if self._D is not None:
            self._D = np.concatenate([self._D, np.zeros((extra, self.width))])
        self._b = slope_weights(self.alpha, self.h, np.arange(new))
        if self._c is not None:
            self._c = curvature_weights(self.alpha, self.h, np.arange(new))
        self._capacity = new
        self._block_start = None

    def _direct_history(self, n: int) -> np.ndarray:
        # intervals older than the current block are summed for the whole block
        # at once; the sum is the same as the step-by-step one, reordered
        B = self.block
        start = self._block_start
        if start is None or n >= start + B or n < start:
            start = self._block_start = n
            self._ensure_capacity(n + B)
            if n > 1:
                rows = n + np.arange(B)[:, None] - np.arange(1, n)[None, :]
                self._block_sum = self._b[rows] @ self._S[1:n]
                if self._D is not None:
                    self._block_sum += self._c[rows] @ self._D[1:n]
            else:
                self._block_sum = np.zeros((B, self.width))

        hist = self._block_sum[n - start].copy()
        if n > start:
            m = n - np.arange(start, n)
            hist += self._b[m] @ self._S[start:n]
            if self._D is not None:
                hist += self._c[m] @ self._D[start:n]

        terms = n - 1 if self._D is None else 2 * (n - 1)
        self.flops += terms * self.width
        return hist


def evaluate_samples(u, config: SchemeConfig, h: float) -> np.ndarray:
    """Discrete derivative at ``t_1..t_n`` for known samples ``u^0..u^n``."""
    u = np.asarray(u, dtype=float)
    stepper = CaputoStepper(config, h, shape=u.shape[1:], capacity=u.shape[0])
    stepper.begin(u[0])
    out = []
    for n in range(1, u.shape[0]):
        out.append(stepper.coefficient(n) * u[n] + stepper.explicit(n))
        stepper.advance(u[n])
    return np.asarray(out)


# }}}
