"""Invariant checks shared by the ``props`` experiment and the test-suite."""

from __future__ import annotations

import math

import numpy as np

from fracfast.bench.checks import CheckResult
from fracfast.bench.metrics import slot_cap
from fracfast.caputo import (
    CaputoStepper,
    SchemeConfig,
    build_payload,
    caputo_power_oracle,
    direct_l1,
    direct_l12,
    faom_eval,
)
from fracfast.history import HistoryLedger, check_structure, recombine_moments
from fracfast.kernel import KernelPolynomial, kernel_shape
from fracfast.pde import GridSpec, ProblemSpec, run

# rounding allowance on top of the analytic kernel bound, relative to the value
ROUNDING = 64 * np.finfo(float).eps


def drive_structure(steps: int, Ntau: int, merge: str = "cascade") -> CheckResult:
    """Push ``steps`` scalar payloads and check the ledger after every push."""
    ledger = HistoryLedger(h=1.0, Ntau=Ntau, merge_order=merge)
    zero = np.zeros(1)
    for _ in range(steps):
        ledger.push(zero)
        report = check_structure(ledger)
        if not report:
            return CheckResult(f"structure Ntau={Ntau} {merge}", False,
                               f"n={ledger.n}: {report.failed} ({report.detail})")
    return CheckResult(f"structure Ntau={Ntau} {merge}", True,
                       f"{steps} steps, final M={ledger.M}")


def figure_boundaries() -> CheckResult:
    ledger = HistoryLedger(h=0.1, Ntau=2)
    for _ in range(9):
        ledger.push(np.zeros(1))
    got = [round(float(t), 12) for t in ledger.times()]
    want = [0.9, 0.8, 0.6, 0.4, 0.0]
    return CheckResult("boundaries at n=10", got == want, f"{got}")


def kernel_certification(alphas=(0.1, 0.25, 0.5, 0.75, 0.9), degrees=range(13)) -> CheckResult:
    tau = np.linspace(-1.0 / 3.0, 1.0 / 3.0, 4097)
    worst = 0.0
    for a in alphas:
        prev = math.inf
        for K in degrees:
            poly = KernelPolynomial.build(a, K)
            err = float(np.max(np.abs(kernel_shape(a, tau) - poly(tau))))
            if err > poly.eps or poly.eps > prev:
                return CheckResult("kernel certificate", False, f"alpha={a} K={K}")
            worst = max(worst, err / poly.eps)
            prev = poly.eps
    return CheckResult("kernel certificate", True, f"largest sampled error / eps = {worst:.4f}")


def recombination_exactness(trials: int = 20, seed: int = 0) -> CheckResult:
    """Merged moments against Gauss-Legendre quadrature of the same interpolant."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        Ntau = int(rng.integers(2, 4))
        K = int(rng.integers(0, 10))
        h = float(rng.uniform(0.01, 0.5))
        slopes, curvs = rng.normal(size=Ntau), rng.normal(size=Ntau)
        group = []
        for s, d in zip(slopes, curvs):
            even = np.where(np.arange(K + 1) % 2 == 0, h / (np.arange(K + 1) + 1), 0.0)
            odd = np.where(np.arange(K + 1) % 2 == 1, 0.5 * h**2 / (np.arange(K + 1) + 2), 0.0)
            group.append(s * even + d * odd)
        merged = recombine_moments(group, [1] * Ntau, Ntau, K)
        # direct quadrature: fine interval j (newest first) spans
        # [T - (j+1) h, T - j h] with T = Ntau * h; merged interval is [0, T]
        T = Ntau * h
        c, r = T / 2, T / 2
        x, w = np.polynomial.legendre.leggauss(K + 4)
        direct = np.zeros(K + 1)
        for j, (s, d) in enumerate(zip(slopes, curvs)):
            lo, hi = T - (j + 1) * h, T - j * h
            tau = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
            deriv = s + d * (tau - 0.5 * (hi + lo))
            for k in range(K + 1):
                direct[k] += 0.5 * (hi - lo) * np.sum(w * deriv * ((tau - c) / r) ** k)
        scale = np.max(np.abs(direct))
        worst = max(worst, float(np.max(np.abs(merged - direct))) / scale)
    return CheckResult("recombination exactness", worst <= 1e-12, f"max relative gap {worst:.2e}")


def linear_exactness(alphas=(0.1, 0.25, 0.5, 0.75, 0.9), n: int = 64) -> CheckResult:
    worst = 0.0
    for a in alphas:
        h = 1.0 / n
        u = np.arange(n + 1) * h
        exact = caputo_power_oracle(1.0, a, 1.0)
        ledger = HistoryLedger(h=h)
        for j in range(1, n):
            ledger.push(build_payload(u[j - 1 : j + 1], h, 1, 0))
        local = (u[n] - u[n - 1]) * h ** (-a) / math.gamma(2.0 - a)
        for value in (direct_l1(u, a, h), direct_l12(u, a, h), faom_eval(ledger, local, a)):
            worst = max(worst, abs(value - exact) / exact)
    return CheckResult("exact on linear u", worst <= 1e-12, f"max relative error {worst:.2e}")


def kernel_bound_trace(alpha: float, name: str, h: float = 1.0 / 160, T: float = 1.0,
                       merge: str = "cascade") -> tuple[float, float]:
    """Largest ``|fast - direct|`` and its allowance over all steps, for
    ``u = t**(3 + alpha) exp(-t)``; returns (worst gap / bound, worst gap)."""
    config = SchemeConfig.from_name(name, alpha, merge=merge)
    kernel = config.kernel()
    NT = int(round(T / h))
    t = np.arange(NT + 1) * h
    u = t ** (3.0 + alpha) * np.exp(-t)
    stepper = CaputoStepper(config, h)
    stepper.begin(u[0])
    gamma = math.gamma(1.0 - alpha)
    slopes = np.diff(u) / h
    curv = np.zeros(NT + 1)
    curv[2:] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / h**2
    worst_ratio, worst_gap = 0.0, 0.0
    for n in range(1, NT + 1):
        fast = stepper.coefficient(n) * u[n] + stepper.explicit(n)
        direct = direct_l1(u[: n + 1], alpha, h) if config.J == 1 else direct_l12(u[: n + 1], alpha, h)
        gap = abs(fast - direct)
        if n >= 2:
            ledger = stepper.ledger
            c, r, _, _ = ledger.geometry()
            # largest |(Pi u)'| over the stored intervals 1..n-1
            j = np.arange(1, n)
            half = 0.5 * h * np.abs(curv[j]) if config.J == 2 else 0.0
            deriv = float(np.max(np.abs(slopes[j - 1]) + half))
            bound = kernel.eps / gamma * float(np.sum(2.0 * r * (t[n] - c) ** (-alpha))) * deriv
            bound += ROUNDING * (abs(direct) + 1.0)
            worst_ratio = max(worst_ratio, gap / bound)
        else:
            worst_ratio = max(worst_ratio, gap / (ROUNDING * (abs(direct) + 1.0)))
        worst_gap = max(worst_gap, gap)
        stepper.advance(u[n])
    return worst_ratio, worst_gap


def kernel_bound(alphas=(0.1, 0.25, 0.5, 0.75, 0.9), names=("FAOM-P4", "FAOM-P9")) -> CheckResult:
    worst = 0.0
    for a in alphas:
        for name in names:
            ratio, _ = kernel_bound_trace(a, name)
            worst = max(worst, ratio)
    return CheckResult("fast vs direct within kernel bound", worst <= 1.0,
                       f"largest gap / bound = {worst:.3f}")


def manufactured_linear(alpha: float = 0.5, N: int = 16, h: float = 0.05) -> CheckResult:
    """``u = (1 + t)(1 + x + x**2)`` is reproduced by L1 and FAOM with central differences."""
    g1 = caputo_power_oracle(1.0, alpha, 1.0)

    def exact(x, t):
        return (1.0 + t) * (1.0 + x + x**2)

    def forcing(x, t):
        return g1 * np.asarray(t, dtype=float) ** (1.0 - alpha) * (1.0 + x + x**2) - 2.0 * (1.0 + t)

    spec = ProblemSpec("manufactured", "linear-forced", alpha, 0.0, 1.0,
                       u0=lambda x: exact(x, 0.0), boundary=exact, forcing=forcing, exact=exact)
    worst = 0.0
    for scheme in ("L1", "FAOM"):
        res = run(spec, GridSpec(0.0, 1.0, N, h, int(round(1.0 / h))), SchemeConfig.from_name(scheme, alpha))
        worst = max(worst, float(np.max(res.step_errors)))
    return CheckResult("manufactured linear solution", worst <= 1e-10, f"max error {worst:.2e}")


def slot_bound(NTs=(64, 1000, 4096), nodes: int = 9, Ntau: int = 2, K: int = 4) -> CheckResult:
    worst = 0.0
    for NT in NTs:
        config = SchemeConfig(0.5, "faompk", J=1, Ntau=Ntau, K=K)
        stepper = CaputoStepper(config, 1.0 / NT, shape=(nodes,))
        stepper.begin(np.zeros(nodes))
        for n in range(1, NT + 1):
            stepper.explicit(n)
            stepper.advance(np.full(nodes, math.sin(n / NT)))
        worst = max(worst, stepper.slots / slot_cap(K, nodes, NT, Ntau))
    return CheckResult("stored slots within cap", worst <= 1.0, f"largest slots / cap = {worst:.3f}")


def property_suite(structure_steps: int = 20000) -> list[CheckResult]:
    return [
        figure_boundaries(),
        drive_structure(structure_steps, 2),
        drive_structure(structure_steps, 3),
        kernel_certification(),
        recombination_exactness(),
        linear_exactness(),
        kernel_bound(),
        manufactured_linear(),
        slot_bound(),
    ]
