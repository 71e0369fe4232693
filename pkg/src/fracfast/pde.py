"""Time-fractional diffusion solvers in one space dimension.

Solves ``D^alpha_t u = u_xx + f(u) + g(x, t)`` on a uniform mesh with either

* Dirichlet data on both ends (``linear-forced``, ``nonlinear-forced``), or
* absorbing boundary rows at ``x_1`` and ``x_{N-1}`` (``fisher-abc``,
  ``huxley-abc``), which close the two end values.

The Caputo derivative is evaluated by any :class:`~fracfast.caputo.SchemeConfig`
evaluator; the nonlinearity is explicit, evaluated on a polynomial
extrapolation of the newest solutions.  The extrapolation order follows the
interpolation order unless overridden.  With a decaying nonlinearity the
quadratic predictor has a step-size stability limit (for ``f'(u) = -1`` and
``alpha = 0.25`` it diverges for ``h >= 2**-8``); the linear one does not.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from fracfast.banded import band_from_rows, solve_band, solve_tridiagonal
from fracfast.caputo import CaputoStepper, SchemeConfig

PROBLEM_KINDS = ("linear-forced", "nonlinear-forced", "fisher-abc", "huxley-abc")
SPATIAL_KINDS = ("central-2", "compact-4")

#: ABC parameter.
S0 = 3.0


@dataclass(frozen=True)
class GridSpec:
    a: float
    b: float
    N: int
    h: float
    NT: int

    def __post_init__(self):
        if self.N < 4:
            raise ValueError(f"need at least 4 cells, got N={self.N}")
        if not self.b > self.a:
            raise ValueError("empty spatial domain")
        if not self.h > 0:
            raise ValueError(f"time step must be positive, got {self.h}")
        if self.NT < 1:
            raise ValueError(f"need at least one time step, got NT={self.NT}")

    @classmethod
    def from_steps(cls, a: float, b: float, dx: float, h: float, T: float = 1.0) -> GridSpec:
        return cls(a, b, int(round((b - a) / dx)), h, int(round(T / h)))

    @property
    def dx(self) -> float:
        return (self.b - self.a) / self.N

    @property
    def T(self) -> float:
        return self.NT * self.h

    @property
    def x(self) -> np.ndarray:
        return self.a + self.dx * np.arange(self.N + 1)


@dataclass(frozen=True)
class ProblemSpec:
    """Problem data.  Callables are vectorized over ``x``."""

    name: str
    kind: str
    alpha: float
    a: float
    b: float
    u0: Callable
    boundary: Callable | None = None
    forcing: Callable | None = None
    nonlinearity: Callable | None = None
    exact: Callable | None = None
    s0: float = S0

    def __post_init__(self):
        if self.kind not in PROBLEM_KINDS:
            raise ValueError(f"unknown problem kind {self.kind!r}")
        if self.kind.endswith("forced") and self.boundary is None:
            raise ValueError("Dirichlet problems need boundary data")

    @property
    def absorbing(self) -> bool:
        return self.kind.endswith("abc")


@dataclass(frozen=True)
class SpatialOperator:
    """Second-derivative discretization ``A u_xx ~ delta^2 u / dx^2``.

    ``weights`` is the averaging stencil ``A`` (identity for the central
    scheme, ``(1, 10, 1) / 12`` for the compact one).
    """

    kind: str = "central-2"

    def __post_init__(self):
        if self.kind not in SPATIAL_KINDS:
            raise ValueError(f"unknown spatial operator {self.kind!r}")

    @property
    def weights(self) -> tuple[float, float, float]:
        if self.kind == "central-2":
            return (0.0, 1.0, 0.0)
        return (1.0 / 12.0, 10.0 / 12.0, 1.0 / 12.0)

    def average(self, v: np.ndarray) -> np.ndarray:
        """``A v`` at interior nodes ``1..N-1``."""
        wl, wc, wr = self.weights
        if wl == 0.0:
            return wc * v[1:-1]
        return wl * v[:-2] + wc * v[1:-1] + wr * v[2:]

    def stencil(self, a_n: float, dx: float) -> tuple[float, float, float]:
        """Row of ``a_n A - delta^2 / dx^2``."""
        wl, wc, wr = self.weights
        inv = 1.0 / dx**2
        return (a_n * wl - inv, a_n * wc + 2.0 * inv, a_n * wr - inv)


def extrapolate(history: list, order: int, n: int) -> np.ndarray:
    """Explicit predictor of ``u^n`` from the newest solutions (newest last).

    ``order`` 1 extrapolates linearly, 2 quadratically; the first steps use
    whatever lower order the available history allows.
    """
    if n == 1 or len(history) == 1:
        return history[-1]
    if order == 1 or n == 2:
        return 2.0 * history[-1] - history[-2]
    return 3.0 * history[-1] - 3.0 * history[-2] + history[-3]


@dataclass
class SolveResult:
    x: np.ndarray
    u: np.ndarray
    t: float
    step_errors: np.ndarray | None = None
    final_error: float | None = None
    flops: int = 0
    slots: int = 0
    wall: float = 0.0
    ledger_sizes: list = field(default_factory=list)
    merge_trace: list = field(default_factory=list)
    memory_trace: list = field(default_factory=list)

    @property
    def E(self) -> float | None:
        if self.step_errors is None:
            return None
        h = self.t / len(self.step_errors)
        return math.sqrt(h * float(np.sum(self.step_errors**2)))


class Solver:
    """Assembles and solves one time step at a time."""

    def __init__(self, spec: ProblemSpec, grid: GridSpec, scheme: SchemeConfig,
                 spatial: SpatialOperator | str = "central-2", trace: bool = False,
                 predictor: int | None = None):
        if predictor not in (None, 1, 2):
            raise ValueError(f"predictor order must be 1 or 2, got {predictor!r}")
        if abs(spec.alpha - scheme.alpha) > 0.0:
            raise ValueError("problem and scheme use different alpha")
        if isinstance(spatial, str):
            spatial = SpatialOperator(spatial)
        if spec.absorbing and spatial.kind != "central-2":
            raise ValueError("absorbing boundary rows are defined for the central scheme")
        self.spec, self.grid, self.scheme, self.spatial = spec, grid, scheme, spatial
        self.predictor = scheme.J if predictor is None else predictor
        self.x = grid.x
        self.stepper = CaputoStepper(scheme, grid.h, shape=(grid.N + 1,), capacity=grid.NT + 1)
        self.trace = trace and scheme.kind in ("faom", "faompk")
        if self.trace:
            self.stepper.ledger.trace = []
        self.solve_flops = 0

    def forcing(self, u_pred: np.ndarray, t: float) -> np.ndarray:
        spec = self.spec
        F = np.zeros_like(self.x)
        if spec.forcing is not None:
            F = F + spec.forcing(self.x, t)
        if spec.nonlinearity is not None:
            F = F + spec.nonlinearity(u_pred)
        return F

    def step_dirichlet(self, a_n: float, explicit: np.ndarray, F: np.ndarray, t: float) -> np.ndarray:
        grid, op = self.grid, self.spatial
        N = grid.N
        u = np.empty(N + 1)
        u[0] = self.spec.boundary(np.asarray(grid.a), t)
        u[N] = self.spec.boundary(np.asarray(grid.b), t)

        lo, di, up = op.stencil(a_n, grid.dx)
        rhs = op.average(F - explicit)
        rhs[0] -= lo * u[0]
        rhs[-1] -= up * u[N]
        m = N - 1
        u[1:N] = solve_tridiagonal(np.full(m, lo), np.full(m, di), np.full(m, up), rhs)
        self.solve_flops += 5 * m
        return u

    def abc_system(self, a_n: float, explicit: np.ndarray, F: np.ndarray):
        """Banded system for all ``N + 1`` values: interior rows plus two ABC rows.

        Returns the diagonal-ordered matrix (bandwidth 2 on both sides) and the
        right-hand side.
        """
        grid, alpha, s0 = self.grid, self.spec.alpha, self.spec.s0
        N, dx = grid.N, grid.dx
        size = N + 1
        G = F - explicit

        lo, di, up = SpatialOperator("central-2").stencil(a_n, dx)
        rows = {i: {i - 1: lo, i: di, i + 1: up} for i in range(1, N)}
        rhs = np.empty(size)
        rhs[1:N] = G[1:N]

        half = 1.0 / (2.0 * dx)
        p = 3.0 * s0 ** (alpha / 2.0)
        q = 3.0 * s0**alpha
        s = s0 ** (1.5 * alpha)
        # row N closes u_N through the boundary relation at x_{N-1}
        plus = (-half, p, half)
        rows[N] = {N - 2: a_n * plus[0] - q * half, N - 1: a_n * plus[1] + s,
                   N: a_n * plus[2] + q * half}
        rhs[N] = plus[0] * G[N - 2] + plus[1] * G[N - 1] + plus[2] * G[N]
        # row 0 closes u_0 through the boundary relation at x_1
        minus = (-half, -p, half)
        rows[0] = {0: a_n * minus[0] - q * half, 1: a_n * minus[1] - s,
                   2: a_n * minus[2] + q * half}
        rhs[0] = minus[0] * G[0] + minus[1] * G[1] + minus[2] * G[2]

        if len(rows) != size:
            raise ValueError(f"ABC system has {len(rows)} rows for {size} unknowns")
        return band_from_rows(rows, size, (2, 2)), rhs

    def step_abc(self, a_n: float, explicit: np.ndarray, F: np.ndarray) -> np.ndarray:
        ab, rhs = self.abc_system(a_n, explicit, F)
        self.solve_flops += 9 * (self.grid.N + 1)
        return solve_band(ab, (2, 2), rhs)

    def run(self, keep_steps: bool = False) -> SolveResult:
        spec, grid, stepper = self.spec, self.grid, self.stepper
        start = time.perf_counter()
        x = self.x
        u = np.asarray(spec.u0(x), dtype=float) * np.ones_like(x)
        stepper.begin(u)
        recent = [u]
        errors = np.empty(grid.NT) if spec.exact is not None else None
        sizes = []
        memory = []
        steps = [u] if keep_steps else None

        for n in range(1, grid.NT + 1):
            t = n * grid.h
            a_n = stepper.coefficient(n)
            explicit = stepper.explicit(n)
            if hasattr(stepper, "ledger"):
                # the ledger this step's history evaluation reads
                sizes.append(stepper.ledger.M)
                if self.trace:
                    memory.append((n, stepper.ledger.M, tuple(stepper.ledger.bounds)))
            F = self.forcing(extrapolate(recent, self.predictor, n), t)
            if spec.absorbing:
                u = self.step_abc(a_n, explicit, F)
            else:
                u = self.step_dirichlet(a_n, explicit, F, t)
            stepper.advance(u)
            recent = (recent + [u])[-3:]
            if errors is not None:
                errors[n - 1] = np.max(np.abs(spec.exact(x, t) - u))
            if keep_steps:
                steps.append(u)

        result = SolveResult(
            x=x, u=u, t=grid.T, step_errors=errors,
            final_error=None if errors is None else float(errors[-1]),
            flops=stepper.flops + self.solve_flops, slots=stepper.slots,
            wall=time.perf_counter() - start, ledger_sizes=sizes, memory_trace=memory,
        )
        if hasattr(stepper, "ledger") and stepper.ledger.trace is not None:
            result.merge_trace = list(stepper.ledger.trace)
        if keep_steps:
            result.steps = np.asarray(steps)
        return result


def run(spec: ProblemSpec, grid: GridSpec, scheme: SchemeConfig,
        spatial: SpatialOperator | str = "central-2", trace: bool = False,
        keep_steps: bool = False, predictor: int | None = None) -> SolveResult:
    """Run the full time loop for one problem, grid and evaluator.

    *predictor* sets the extrapolation order of the explicit nonlinearity;
    by default it follows the interpolation order of *scheme*.
    """
    solver = Solver(spec, grid, scheme, spatial, trace=trace, predictor=predictor)
    return solver.run(keep_steps=keep_steps)
