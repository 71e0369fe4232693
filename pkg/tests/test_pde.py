import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracfast.bench.problems import example31, example41, fisher, huxley
from fracfast.bench.metrics import slot_cap
from fracfast.caputo import SchemeConfig, caputo_power_oracle
from fracfast.history import length_bounds
from fracfast.pde import GridSpec, ProblemSpec, Solver, SpatialOperator, extrapolate, run

PI = math.pi


def manufactured(alpha):
    g1 = caputo_power_oracle(1.0, alpha, 1.0)

    def exact(x, t):
        return (1.0 + t) * (1.0 + x + x**2)

    def forcing(x, t):
        return g1 * t ** (1.0 - alpha) * (1.0 + x + x**2) - 2.0 * (1.0 + t)

    return ProblemSpec("manufactured", "linear-forced", alpha, 0.0, 1.0,
                       u0=lambda x: exact(x, 0.0), boundary=exact, forcing=forcing, exact=exact)


@pytest.mark.parametrize("alpha", [0.1, 0.5, 0.9])
@pytest.mark.parametrize("scheme", ["L1", "FAOM", "FAOM-P4"])
def test_manufactured_linear_solution(alpha, scheme):
    res = run(manufactured(alpha), GridSpec(0.0, 1.0, 16, 0.05, 20), SchemeConfig.from_name(scheme, alpha))
    limit = 1e-10 if scheme != "FAOM-P4" else 1e-3  # the kernel polynomial is not exact
    assert np.max(res.step_errors) <= limit


def test_manufactured_compact_scheme():
    res = run(manufactured(0.5), GridSpec(0.0, 1.0, 16, 0.05, 20), SchemeConfig.from_name("L1", 0.5),
              spatial="compact-4")
    assert np.max(res.step_errors) <= 1e-10


def test_single_step_touches_no_history():
    res = run(manufactured(0.5), GridSpec(0.0, 1.0, 8, 0.1, 1), SchemeConfig.from_name("FAOM-P4", 0.5))
    assert res.flops == 5 * 7 and res.slots == 0
    assert res.step_errors[0] <= 1e-12


def test_zero_nonlinearity_matches_linear_solver():
    spec = example31(0.5)
    nl = ProblemSpec("z", "nonlinear-forced", 0.5, 0.0, PI, u0=spec.u0, boundary=spec.boundary,
                     forcing=spec.forcing, nonlinearity=lambda u: 0.0 * u, exact=spec.exact)
    g = GridSpec(0.0, PI, 200, 0.05, 20)
    a = run(spec, g, SchemeConfig.from_name("L1-2", 0.5))
    b = run(nl, g, SchemeConfig.from_name("L1-2", 0.5))
    assert np.array_equal(a.u, b.u)


def test_example31_half_order_first_row():
    # one Table-1 cell on a coarser mesh; the time error dominates
    res = run(example31(0.5), GridSpec(0.0, PI, 2000, 0.1, 10), SchemeConfig.from_name("L1", 0.5))
    assert res.E == pytest.approx(7.59e-2, rel=0.02)


def test_example41_first_row():
    res = run(example41(0.25), GridSpec(0.0, PI, 1000, 0.1, 10), SchemeConfig.from_name("L1", 0.25))
    assert res.E == pytest.approx(7.22e-2, rel=0.02)


def test_ledger_sizes_within_length_bounds():
    res = run(example31(0.5), GridSpec(0.0, PI, 64, 1 / 160, 160), SchemeConfig.from_name("FAOM-P4", 0.5),
              trace=True)
    for n, M, bounds in res.memory_trace:
        if n >= 2:
            lo, hi = length_bounds(n, 2)
            assert lo <= M <= hi
        assert bounds[0] == n - 1 and bounds[-1] == 0
    assert res.slots <= slot_cap(4, 65, 160, 2)


def test_spatial_operator():
    op = SpatialOperator("compact-4")
    assert sum(op.weights) == pytest.approx(1.0)
    lo, di, up = op.stencil(0.0, 0.1)
    assert lo + di + up == pytest.approx(0.0, abs=1e-9)
    with pytest.raises(ValueError):
        SpatialOperator("spectral")


@given(st.integers(4, 40))
def test_second_difference_exact_on_quadratics(N):
    x = np.linspace(0.0, 1.0, N + 1)
    dx = 1.0 / N
    lo, di, up = SpatialOperator("central-2").stencil(0.0, dx)
    u = 3 * x**2 - x + 2
    assert -(lo * u[:-2] + di * u[1:-1] + up * u[2:]) == pytest.approx(np.full(N - 1, 6.0), rel=1e-8)


def test_extrapolation_orders():
    h = [np.array([1.0]), np.array([4.0]), np.array([9.0])]
    assert extrapolate(h, 1, 3)[0] == 14.0
    assert extrapolate(h, 2, 3)[0] == 16.0  # exact for the squares
    assert extrapolate(h[:2], 2, 2)[0] == 7.0  # falls back to linear at n = 2


def test_abc_system_square_banded():
    spec = fisher(0.5)
    grid = GridSpec(-6.0, 6.0, 48, 2**-6, 4)
    solver = Solver(spec, grid, SchemeConfig.from_name("L1", 0.5))
    ab, rhs = solver.abc_system(1.3, np.zeros(49), np.zeros(49))
    assert ab.shape == (5, 49) and rhs.shape == (49,)


def test_abc_zero_state_stays_zero():
    spec = ProblemSpec("zero", "fisher-abc", 0.5, -1.0, 1.0, u0=lambda x: 0.0 * x,
                       nonlinearity=lambda u: -u * (1 - u))
    res = run(spec, GridSpec(-1.0, 1.0, 20, 0.1, 10), SchemeConfig.from_name("L1", 0.5))
    assert np.all(res.u == 0.0)


def test_abc_rejects_compact_operator():
    with pytest.raises(ValueError):
        Solver(huxley(0.5), GridSpec(-8.0, 8.0, 32, 0.1, 3), SchemeConfig.from_name("L1", 0.5),
               spatial="compact-4")


def test_fisher_coarse_run_is_finite_and_decays():
    res = run(fisher(0.5), GridSpec(-6.0, 6.0, 96, 2**-5, 32), SchemeConfig.from_name("FAOM-P4", 0.5))
    assert np.all(np.isfinite(res.u))
    assert np.max(res.u) < math.sqrt(10 / PI)


def _relaxation(order, h, steps, alpha=0.25):
    """``D^alpha u = -u`` with the reaction term explicit on the extrapolation."""
    from fracfast.caputo import CaputoStepper

    stepper = CaputoStepper(SchemeConfig.from_name("L1-2", alpha), h)
    stepper.begin(1.0)
    recent = [np.array([1.0])]
    for n in range(1, steps + 1):
        pred = extrapolate(recent, order, n)
        u = (-pred - stepper.explicit(n)) / stepper.coefficient(n)
        stepper.advance(u[0])
        recent = (recent + [u])[-3:]
    return float(abs(u[0]))


def test_quadratic_predictor_stability_limit():
    # decaying reaction at alpha = 0.25: the quadratic predictor grows without
    # bound at h = 2**-6 and is stable at 2**-10; the linear one stays bounded
    with np.errstate(all="ignore"):
        assert not _relaxation(2, 2**-6, 2000) < 1.0
    assert _relaxation(2, 2**-10, 2000) < 1.0
    assert _relaxation(1, 2**-6, 2000) < 1.0


def test_determinism():
    args = (example41(0.5), GridSpec(0.0, PI, 100, 0.05, 20), SchemeConfig.from_name("FAOM-P9", 0.5))
    assert np.array_equal(run(*args).u, run(*args).u)


@pytest.mark.parametrize("kwargs", [{"N": 3}, {"b": -1.0}, {"h": 0.0}, {"NT": 0}])
def test_invalid_grids(kwargs):
    base = dict(a=0.0, b=1.0, N=8, h=0.1, NT=10)
    base.update(kwargs)
    with pytest.raises(ValueError):
        GridSpec(**base)


def test_grid_from_steps():
    g = GridSpec.from_steps(0.0, PI, PI / 20, 0.1)
    assert (g.N, g.NT) == (20, 10)
    assert g.T == pytest.approx(1.0) and g.x[-1] == pytest.approx(PI)


def test_problem_and_scheme_alpha_must_match():
    with pytest.raises(ValueError):
        run(example31(0.5), GridSpec(0.0, PI, 8, 0.1, 2), SchemeConfig.from_name("L1", 0.4))


def test_invalid_problem_and_predictor():
    with pytest.raises(ValueError):
        ProblemSpec("x", "wave", 0.5, 0.0, 1.0, u0=np.zeros_like)
    with pytest.raises(ValueError):
        ProblemSpec("x", "linear-forced", 0.5, 0.0, 1.0, u0=np.zeros_like)
    with pytest.raises(ValueError):
        run(example31(0.5), GridSpec(0.0, PI, 8, 0.1, 2), SchemeConfig.from_name("L1", 0.5), predictor=3)
