import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from fracfast.bench.checks import CheckResult, check_agreement, check_column
from fracfast.bench.experiments import (
    CSV_HEADER,
    EXPERIMENT_IDS,
    Column,
    ExperimentSpec,
    RunOptions,
    reference_key,
    restrict,
    run_experiment,
    select,
    table_row,
)
from fracfast.bench.metrics import (
    PerfCounters,
    aggregate_error,
    error_metrics,
    fit_constant,
    observed_order,
    slot_cap,
)
from fracfast.bench.problems import example31, example41, fisher, huxley, make_problem
from fracfast.bench.published import CORRECTIONS, PUBLISHED, published_errors, published_orders
from fracfast.bench.reference import (
    ReferenceKey,
    read_reference,
    reference_solution,
    write_reference,
)
from fracfast.caputo import caputo_power_oracle
from fracfast.pde import GridSpec, run

PI = math.pi

# metrics


def test_error_metrics_identical():
    rec = error_metrics(np.ones((3, 4)), np.ones((3, 4)), 0.1)
    assert rec.E == 0.0 and rec.final == 0.0 and np.all(rec.step_norms == 0.0)


def test_error_metrics_two_steps():
    num = np.array([[0.3, 0.0], [0.0, -0.4]])
    rec = error_metrics(num, np.zeros((2, 2)), 0.5)
    assert rec.E == pytest.approx(math.sqrt(0.5 * 0.25), rel=1e-15)
    assert rec.final == pytest.approx(0.4)


@given(st.floats(1e-6, 10.0), st.floats(1e-4, 1.0))
def test_single_step_aggregate(c, h):
    assert aggregate_error([c], h) == pytest.approx(c * math.sqrt(h), rel=1e-15)


@given(st.lists(st.floats(0.0, 1e3), min_size=1, max_size=50), st.floats(1e-4, 1.0))
def test_aggregate_squares(norms, h):
    E = aggregate_error(norms, h)
    assert E**2 == pytest.approx(h * sum(v * v for v in norms), rel=1e-14, abs=1e-300)


def test_error_metrics_shape_mismatch():
    with pytest.raises(ValueError):
        error_metrics(np.zeros((2, 3)), np.zeros((3, 2)), 0.1)


def test_observed_order():
    assert observed_order(0.4, 0.1) == 2.0
    assert observed_order(7.59e-2, 2.73e-2) == pytest.approx(1.48, abs=0.005)
    assert observed_order(6.30e-2, 1.51e-2) == pytest.approx(2.06, abs=0.005)
    with pytest.raises(ValueError):
        observed_order(0.0, 0.1)


def test_fit_constant():
    ns = np.array([2.0**k for k in range(10, 15)])
    c, spread = fit_constant(ns, 3.0 * ns * np.log(ns), lambda n: n * math.log(n))
    assert c == pytest.approx(3.0) and spread < 1e-12


def test_slot_cap_and_counters():
    assert slot_cap(4, 10, 3, 2) == pytest.approx(5 * 10 * 2 * math.log2(2.0))

    class R:
        flops, slots, wall = 10, 20, 0.5

    assert PerfCounters.from_result(R()) == PerfCounters(10, 20, 0.5)


# problems


def test_example31_exact_values():
    spec = example31(0.5)
    assert np.all(spec.exact(np.zeros(3), np.array([0.0, 0.5, 1.0])) == 0.0)
    expected = (PI / 2) ** 8 * (math.exp(-PI / 2) + 1.0)
    assert spec.exact(PI / 2, 1.0) == pytest.approx(expected, rel=1e-14)
    assert spec.u0(PI / 2) == pytest.approx(spec.exact(PI / 2, 0.0))


def _symbolic_space_parts():
    x, t = sp.symbols("x t", positive=True)
    return x, t, x**4 * (sp.pi - x) ** 4


@pytest.mark.parametrize("alpha", [0.1, 0.25, 0.5, 0.9])
@pytest.mark.parametrize("maker", [example31, example41])
def test_forcing_residual(alpha, maker):
    # D^alpha u - u_xx - f(u) - g = 0 with D^alpha from the power oracle and
    # u_xx from symbolic differentiation of the stated solution
    x, t, bump = _symbolic_space_parts()
    space = bump * sp.exp(-x)
    space_xx = sp.lambdify(x, sp.diff(space, x, 2))
    bump_xx = sp.lambdify(x, sp.diff(bump, x, 2))
    spec = maker(alpha)
    rng = np.random.default_rng(4)
    xs, ts = rng.uniform(0, PI, 40), rng.uniform(0.01, 1.0, 40)
    u = spec.exact(xs, ts)
    caputo = np.array([float(sp.lambdify(x, space)(xi)) for xi in xs]) * caputo_power_oracle(3 + alpha, alpha, ts)
    uxx = space_xx(xs) * ts ** (3 + alpha) + bump_xx(xs)
    reaction = spec.nonlinearity(u) if spec.nonlinearity is not None else 0.0
    residual = caputo - uxx - reaction - spec.forcing(xs, ts)
    assert np.max(np.abs(residual)) < 1e-8 * max(1.0, np.max(np.abs(uxx)))


def test_unbounded_problems():
    f, h = fisher(0.5), huxley(0.5)
    assert (f.a, f.b, h.a, h.b) == (-6.0, 6.0, -8.0, 8.0)
    assert f.u0(0.0) == pytest.approx(math.sqrt(10 / PI))
    assert f.nonlinearity(0.5) == -0.25
    assert h.nonlinearity(np.array([0.0, 1.0, 0.001])) == pytest.approx([0.0, 0.0, 0.0])
    assert f.absorbing and h.absorbing and f.s0 == 3.0
    with pytest.raises(ValueError):
        make_problem("burgers", 0.5)


# published data


def test_published_columns_consistent():
    for (table, alpha, col), data in PUBLISHED.items():
        assert len(data.orders) == len(data.errors) - 1, (table, alpha, col)
        assert all(e > 0 for e in data.errors)


def test_corrections_only_replace_outliers():
    for (table, alpha, col, i), value in CORRECTIONS.items():
        raw = published_errors(table, alpha, col, corrected=False)[i]
        assert raw != value and abs(math.log10(raw / value)) == pytest.approx(2.0, abs=0.01) or \
            abs(math.log10(raw / value)) == pytest.approx(1.0, abs=0.01)
        assert published_errors(table, alpha, col)[i] == value


def test_published_orders_match_errors():
    # printed orders agree with the printed errors to rounding, after corrections
    for key, data in PUBLISHED.items():
        errs = published_errors(*key)
        for i, o in enumerate(published_orders(*key)):
            if o is not None:
                assert math.log2(errs[i] / errs[i + 1]) == pytest.approx(o, abs=0.06), (key, i)


# references


def test_reference_roundtrip(tmp_path):
    key = ReferenceKey("fisher", 0.5, "L1", 0.25, 16)
    field = np.linspace(0, 1, 17)
    path = tmp_path / "r.ref"
    write_reference(path, key, field)
    assert np.array_equal(read_reference(path, key), field)
    # stale key, corrupt data and missing file are all rejected
    assert read_reference(path, ReferenceKey("fisher", 0.5, "L1", 0.125, 16)) is None
    raw = bytearray(path.read_bytes())
    raw[-1] ^= 0xFF
    path.write_bytes(bytes(raw))
    assert read_reference(path, key) is None
    assert read_reference(tmp_path / "missing.ref", key) is None


def test_reference_generated_and_cached(tmp_path, caplog):
    key = ReferenceKey("huxley", 0.5, "L1", 2**-3, 16)
    with caplog.at_level("INFO"):
        first = reference_solution(key, tmp_path)
    assert "generating reference" in caplog.text
    assert len(list(tmp_path.iterdir())) == 1
    caplog.clear()
    with caplog.at_level("INFO"):
        second = reference_solution(key, tmp_path)
    assert caplog.text == "" and np.array_equal(first, second)


def test_reference_key_policies():
    spec = ExperimentSpec("fisher-time", "fisher", 0.25, "time", (2**-8, 2**-9), (4096,),
                          (Column("FAOM-P9", predictor=1, history_J=1),), reference="direct")
    key = reference_key(spec, spec.columns[0])
    assert (key.scheme, key.h, key.N, key.predictor) == ("L1-2", 2**-10, 4096, 1)
    assert reference_key(spec, spec.columns[0], "fine").scheme == "FAOM-P9"
    space = ExperimentSpec("fisher-space", "fisher", 0.25, "space", (2**-14,), (128, 256),
                           (Column("L1"),), reference="direct")
    assert reference_key(space, space.columns[0], finer=4).N == 1024


def test_restrict():
    f = np.arange(9.0)
    assert restrict(f, 8, 4).tolist() == [0.0, 2.0, 4.0, 6.0, 8.0]
    with pytest.raises(ValueError):
        restrict(f, 8, 3)


# experiments


def small_spec(columns=(Column("L1"), Column("FAOM-P4"))):
    return ExperimentSpec("table1", "example31", 0.5, "time", (0.1, 0.05, 0.025), (400,), columns)


def test_table_row_records():
    res = table_row(small_spec(), Column("FAOM-P4"))
    assert len(res.rows) == 3
    assert all(r.E is not None and r.flops > 0 and r.slots > 0 for r in res.rows)
    assert res.rows[0].order_t == pytest.approx(math.log2(res.rows[0].E / res.rows[1].E))
    assert res.rows[-1].order_t is None
    assert res.memory_trace and res.memory_trace[0][:2] == (0.1, 1)
    line = res.rows[0].csv()
    assert len(line.split(",")) == len(CSV_HEADER.split(",")) and line.endswith(",")


def test_identical_grids_leave_order_undefined():
    spec = ExperimentSpec("table1", "example31", 0.5, "time", (0.1, 0.1), (200,), (Column("L1"),))
    res = table_row(spec, Column("L1"))
    assert res.rows[0].order_t is None
    assert res.rows[0].E == res.rows[1].E


def test_table_row_needs_two_grids():
    spec = ExperimentSpec("table1", "example31", 0.5, "time", (0.1,), (200,), (Column("L1"),))
    with pytest.raises(ValueError):
        table_row(spec, Column("L1"))


def test_failed_grid_is_flagged(monkeypatch):
    import fracfast.bench.experiments as ex

    real = ex._solve

    def flaky(task):
        if task[2].h == 0.05:
            raise FloatingPointError("diverged")
        return real(task)

    monkeypatch.setattr(ex, "_solve", flaky)
    res = table_row(small_spec(), Column("L1"))
    assert res.rows[1].status == "failed: diverged" and res.rows[1].error is None
    assert res.rows[0].order_t is None and res.rows[2].E is not None


def test_table_row_deterministic_and_pool_independent():
    opts = RunOptions()
    a = run_experiment([small_spec()], opts)
    b = run_experiment([small_spec()], opts)
    c = run_experiment([small_spec()], RunOptions(jobs=2))
    lines = [[r.csv() for res in out for r in res.rows] for out in (a, b, c)]
    assert lines[0] == lines[1] == lines[2]


def test_select():
    specs = select("table1", alphas=[0.5], schemes=["L1", "FAOM"], levels=2)
    assert len(specs) == 1 and specs[0].alpha == 0.5 and len(specs[0].hs) == 2
    assert [c.scheme for c in specs[0].columns] == ["FAOM", "L1"]
    extra = select("table1", alphas=[0.3])
    assert len(extra) == 1 and extra[0].alpha == 0.3
    assert len(select("fisher")) == 4
    with pytest.raises(ValueError, match="valid ids"):
        select("tableX")
    assert "props" in EXPERIMENT_IDS


def test_ntau_override_changes_ledger():
    r2 = table_row(small_spec(), Column("FAOM"), RunOptions(Ntau=2))
    r3 = table_row(small_spec(), Column("FAOM"), RunOptions(Ntau=3))
    assert r2.config.Ntau == 2 and r3.config.Ntau == 3
    assert r2.rows[-1].E != r3.rows[-1].E


def test_checks_against_published_first_cells():
    spec = ExperimentSpec("table1", "example31", 0.5, "time", (0.1, 0.05), (20000,),
                          (Column("L1"), Column("FAOM-P4")))
    results = run_experiment([spec])
    lines = [c for r in results for c in check_column(r)]
    assert len(lines) == 6 and all(isinstance(c, CheckResult) for c in lines)
    assert all(c.ok for c in lines), [c.line() for c in lines if not c.ok]
    agree = check_agreement(results)
    assert len(agree) == 2 and all(c.ok for c in agree)
    assert lines[0].line().startswith("PASS table1 alpha=0.5 L1 h=0.1")
