"""Experiment definitions and the sweep runner behind the CLI tables.

An :class:`ExperimentSpec` is one block of a table: a problem at one
``alpha``, a sequence of grids refined along time or space, and the scheme
columns run on every grid.  Errors come from the exact solution when the
problem has one; otherwise from a cached fine-grid reference (see
:func:`reference_key` for how it is chosen).
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from fracfast.bench.metrics import observed_order
from fracfast.bench.problems import make_problem
from fracfast.bench.reference import ReferenceKey, reference_solution
from fracfast.caputo import SchemeConfig
from fracfast.pde import GridSpec, run

log = logging.getLogger(__name__)

CSV_HEADER = "problem,alpha,scheme,J,K,Ntau,h,dx,E,final_err,order_t,order_s,flops,slots,wall_ms"


@dataclass(frozen=True)
class Column:
    """One scheme column.  ``predictor`` and ``history_J`` override the
    defaults of :func:`fracfast.pde.run` and :class:`SchemeConfig`."""

    scheme: str
    predictor: int | None = None
    history_J: int | None = None

    def config(self, alpha: float, Ntau: int = 2, K: int | None = None,
               merge: str = "sweep") -> SchemeConfig:
        kw = {"Ntau": Ntau, "merge": merge, "history_J": self.history_J}
        if K is not None and self.scheme.upper().startswith("FAOM-P"):
            base = SchemeConfig.from_name(self.scheme, alpha)
            return SchemeConfig(alpha, "faompk", J=base.J, K=K, **kw)
        return SchemeConfig.from_name(self.scheme, alpha, **kw)


@dataclass(frozen=True)
class ExperimentSpec:
    table: str
    problem: str
    alpha: float
    axis: str
    hs: tuple
    Ns: tuple
    columns: tuple
    spatial: str = "central-2"
    reference: str = "exact"

    def __post_init__(self):
        if self.axis not in ("time", "space"):
            raise ValueError(f"unknown sweep axis {self.axis!r}")
        if self.reference not in ("exact", "direct"):
            raise ValueError(f"unknown reference kind {self.reference!r}")

    def grids(self) -> list[GridSpec]:
        spec = make_problem(self.problem, self.alpha)
        count = max(len(self.hs), len(self.Ns))
        hs = self.hs if len(self.hs) == count else self.hs * count
        Ns = self.Ns if len(self.Ns) == count else self.Ns * count
        return [GridSpec(spec.a, spec.b, N, h, int(round(1.0 / h))) for h, N in zip(hs, Ns)]

    def truncated(self, levels: int) -> ExperimentSpec:
        if self.axis == "time":
            return replace(self, hs=self.hs[:levels])
        return replace(self, Ns=self.Ns[:levels])


@dataclass
class RowRecord:
    problem: str
    alpha: float
    scheme: str
    J: int
    K: int | None
    Ntau: int
    h: float
    dx: float
    E: float | None = None
    final_err: float | None = None
    order_t: float | None = None
    order_s: float | None = None
    flops: int = 0
    slots: int = 0
    wall: float = 0.0
    status: str = "ok"

    @property
    def error(self) -> float | None:
        """The error the orders are computed from: ``E`` if known, else final."""
        return self.E if self.E is not None else self.final_err

    def csv(self, timing: bool = False) -> str:
        def num(v):
            return "" if v is None or (isinstance(v, float) and math.isnan(v)) else f"{v:.6e}"

        def order(v):
            return "" if v is None else f"{v:.4f}"

        K = "" if self.K is None else str(self.K)
        wall = f"{1000.0 * self.wall:.1f}" if timing else ""
        return ",".join([
            self.problem, f"{self.alpha:g}", self.scheme, str(self.J), K, str(self.Ntau),
            f"{self.h:.10g}", f"{self.dx:.10g}", num(self.E), num(self.final_err),
            order(self.order_t), order(self.order_s), str(self.flops), str(self.slots), wall,
        ])


@dataclass
class ColumnResult:
    spec: ExperimentSpec
    column: Column
    config: SchemeConfig
    rows: list
    memory_trace: list = field(default_factory=list)
    finals: list = field(default_factory=list)
    check_orders: list | None = None


@dataclass(frozen=True)
class RunOptions:
    Ntau: int = 2
    K: int | None = None
    merge: str = "sweep"
    refdir: str | None = None
    reference_policy: str = "published"
    jobs: int = 1
    trace: bool = True
    fine_orders: bool = False


# {{{ experiment catalogue

def _hs(first: float, count: int) -> tuple:
    return tuple(first / 2**k for k in range(count))


_T1 = _hs(0.1, 5)
_PAIR_L1 = (Column("L1"), Column("FAOM-P4"))
_PAIR_L12 = (Column("L1-2"), Column("FAOM-P9"))


def _catalogue() -> dict:
    cat = {}
    cat["table1"] = [
        ExperimentSpec("table1", "example31", a, "time", _T1, (20000,),
                       (Column("cutoff"), Column("FAOM"), Column("L1"), Column("FAOM-P4")))
        for a in (0.9, 0.5, 0.1)
    ]
    cat["table2"] = [
        ExperimentSpec("table2", "example31", a, "time", _T1, (20000,), _PAIR_L12, spatial="compact-4")
        for a in (0.9, 0.5, 0.1)
    ]
    cat["table41"] = [
        ExperimentSpec("table41", "example41", a, "time", _T1, (5000,), _PAIR_L1 + _PAIR_L12)
        for a in (0.9, 0.5, 0.25)
    ]
    cat["table42"] = [
        ExperimentSpec("table42", "example41", 0.25, "space", (2.0**-14,), (80, 160, 320, 640),
                       _PAIR_L1 + _PAIR_L12)
    ]
    # the fast quadratic columns of the unbounded problems store moments of the
    # linear interpolant, and the quadratic predictor is replaced by the linear
    # one where it is unstable at the coarsest step
    fisher_cols = {
        0.25: (*_PAIR_L1, Column("L1-2", predictor=1), Column("FAOM-P9", predictor=1, history_J=1)),
        0.75: (*_PAIR_L1, Column("L1-2"), Column("FAOM-P9", history_J=1)),
    }
    cat["fisher"] = [
        ExperimentSpec("fisher-time", "fisher", a, "time", _hs(2.0**-8, 4), (4096,),
                       fisher_cols[a], reference="direct")
        for a in (0.25, 0.75)
    ] + [
        ExperimentSpec("fisher-space", "fisher", a, "space", (2.0**-14,), (128, 256, 512, 1024),
                       _PAIR_L1, reference="direct")
        for a in (0.25, 0.75)
    ]
    cat["huxley"] = [
        ExperimentSpec("huxley-time", "huxley", 0.5, "time", _hs(2.0**-5, 4), (1024,),
                       (*_PAIR_L1, Column("L1-2"), Column("FAOM-P9", history_J=1)), reference="direct")
    ] + [
        ExperimentSpec("huxley-space", "huxley", a, "space", (2.0**-14,), (64, 128, 256, 512),
                       _PAIR_L1, reference="direct")
        for a in (0.5, 0.75)
    ]
    return cat


EXPERIMENTS = _catalogue()
EXPERIMENT_IDS = tuple(EXPERIMENTS) + ("props",)

# }}}


def reference_key(spec: ExperimentSpec, column: Column, policy: str = "published",
                  finer: int = 2, config: SchemeConfig | None = None) -> ReferenceKey:
    """Reference run for a column of a sweep without exact solution.

    Time sweeps (``published`` policy): the direct scheme of the same
    interpolation order and predictor, on the same mesh, at half the finest
    step.  ``fine`` policy: FAOM-P9 at ``h = 2**-13``.  Space sweeps: direct
    L1 at the same step on a mesh ``finer`` times finer than the finest one,
    or the column's own *config* if given, so that only the spatial error
    remains.
    """
    if spec.axis == "time":
        N = spec.Ns[0]
        if policy == "fine":
            return ReferenceKey(spec.problem, spec.alpha, "FAOM-P9", 2.0**-13, N, column.predictor)
        J = SchemeConfig.from_name(column.scheme, spec.alpha).J
        direct = "L1" if J == 1 else "L1-2"
        return ReferenceKey(spec.problem, spec.alpha, direct, min(spec.hs) / 2, N, column.predictor)
    if config is not None and config.kind != "direct":
        return ReferenceKey(spec.problem, spec.alpha, column.scheme, spec.hs[0], finer * max(spec.Ns),
                            column.predictor, json.dumps(asdict(config), sort_keys=True))
    return ReferenceKey(spec.problem, spec.alpha, "L1", spec.hs[0], finer * max(spec.Ns))


def restrict(field: np.ndarray, N_fine: int, N: int) -> np.ndarray:
    """Values of a fine-mesh field at the nodes of a nested coarser mesh."""
    if N_fine % N:
        raise ValueError(f"mesh with {N} cells is not nested in one with {N_fine}")
    return field[:: N_fine // N]


def _solve(task):
    problem, alpha, grid, config, spatial, predictor, trace = task
    spec = make_problem(problem, alpha)
    return run(spec, grid, config, spatial=spatial, trace=trace, predictor=predictor)


def _orders(rows: list, axis: str, errors=None) -> list:
    errors = [r.error for r in rows] if errors is None else errors
    out = [None] * len(rows)
    for i in range(len(rows) - 1):
        a, b = rows[i], rows[i + 1]
        same = (a.h == b.h) if axis == "time" else (a.dx == b.dx)
        if same or errors[i] is None or errors[i + 1] is None:
            continue
        try:
            out[i] = observed_order(errors[i], errors[i + 1])
        except ValueError:
            pass
    return out


def table_row(spec: ExperimentSpec, column: Column, options: RunOptions = RunOptions(),
              grids: list | None = None, reference=None, pool=None) -> ColumnResult:
    """Run *column* on every grid of *spec*; errors, orders and counters.

    *reference*, if given, maps a grid to the reference final field on its
    nodes.  A failing grid leaves its row flagged and its error empty.
    """
    grids = spec.grids() if grids is None else grids
    if len(grids) < 2:
        raise ValueError("a table row needs at least two grids")
    config = column.config(spec.alpha, options.Ntau, options.K, options.merge)
    tasks = [(spec.problem, spec.alpha, g, config, spec.spatial, column.predictor,
              options.trace and i == 0) for i, g in enumerate(grids)]
    if pool is not None:
        futures = [pool.submit(_solve, t) for t in tasks]
        outcomes = []
        for f in futures:
            try:
                outcomes.append(f.result())
            except Exception as exc:  # noqa: BLE001 - recorded in the row
                outcomes.append(exc)
    else:
        outcomes = []
        for t in tasks:
            try:
                outcomes.append(_solve(t))
            except Exception as exc:  # noqa: BLE001
                outcomes.append(exc)

    rows, memory, finals = [], [], []
    for grid, res in zip(grids, outcomes):
        row = RowRecord(spec.problem, spec.alpha, config.label, config.J,
                        config.K if config.kind == "faompk" else None, config.Ntau,
                        grid.h, grid.dx)
        finals.append(None if isinstance(res, Exception) else res.u)
        if isinstance(res, Exception):
            row.status = f"failed: {res}"
            log.error("%s alpha=%g %s h=%g dx=%g failed: %s", spec.table, spec.alpha,
                      config.label, grid.h, grid.dx, res)
        else:
            row.flops, row.slots, row.wall = res.flops, res.slots, res.wall
            if reference is not None:
                row.final_err = float(np.max(np.abs(res.u - reference(grid))))
            else:
                row.E, row.final_err = res.E, res.final_error
            if res.memory_trace and not memory:
                memory = [(grid.h, *m) for m in res.memory_trace]
        rows.append(row)

    orders = _orders(rows, spec.axis)
    for row, o in zip(rows, orders):
        if spec.axis == "time":
            row.order_t = o
        else:
            row.order_s = o
    return ColumnResult(spec, column, config, rows, memory, finals)


def run_spec(spec: ExperimentSpec, options: RunOptions = RunOptions(), pool=None) -> list:
    """All columns of one experiment block."""
    grids = spec.grids()
    results = []
    for column in spec.columns:
        reference = None
        if spec.reference == "direct":
            reference = _reference_map(spec, column, options, finer=2)
        res = table_row(spec, column, options, grids, reference, pool)
        if options.fine_orders and spec.reference == "direct" and spec.axis == "space":
            # same time discretization as the column: the orders see only the spatial error
            fine = _reference_map(spec, column, options, finer=4, config=res.config)
            errors = [None if u is None else float(np.max(np.abs(u - fine(g))))
                      for g, u in zip(grids, res.finals)]
            res.check_orders = _orders(res.rows, spec.axis, errors)
        results.append(res)
    return results


def _reference_map(spec, column, options, finer, config=None):
    key = reference_key(spec, column, options.reference_policy, finer, config)
    field = reference_solution(key, options.refdir)

    def at(grid):
        return restrict(field, key.N, grid.N)

    return at


def select(experiment: str, alphas=None, schemes=None, levels=None) -> list:
    """Experiment blocks after the subset and override options."""
    if experiment not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {experiment!r}; valid ids: {', '.join(EXPERIMENT_IDS)}")
    specs = list(EXPERIMENTS[experiment])
    if alphas:
        chosen = [s for s in specs if any(abs(s.alpha - a) < 1e-12 for a in alphas)]
        known = {s.alpha for s in chosen}
        templates = {}
        for s in specs:
            templates.setdefault(s.table, s)
        for a in alphas:
            if not any(abs(a - k) < 1e-12 for k in known):
                chosen.extend(replace(t, alpha=a) for t in templates.values())
        specs = chosen
    if schemes:
        wanted = {s.upper() for s in schemes}
        specs = [replace(s, columns=tuple(c for c in s.columns if c.scheme.upper() in wanted))
                 for s in specs]
        specs = [s for s in specs if s.columns]
    if levels:
        specs = [s.truncated(levels) for s in specs]
    return specs


def run_experiment(specs: list, options: RunOptions = RunOptions()) -> list:
    if options.jobs > 1:
        with ProcessPoolExecutor(max_workers=options.jobs) as pool:
            return [r for s in specs for r in run_spec(s, options, pool)]
    return [r for s in specs for r in run_spec(s, options)]
