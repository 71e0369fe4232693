"""Command-line front end: ``fracfast run --experiment <id> [options]``.

Options come from flags and, optionally, a ``key=value`` config file
(``--config``); flags win.  Every run writes ``<id>.csv`` into the output
directory, plus ``<id>_trace.csv`` (ledger length and boundaries per step)
and ``<id>_plot.dat`` (gnuplot data blocks) for the table experiments.

Exit codes: 0 on success, 2 if ``--check`` finds a mismatch, 1 on errors.
"""

from __future__ import annotations

import argparse
import logging
import shlex
import sys
from dataclasses import dataclass, fields
from pathlib import Path

from fracfast.bench.checks import CheckResult, check_agreement, check_column, check_space_orders
from fracfast.bench.experiments import (
    CSV_HEADER,
    EXPERIMENT_IDS,
    RunOptions,
    run_experiment,
    select,
)
from fracfast.caputo import SchemeConfig
from fracfast.history import MERGE_ORDERS

log = logging.getLogger("fracfast")

REFERENCE_POLICIES = ("published", "fine")


class ConfigError(ValueError):
    """All problems found in a configuration, one per entry of ``errors``."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class ExperimentConfig:
    experiment: str
    alpha: tuple = ()
    schemes: tuple = ()
    levels: int | None = None
    Ntau: int = 2
    K: int | None = None
    merge: str = "sweep"
    reference: str = "published"
    outdir: str = "."
    refdir: str | None = None
    jobs: int = 1
    check: bool = False
    timing: bool = False

    def options(self) -> RunOptions:
        return RunOptions(Ntau=self.Ntau, K=self.K, merge=self.merge, refdir=self.refdir,
                          reference_policy=self.reference, jobs=self.jobs,
                          fine_orders=self.check)


# {{{ parsing

def _floats(text):
    return tuple(float(v) for v in text.replace(",", " ").split())


def _names(text):
    return tuple(v for v in text.replace(",", " ").split())


def _flag(text):
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# config-file key -> (field, converter)
KEYS = {
    "experiment": ("experiment", str),
    "alpha": ("alpha", _floats),
    "schemes": ("schemes", _names),
    "levels": ("levels", int),
    "ntau": ("Ntau", int),
    "k": ("K", int),
    "kdeg": ("K", int),
    "merge": ("merge", str),
    "reference": ("reference", str),
    "outdir": ("outdir", str),
    "refdir": ("refdir", str),
    "jobs": ("jobs", int),
    "check": ("check", _flag),
    "timing": ("timing", _flag),
}


def read_config_text(text: str) -> tuple[dict, list]:
    """``key=value`` pairs separated by whitespace or newlines; ``#`` starts a comment."""
    values, errors = {}, []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0]
        try:
            tokens = shlex.split(line)
        except ValueError as exc:
            errors.append(f"line {lineno}: {exc}")
            continue
        for token in tokens:
            if "=" not in token:
                errors.append(f"line {lineno}: expected key=value, got {token!r}")
                continue
            key, raw = token.split("=", 1)
            spec = KEYS.get(key.strip().lower())
            if spec is None:
                errors.append(f"line {lineno}: unknown key {key!r}")
                continue
            name, convert = spec
            try:
                values[name] = convert(raw.strip())
            except ValueError:
                errors.append(f"line {lineno}: malformed value for {key}: {raw!r}")
    return values, errors


def validate(values: dict) -> ExperimentConfig:
    """Build the config, collecting every problem before raising."""
    errors = []
    exp = values.get("experiment")
    if not exp:
        errors.append(f"missing experiment id; valid ids: {', '.join(EXPERIMENT_IDS)}")
    elif exp not in EXPERIMENT_IDS:
        errors.append(f"unknown experiment {exp!r}; valid ids: {', '.join(EXPERIMENT_IDS)}")
    for a in values.get("alpha", ()):
        if not 0.0 < a < 1.0:
            errors.append(f"alpha must lie in (0, 1), got {a:g}")
    for s in values.get("schemes", ()):
        try:
            SchemeConfig.from_name(s, 0.5)
        except ValueError:
            errors.append(f"unknown scheme {s!r}")
    if values.get("levels") is not None and values["levels"] < 2:
        errors.append(f"levels must be at least 2, got {values['levels']}")
    if values.get("Ntau", 2) < 2:
        errors.append(f"Ntau must be at least 2, got {values['Ntau']}")
    if values.get("K") is not None and values["K"] < 0:
        errors.append(f"K must be nonnegative, got {values['K']}")
    if values.get("merge", "sweep") not in MERGE_ORDERS:
        errors.append(f"merge must be one of {', '.join(MERGE_ORDERS)}")
    if values.get("reference", "published") not in REFERENCE_POLICIES:
        errors.append(f"reference must be one of {', '.join(REFERENCE_POLICIES)}")
    if values.get("jobs", 1) < 1:
        errors.append(f"jobs must be positive, got {values['jobs']}")
    if errors:
        raise ConfigError(errors)
    known = {f.name for f in fields(ExperimentConfig)}
    return ExperimentConfig(**{k: v for k, v in values.items() if k in known})


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracfast", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment")
    run.add_argument("--experiment", help=f"one of {', '.join(EXPERIMENT_IDS)}")
    run.add_argument("--config", type=Path, help="key=value file; flags override it")
    run.add_argument("--outdir", help="output directory (default: current)")
    run.add_argument("--check", action="store_true", default=None,
                     help="compare with the published values; exit 2 on mismatch")
    run.add_argument("--jobs", type=int, help="worker processes for the grid runs")
    run.add_argument("--alpha", help="comma-separated alpha subset")
    run.add_argument("--schemes", help="comma-separated scheme subset")
    run.add_argument("--levels", type=int, help="keep only the first refinement levels")
    run.add_argument("--ntau", type=int, help="merge arity")
    run.add_argument("--kdeg", type=int, help="kernel polynomial degree of FAOM-PK columns")
    run.add_argument("--merge", help=f"merge order: {', '.join(MERGE_ORDERS)}")
    run.add_argument("--reference", help=f"reference policy: {', '.join(REFERENCE_POLICIES)}")
    run.add_argument("--refdir", help="reference cache directory (default: $FRACFAST_REFDIR)")
    run.add_argument("--timing", action="store_true", default=None,
                     help="write wall times into the CSV (makes it nondeterministic)")
    run.add_argument("-v", "--verbose", action="store_true")
    return parser


def parse_config(args: argparse.Namespace) -> ExperimentConfig:
    values, errors = {}, []
    if args.config is not None:
        try:
            text = args.config.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError([f"cannot read config {args.config}: {exc}"]) from exc
        values, errors = read_config_text(text)
    flags = {"experiment": args.experiment, "outdir": args.outdir, "check": args.check,
             "jobs": args.jobs, "levels": args.levels, "Ntau": args.ntau, "K": args.kdeg,
             "merge": args.merge, "reference": args.reference, "refdir": args.refdir,
             "timing": args.timing}
    values.update({k: v for k, v in flags.items() if v is not None})
    for name, raw, convert in (("alpha", args.alpha, _floats), ("schemes", args.schemes, _names)):
        if raw is not None:
            try:
                values[name] = convert(raw)
            except ValueError:
                errors.append(f"malformed value for --{name}: {raw!r}")
    try:
        config = validate(values)
    except ConfigError as exc:
        raise ConfigError(errors + exc.errors) from None
    if errors:
        raise ConfigError(errors)
    return config

# }}}


# {{{ output

def write_csv(path: Path, results, timing: bool, checks=None) -> None:
    lines = [CSV_HEADER]
    for res in results:
        lines.extend(row.csv(timing) for row in res.rows)
    if checks:
        lines.append("# published values checked (relative error tolerances per cell):")
        lines.extend(f"# {c.line()}" for c in checks)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_trace(path: Path, results) -> None:
    lines = ["table,alpha,scheme,h,n,M_n,bounds"]
    for res in results:
        for h, n, M, bounds in res.memory_trace:
            lines.append(f"{res.spec.table},{res.spec.alpha:g},{res.config.label},{h:.10g},"
                         f"{n},{M},{' '.join(str(b) for b in bounds)}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_plot(path: Path, results) -> None:
    """One gnuplot data block per column, separated by two blank lines."""
    blocks = []
    for res in results:
        head = f"# {res.spec.table} alpha={res.spec.alpha:g} {res.config.label}\n# h dx E final_err"
        rows = [f"{r.h:.10g} {r.dx:.10g} {_num(r.E)} {_num(r.final_err)}" for r in res.rows]
        blocks.append("\n".join([head, *rows]))
    path.write_text("\n\n\n".join(blocks) + "\n", encoding="utf-8")


def _num(v) -> str:
    return "nan" if v is None else f"{v:.6e}"

# }}}


def table42_growth(results, options: RunOptions, coarse_h: float = 2.0**-12) -> list[CheckResult]:
    """Direct/fast wall-time ratio on the finest mesh grows from ``coarse_h``
    to the experiment step, and the flop ratio there is at least 5."""
    from fracfast.bench.experiments import _solve

    out = []
    cols = {r.config.label: r for r in results if r.spec.table == "table42"}
    for direct, fast in (("L1", "FAOM-P4"), ("L1-2", "FAOM-P9")):
        if direct not in cols or fast not in cols:
            continue
        d, f = cols[direct], cols[fast]
        fine_ratio = d.rows[-1].wall / f.rows[-1].wall
        walls = []
        for res in (d, f):
            spec, grid = res.spec, res.spec.grids()[-1]
            grid = type(grid)(grid.a, grid.b, grid.N, coarse_h, int(round(1.0 / coarse_h)))
            walls.append(_solve((spec.problem, spec.alpha, grid, res.config, spec.spatial,
                                 res.column.predictor, False)).wall)
        coarse_ratio = walls[0] / walls[1]
        out.append(CheckResult(f"table42 {direct}/{fast} time ratio grows", fine_ratio > coarse_ratio,
                               f"{coarse_ratio:.2f} at N_T={round(1 / coarse_h)} -> "
                               f"{fine_ratio:.2f} at N_T={round(1 / d.rows[-1].h)}"))
        flops = d.rows[-1].flops / f.rows[-1].flops
        out.append(CheckResult(f"table42 {direct}/{fast} flop ratio", flops >= 5.0,
                               f"{flops:.1f} >= 5 on the finest mesh"))
    return out


def run_checks(config: ExperimentConfig, results, options: RunOptions) -> list[CheckResult]:
    checks = []
    for res in results:
        checks.extend(check_column(res))
    if config.experiment in ("table41", "table42"):
        checks.extend(check_agreement(results))
    if config.experiment == "table42":
        checks.extend(check_space_orders(results))
        checks.extend(table42_growth(results, options))
    return checks


def run_props(config: ExperimentConfig, outdir: Path) -> int:
    from fracfast.bench.properties import property_suite

    checks = property_suite()
    lines = ["name,ok,detail"] + [f"{c.name},{int(c.ok)},\"{c.detail}\"" for c in checks]
    (outdir / "props.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    for c in checks:
        print(c.line())
    return 0 if all(c.ok for c in checks) else 2


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = parse_config(args)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"error: {e}", file=sys.stderr)
        return 1

    outdir = Path(config.outdir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
        probe = outdir / ".fracfast-write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        print(f"error: output directory {outdir} is not writable: {exc}", file=sys.stderr)
        return 1

    try:
        if config.experiment == "props":
            return run_props(config, outdir)
        options = config.options()
        specs = select(config.experiment, config.alpha, config.schemes, config.levels)
        if not specs:
            print("error: the selection matches no columns", file=sys.stderr)
            return 1
        results = run_experiment(specs, options)
        checks = run_checks(config, results, options) if config.check else []

        exp = config.experiment
        write_csv(outdir / f"{exp}.csv", results, config.timing, checks)
        write_trace(outdir / f"{exp}_trace.csv", results)
        write_plot(outdir / f"{exp}_plot.dat", results)
    except Exception as exc:  # noqa: BLE001 - reported as a runtime error
        log.exception("run failed")
        print(f"error: {exc}", file=sys.stderr)
        return 1

    failed = [r for res in results for r in res.rows if r.status != "ok"]
    for c in checks:
        print(c.line())
    if failed:
        print(f"error: {len(failed)} grid run(s) failed", file=sys.stderr)
        return 1
    if checks and not all(c.ok for c in checks):
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
