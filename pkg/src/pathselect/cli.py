"""Command-line front end: Monte Carlo scenario runs, single-dataset fits,
and re-aggregation of stored records.

Configuration files are flat ``key = value`` text with ``#`` comments.
Numeric output uses six significant digits with ``.`` as the decimal
separator regardless of locale, and every writer is deterministic: the same
manifest reproduces byte-identical records whatever the worker count.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from dataclasses import dataclass, fields, replace

import numpy as np

from . import __version__
from .design import standardize
from .families import POISSON
from .glm_path import glm_lambda_grid
from .harness import ScenarioFailure, _prepare, _rep_rng, median, run_scenario
from .linear_path import fit_path, lambda_grid, resolve_penalty, sigma_tilde
from .penalties import ScadPenalty
from .selectors import (
    GAUSSIAN_SELECTORS,
    GLM_SELECTORS,
    kfold_cv,
    score_gaussian_path,
)
from .simulate import DESIGN_KINDS, PENALTY_MODES, Scenario

__all__ = [
    "RunConfig",
    "CliError",
    "parse_config",
    "parse_config_text",
    "serialize_config",
    "cmd_simulate",
    "cmd_fit",
    "cmd_report",
    "main",
]

RECORD_COLUMNS = ("rep", "selector", "lambda", "df", "loss", "efficiency", "flag")
SUMMARY_COLUMNS = ("selector", "n", "c", "penalty", "median_efficiency", "failures")
QUANTILE_COLUMNS = ("selector", "n", "c", "penalty",
                    "df_min", "df_q1", "df_median", "df_q3", "df_max")

_CONFIG_KEYS = ("design", "n", "c", "sigma2", "rho", "penalty", "selectors",
                "reps", "seed", "workers", "out", "data", "target")


class CliError(Exception):
    """User-facing configuration or input error."""


def fmt6(x) -> str:
    """Six significant digits, locale independent; inf/nan spelled out."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".6g")


@dataclass
class RunConfig:
    """Union of all config-file fields; unused fields stay None."""

    design: str | None = None
    n: tuple | None = None
    c: tuple | None = None
    sigma2: float | None = None
    rho: float | None = None
    penalty: str | None = None
    selectors: tuple | None = None
    reps: int | None = None
    seed: int | None = None
    workers: int | None = None
    out: str | None = None
    data: str | None = None
    target: str | None = None


def _parse_value(key: str, val: str, lineno: int):
    try:
        if key == "n":
            return tuple(int(part.strip()) for part in val.split(","))
        if key == "c":
            return tuple(float(part.strip()) for part in val.split(","))
        if key in ("sigma2", "rho"):
            return float(val)
        if key in ("reps", "seed", "workers"):
            return int(val)
        if key == "selectors":
            parts = tuple(part.strip() for part in val.split(",") if part.strip())
            if not parts:
                raise ValueError("empty selector list")
            return parts
        return val
    except ValueError as exc:
        raise CliError(f"config line {lineno}: cannot parse {key} = {val!r} ({exc})") from None


def parse_config_text(text: str) -> RunConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"config line {lineno}: expected key = value, got {raw.strip()!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in _CONFIG_KEYS:
            raise CliError(f"config line {lineno}: unknown key {key!r}")
        if key in values:
            raise CliError(f"config line {lineno}: duplicate key {key!r}")
        values[key] = _parse_value(key, val, lineno)
    return RunConfig(**values)


def parse_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config_text(fh.read())
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc}") from None


def _format_value(key: str, value) -> str:
    if key in ("n", "c", "selectors"):
        return ",".join(str(v) for v in value)
    return str(value)


def serialize_config(cfg: RunConfig) -> str:
    """Canonical serialization; parse(serialize(parse(text))) is a fixed point."""
    lines = []
    for key in _CONFIG_KEYS:
        value = getattr(cfg, key)
        if value is None:
            continue
        lines.append(f"{key} = {_format_value(key, value)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# records.csv and aggregation shared by simulate and report


def render_record_rows(records, selectors) -> list:
    """Realization records -> records.csv rows (lists of strings)."""
    rows = []
    for rec in records:
        if rec.failed:
            rows.append([str(rec.rep), "failed", "", "", "", "", rec.failure_reason])
            continue
        for name in selectors:
            o = rec.selections[name]
            flag = "" if math.isfinite(o.efficiency) else "inf_efficiency"
            rows.append([str(rec.rep), name, fmt6(o.selected_lambda),
                         str(o.selected_df), fmt6(o.loss), fmt6(o.efficiency), flag])
        rows.append([str(rec.rep), "optimal", fmt6(rec.oracle_lambda),
                     str(rec.oracle_df), fmt6(rec.min_loss), fmt6(1.0), ""])
    return rows


@dataclass
class CellAggregate:
    """Summary statistics re-derived from (stringly) records rows, so the
    simulate and report commands agree byte for byte."""

    median_efficiency: dict
    df_quantiles: dict
    median_min_loss: float
    failures: int


def aggregate_rows(rows, selectors) -> CellAggregate:
    eff = {name: [] for name in selectors}
    dfs = {name: [] for name in selectors}
    min_losses = []
    failures = 0
    for row in rows:
        name = row[1]
        if name == "failed":
            failures += 1
            continue
        if name == "optimal":
            min_losses.append(float(row[4]))
            continue
        if name not in eff:
            raise CliError(f"records contain unknown selector {name!r}")
        eff[name].append(float(row[5]))
        dfs[name].append(int(row[3]))
    med_eff, df_q = {}, {}
    for name in selectors:
        if not eff[name]:
            raise CliError(f"records contain no successful rows for selector {name!r}")
        med_eff[name] = median(eff[name])
        d = np.asarray(dfs[name], dtype=float)
        df_q[name] = (float(d.min()), float(np.quantile(d, 0.25)), median(d),
                      float(np.quantile(d, 0.75)), float(d.max()))
    return CellAggregate(median_efficiency=med_eff, df_quantiles=df_q,
                         median_min_loss=median(min_losses), failures=failures)


def _write_csv(path: str, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_records_csv(path, rows):
    _write_csv(path, RECORD_COLUMNS, rows)


def read_records_csv(path) -> list:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != list(RECORD_COLUMNS):
                raise CliError(f"unexpected records header in {path}: {header}")
            return [row for row in reader]
    except OSError as exc:
        raise CliError(f"cannot read records {path}: {exc}") from None


def summary_rows(cells) -> list:
    """cells: list of (n, c, penalty, selectors, CellAggregate)."""
    rows = []
    for n, c, penalty, selectors, agg in cells:
        for name in selectors:
            rows.append([name, str(n), fmt6(c), penalty,
                         fmt6(agg.median_efficiency[name]), str(agg.failures)])
    return rows


def quantile_rows(cells) -> list:
    rows = []
    for n, c, penalty, selectors, agg in cells:
        for name in selectors:
            q = agg.df_quantiles[name]
            rows.append([name, str(n), fmt6(c), penalty] + [fmt6(v) for v in q])
    return rows


def render_summary_text(design, penalty, selectors, cells, reps, seed) -> str:
    """Aligned-text table: rows selector x n, one column per c value."""
    ns = sorted({n for n, _, _, _, _ in cells})
    cs = sorted({c for _, c, _, _, _ in cells})
    by_cell = {(n, c): agg for n, c, _, _, agg in cells}
    lines = [f"design={design} penalty={penalty} reps={reps} seed={seed}", ""]
    headers = ["selector", "n"] + [f"c={fmt6(c)}" for c in cs]
    widths = [max(10, len(h)) for h in headers]
    table = []
    for name in selectors:
        for n in ns:
            row = [name, str(n)]
            for c in cs:
                agg = by_cell.get((n, c))
                row.append(fmt6(agg.median_efficiency[name]) if agg else "")
            table.append(row)
    opt_rows = []
    for n in ns:
        row = ["optimal", str(n)]
        for c in cs:
            agg = by_cell.get((n, c))
            row.append(fmt6(agg.median_min_loss) if agg else "")
        opt_rows.append(row)
    fail_rows = []
    for n in ns:
        row = ["failures", str(n)]
        for c in cs:
            agg = by_cell.get((n, c))
            row.append(str(agg.failures) if agg else "")
        fail_rows.append(row)
    for rows_block, title in ((table, "median efficiency"),
                              (opt_rows, "median oracle loss"),
                              (fail_rows, "failed realizations")):
        lines.append(title)
        lines.append("  ".join(h.rjust(w) for h, w in zip(headers, widths)))
        for row in rows_block:
            lines.append("  ".join(v.rjust(w) for v, w in zip(row, widths)))
        lines.append("")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# simulate


def _default_selectors(design: str) -> tuple:
    return GLM_SELECTORS if design == "poisson" else GAUSSIAN_SELECTORS


def _resolve_simulate_config(cfg: RunConfig) -> RunConfig:
    for key in ("design", "n", "c"):
        if getattr(cfg, key) is None:
            raise CliError(f"simulate config is missing required key {key!r}")
    if cfg.design not in DESIGN_KINDS:
        raise CliError(f"unknown design {cfg.design!r}; expected one of {DESIGN_KINDS}")
    if cfg.out is None:
        raise CliError("simulate needs an output directory (config key 'out' or --out)")
    return replace(
        cfg,
        sigma2=100.0 if cfg.sigma2 is None else cfg.sigma2,
        rho=0.5 if cfg.rho is None else cfg.rho,
        penalty=cfg.penalty or "l1",
        selectors=cfg.selectors or _default_selectors(cfg.design),
        reps=200 if cfg.reps is None else cfg.reps,
        seed=0 if cfg.seed is None else cfg.seed,
        workers=1 if cfg.workers is None else cfg.workers,
        data=None, target=None,
    )


def _scenario_for(cfg: RunConfig, n: int, c: float) -> Scenario:
    try:
        return Scenario(design=cfg.design, n=n, c=c, penalty=cfg.penalty,
                        selectors=cfg.selectors, sigma2=cfg.sigma2, rho=cfg.rho,
                        reps=cfg.reps, base_seed=cfg.seed)
    except ValueError as exc:
        raise CliError(f"invalid scenario (n={n}, c={c}): {exc}") from None


def _cell_extras(scenario: Scenario) -> list:
    """Informational manifest comments: dimensions, SCAD shape, rep-0 grid."""
    prep = _prepare(scenario)
    extras = [f"d_n: {scenario.d_n}",
              f"candidate_count: {scenario.candidate_count}"]
    if isinstance(prep.kind, ScadPenalty):
        extras.append(f"scad_a: {fmt6(prep.kind.a)}")
    rng = _rep_rng(scenario.base_seed, 0)
    if scenario.design == "poisson":
        y0 = rng.poisson(prep.mu).astype(float)
        grid = glm_lambda_grid(prep.design, y0, POISSON)
    else:
        y0 = prep.mu + math.sqrt(scenario.sigma2) * rng.standard_normal(scenario.n)
        grid = lambda_grid(prep.design, y0)
    extras.append(f"lambda_max_rep0: {fmt6(grid[0])}")
    extras.append(f"lambda_min_rep0: {fmt6(grid[-1])}")
    return extras


def write_manifest(path: str, cfg: RunConfig, extras=()):
    """A manifest is a re-parseable config; extras become comments."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# pathselect run manifest\n")
        fh.write(f"# version: pathselect {__version__}, numpy {np.__version__}\n")
        for line in extras:
            fh.write(f"# {line}\n")
        fh.write(serialize_config(cfg))


def cmd_simulate(cfg: RunConfig) -> int:
    cfg = _resolve_simulate_config(cfg)
    cells = [(n, c) for n in cfg.n for c in cfg.c]
    single = len(cells) == 1
    os.makedirs(cfg.out, exist_ok=True)
    collected = []
    for n, c in cells:
        scenario = _scenario_for(cfg, n, c)
        records, _ = run_scenario(scenario, workers=cfg.workers)
        rows = render_record_rows(records, cfg.selectors)
        agg = aggregate_rows(rows, cfg.selectors)
        cell_dir = cfg.out if single else os.path.join(cfg.out, "cells", f"n{n}_c{fmt6(c)}")
        os.makedirs(cell_dir, exist_ok=True)
        cell_cfg = replace(cfg, n=(n,), c=(c,))
        write_records_csv(os.path.join(cell_dir, "records.csv"), rows)
        write_manifest(os.path.join(cell_dir, "run_manifest.txt"), cell_cfg,
                       extras=_cell_extras(scenario))
        cell = [(n, c, cfg.penalty, cfg.selectors, agg)]
        _write_csv(os.path.join(cell_dir, "summary.csv"), SUMMARY_COLUMNS, summary_rows(cell))
        _write_csv(os.path.join(cell_dir, "df_quantiles.csv"), QUANTILE_COLUMNS, quantile_rows(cell))
        with open(os.path.join(cell_dir, "summary.txt"), "w", encoding="utf-8") as fh:
            fh.write(render_summary_text(cfg.design, cfg.penalty, cfg.selectors,
                                         cell, cfg.reps, cfg.seed))
        collected.extend(cell)
        sys.stderr.write(f"cell n={n} c={fmt6(c)}: done "
                         f"({agg.failures} failed realizations)\n")
    if not single:
        _write_csv(os.path.join(cfg.out, "summary.csv"), SUMMARY_COLUMNS, summary_rows(collected))
        _write_csv(os.path.join(cfg.out, "df_quantiles.csv"), QUANTILE_COLUMNS,
                   quantile_rows(collected))
        with open(os.path.join(cfg.out, "summary.txt"), "w", encoding="utf-8") as fh:
            fh.write(render_summary_text(cfg.design, cfg.penalty, cfg.selectors,
                                         collected, cfg.reps, cfg.seed))
        write_manifest(os.path.join(cfg.out, "run_manifest.txt"), cfg)
    return 0


# ---------------------------------------------------------------------------
# report


def cmd_report(records_path: str, out: str) -> int:
    manifest_path = os.path.join(os.path.dirname(records_path) or ".", "run_manifest.txt")
    if not os.path.exists(manifest_path):
        raise CliError(f"run_manifest.txt not found next to {records_path}; it carries "
                       f"the scenario metadata needed to rebuild summaries")
    cfg = parse_config(manifest_path)
    for key in ("design", "n", "c", "penalty", "selectors", "reps", "seed"):
        if getattr(cfg, key) is None:
            raise CliError(f"manifest {manifest_path} is missing key {key!r}")
    if len(cfg.n) != 1 or len(cfg.c) != 1:
        raise CliError("records.csv files describe a single (n, c) cell; "
                       "point --records at a per-cell file")
    rows = read_records_csv(records_path)
    agg = aggregate_rows(rows, cfg.selectors)
    cell = [(cfg.n[0], cfg.c[0], cfg.penalty, cfg.selectors, agg)]
    os.makedirs(out, exist_ok=True)
    _write_csv(os.path.join(out, "summary.csv"), SUMMARY_COLUMNS, summary_rows(cell))
    _write_csv(os.path.join(out, "df_quantiles.csv"), QUANTILE_COLUMNS, quantile_rows(cell))
    with open(os.path.join(out, "summary.txt"), "w", encoding="utf-8") as fh:
        fh.write(render_summary_text(cfg.design, cfg.penalty, cfg.selectors,
                                     cell, cfg.reps, cfg.seed))
    return 0


# ---------------------------------------------------------------------------
# fit


def _read_data_csv(path: str, target: str):
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if not header:
                raise CliError(f"{path} is empty")
            body = list(reader)
    except OSError as exc:
        raise CliError(f"cannot read data {path}: {exc}") from None
    if target not in header:
        raise CliError(f"target column {target!r} not found; available: {', '.join(header)}")
    t = header.index(target)
    variables = [h for i, h in enumerate(header) if i != t]
    if not variables:
        raise CliError("no predictor columns besides the target")
    X, y = [], []
    for rownum, row in enumerate(body, 2):
        if len(row) != len(header):
            raise CliError(f"{path} line {rownum}: expected {len(header)} fields, got {len(row)}")
        try:
            vals = [float(v) for v in row]
        except ValueError:
            bad = next(h for h, v in zip(header, row) if not _is_float(v))
            raise CliError(f"{path} line {rownum}: non-numeric value in column {bad!r}") from None
        y.append(vals[t])
        X.append([v for i, v in enumerate(vals) if i != t])
    if not X:
        raise CliError(f"{path} has a header but no data rows")
    return np.asarray(X), np.asarray(y), variables


def _is_float(v: str) -> bool:
    try:
        float(v)
        return True
    except ValueError:
        return False


def cmd_fit(cfg: RunConfig) -> int:
    for key in ("data", "target", "out"):
        if getattr(cfg, key) is None:
            raise CliError(f"fit needs {key!r} (flag --{key} or config)")
    penalty = cfg.penalty or "l1"
    if penalty not in PENALTY_MODES:
        raise CliError(f"unknown penalty {penalty!r}; expected one of {PENALTY_MODES}")
    selectors = cfg.selectors or GAUSSIAN_SELECTORS
    seed = 0 if cfg.seed is None else cfg.seed
    X, y, variables = _read_data_csv(cfg.data, cfg.target)
    design = standardize(X, intercept=True)
    kind, allow = resolve_penalty(penalty, design)
    lambdas = lambda_grid(design, y)
    path = fit_path(design, y, kind, lambdas, allow_nonconvex=allow)
    notes = []
    entries = []  # (row_name, selected_index)
    for name in selectors:
        if name.startswith("cv"):
            k = int(name[2:])
            for run, cv_seed in enumerate((seed, seed + 1), 1):
                score = kfold_cv(design, y, kind, lambdas, k=k, rng_seed=cv_seed,
                                 allow_nonconvex=allow, df_path=path.df)
                entries.append((f"{name}_{run}", score.selected_index))
                notes.append(f"{name}_{run}_seed: {cv_seed}")
        elif name == "cp" and design.n <= design.d + 1:
            sys.stderr.write(f"warning: cp unavailable (n={design.n} <= d+1={design.d + 1}); "
                             f"skipping\n")
            notes.append("cp: unavailable, n <= d+1")
        else:
            st2 = sigma_tilde(design, y) if name == "cp" else None
            score = score_gaussian_path(path, name, sigma_tilde2=st2)
            entries.append((name, score.selected_index))
    os.makedirs(cfg.out, exist_ok=True)
    grid_rows, coef_rows = [], []
    for row_name, idx in entries:
        coefs = path.coefficients[idx]
        grid_rows.append([row_name] + ["X" if coefs[1 + j] != 0.0 else ""
                                       for j in range(len(variables))])
        coef_rows.append([row_name, "(intercept)", fmt6(coefs[0])])
        for j, var in enumerate(variables):
            if coefs[1 + j] != 0.0:
                coef_rows.append([row_name, var, fmt6(coefs[1 + j])])
    _write_csv(os.path.join(cfg.out, "selection_grid.csv"),
               ["selector"] + variables, grid_rows)
    _write_csv(os.path.join(cfg.out, "coefficients.csv"),
               ("selector", "variable", "coefficient"), coef_rows)
    fit_cfg = RunConfig(penalty=penalty, selectors=selectors, seed=seed,
                        out=cfg.out, data=cfg.data, target=cfg.target)
    extras = [f"n: {design.n}", f"d: {design.d}",
              f"lambda_max: {fmt6(lambdas[0])}", f"lambda_min: {fmt6(lambdas[-1])}"]
    if isinstance(kind, ScadPenalty):
        extras.append(f"scad_a: {fmt6(kind.a)}")
    extras.extend(notes)
    write_manifest(os.path.join(cfg.out, "run_manifest.txt"), fit_cfg, extras=extras)
    return 0


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pathselect",
        description="Penalized regression paths with data-driven selection")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a Monte Carlo scenario from a config file")
    sim.add_argument("--config", required=True, help="key = value config file")
    sim.add_argument("--seed", type=int, help="override the base seed")
    sim.add_argument("--workers", type=int, help="parallel realization workers")
    sim.add_argument("--reps", type=int, help="override the replication count")
    sim.add_argument("--out", help="override the output directory")

    fit = sub.add_parser("fit", help="fit one CSV dataset and tabulate selections")
    fit.add_argument("--config", help="optional config file; flags override it")
    fit.add_argument("--data", help="CSV file with a header row")
    fit.add_argument("--target", help="response column name")
    fit.add_argument("--penalty", choices=PENALTY_MODES, help="penalty mode")
    fit.add_argument("--selectors", help="comma-separated selector names")
    fit.add_argument("--seed", type=int, help="cross-validation seed")
    fit.add_argument("--out", help="output directory")

    rep = sub.add_parser("report", help="rebuild summary tables from records.csv")
    rep.add_argument("--records", required=True, help="path to a per-cell records.csv")
    rep.add_argument("--out", required=True, help="output directory")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            cfg = parse_config(args.config)
            for key in ("seed", "workers", "reps", "out"):
                if getattr(args, key) is not None:
                    cfg = replace(cfg, **{key: getattr(args, key)})
            return cmd_simulate(cfg)
        if args.command == "fit":
            cfg = parse_config(args.config) if args.config else RunConfig()
            overrides = {}
            for key in ("data", "target", "penalty", "seed", "out"):
                if getattr(args, key) is not None:
                    overrides[key] = getattr(args, key)
            if args.selectors is not None:
                overrides["selectors"] = tuple(s.strip() for s in args.selectors.split(",")
                                               if s.strip())
            return cmd_fit(replace(cfg, **overrides))
        if args.command == "report":
            return cmd_report(args.records, args.out)
        raise CliError(f"unknown command {args.command!r}")
    except (CliError, ScenarioFailure, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
