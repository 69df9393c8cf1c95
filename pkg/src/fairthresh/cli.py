"""Command-line front end for training, sweeping, and checking the solvers.

Commands:

- ``fit``: train one pipeline (fuds, fcsc, or fpir) on a dataset, evaluate
  on a held-out split, and write a JSON report.
- ``frontier``: sweep a budget grid and write one CSV row per budget with
  the achieved accuracy and all three disparity measures.
- ``synthetic``: run the bundled Gaussian study at desk scale (all three
  pipelines on a sampled train/test pair, with closed-form reference
  columns) and write a JSON report.
- ``oracle-check``: run the solver-versus-oracle consistency suites and
  exit nonzero if any check fails.

Data sources: a CSV file with a header row, numeric feature columns, and
binary label/protected columns, or a saved synthetic model (a ``.json``
path). Every command is deterministic for a fixed argument list and seed;
re-running an invocation reproduces its output byte for byte. The default
seed can be set through the FAIRTHRESH_SEED environment variable.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import random
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import core
from .core import BlindKind, DisparityError, DisparityKind, natural_domain
from .discrete import (
    FiniteDistribution,
    brute_force_oracle,
    disparity_exact,
    risk_exact,
    solve_randomized,
)
from .estimators import FitError, LabeledDataset, LogisticConfig
from .extensions import eqodds_disparities, eqodds_risk, solve_eqodds
from .fair_algorithms import FairFitConfig, evaluate, run_fcsc, run_fpir, run_fuds
from .gaussian import (
    default_model,
    disparity_curve_closed,
    load_model,
    model_from_seed,
    risk_closed,
    sample,
    theoretical_fair_classifier,
)
from .solver import DEFAULT_TOL, SolverError, trace_pareto

__all__ = [
    "ExperimentSpec",
    "IngestError",
    "ingest_csv",
    "cmd_fit",
    "cmd_frontier",
    "cmd_synthetic",
    "cmd_oracle_check",
    "main",
]

SEED_ENV = "FAIRTHRESH_SEED"

_COMMANDS = ("fit", "frontier", "synthetic", "oracle-check")
_METHOD_RUNNERS = {"fuds": run_fuds, "fcsc": run_fcsc, "fpir": run_fpir}
_KIND_NAMES = {"dd": DisparityKind.DD, "do": DisparityKind.DO, "pd": DisparityKind.PD}
_BLIND_NAMES = {"dd": BlindKind.DD_X, "do": BlindKind.DO_X, "pd": BlindKind.PD_X}

# Pipeline settings shared by all commands: a lean full-batch learner with
# shortened warm-started refits inside bisection. Chosen so the desk-scale
# protocols finish in seconds while staying well inside the accuracy margin
# of the closed-form references (see tests/test_fair_algorithms.py).
_CLI_LEARNER = LogisticConfig(epochs=300, learning_rate=0.3)
_CLI_REFIT_EPOCHS = 120

# Desk-scale study shape used when the data source is a model file.
_MODEL_TRAIN_N = 10_000
_MODEL_TEST_N = 5_000
_SYNTHETIC_DELTAS = (0.0, 0.1, 0.2, 0.3)

# Oracle-check suite settings.
_DISCRETE_INSTANCES = 200
_DISCRETE_DELTAS = (0.0, 0.1, 0.3)
_DISCRETE_RISK_TOL = 1e-9
_GRID_STEP = 1e-5
_GRID_T_TOL = 1e-4
_GRID_MODEL_SEEDS = tuple(range(101, 111))
_GRID_DELTAS_CYCLE = (0.0, 0.05, 0.1, 0.15)
_EQODDS_DELTAS = (0.05, 0.1)
_EQODDS_TOL = 1e-4


class IngestError(DisparityError):
    """Raised when an input file or command configuration is unusable."""


@dataclass(frozen=True)
class ExperimentSpec:
    """Validated description of one CLI invocation."""

    command: str
    data: str | None = None
    label_col: str = "y"
    protected_col: str = "a"
    method: str = "fpir"
    kind_name: str = "dd"
    blind: bool = False
    delta: float = 0.1
    delta_grid: tuple[float, ...] | None = None
    seed: int = 0
    split: float = 0.7
    tol: float = DEFAULT_TOL
    jobs: int = 1
    out: str | None = None

    def __post_init__(self) -> None:
        if self.command not in _COMMANDS:
            raise IngestError(f"command must be one of {_COMMANDS}, got {self.command!r}")
        if self.method not in _METHOD_RUNNERS:
            raise IngestError(
                f"method must be one of {tuple(_METHOD_RUNNERS)}, got {self.method!r}"
            )
        if self.kind_name not in _KIND_NAMES:
            raise IngestError(
                f"disparity must be one of {tuple(_KIND_NAMES)}, got {self.kind_name!r}"
            )
        if not (math.isfinite(self.delta) and self.delta >= 0.0):
            raise IngestError(f"delta must be finite and nonnegative, got {self.delta!r}")
        if not 0.0 < self.split < 1.0:
            raise IngestError(f"split fraction must lie in (0, 1), got {self.split!r}")
        if not (math.isfinite(self.tol) and self.tol > 0.0):
            raise IngestError(f"tol must be positive, got {self.tol!r}")
        if self.seed < 0:
            raise IngestError(f"seed must be nonnegative, got {self.seed}")
        if self.jobs < 1:
            raise IngestError(f"jobs must be at least 1, got {self.jobs}")
        if self.delta_grid is not None:
            grid = tuple(float(d) for d in self.delta_grid)
            if not grid:
                raise IngestError("delta grid must be nonempty when given")
            if any(not (math.isfinite(d) and d >= 0.0) for d in grid):
                raise IngestError(f"delta grid values must be finite and nonnegative: {grid}")
            if any(b < a for a, b in zip(grid, grid[1:])):
                raise IngestError(f"delta grid must be sorted ascending, got {grid}")
            object.__setattr__(self, "delta_grid", grid)

    @property
    def kind(self) -> DisparityKind | BlindKind:
        return (_BLIND_NAMES if self.blind else _KIND_NAMES)[self.kind_name]


# ---------------------------------------------------------------------------
# Dataset ingestion


def _parse_cell_value(raw: str, column: str, what: str, lineno: int, path: str) -> float:
    value = raw.strip()
    try:
        parsed = float(value)
    except ValueError:
        raise IngestError(
            f"{path} line {lineno}: {what} column {column!r} has non-numeric value {raw!r}"
        ) from None
    return parsed


def _parse_binary(raw: str, column: str, what: str, lineno: int, path: str) -> int:
    parsed = _parse_cell_value(raw, column, what, lineno, path)
    if parsed not in (0.0, 1.0):
        raise IngestError(
            f"{path} line {lineno}: {what} column {column!r} value {raw!r} is not binary"
        )
    return int(parsed)


def _parse_group(
    raw: str, column: str, lineno: int, path: str, allow_multiclass: bool
) -> int:
    if not allow_multiclass:
        return _parse_binary(raw, column, "protected", lineno, path)
    parsed = _parse_cell_value(raw, column, "protected", lineno, path)
    if not (parsed.is_integer() and parsed >= 0.0):
        raise IngestError(
            f"{path} line {lineno}: protected column {column!r} value {raw!r} "
            "is not a group id"
        )
    return int(parsed)


def ingest_csv(
    path: str | Path,
    label_col: str,
    protected_col: str,
    allow_multiclass_protected: bool = False,
) -> LabeledDataset:
    """Read a header CSV into a dataset.

    All columns other than the label and protected columns are features and
    must parse as finite reals; rows violating that are reported together
    with their line numbers. Label values must be 0 or 1; protected values
    must be 0 or 1 unless multi-class group ids are explicitly allowed.
    """
    path_str = str(path)
    if not Path(path).exists():
        raise IngestError(f"no such file: {path_str}")
    if label_col == protected_col:
        raise IngestError("label and protected columns must differ")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise IngestError(f"{path_str}: empty file (no header row)") from None
        for col in (label_col, protected_col):
            if header.count(col) == 0:
                raise IngestError(f"{path_str}: missing column {col!r} (header: {header})")
            if header.count(col) > 1:
                raise IngestError(f"{path_str}: duplicate column {col!r}")
        label_ix = header.index(label_col)
        group_ix = header.index(protected_col)
        feature_ix = [i for i in range(len(header)) if i not in (label_ix, group_ix)]
        if not feature_ix:
            raise IngestError(f"{path_str}: no feature columns besides label and protected")

        features: list[list[float]] = []
        groups: list[int] = []
        labels: list[int] = []
        bad_lines: list[int] = []
        for lineno, row in enumerate(reader, start=2):
            if not any(cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise IngestError(
                    f"{path_str} line {lineno}: expected {len(header)} fields, got {len(row)}"
                )
            label = _parse_binary(row[label_ix], label_col, "label", lineno, path_str)
            group = _parse_group(
                row[group_ix], protected_col, lineno, path_str, allow_multiclass_protected
            )
            row_feats = []
            for i in feature_ix:
                try:
                    v = float(row[i].strip())
                except ValueError:
                    v = math.nan
                row_feats.append(v)
            if not all(math.isfinite(v) for v in row_feats):
                bad_lines.append(lineno)
                continue
            features.append(row_feats)
            groups.append(group)
            labels.append(label)

    if bad_lines:
        shown = ", ".join(str(n) for n in bad_lines[:20])
        more = "" if len(bad_lines) <= 20 else f" (+{len(bad_lines) - 20} more)"
        raise IngestError(
            f"{path_str}: non-numeric or non-finite feature values on lines {shown}{more}"
        )
    if not labels:
        raise IngestError(f"{path_str}: no data rows")
    return LabeledDataset(
        x=np.asarray(features, dtype=float),
        a=np.asarray(groups, dtype=int),
        y=np.asarray(labels, dtype=int),
    )


def _split_dataset(
    dataset: LabeledDataset, split: float, seed: int
) -> tuple[LabeledDataset, LabeledDataset]:
    n = len(dataset)
    n_train = int(split * n)
    if n_train < 1 or n_train >= n:
        raise IngestError(f"split {split} leaves an empty side for {n} rows")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 1]))
    perm = rng.permutation(n)
    return dataset.subset(perm[:n_train]), dataset.subset(perm[n_train:])


def _sample_seeds(seed: int) -> tuple[int, int]:
    state = np.random.SeedSequence(seed).generate_state(2, dtype=np.uint64)
    return int(state[0]), int(state[1])


def _load_source(spec: ExperimentSpec) -> tuple[LabeledDataset, LabeledDataset, str]:
    """Resolve --data into a train/test pair.

    A ``.json`` path is a saved synthetic model: a fresh desk-scale sample
    pair is drawn from it. Anything else is read as CSV and split by the
    seeded permutation.
    """
    if spec.data is None:
        raise IngestError(f"command {spec.command!r} needs --data")
    if spec.data.endswith(".json"):
        model = load_model(spec.data)
        train_seed, test_seed = _sample_seeds(spec.seed)
        train = sample(model, _MODEL_TRAIN_N, train_seed)
        test = sample(model, _MODEL_TEST_N, test_seed)
        return train, test, "model"
    dataset = ingest_csv(spec.data, spec.label_col, spec.protected_col)
    train, test = _split_dataset(dataset, spec.split, spec.seed)
    return train, test, "csv"


def _pipeline_config(spec: ExperimentSpec, delta: float, seed: int) -> FairFitConfig:
    return FairFitConfig(
        kind=spec.kind,
        delta=delta,
        tol=spec.tol,
        mode="blind" if spec.blind else "aware",
        seed=seed,
        learner=_CLI_LEARNER,
        refit_epochs=_CLI_REFIT_EPOCHS,
    )


def _write_json(document: dict, out: str | None) -> None:
    text = json.dumps(document, indent=2, sort_keys=True) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------
# Commands


def cmd_fit(spec: ExperimentSpec) -> dict:
    """Train the chosen pipeline and report train diagnostics + test metrics."""
    train, test, source = _load_source(spec)
    config = _pipeline_config(spec, spec.delta, spec.seed)
    classifier, t_hat, report = _METHOD_RUNNERS[spec.method](train, config)
    document = {
        "command": "fit",
        "data": spec.data,
        "source": source,
        "method": spec.method,
        "disparity": spec.kind_name,
        "blind": spec.blind,
        "delta": spec.delta,
        "seed": spec.seed,
        "split": spec.split,
        "tol": spec.tol,
        "n_train": len(train),
        "n_test": len(test),
        "dim": train.dim,
        "t_hat": t_hat,
        "run": report,
        "test_metrics": evaluate(classifier, test),
    }
    _write_json(document, spec.out)
    return document


def _frontier_child_seed(base_seed: int, index: int) -> int:
    """Independent per-point seed derived from the base seed by index."""
    return int(np.random.SeedSequence([base_seed, 2, index]).generate_state(1)[0])


def _closed_frontier_rows(spec: ExperimentSpec) -> list[list[object]]:
    if spec.blind:
        raise IngestError("closed-form frontiers cover the group-aware measures only")
    model = load_model(spec.data)
    kind = _KIND_NAMES[spec.kind_name]
    curve = disparity_curve_closed(model, kind)
    rows = trace_pareto(
        curve, lambda t: risk_closed(model, kind, t), list(spec.delta_grid), tol=spec.tol
    )
    curves = {name: disparity_curve_closed(model, k) for name, k in _KIND_NAMES.items()}
    out_rows = []
    for row in rows:
        values = {name: curves[name](row.t) for name in _KIND_NAMES}
        values[spec.kind_name] = row.disparity
        out_rows.append(
            [row.delta, row.t, 1.0 - row.risk, values["dd"], values["do"], values["pd"]]
        )
    return out_rows


def _empirical_frontier_rows(spec: ExperimentSpec) -> list[list[object]]:
    train, test, _ = _load_source(spec)
    out_rows = []
    # Points run sequentially regardless of --jobs, each with its own
    # index-derived seed, so outputs never depend on scheduling.
    for index, delta in enumerate(spec.delta_grid):
        config = _pipeline_config(spec, delta, _frontier_child_seed(spec.seed, index))
        classifier, t_hat, _ = _METHOD_RUNNERS[spec.method](train, config)
        metrics = evaluate(classifier, test)
        out_rows.append(
            [delta, t_hat, metrics["accuracy"], metrics["dd"], metrics["do"], metrics["pd"]]
        )
    return out_rows


def cmd_frontier(spec: ExperimentSpec) -> list[list[object]]:
    """One CSV row per budget: delta, t, accuracy, and the three gaps."""
    if spec.delta_grid is None:
        raise IngestError("frontier needs --delta-grid")
    if spec.data is None:
        raise IngestError("frontier needs --data")
    if spec.data.endswith(".json"):
        rows = _closed_frontier_rows(spec)
    else:
        rows = _empirical_frontier_rows(spec)

    def emit(handle) -> None:
        writer = csv.writer(handle)
        writer.writerow(["delta", "t", "accuracy", "dd", "do", "pd"])
        for row in rows:
            writer.writerow(["" if v is None else v for v in row])

    if spec.out is None:
        emit(sys.stdout)
    else:
        with open(spec.out, "w", newline="", encoding="utf-8") as fh:
            emit(fh)
    return rows


def cmd_synthetic(spec: ExperimentSpec) -> dict:
    """Desk-scale study on the bundled (or a saved) synthetic model.

    Runs every pipeline on one sampled train/test pair for each group-aware
    measure and budget, next to the closed-form reference values.
    """
    if spec.blind:
        raise IngestError("synthetic runs the group-aware study")
    model = default_model() if spec.data is None else load_model(spec.data)
    deltas = spec.delta_grid if spec.delta_grid is not None else _SYNTHETIC_DELTAS
    train_seed, test_seed = _sample_seeds(spec.seed)
    train = sample(model, _MODEL_TRAIN_N, train_seed)
    test = sample(model, _MODEL_TEST_N, test_seed)
    references = {
        (name, delta): theoretical_fair_classifier(model, kind, delta)
        for name, kind in _KIND_NAMES.items()
        for delta in deltas
    }
    rows = []
    for method in _METHOD_RUNNERS:
        for name, kind in _KIND_NAMES.items():
            for delta in deltas:
                config = FairFitConfig(
                    kind=kind,
                    delta=delta,
                    tol=spec.tol,
                    seed=spec.seed,
                    learner=_CLI_LEARNER,
                    refit_epochs=_CLI_REFIT_EPOCHS,
                )
                classifier, t_hat, _ = _METHOD_RUNNERS[method](train, config)
                metrics = evaluate(classifier, test)
                reference = references[(name, delta)]
                rows.append(
                    {
                        "method": method,
                        "disparity": name,
                        "delta": delta,
                        "t_hat": t_hat,
                        "accuracy": metrics["accuracy"],
                        "achieved": metrics[name],
                        "theory_t": reference.t_star,
                        "theory_accuracy": 1.0 - reference.risk,
                        "theory_disparity": reference.disparity,
                    }
                )
    document = {
        "command": "synthetic",
        "seed": spec.seed,
        "tol": spec.tol,
        "n_train": _MODEL_TRAIN_N,
        "n_test": _MODEL_TEST_N,
        "deltas": list(deltas),
        "sigma": model.sigma,
        "dim": model.dim,
        "rows": rows,
    }
    _write_json(document, spec.out)
    return document


# ---------------------------------------------------------------------------
# Oracle-check suites


def _random_finite_instance(rng: random.Random, n_max: int = 6) -> FiniteDistribution:
    n = rng.randint(2, n_max)
    groups = [0, 1] + [rng.randint(0, 1) for _ in range(n - 2)]
    raw = [rng.uniform(0.2, 1.0) for _ in range(n)]
    total = sum(raw)
    masses = [r / total for r in raw]
    scores = [rng.uniform(0.05, 0.95) for _ in range(n)]
    return FiniteDistribution(list(zip(groups, masses, scores)))


def _check_discrete_suite(seed: int, failures: list[str]) -> str:
    rng = random.Random(seed)
    checks = 0
    worst_gap = 0.0
    worst_excess = 0.0
    for index in range(_DISCRETE_INSTANCES):
        dist = _random_finite_instance(rng)
        stats = dist.implied_stats()
        for kind in _KIND_NAMES.values():
            for delta in _DISCRETE_DELTAS:
                solution = solve_randomized(dist, kind, stats, delta)
                oracle_risk, _ = brute_force_oracle(dist, kind, stats, delta)
                gap = abs(float(risk_exact(dist, solution) - oracle_risk))
                excess = float(
                    abs(disparity_exact(dist, kind, stats, solution)) - Fraction(delta)
                )
                checks += 1
                worst_gap = max(worst_gap, gap)
                worst_excess = max(worst_excess, excess)
                if gap > _DISCRETE_RISK_TOL:
                    failures.append(
                        f"discrete instance {index} kind={kind.value} delta={delta}: "
                        f"risk gap {gap:.3e}"
                    )
                if excess > 0.0:
                    failures.append(
                        f"discrete instance {index} kind={kind.value} delta={delta}: "
                        f"constraint excess {excess:.3e}"
                    )
    return (
        f"discrete: {checks} checks, worst risk gap {worst_gap:.3e}, "
        f"worst constraint excess {worst_excess:.3e}"
    )


def _suite_disparity(model, kind: DisparityKind, t: float) -> float:
    """Disparity of the group-threshold rule, recomputed inside the suite.

    The threshold map is looked up through the core module at call time, so
    the comparison below exercises the formula actually in use rather than
    a copy bound at import.
    """
    stats = model.stats
    thr1 = core.threshold(kind, stats, 1, t)
    thr0 = core.threshold(kind, stats, 0, t)
    if kind is DisparityKind.DD:

        def rate(a: int, thr: float) -> float:
            return sum(
                stats.p(a, y) / stats.p_group(a) * model.survival(a, y, thr) for y in (0, 1)
            )

        return rate(1, thr1) - rate(0, thr0)
    y = 1 if kind is DisparityKind.DO else 0
    return model.survival(1, y, thr1) - model.survival(0, y, thr0)


def _grid_threshold_oracle(model, kind: DisparityKind, delta: float, step: float) -> float:
    """Smallest-magnitude grid point whose suite disparity meets the budget.

    The curves are non-increasing, so the first feasible point along the
    search direction is found by bisecting grid indices; the result equals
    a full scan's answer at a fraction of the evaluations.
    """
    lo, hi = natural_domain(kind, model.stats)
    shrink = 1e-9 * (hi - lo)
    d0 = _suite_disparity(model, kind, 0.0)
    if abs(d0) <= delta:
        return 0.0
    if d0 > delta:
        sign = 1.0
        steps = int(math.floor((hi - shrink) / step))

        def feasible(i: int) -> bool:
            return _suite_disparity(model, kind, i * step) <= delta

    else:
        sign = -1.0
        steps = int(math.floor((-lo - shrink) / step))

        def feasible(i: int) -> bool:
            return _suite_disparity(model, kind, -i * step) >= -delta

    if not feasible(steps):
        return sign * steps * step
    low, high = 0, steps
    while high - low > 1:
        mid = (low + high) // 2
        if feasible(mid):
            high = mid
        else:
            low = mid
    return sign * high * step


def _check_grid_suite(failures: list[str]) -> str:
    checks = 0
    worst = 0.0
    for j, model_seed in enumerate(_GRID_MODEL_SEEDS):
        model = model_from_seed(model_seed)
        for k, kind in enumerate(_KIND_NAMES.values()):
            delta = _GRID_DELTAS_CYCLE[(j + k) % len(_GRID_DELTAS_CYCLE)]
            t_bisect = theoretical_fair_classifier(model, kind, delta, tol=1e-6).t_star
            t_grid = _grid_threshold_oracle(model, kind, delta, _GRID_STEP)
            diff = abs(t_bisect - t_grid)
            checks += 1
            worst = max(worst, diff)
            if diff > _GRID_T_TOL:
                failures.append(
                    f"bisect-grid model seed {model_seed} kind={kind.value} "
                    f"delta={delta}: |t difference| {diff:.3e}"
                )
    return f"bisect-grid: {checks} curves, worst |t difference| {worst:.3e}"


def _eqodds_grid_oracle(model, stats, delta: float, coarse: int = 121, fine: int = 121):
    """Best feasible risk on a coarse grid, refined around its argmin."""

    def best_on(t1s, t2s):
        top = (None, None, float("inf"))
        for t1 in t1s:
            for t2 in t2s:
                try:
                    do, pd = eqodds_disparities(model, stats, t1, t2)
                except DisparityError:
                    continue
                if max(abs(do), abs(pd)) > delta + 1e-12:
                    continue
                risk = eqodds_risk(model, stats, t1, t2)
                if risk < top[2]:
                    top = (t1, t2, risk)
        return top

    def linspace(lo, hi, n):
        step = (hi - lo) / (n - 1)
        return [lo + i * step for i in range(n)]

    lo1, hi1 = -stats.p(0, 1), stats.p(1, 1)
    lo2, hi2 = -stats.p(1, 0), stats.p(0, 0)
    t1c, t2c, _ = best_on(linspace(lo1, hi1, coarse), linspace(lo2, hi2, coarse))
    if t1c is None:
        return None
    w1 = 2.0 * (hi1 - lo1) / (coarse - 1)
    w2 = 2.0 * (hi2 - lo2) / (coarse - 1)
    _, _, risk = best_on(
        linspace(max(lo1, t1c - w1), min(hi1, t1c + w1), fine),
        linspace(max(lo2, t2c - w2), min(hi2, t2c + w2), fine),
    )
    return risk


def _check_eqodds_suite(failures: list[str]) -> str:
    model = default_model()
    stats = model.stats
    checks = 0
    worst_excess = -math.inf
    worst_gap = 0.0
    for delta in _EQODDS_DELTAS:
        solution = solve_eqodds(model, stats, delta)
        excess = max(abs(solution.do_value), abs(solution.pd_value)) - delta
        solver_risk = eqodds_risk(model, stats, solution.t1, solution.t2)
        grid_risk = _eqodds_grid_oracle(model, stats, delta)
        checks += 1
        worst_excess = max(worst_excess, excess)
        if excess > _EQODDS_TOL:
            failures.append(f"eqodds delta={delta}: constraint excess {excess:.3e}")
        if grid_risk is None:
            failures.append(f"eqodds delta={delta}: no feasible grid point")
            continue
        gap = abs(solver_risk - grid_risk)
        worst_gap = max(worst_gap, gap)
        if gap > _EQODDS_TOL:
            failures.append(f"eqodds delta={delta}: risk gap {gap:.3e} versus grid")
    return (
        f"eqodds-grid: {checks} budgets, worst constraint excess {worst_excess:.3e}, "
        f"worst risk gap {worst_gap:.3e}"
    )


def cmd_oracle_check(spec: ExperimentSpec) -> int:
    """Run the consistency suites; print summaries; nonzero exit on failure."""
    failures: list[str] = []
    print(_check_discrete_suite(spec.seed, failures))
    print(_check_grid_suite(failures))
    print(_check_eqodds_suite(failures))
    for line in failures:
        print(f"FAIL {line}")
    if failures:
        print(f"oracle-check: {len(failures)} failure(s)")
        return 1
    print("oracle-check: all suites passed")
    return 0


# ---------------------------------------------------------------------------
# Argument parsing


def _env_seed() -> int:
    value = os.environ.get(SEED_ENV)
    if value is None:
        return 0
    try:
        return int(value)
    except ValueError:
        raise IngestError(f"{SEED_ENV} must be an integer, got {value!r}") from None


def _parse_delta_grid(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated numbers, got {text!r}"
        ) from None


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairthresh",
        description="Disparity-controlled classification: fit, sweep, and check.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, with_out: bool = True) -> None:
        p.add_argument(
            "--seed",
            type=int,
            default=None,
            help=f"base seed (default: ${SEED_ENV} or 0)",
        )
        p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="bisection tolerance")
        if with_out:
            p.add_argument("--out", default=None, help="output path (default: stdout)")

    def add_data(p: argparse.ArgumentParser) -> None:
        p.add_argument("--data", required=True, help="CSV dataset or saved model (.json)")
        p.add_argument("--label-col", default="y", help="label column name (CSV)")
        p.add_argument("--protected-col", default="a", help="protected column name (CSV)")
        p.add_argument(
            "--split", type=float, default=0.7, help="train fraction for CSV sources"
        )

    def add_method(p: argparse.ArgumentParser) -> None:
        p.add_argument("--method", choices=tuple(_METHOD_RUNNERS), default="fpir")
        p.add_argument("--disparity", choices=tuple(_KIND_NAMES), default="dd")
        p.add_argument(
            "--blind",
            action="store_true",
            help="control the measure without using the group at prediction time",
        )

    fit = sub.add_parser("fit", help="train one pipeline and write a JSON report")
    add_data(fit)
    add_method(fit)
    fit.add_argument("--delta", type=float, default=0.1, help="disparity budget")
    add_common(fit)

    frontier = sub.add_parser("frontier", help="sweep budgets into a CSV frontier")
    add_data(frontier)
    add_method(frontier)
    frontier.add_argument(
        "--delta-grid",
        type=_parse_delta_grid,
        required=True,
        help="comma-separated ascending budgets, e.g. 0,0.1,0.2",
    )
    frontier.add_argument(
        "--jobs",
        type=int,
        default=1,
        help="accepted for compatibility; points always run in a fixed order",
    )
    add_common(frontier)

    synthetic = sub.add_parser(
        "synthetic", help="desk-scale study on the bundled synthetic model"
    )
    synthetic.add_argument("--data", default=None, help="saved model (.json); default bundled")
    synthetic.add_argument(
        "--delta-grid",
        type=_parse_delta_grid,
        default=None,
        help="comma-separated ascending budgets (default 0,0.1,0.2,0.3)",
    )
    add_common(synthetic)

    oracle = sub.add_parser("oracle-check", help="run solver-versus-oracle suites")
    add_common(oracle, with_out=False)

    return parser


def _spec_from_args(args: argparse.Namespace) -> ExperimentSpec:
    seed = args.seed if args.seed is not None else _env_seed()
    fields = {
        "command": args.command,
        "seed": seed,
        "tol": args.tol,
        "out": getattr(args, "out", None),
    }
    if args.command in ("fit", "frontier"):
        fields.update(
            data=args.data,
            label_col=args.label_col,
            protected_col=args.protected_col,
            split=args.split,
            method=args.method,
            kind_name=args.disparity,
            blind=args.blind,
        )
    if args.command == "fit":
        fields.update(delta=args.delta)
    if args.command == "frontier":
        fields.update(delta_grid=args.delta_grid, jobs=args.jobs)
    if args.command == "synthetic":
        fields.update(data=args.data, delta_grid=args.delta_grid)
    return ExperimentSpec(**fields)


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        spec = _spec_from_args(args)
        if spec.command == "fit":
            cmd_fit(spec)
            return 0
        if spec.command == "frontier":
            cmd_frontier(spec)
            return 0
        if spec.command == "synthetic":
            cmd_synthetic(spec)
            return 0
        return cmd_oracle_check(spec)
    except (DisparityError, SolverError, FitError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
