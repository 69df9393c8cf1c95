"""Fairness pipelines: resampling, cost reweighting, and plug-in thresholding.

All three pipelines share one outer loop: bisection on the threshold
parameter t of an empirical disparity curve.  Each curve evaluation builds
the classifier for the current t and scores its decisions on the original
training rows, where the group ids and labels are observed, so the same
plug-in estimate drives aware and blind runs alike.  The pipelines differ
only in how the classifier at t is produced:

- the resampling pipeline redraws the training set to tilted cell
  proportions and refits an unconstrained learner;
- the cost-reweighting pipeline refits on the original rows with per-cell
  misclassification costs;
- the plug-in pipeline fits regression estimates once and only moves
  decision thresholds, so its curve evaluations are cheap.

Aware runs read the group id at decision time.  Blind runs fit rules on
features alone; the group id is still used during training to measure the
disparity being controlled.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np

from .core import (
    BlindKind,
    DisparityError,
    DisparityKind,
    DomainError,
    EstimationError,
    GroupStats,
    cost_weights,
    empirical_disparity_arrays,
    natural_domain,
    threshold,
)
from .estimators import (
    MODE_AWARE,
    MODE_BLIND_A,
    LabeledDataset,
    LogisticConfig,
    ProbModel,
    fit_group_models,
    fit_logistic,
    predict_proba,
)
from .solver import DEFAULT_TOL, DisparityCurve, SolveResult, solve_threshold

__all__ = [
    "MODE_FIT_AWARE",
    "MODE_FIT_BLIND",
    "FairFitConfig",
    "ResampleState",
    "FairClassifier",
    "fuds_proportions",
    "fuds_cell_counts",
    "fuds_resample",
    "blind_cost_weights",
    "empirical_curve",
    "run_fuds",
    "run_fcsc",
    "run_fpir",
    "evaluate",
]

MODE_FIT_AWARE = "aware"
MODE_FIT_BLIND = "blind"

_CELLS = ((1, 1), (1, 0), (0, 1), (0, 0))
_METHODS = ("fuds", "fcsc", "fpir")
# Smallest per-cell row count a refit can digest; the resampling bracket is
# clamped so no evaluation produces an emptier cell.
_MIN_CELL_ROWS = 1
# Absorbs product round-off when n * proportion is an exact integer, as at
# the baseline t = 0 where the targets must recover the original counts.
_FLOOR_NUDGE = 1e-9


@dataclass(frozen=True)
class FairFitConfig:
    """Settings shared by the three pipeline runners.

    kind selects the disparity measure and must match mode: blind kinds
    pair with mode "blind" (the fitted rule reads features only), aware
    kinds with mode "aware".  delta is the disparity budget and tol the
    bisection resolution.  refit_epochs, when set, caps the epoch budget of
    every fit after the first one; with warm_start each refit resumes from
    the previous coefficients, so a small cap is usually enough.
    """

    kind: DisparityKind | BlindKind
    delta: float
    tol: float = DEFAULT_TOL
    mode: str = MODE_FIT_AWARE
    seed: int = 0
    learner: LogisticConfig = LogisticConfig()
    warm_start: bool = True
    refit_epochs: int | None = None
    pareto_deltas: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.kind, (DisparityKind, BlindKind)):
            raise DisparityError(f"kind must be a disparity kind, got {self.kind!r}")
        if not (math.isfinite(self.delta) and self.delta >= 0.0):
            raise DisparityError(f"delta must be finite and nonnegative, got {self.delta!r}")
        if not (math.isfinite(self.tol) and self.tol > 0.0):
            raise DisparityError(f"tol must be positive, got {self.tol!r}")
        if self.mode not in (MODE_FIT_AWARE, MODE_FIT_BLIND):
            raise DisparityError(f"mode must be 'aware' or 'blind', got {self.mode!r}")
        if (self.mode == MODE_FIT_BLIND) != isinstance(self.kind, BlindKind):
            raise DisparityError(
                f"mode {self.mode!r} does not match kind {self.kind}: blind kinds need "
                "blind mode, aware kinds need aware mode"
            )
        if self.refit_epochs is not None and self.refit_epochs < 0:
            raise DisparityError(f"refit_epochs must be nonnegative, got {self.refit_epochs!r}")
        if self.pareto_deltas is not None:
            grid = tuple(float(d) for d in self.pareto_deltas)
            if not grid:
                raise DisparityError("pareto_deltas must be nonempty when given")
            if any(not (math.isfinite(d) and d >= 0.0) for d in grid):
                raise DisparityError(f"pareto deltas must be finite and nonnegative, got {grid}")
            if any(b < a for a, b in zip(grid, grid[1:])):
                raise DisparityError(f"pareto deltas must be sorted ascending, got {grid}")
            object.__setattr__(self, "pareto_deltas", grid)

    @property
    def base_kind(self) -> DisparityKind:
        """The group-aware measure the run controls."""
        return self.kind.base if isinstance(self.kind, BlindKind) else self.kind


@dataclass(frozen=True)
class ResampleState:
    """Row-index multiset of a resampled dataset, one array per cell.

    Indices point into the dataset the resample was drawn from; t records
    the tilt the cell sizes were computed for.  Treat the arrays as
    immutable.
    """

    t: float
    cells: Mapping[tuple[int, int], np.ndarray]

    def __post_init__(self) -> None:
        if set(self.cells) != set(_CELLS):
            raise DisparityError(f"cells must cover exactly {_CELLS}, got {tuple(self.cells)}")

    def counts(self) -> dict[tuple[int, int], int]:
        return {cell: int(np.asarray(self.cells[cell]).size) for cell in _CELLS}

    def index(self) -> np.ndarray:
        """All row indices, concatenated in fixed cell order."""
        return np.concatenate(
            [np.asarray(self.cells[cell], dtype=np.intp) for cell in _CELLS]
        )


@dataclass(frozen=True)
class FairClassifier:
    """Thresholded plug-in rule.

    Aware rules compare the group-routed regression estimate to per-group
    thresholds (indexed by group id) and need the group vector to decide.
    Blind rules compare the label regression to a feature-dependent
    threshold built from the estimated group posterior and ignore the
    group vector.
    """

    kind: DisparityKind | BlindKind
    t: float
    stats: GroupStats
    thresholds: tuple[float, float] | None = None
    eta_groups: ProbModel | None = None
    eta_y: ProbModel | None = None
    eta_a: ProbModel | None = None

    def decide(self, x: np.ndarray, a: np.ndarray | None = None) -> np.ndarray:
        x2 = np.atleast_2d(np.asarray(x, dtype=float))
        if isinstance(self.kind, BlindKind):
            score = np.asarray(predict_proba(self.eta_y, x2), dtype=float)
            w = _blind_weight_values(self.kind, self.stats, x2, self.eta_a, self.eta_groups)
            return (score > 0.5 + 0.5 * self.t * w).astype(float)
        if a is None:
            raise DisparityError("aware rule needs the group id vector to decide")
        a_arr = np.asarray(a)
        score = np.asarray(predict_proba(self.eta_groups, x2, a_arr), dtype=float)
        thr = np.where(a_arr == 1, self.thresholds[1], self.thresholds[0])
        return (score > thr).astype(float)

    __call__ = decide


def _blind_tilt(kind: BlindKind, stats: GroupStats, a: int, y: int, t: float) -> float:
    """Relative mass change of cell (a, y) under the blind tilt at t."""
    sign = 2 * a - 1
    if kind is BlindKind.DD_X:
        return sign * (1 - 2 * y) * t / stats.p_group(a)
    if kind is BlindKind.DO_X:
        return -sign * y * t / stats.p(a, y)
    if kind is BlindKind.PD_X:
        return sign * (1 - y) * t / stats.p(a, y)
    raise DisparityError(f"unknown blind kind: {kind!r}")


def fuds_proportions(
    stats: GroupStats, kind: DisparityKind | BlindKind, t: float
) -> dict[tuple[int, int], float]:
    """Tilted cell proportions whose unconstrained Bayes rule is fair at t.

    Aware kinds rescale the two cells of each group by the acceptance
    threshold split and renormalize within the group, preserving group
    marginals.  Blind kinds tilt every cell and renormalize globally.
    Keys are (group, label) pairs; values sum to 1.
    """
    if not math.isfinite(t):
        raise DomainError(f"t must be finite, got {t!r}")
    if t == 0.0:
        return {cell: stats.p(*cell) for cell in _CELLS}
    if isinstance(kind, BlindKind):
        raw = {}
        for a, y in _CELLS:
            mass = (1.0 + _blind_tilt(kind, stats, a, y, t)) * stats.p(a, y)
            if mass < 0.0:
                lo, hi = natural_domain(kind, stats)
                raise DomainError(
                    f"cell (a={a}, y={y}) mass {mass!r} < 0 for {kind.name} at t={t!r}; "
                    f"valid bracket is [{lo!r}, {hi!r}]"
                )
            raw[(a, y)] = mass
        total = math.fsum(raw.values())
        return {cell: raw[cell] / total for cell in _CELLS}
    out: dict[tuple[int, int], float] = {}
    for a in (1, 0):
        h = threshold(kind, stats, a, t)
        if not 0.0 <= h <= 1.0:
            lo, hi = natural_domain(kind, stats)
            raise DomainError(
                f"group-{a} threshold {h!r} outside [0, 1] for {kind.name} at t={t!r}; "
                f"valid bracket is [{lo!r}, {hi!r}]"
            )
        keep1 = (1.0 - h) * stats.p(a, 1)
        keep0 = h * stats.p(a, 0)
        scale = stats.p_group(a) / (keep1 + keep0)
        out[(a, 1)] = keep1 * scale
        out[(a, 0)] = keep0 * scale
    return out


def fuds_cell_counts(
    n: int, proportions: Mapping[tuple[int, int], float]
) -> dict[tuple[int, int], int]:
    """Floor cell sizes floor(n * proportion) of an n-row resample."""
    if n < 1:
        raise DisparityError(f"resample size must be at least one row, got {n}")
    counts = {}
    for cell in _CELLS:
        p = proportions[cell]
        if not (math.isfinite(p) and p >= 0.0):
            raise DisparityError(f"proportion for cell {cell} must be nonnegative, got {p!r}")
        counts[cell] = int(math.floor(n * p + _FLOOR_NUDGE))
    return counts


def _draw_cell(
    rng: np.random.Generator, source: np.ndarray, current: np.ndarray, target: int
) -> np.ndarray:
    """Grow a cell's multiset to the target count.

    New rows come uniformly from the source rows not yet included; once
    those run out, the remainder is drawn from the full source cell with
    replacement.
    """
    need = target - current.size
    unused = np.setdiff1d(source, current)
    if need == unused.size:
        extra = unused
    elif need < unused.size:
        extra = rng.choice(unused, size=need, replace=False)
    else:
        spill = rng.choice(source, size=need - unused.size, replace=True)
        extra = np.concatenate([unused, spill])
    return np.concatenate([current, extra]).astype(np.intp, copy=False)


def fuds_resample(
    dataset: LabeledDataset,
    targets: Mapping[tuple[int, int], int],
    prev: ResampleState | None = None,
    seed: int | np.random.SeedSequence = 0,
    *,
    t: float = 0.0,
) -> tuple[LabeledDataset, ResampleState]:
    """Draw a resampled dataset with exact per-cell row counts.

    A cold start draws each cell uniformly from its source rows.  Against a
    previous state, grown cells add uniformly drawn rows (falling back to
    replacement once every source row is in) and shrunk cells keep a
    uniform subset, so consecutive states share most of their rows.
    Deterministic per seed: each cell consumes a dedicated child stream in
    fixed cell order.
    """
    seq = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = seq.spawn(len(_CELLS))
    cells: dict[tuple[int, int], np.ndarray] = {}
    for child, cell in zip(children, _CELLS):
        a, y = cell
        target = int(targets[cell])
        if target < 0:
            raise DisparityError(f"target count for cell {cell} must be nonnegative, got {target}")
        source = np.flatnonzero(dataset.cell_mask(a, y))
        if target > 0 and source.size == 0:
            raise EstimationError(
                f"cell (a={a}, y={y}) has no source rows but a target count of {target}"
            )
        current = (
            np.empty(0, dtype=np.intp)
            if prev is None
            else np.asarray(prev.cells[cell], dtype=np.intp)
        )
        if target == current.size:
            cells[cell] = current
        elif target > current.size:
            cells[cell] = _draw_cell(np.random.default_rng(child), source, current, target)
        else:
            rng = np.random.default_rng(child)
            keep = rng.choice(current.size, size=target, replace=False)
            cells[cell] = current[np.sort(keep)]
    state = ResampleState(t=t, cells=cells)
    return dataset.subset(state.index()), state


def blind_cost_weights(kind: BlindKind, stats: GroupStats, a: int, y: int, t: float) -> float:
    """Misclassification cost of cell (a, y) for blind cost-sensitive fits.

    Every cost is 1/2 at t = 0; tilted cells move in opposite directions
    across groups, shifting the minimizer's acceptance boundary without
    using the group id as a predictor.
    """
    if not isinstance(kind, BlindKind):
        raise DisparityError(f"expected a blind kind, got {kind!r}")
    return 0.5 + 0.5 * _blind_tilt(kind, stats, a, y, t)


def _blind_weight_values(
    kind: BlindKind,
    stats: GroupStats,
    x: np.ndarray,
    eta_a: ProbModel,
    eta_groups: ProbModel | None,
) -> np.ndarray:
    """Feature-level disparity weights for blind threshold rules."""
    ga = np.asarray(predict_proba(eta_a, x), dtype=float)
    if kind is BlindKind.DD_X:
        return ga / stats.p_group(1) - (1.0 - ga) / stats.p_group(0)
    n = len(np.atleast_2d(x))
    e1 = np.asarray(predict_proba(eta_groups, x, np.ones(n, dtype=int)), dtype=float)
    e0 = np.asarray(predict_proba(eta_groups, x, np.zeros(n, dtype=int)), dtype=float)
    if kind is BlindKind.DO_X:
        return e1 * ga / stats.p(1, 1) - e0 * (1.0 - ga) / stats.p(0, 1)
    if kind is BlindKind.PD_X:
        return (1.0 - e1) * ga / stats.p(1, 0) - (1.0 - e0) * (1.0 - ga) / stats.p(0, 0)
    raise DisparityError(f"unknown blind kind: {kind!r}")


class _CurveState:
    """Mutable companion of an empirical curve: warm model, resample, trace."""

    def __init__(self, dataset: LabeledDataset, config: FairFitConfig) -> None:
        self.dataset = dataset
        self.config = config
        self.stats = GroupStats.from_labels(dataset.a, dataset.y)
        self.master = np.random.SeedSequence(config.seed)
        self.calls = 0
        self.clamped = False
        self.model: ProbModel | None = None
        self.resample: ResampleState | None = None
        self.trace: list[dict] = []
        self.payload: dict[float, tuple] = {}
        self.fpir_models: dict[str, ProbModel | None] = {}
        self.score: np.ndarray | None = None
        self.wx: np.ndarray | None = None


def _fit_learner(state: _CurveState, data: LabeledDataset) -> ProbModel:
    cfg = state.config.learner
    if state.calls > 0 and state.config.refit_epochs is not None:
        cfg = replace(cfg, epochs=state.config.refit_epochs)
    init = state.model if (state.config.warm_start and state.calls > 0) else None
    if state.config.mode == MODE_FIT_BLIND:
        model = fit_logistic(data, cfg, init=init)
    else:
        model = fit_group_models(data, MODE_AWARE, cfg, init=init)
    state.model = model
    return model


def _model_decisions(state: _CurveState, model: ProbModel) -> np.ndarray:
    ds = state.dataset
    if state.config.mode == MODE_FIT_BLIND:
        p = predict_proba(model, ds.x)
    else:
        p = predict_proba(model, ds.x, ds.a)
    return (np.asarray(p, dtype=float) > 0.5).astype(float)


def _train_disparity(state: _CurveState, decisions: np.ndarray) -> float:
    ds = state.dataset
    return empirical_disparity_arrays(
        state.config.base_kind, state.stats, ds.a, ds.y.astype(float), decisions
    )


def _cost_table(
    kind: DisparityKind | BlindKind, stats: GroupStats, t: float
) -> dict[tuple[int, int], float]:
    if isinstance(kind, BlindKind):
        return {(a, y): blind_cost_weights(kind, stats, a, y, t) for a, y in _CELLS}
    return {(a, y): cost_weights(kind, stats, a, y, t) for a, y in _CELLS}


def _cells_json(values: Mapping[tuple[int, int], float | int]) -> dict[str, float | int]:
    return {f"{a}{y}": values[(a, y)] for a, y in _CELLS}


def _fuds_eval(state: _CurveState, t: float) -> float:
    props = fuds_proportions(state.stats, state.config.kind, t)
    targets = fuds_cell_counts(len(state.dataset), props)
    child = state.master.spawn(1)[0]
    data, state.resample = fuds_resample(
        state.dataset, targets, prev=state.resample, seed=child, t=t
    )
    model = _fit_learner(state, data)
    decisions = _model_decisions(state, model)
    d = _train_disparity(state, decisions)
    state.payload[t] = (model, targets)
    state.trace.append(
        {"call": state.calls, "t": t, "disparity": d, "cell_counts": _cells_json(targets)}
    )
    state.calls += 1
    return d


def _fcsc_eval(state: _CurveState, t: float) -> float:
    table = _cost_table(state.config.kind, state.stats, t)
    w = np.empty(len(state.dataset), dtype=float)
    for (a, y), c in table.items():
        w[state.dataset.cell_mask(a, y)] = c
    data = state.dataset.with_weights(state.dataset.weight * w)
    model = _fit_learner(state, data)
    decisions = _model_decisions(state, model)
    d = _train_disparity(state, decisions)
    state.payload[t] = (model, table)
    state.trace.append({"call": state.calls, "t": t, "disparity": d})
    state.calls += 1
    return d


def _fpir_prepare(state: _CurveState, model: ProbModel | None) -> None:
    ds = state.dataset
    cfg = state.config
    if cfg.mode == MODE_FIT_BLIND:
        if model is not None:
            raise DisparityError("blind plug-in rules fit their own regressions; pass model=None")
        eta_y = fit_logistic(ds, cfg.learner)
        eta_a = fit_group_models(ds, MODE_BLIND_A, cfg.learner)
        eta_groups = (
            None if cfg.kind is BlindKind.DD_X else fit_group_models(ds, MODE_AWARE, cfg.learner)
        )
        state.fpir_models = {"eta_y": eta_y, "eta_a": eta_a, "eta_groups": eta_groups}
        state.score = np.asarray(predict_proba(eta_y, ds.x), dtype=float)
        state.wx = _blind_weight_values(cfg.kind, state.stats, ds.x, eta_a, eta_groups)
        return
    if model is None:
        model = fit_group_models(ds, MODE_AWARE, cfg.learner)
    elif model.mode != MODE_AWARE:
        raise DisparityError(
            f"aware plug-in rule needs a group-aware model, got mode {model.mode!r}"
        )
    state.fpir_models = {"eta_groups": model}
    state.score = np.asarray(predict_proba(model, ds.x, ds.a), dtype=float)


def _fpir_eval(state: _CurveState, t: float) -> float:
    ds = state.dataset
    if state.config.mode == MODE_FIT_BLIND:
        decisions = (state.score > 0.5 + 0.5 * t * state.wx).astype(float)
    else:
        kind = state.config.kind
        thr = np.where(
            ds.a == 1,
            threshold(kind, state.stats, 1, t),
            threshold(kind, state.stats, 0, t),
        )
        decisions = (state.score > thr).astype(float)
    d = _train_disparity(state, decisions)
    state.trace.append({"call": state.calls, "t": t, "disparity": d})
    state.calls += 1
    return d


def _resample_feasible(state: _CurveState, t: float) -> bool:
    try:
        props = fuds_proportions(state.stats, state.config.kind, t)
    except DomainError:
        return False
    counts = fuds_cell_counts(len(state.dataset), props)
    return min(counts.values()) >= _MIN_CELL_ROWS


def _clamp_edge(state: _CurveState, outside: float) -> float:
    """Pull a domain endpoint inward until every resampled cell stays viable.

    Feasibility is monotone from 0 toward either endpoint (each cell's
    tilted mass is monotone in t), so a binary search from the always
    feasible baseline finds the boundary.
    """
    if _resample_feasible(state, outside):
        return outside
    good, bad = 0.0, outside
    for _ in range(60):
        mid = 0.5 * (good + bad)
        if _resample_feasible(state, mid):
            good = mid
        else:
            bad = mid
    return good


def _build_curve(
    dataset: LabeledDataset,
    config: FairFitConfig,
    method: str,
    model: ProbModel | None = None,
) -> tuple[DisparityCurve, _CurveState]:
    if method not in _METHODS:
        raise DisparityError(f"method must be one of {_METHODS}, got {method!r}")
    if method != "fpir" and model is not None:
        raise DisparityError(f"method {method!r} refits per evaluation; pass model=None")
    state = _CurveState(dataset, config)
    dom = natural_domain(config.base_kind, state.stats)
    name = f"{method}-{config.kind.value}"
    if method == "fuds":
        lo = _clamp_edge(state, dom[0])
        hi = _clamp_edge(state, dom[1])
        state.clamped = lo > dom[0] or hi < dom[1]

        def fn(t: float) -> float:
            return _fuds_eval(state, t)

        curve = DisparityCurve(fn=fn, t_lo=lo, t_hi=hi, name=name)
    elif method == "fcsc":

        def fn(t: float) -> float:
            return _fcsc_eval(state, t)

        curve = DisparityCurve.from_domain(fn, dom, name=name)
    else:
        _fpir_prepare(state, model)

        def fn(t: float) -> float:
            return _fpir_eval(state, t)

        curve = DisparityCurve.from_domain(fn, dom, name=name)
    return curve, state


def empirical_curve(
    dataset: LabeledDataset,
    config: FairFitConfig,
    method: str,
    model: ProbModel | None = None,
) -> DisparityCurve:
    """The disparity-versus-t curve a pipeline bisects, for audits and plots.

    Evaluations mutate hidden warm-start and resampling state, so exact
    values depend on call order; audit on a monotone grid for stable
    results.
    """
    return _build_curve(dataset, config, method, model=model)[0]


def _at_edge(result: SolveResult, curve: DisparityCurve, tol: float) -> bool:
    if result.t_star == 0.0:
        return False
    margin = max(4.0 * tol, 1e-6)
    return curve.t_hi - result.t_star <= margin or result.t_star - curve.t_lo <= margin


def _report(
    method: str,
    state: _CurveState,
    curve: DisparityCurve,
    result: SolveResult,
    classifier,
) -> dict:
    cfg = state.config
    edge = _at_edge(result, curve, cfg.tol)
    if edge:
        warnings.warn(
            f"empirical disparity root sits at the bracket edge (t_hat={result.t_star!r}, "
            f"bracket [{curve.t_lo!r}, {curve.t_hi!r}]); the budget may be unattainable "
            "on this sample",
            stacklevel=3,
        )
    report = {
        "method": method,
        "kind": cfg.kind.value,
        "mode": cfg.mode,
        "delta": float(cfg.delta),
        "tol": float(cfg.tol),
        "seed": cfg.seed,
        "n_train": len(state.dataset),
        "stats": _cells_json({cell: state.stats.p(*cell) for cell in _CELLS}),
        "bracket": {"lo": curve.t_lo, "hi": curve.t_hi, "clamped": state.clamped},
        "t_hat": result.t_star,
        "disparity_at_t_hat": result.d_at_t,
        "iterations": result.iterations,
        "evaluations": result.evaluations,
        "converged": result.converged,
        "exact": result.exact,
        "at_bracket_edge": edge,
        "train_metrics": evaluate(classifier, state.dataset, state.stats),
        "trace": list(state.trace),
    }
    if not isinstance(cfg.kind, BlindKind):
        report["thresholds"] = {
            "group0": threshold(cfg.kind, state.stats, 0, result.t_star),
            "group1": threshold(cfg.kind, state.stats, 1, result.t_star),
        }
    return report


def run_fuds(dataset: LabeledDataset, config: FairFitConfig) -> tuple[ProbModel, float, dict]:
    """Resampling pipeline: bisect t, refitting on tilted resamples.

    Returns the model fitted at the solved t (decisions threshold its
    predictions at 1/2), the solved t, and a report.  When delta already
    holds at t = 0 the baseline fit is returned without bisection.
    """
    curve, state = _build_curve(dataset, config, "fuds")
    result = solve_threshold(curve, config.delta, config.tol)
    model, targets = state.payload[result.t_star]
    report = _report("fuds", state, curve, result, model)
    report["cell_counts"] = _cells_json(targets)
    return model, result.t_star, report


def run_fcsc(dataset: LabeledDataset, config: FairFitConfig) -> tuple[ProbModel, float, dict]:
    """Cost-reweighting pipeline: bisect t, refitting with per-cell costs.

    Returns the model fitted at the solved t, the solved t, and a report
    that includes the final cost table.  At t = 0 every cost is 1/2 and
    the fit coincides with the unconstrained one.
    """
    curve, state = _build_curve(dataset, config, "fcsc")
    result = solve_threshold(curve, config.delta, config.tol)
    model, table = state.payload[result.t_star]
    report = _report("fcsc", state, curve, result, model)
    report["cost_table"] = _cells_json(table)
    return model, result.t_star, report


def run_fpir(
    dataset: LabeledDataset,
    config: FairFitConfig,
    model: ProbModel | None = None,
) -> tuple[FairClassifier, float, dict]:
    """Plug-in pipeline: fit regressions once, bisect decision thresholds.

    Aware runs accept a prefit group-aware model (fitted here when absent)
    and return a rule thresholding it at the solved per-group cutoffs.
    Blind runs fit label and group regressions from the same data and
    return a feature-thresholded rule.  No evaluation refits anything.
    """
    curve, state = _build_curve(dataset, config, "fpir", model=model)
    result = solve_threshold(curve, config.delta, config.tol)
    t_hat = result.t_star
    models = state.fpir_models
    if config.mode == MODE_FIT_BLIND:
        classifier = FairClassifier(
            kind=config.kind,
            t=t_hat,
            stats=state.stats,
            eta_y=models["eta_y"],
            eta_a=models["eta_a"],
            eta_groups=models["eta_groups"],
        )
    else:
        classifier = FairClassifier(
            kind=config.kind,
            t=t_hat,
            stats=state.stats,
            thresholds=(
                threshold(config.kind, state.stats, 0, t_hat),
                threshold(config.kind, state.stats, 1, t_hat),
            ),
            eta_groups=models["eta_groups"],
        )
    report = _report("fpir", state, curve, result, classifier)
    return classifier, t_hat, report


def _decision_values(classifier, test: LabeledDataset) -> np.ndarray:
    if isinstance(classifier, ProbModel):
        if classifier.mode == MODE_AWARE:
            p = predict_proba(classifier, test.x, test.a)
        else:
            p = predict_proba(classifier, test.x)
        f = (np.asarray(p, dtype=float) > 0.5).astype(float)
    elif isinstance(classifier, FairClassifier):
        f = classifier.decide(test.x, test.a)
    elif callable(classifier):
        f = np.asarray(classifier(test.x, test.a), dtype=float)
    else:
        raise DisparityError(f"cannot score classifier of type {type(classifier).__name__}")
    f = np.asarray(f, dtype=float)
    if f.shape != (len(test),):
        raise DisparityError(f"classifier returned shape {f.shape}, expected ({len(test)},)")
    if not np.all(np.isfinite(f)) or np.any((f < 0.0) | (f > 1.0)):
        raise DisparityError("decisions must lie in [0, 1]")
    return f


def evaluate(
    classifier,
    test: LabeledDataset,
    stats: GroupStats | None = None,
) -> dict[str, float | None]:
    """Accuracy and the three disparity gaps of a classifier on a test set.

    Rates are plug-in conditional frequencies of the test rows themselves;
    stats is accepted for interface symmetry and only type-checked.  A
    metric whose conditioning cell is empty comes back as None, not 0.
    Fractional decisions are treated as acceptance probabilities.
    """
    if stats is not None and not isinstance(stats, GroupStats):
        raise DisparityError(f"stats must be GroupStats or None, got {type(stats).__name__}")
    if len(test) == 0:
        raise EstimationError("empty test set: metrics undefined")
    f = _decision_values(classifier, test)
    y = test.y.astype(float)
    out: dict[str, float | None] = {
        "accuracy": float(np.mean(f * y + (1.0 - f) * (1.0 - y))),
        "dd": None,
        "do": None,
        "pd": None,
    }
    mask1 = test.a == 1
    if mask1.any() and not mask1.all():
        out["dd"] = float(np.mean(f[mask1]) - np.mean(f[~mask1]))
    c11, c01 = test.cell_mask(1, 1), test.cell_mask(0, 1)
    if c11.any() and c01.any():
        out["do"] = float(np.mean(f[c11]) - np.mean(f[c01]))
    c10, c00 = test.cell_mask(1, 0), test.cell_mask(0, 0)
    if c10.any() and c00.any():
        out["pd"] = float(np.mean(f[c10]) - np.mean(f[c00]))
    return out
