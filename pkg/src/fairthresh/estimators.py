"""Probability estimators: weighted logistic regression on labeled rows.

The fairness pipelines plug fitted regression functions into thresholding
rules, and their cost-sensitive variant reweighs individual rows, so the
learner here is a deterministic weighted logistic regression trained by
full-batch gradient descent. Features are standardized internally and an
intercept is always included; fits can be warm-started from a previous
parameter vector, which keeps repeated refits inside a bisection loop
cheap.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

__all__ = [
    "FitError",
    "LabeledDataset",
    "LogisticConfig",
    "LogisticParams",
    "ProbModel",
    "fit_logistic",
    "fit_group_models",
    "predict_proba",
    "nll",
    "nll_gradient",
    "save_prob_model",
    "load_prob_model",
    "MODE_AWARE",
    "MODE_BLIND_Y",
    "MODE_BLIND_A",
]


class FitError(RuntimeError):
    """Raised when a fit cannot proceed or diverges."""


@dataclass(frozen=True)
class LabeledDataset:
    """Rows of (feature vector, group id, binary label, sample weight)."""

    x: np.ndarray
    a: np.ndarray
    y: np.ndarray
    weight: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 2:
            raise FitError(f"features must be a 2-D array, got shape {x.shape}")
        a = np.asarray(self.a, dtype=int)
        y = np.asarray(self.y, dtype=int)
        w = (
            np.ones(len(x), dtype=float)
            if self.weight is None
            else np.asarray(self.weight, dtype=float)
        )
        if not (len(x) == len(a) == len(y) == len(w)):
            raise FitError("feature, group, label, and weight lengths differ")
        if not np.isfinite(x).all():
            raise FitError("features must be finite")
        if np.any((y != 0) & (y != 1)):
            raise FitError("labels must be 0 or 1")
        if np.any(w < 0) or not np.isfinite(w).all():
            raise FitError("weights must be finite and nonnegative")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "weight", w)

    def __len__(self) -> int:
        return len(self.y)

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    def cell_mask(self, a: int, y: int) -> np.ndarray:
        return (self.a == a) & (self.y == y)

    def cell_count(self, a: int, y: int) -> int:
        return int(self.cell_mask(a, y).sum())

    def subset(self, index: np.ndarray) -> "LabeledDataset":
        return LabeledDataset(
            x=self.x[index], a=self.a[index], y=self.y[index], weight=self.weight[index]
        )

    def with_weights(self, weight: np.ndarray) -> "LabeledDataset":
        return LabeledDataset(x=self.x, a=self.a, y=self.y, weight=weight)


@dataclass(frozen=True)
class LogisticConfig:
    """Full-batch gradient-descent settings.

    The seed is accepted for interface stability; the deterministic zero
    initialization never consumes it. With track_loss the fitted model
    records the objective value after each epoch.
    """

    learning_rate: float = 0.25
    epochs: int = 600
    l2: float = 1e-6
    seed: int = 0
    track_loss: bool = False


@dataclass(frozen=True)
class LogisticParams:
    """Coefficients in the standardized frame plus the standardization."""

    intercept: float
    coef: np.ndarray
    mean: np.ndarray
    scale: np.ndarray

    def raw(self) -> tuple[float, np.ndarray]:
        """Equivalent (intercept, coefficients) acting on raw features."""
        w = self.coef / self.scale
        return self.intercept - float(w @ self.mean), w

    def scores(self, x: np.ndarray) -> np.ndarray:
        xs = (np.atleast_2d(np.asarray(x, dtype=float)) - self.mean) / self.scale
        return self.intercept + xs @ self.coef

    def to_dict(self) -> dict:
        return {
            "intercept": self.intercept,
            "coef": list(self.coef),
            "mean": list(self.mean),
            "scale": list(self.scale),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LogisticParams":
        try:
            return cls(
                intercept=float(data["intercept"]),
                coef=np.asarray(data["coef"], dtype=float),
                mean=np.asarray(data["mean"], dtype=float),
                scale=np.asarray(data["scale"], dtype=float),
            )
        except (KeyError, TypeError) as exc:
            raise FitError(f"malformed parameter document: {exc}") from exc


MODE_AWARE = "aware"
MODE_BLIND_Y = "blind_y"
MODE_BLIND_A = "blind_a"


@dataclass(frozen=True)
class ProbModel:
    """A fitted regression function.

    ``aware`` holds one parameter set per group and predicts P(Y=1 | x, a);
    ``blind_y`` predicts P(Y=1 | x) and ``blind_a`` predicts P(A=1 | x),
    both ignoring the group at prediction time. history carries per-epoch
    objective values when the fit tracked them (single-fit modes only).
    """

    mode: str
    params: Mapping[int, LogisticParams] | LogisticParams
    history: tuple[float, ...] | None = None

    def group_params(self, a: int) -> LogisticParams:
        if self.mode != MODE_AWARE:
            raise FitError(f"model mode {self.mode!r} has no per-group parameters")
        try:
            return self.params[a]  # type: ignore[index]
        except KeyError:
            raise FitError(f"no parameters fitted for group {a}") from None

    def single_params(self) -> LogisticParams:
        if not isinstance(self.params, LogisticParams):
            raise FitError(f"model mode {self.mode!r} has per-group parameters")
        return self.params

    def to_dict(self) -> dict:
        if self.mode == MODE_AWARE:
            payload = {"groups": {str(a): p.to_dict() for a, p in sorted(self.params.items())}}
        else:
            payload = {"params": self.single_params().to_dict()}
        return {"mode": self.mode, **payload}

    @classmethod
    def from_dict(cls, data: dict) -> "ProbModel":
        try:
            mode = data["mode"]
            if mode == MODE_AWARE:
                groups = {
                    int(a): LogisticParams.from_dict(p) for a, p in data["groups"].items()
                }
                return cls(mode=mode, params=groups)
            if mode in (MODE_BLIND_Y, MODE_BLIND_A):
                return cls(mode=mode, params=LogisticParams.from_dict(data["params"]))
        except (KeyError, TypeError, AttributeError) as exc:
            raise FitError(f"malformed model document: {exc}") from exc
        raise FitError(f"unknown estimator mode {mode!r}")


def save_prob_model(model: ProbModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model.to_dict(), indent=2, sort_keys=True) + "\n")


def load_prob_model(path: str | Path) -> ProbModel:
    return ProbModel.from_dict(json.loads(Path(path).read_text()))


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _standardize(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = x.mean(axis=0)
    scale = x.std(axis=0)
    scale = np.where(scale > 0, scale, 1.0)
    return mean, scale


def _grad_terms(
    xs: np.ndarray,
    target: np.ndarray,
    wn: np.ndarray,
    b: float,
    coef: np.ndarray,
    l2: float,
) -> tuple[float, np.ndarray]:
    """Gradient of the weight-normalized NLL plus l2, in the xs frame."""
    p = _sigmoid(b + xs @ coef)
    resid = wn * (p - target)
    return float(resid.sum()), xs.T @ resid + l2 * coef


def nll(
    dataset: LabeledDataset, params: LogisticParams, target: np.ndarray | None = None, l2: float = 0.0
) -> float:
    """Weight-mean negative log-likelihood plus the l2 penalty.

    target defaults to the labels; pass dataset.a to score a group model.
    """
    t = dataset.y if target is None else np.asarray(target, dtype=float)
    wn = dataset.weight / float(dataset.weight.sum())
    z = np.asarray(params.scores(dataset.x))
    per_row = np.logaddexp(0.0, z) - t * z
    return float(wn @ per_row + 0.5 * l2 * float(params.coef @ params.coef))


def nll_gradient(
    dataset: LabeledDataset, params: LogisticParams, target: np.ndarray | None = None, l2: float = 0.0
) -> tuple[float, np.ndarray]:
    """Gradient of nll with respect to (intercept, coef) in params' frame."""
    t = dataset.y if target is None else np.asarray(target, dtype=float)
    wn = dataset.weight / float(dataset.weight.sum())
    xs = (dataset.x - params.mean) / params.scale
    return _grad_terms(xs, t.astype(float), wn, params.intercept, params.coef, l2)


def _fit_params(
    x: np.ndarray,
    target: np.ndarray,
    weight: np.ndarray,
    config: LogisticConfig,
    init: LogisticParams | None = None,
) -> tuple[LogisticParams, tuple[float, ...] | None]:
    wsum = float(weight.sum())
    if wsum <= 0:
        raise FitError("total sample weight must be positive")
    mean, scale = _standardize(x)
    xs = (x - mean) / scale
    wn = weight / wsum

    if init is None:
        b = 0.0
        coef = np.zeros(x.shape[1])
    else:
        # Carry the previous fit over in raw-feature space so warm starts
        # survive a change of standardization frame.
        b_raw, w_raw = init.raw()
        coef = w_raw * scale
        b = b_raw + float(w_raw @ mean)

    t = target.astype(float)
    history: list[float] | None = [] if config.track_loss else None
    for _ in range(config.epochs):
        grad_b, grad_w = _grad_terms(xs, t, wn, b, coef, config.l2)
        b -= config.learning_rate * grad_b
        coef -= config.learning_rate * grad_w
        if not (np.isfinite(b) and np.isfinite(coef).all()):
            raise FitError(
                "fit diverged to non-finite coefficients; use a smaller learning_rate"
            )
        if history is not None:
            z = b + xs @ coef
            loss = float(wn @ (np.logaddexp(0.0, z) - t * z))
            history.append(loss + 0.5 * config.l2 * float(coef @ coef))
    params = LogisticParams(intercept=b, coef=coef, mean=mean, scale=scale)
    return params, None if history is None else tuple(history)


def _single_init(init: ProbModel | None) -> LogisticParams | None:
    if init is not None and isinstance(init.params, LogisticParams):
        return init.params
    return None


def fit_logistic(
    dataset: LabeledDataset,
    config: LogisticConfig = LogisticConfig(),
    init: ProbModel | None = None,
) -> ProbModel:
    """Weighted logistic regression of the label on the features."""
    if len(dataset) == 0:
        raise FitError("cannot fit on an empty dataset")
    params, history = _fit_params(dataset.x, dataset.y, dataset.weight, config, _single_init(init))
    return ProbModel(mode=MODE_BLIND_Y, params=params, history=history)


def fit_group_models(
    dataset: LabeledDataset,
    mode: str = MODE_AWARE,
    config: LogisticConfig = LogisticConfig(),
    init: ProbModel | None = None,
) -> ProbModel:
    """Fit the regression function a pipeline needs.

    ``aware`` fits one logistic model per group for P(Y=1 | x, a) and needs
    every (a, y) cell populated; ``blind_y`` fits P(Y=1 | x) on all rows;
    ``blind_a`` fits P(A=1 | x) with the group id as the target.
    """
    if len(dataset) == 0:
        raise FitError("cannot fit on an empty dataset")
    if mode == MODE_AWARE:
        for a in (0, 1):
            for y in (0, 1):
                if dataset.cell_count(a, y) == 0:
                    raise FitError(f"group-aware fit needs rows in cell (a={a}, y={y})")
        per_group: dict[int, LogisticParams] = {}
        for a in (0, 1):
            pick = dataset.a == a
            prev = None
            if init is not None and init.mode == MODE_AWARE:
                prev = init.group_params(a)
            per_group[a], _ = _fit_params(
                dataset.x[pick], dataset.y[pick], dataset.weight[pick], config, prev
            )
        return ProbModel(mode=MODE_AWARE, params=per_group)
    if mode == MODE_BLIND_Y:
        for y in (0, 1):
            if not (dataset.y == y).any():
                raise FitError(f"label regression needs rows with y={y}")
        return fit_logistic(dataset, config, init)
    if mode == MODE_BLIND_A:
        for a in (0, 1):
            if not (dataset.a == a).any():
                raise FitError(f"group regression needs rows with a={a}")
        params, history = _fit_params(
            dataset.x, dataset.a.astype(int), dataset.weight, config, _single_init(init)
        )
        return ProbModel(mode=MODE_BLIND_A, params=params, history=history)
    raise FitError(f"unknown estimator mode {mode!r}")


def predict_proba(
    model: ProbModel, x: np.ndarray, a: int | np.ndarray | None = None
) -> np.ndarray | float:
    """Predicted probability in (0, 1) for each row of x."""
    x2 = np.atleast_2d(np.asarray(x, dtype=float))
    if model.mode == MODE_AWARE:
        if a is None:
            raise FitError("group-aware model needs the group id to predict")
        a_arr = np.broadcast_to(np.asarray(a, dtype=int), (len(x2),))
        z = np.empty(len(x2))
        for g in np.unique(a_arr):
            params = model.group_params(int(g))
            pick = a_arr == g
            z[pick] = params.scores(x2[pick])
    else:
        z = np.asarray(model.single_params().scores(x2))
    p = np.clip(_sigmoid(z), 1e-12, 1.0 - 1e-12)
    return p if np.asarray(x).ndim > 1 else float(p[0])
