"""Logistic confidence model over pose-candidate features.

The confidence of a pose candidate is sigmoid(bias + w . x) where x is the
standardized feature vector.  Training is plain full-batch gradient descent
on the (optionally L2-regularized) negative log likelihood — the problem is
tiny and convex, so a from-scratch optimizer keeps the package dependency-free
while staying exactly reproducible.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Mapping, Sequence

import numpy as np

from .coverage import CoverageParams
from .errors import (
    DimensionMismatch,
    EmptyDataset,
    InvalidConfig,
    SchemaError,
    SingleClassData,
)
from .features import (
    DEFAULT_FEATURE_SET,
    Standardizer,
    apply_standardizer,
    assemble,
    feature_matrix,
    fit_standardizer,
    parse_feature_set,
)

if TYPE_CHECKING:
    from .dataset_io import PoseRecord

MODEL_FORMAT_VERSION = 1

_MAX_HALVINGS = 60
_GRAD_INF_STOP = 1e-10


def logsig(m):
    """Numerically stable sigmoid; returns a float for scalar input.

    Both np.where branches are evaluated, so each one clips its exp
    argument to the sign range it owns — neither can overflow.
    """
    m = np.asarray(m, dtype=np.float64)
    exp_neg = np.exp(-np.clip(m, 0.0, None))  # exp(-m), valid where m >= 0
    exp_pos = np.exp(np.clip(m, None, 0.0))  # exp(m), valid where m < 0
    out = np.where(m >= 0.0, 1.0 / (1.0 + exp_neg), exp_pos / (1.0 + exp_pos))
    if out.ndim == 0:
        return float(out)
    return out


def _softplus(m: np.ndarray) -> np.ndarray:
    # log(1 + exp(m)) without overflow
    return np.maximum(m, 0.0) + np.log1p(np.exp(-np.abs(m)))


@dataclass(frozen=True)
class TrainConfig:
    """Gradient-descent settings.

    The defaults converge comfortably on datasets in the few-thousand-record
    range; tighten `tol` (and raise `max_epochs`) when parameter-level
    accuracy matters more than wall time.
    """

    learning_rate: float = 0.1
    max_epochs: int = 5000
    tol: float = 1e-8
    l2: float = 0.0
    seed: int = 0
    balance_classes: bool = False
    init: str = "zero"
    record_loss_history: bool = False

    def __post_init__(self):
        if not (self.learning_rate > 0 and math.isfinite(self.learning_rate)):
            raise InvalidConfig(f"learning_rate must be positive, got {self.learning_rate}")
        if self.max_epochs < 1:
            raise InvalidConfig(f"max_epochs must be >= 1, got {self.max_epochs}")
        if not (self.tol >= 0 and math.isfinite(self.tol)):
            raise InvalidConfig(f"tol must be a finite non-negative value, got {self.tol}")
        if not (self.l2 >= 0 and math.isfinite(self.l2)):
            raise InvalidConfig(f"l2 must be a finite non-negative value, got {self.l2}")
        if self.init not in ("zero", "random"):
            raise InvalidConfig(f"init must be 'zero' or 'random', got {self.init!r}")


@dataclass(frozen=True, eq=False)
class TrainData:
    """Standardized design matrix plus binary labels."""

    z: np.ndarray  # (n, k) standardized features
    y: np.ndarray  # (n,) labels in {0.0, 1.0}
    sample_weights: np.ndarray  # (n,) mean-one weights

    def __post_init__(self):
        z = np.asarray(self.z, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64).reshape(-1)
        w = np.asarray(self.sample_weights, dtype=np.float64).reshape(-1)
        if z.ndim != 2:
            raise DimensionMismatch(f"z must be (n, k), got shape {z.shape}")
        if z.shape[0] != y.shape[0] or z.shape[0] != w.shape[0]:
            raise DimensionMismatch(
                f"z has {z.shape[0]} rows but y has {y.shape[0]} and weights {w.shape[0]}"
            )
        if not np.all((y == 0.0) | (y == 1.0)):
            raise InvalidConfig("labels must be 0 or 1")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "sample_weights", w)

    def __len__(self) -> int:
        return self.z.shape[0]


@dataclass(frozen=True, eq=False)
class ConfidenceModel:
    feature_set: tuple[str, ...]
    weights: np.ndarray  # in standardized feature space
    bias: float
    standardizer: Standardizer
    training_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        feature_set = tuple(self.feature_set)
        if weights.shape[0] != len(feature_set):
            raise DimensionMismatch(
                f"{len(feature_set)} features but {weights.shape[0]} weights"
            )
        if len(self.standardizer) != len(feature_set):
            raise DimensionMismatch(
                f"{len(feature_set)} features but standardizer expects "
                f"{len(self.standardizer)}"
            )
        object.__setattr__(self, "feature_set", feature_set)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "bias", float(self.bias))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ConfidenceModel):
            return NotImplemented
        return (
            self.feature_set == other.feature_set
            and np.array_equal(self.weights, other.weights)
            and self.bias == other.bias
            and self.standardizer == other.standardizer
            and self.training_meta == other.training_meta
        )

    def coverage_params(self) -> CoverageParams:
        meta = self.training_meta.get("coverage_params", {})
        return CoverageParams(**meta) if meta else CoverageParams()


def predict(model: ConfidenceModel, features) -> np.ndarray | float:
    """Confidence in (0, 1) for raw (unstandardized) feature vector(s)."""
    z = apply_standardizer(model.standardizer, features)
    return logsig(z @ model.weights + model.bias)


def predict_record(model: ConfidenceModel, record: "PoseRecord") -> float:
    """Confidence for one record, using the coverage settings the model
    was trained with."""
    x = assemble(record, model.feature_set, model.coverage_params())
    return float(predict(model, x))


def nll_loss(
    weights: np.ndarray, bias: float, data: TrainData, l2: float = 0.0
) -> float:
    """Weighted-mean negative log likelihood plus (l2/2)*||w||^2.

    Uses the softplus identity -log sigmoid(m) = softplus(-m), which stays
    finite for any margin.
    """
    m = data.z @ weights + bias
    per_sample = data.y * _softplus(-m) + (1.0 - data.y) * _softplus(m)
    loss = float(np.mean(data.sample_weights * per_sample))
    return loss + 0.5 * l2 * float(weights @ weights)


def gradient(
    weights: np.ndarray, bias: float, data: TrainData, l2: float = 0.0
) -> tuple[np.ndarray, float]:
    """Exact gradient of nll_loss with respect to (weights, bias)."""
    m = data.z @ weights + bias
    residual = data.sample_weights * (np.asarray(logsig(m)) - data.y)
    grad_w = data.z.T @ residual / len(data) + l2 * weights
    grad_b = float(np.mean(residual))
    return grad_w, grad_b


def prepare_train_data(
    features: np.ndarray,
    labels: Sequence[bool] | np.ndarray,
    balance_classes: bool = False,
) -> tuple[TrainData, Standardizer]:
    """Standardize a raw (n, k) feature matrix and attach labels/weights."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2:
        raise DimensionMismatch(f"features must be (n, k), got shape {x.shape}")
    if x.shape[0] == 0:
        raise EmptyDataset("no training records")
    y = np.asarray(labels, dtype=np.float64).reshape(-1)
    if y.shape[0] != x.shape[0]:
        raise DimensionMismatch(f"{x.shape[0]} feature rows but {y.shape[0]} labels")
    n_pos = int(np.sum(y == 1.0))
    if n_pos == 0 or n_pos == len(y):
        raise SingleClassData(
            f"training labels are all {'positive' if n_pos else 'negative'}"
        )
    standardizer = fit_standardizer(x)
    z = apply_standardizer(standardizer, x)
    if balance_classes:
        # inverse-frequency weights, rescaled to mean one
        n_neg = len(y) - n_pos
        w = np.where(y == 1.0, len(y) / (2.0 * n_pos), len(y) / (2.0 * n_neg))
    else:
        w = np.ones_like(y)
    return TrainData(z, y, w), standardizer


@dataclass(frozen=True)
class TrainResult:
    model: ConfidenceModel
    final_loss: float
    epochs_run: int
    converged: bool
    loss_history: tuple[float, ...] = ()


def train_features(
    features: np.ndarray,
    labels: Sequence[bool] | np.ndarray,
    feature_set: Sequence[str],
    config: TrainConfig = TrainConfig(),
    params: CoverageParams = CoverageParams(),
) -> TrainResult:
    """Fit the logistic model on an already-assembled raw feature matrix.

    Deterministic for a given (features, labels, feature_set, config): the
    only randomness is the optional 'random' init, which draws from a
    generator seeded with config.seed.  Steps that would increase the loss
    are retried with a halved rate (backtracking), so the recorded loss
    sequence is non-increasing.

    `params` is recorded in the model metadata as the coverage settings the
    matrix was built with, so scoring reproduces the same features.
    """
    feature_set = parse_feature_set(feature_set)
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != len(feature_set):
        raise DimensionMismatch(
            f"feature matrix shape {features.shape} does not match "
            f"{len(feature_set)} features"
        )
    data, standardizer = prepare_train_data(features, labels, config.balance_classes)

    k = len(feature_set)
    if config.init == "zero":
        w = np.zeros(k)
        b = 0.0
    else:
        rng = np.random.default_rng(config.seed)
        w = rng.normal(0.0, 0.01, size=k)
        b = float(rng.normal(0.0, 0.01))

    loss = nll_loss(w, b, data, config.l2)
    history = [loss]
    epochs_run = 0
    converged = False
    for _ in range(config.max_epochs):
        grad_w, grad_b = gradient(w, b, data, config.l2)
        if max(np.max(np.abs(grad_w)), abs(grad_b)) < _GRAD_INF_STOP:
            converged = True
            break
        step = config.learning_rate
        for _ in range(_MAX_HALVINGS):
            w_new = w - step * grad_w
            b_new = b - step * grad_b
            loss_new = nll_loss(w_new, b_new, data, config.l2)
            if loss_new <= loss:
                break
            step *= 0.5
        else:
            converged = True  # no productive step exists at float precision
            break
        epochs_run += 1
        improvement = loss - loss_new
        w, b, loss = w_new, b_new, loss_new
        history.append(loss)
        if improvement < config.tol:
            converged = True
            break

    meta = {
        "n_train": len(data),
        "n_positive": int(np.sum(data.y == 1.0)),
        "epochs_run": epochs_run,
        "converged": converged,
        "final_loss": loss,
        "coverage_params": {
            "neighborhood_fraction": params.neighborhood_fraction,
            "min_half_extent": params.min_half_extent,
        },
        "config": {
            "learning_rate": config.learning_rate,
            "max_epochs": config.max_epochs,
            "tol": config.tol,
            "l2": config.l2,
            "seed": config.seed,
            "balance_classes": config.balance_classes,
            "init": config.init,
        },
    }
    model = ConfidenceModel(feature_set, w, b, standardizer, meta)
    return TrainResult(
        model=model,
        final_loss=loss,
        epochs_run=epochs_run,
        converged=converged,
        loss_history=tuple(history) if config.record_loss_history else (),
    )


def train(
    records: Sequence["PoseRecord"],
    labels: Sequence[bool] | np.ndarray,
    feature_set: Sequence[str] | None = None,
    config: TrainConfig = TrainConfig(),
    params: CoverageParams = CoverageParams(),
) -> TrainResult:
    """Assemble features from records, then fit (see train_features)."""
    feature_set = parse_feature_set(feature_set or DEFAULT_FEATURE_SET)
    if len(records) == 0:
        raise EmptyDataset("no training records")
    x = feature_matrix(records, feature_set, params)
    return train_features(x, labels, feature_set, config, params)


def raw_space_parameters(model: ConfidenceModel) -> tuple[np.ndarray, float]:
    """Equivalent (weights, bias) acting on unstandardized features.

    sigmoid(b + w.(x-mu)/sd) == sigmoid(b' + w'.x) with w' = w/sd and
    b' = b - sum(w*mu/sd).
    """
    s = model.standardizer
    w_raw = model.weights / s.stds
    b_raw = model.bias - float(np.sum(model.weights * s.means / s.stds))
    return w_raw, b_raw


# ---------------------------------------------------------------------------
# serialization


def to_json_dict(model: ConfidenceModel) -> dict:
    return {
        "format_version": MODEL_FORMAT_VERSION,
        "feature_set": list(model.feature_set),
        "weights": [float(v) for v in model.weights],
        "bias": model.bias,
        "standardizer": {
            "means": [float(v) for v in model.standardizer.means],
            "stds": [float(v) for v in model.standardizer.stds],
        },
        "training_meta": model.training_meta,
    }


def from_json_dict(obj: Mapping) -> ConfidenceModel:
    if not isinstance(obj, Mapping):
        raise SchemaError(message="model document must be a JSON object")
    version = obj.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise SchemaError(
            field="format_version",
            message=f"unsupported model format_version {version!r}",
        )
    try:
        feature_set = parse_feature_set(obj["feature_set"])
        standardizer = Standardizer(
            np.asarray(obj["standardizer"]["means"], dtype=np.float64),
            np.asarray(obj["standardizer"]["stds"], dtype=np.float64),
        )
        model = ConfidenceModel(
            feature_set=feature_set,
            weights=np.asarray(obj["weights"], dtype=np.float64),
            bias=float(obj["bias"]),
            standardizer=standardizer,
            training_meta=dict(obj.get("training_meta", {})),
        )
    except KeyError as exc:
        raise SchemaError(field=str(exc), message=f"model document missing {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise SchemaError(message=f"malformed model document: {exc}") from exc
    return model


def save_model(model: ConfidenceModel, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(to_json_dict(model), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path: str | os.PathLike) -> ConfidenceModel:
    with open(path, "r", encoding="utf-8") as fh:
        return from_json_dict(json.load(fh))
