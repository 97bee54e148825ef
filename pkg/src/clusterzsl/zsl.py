"""Cluster-based zero-shot classifier.

Training clusters the train-class data and records each cluster's radius
(the largest member-to-centroid distance). A point belongs to the train
class when it lies within the radius of its nearest centroid; otherwise it
is assigned to the unseen target class.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import numpy as np

from .clustering import (
    KMeansConfig,
    kmeans_fit,
    paired_sq_distances,
    sq_distances,
)
from .dataset import Scaler, apply_scaler
from .errors import DimMismatch, EmptyCluster, InvalidSpec, ModelFormatError

MODEL_FORMAT = "clusterzsl-model"
MODEL_VERSION = 1


class BoundaryRule(str, enum.Enum):
    INCLUSIVE = "inclusive"  # distance <= radius belongs
    STRICT = "strict"  # distance < radius belongs


class PredictedClass(str, enum.Enum):
    TRAIN = "train"
    TARGET = "target"


@dataclass(frozen=True)
class ClassPrediction:
    klass: PredictedClass
    nearest_cluster: int
    distance: float


@dataclass(frozen=True)
class ZslModel:
    centroids: np.ndarray
    thresholds: np.ndarray
    scaler: Scaler | None = None
    boundary_rule: BoundaryRule = BoundaryRule.INCLUSIVE
    radius_percentile: float | None = None

    def __post_init__(self):
        C = np.array(self.centroids, dtype=float)
        t = np.array(self.thresholds, dtype=float)
        if C.ndim != 2 or C.shape[0] == 0:
            raise DimMismatch(f"centroids must be a non-empty matrix, got shape {C.shape}")
        if t.shape != (C.shape[0],):
            raise DimMismatch(f"{t.shape[0] if t.ndim else 0} thresholds for {C.shape[0]} centroids")
        if np.any(t < 0) or not np.all(np.isfinite(t)):
            raise InvalidSpec("thresholds must be finite and non-negative")
        if self.scaler is not None and self.scaler.dim != C.shape[1]:
            raise DimMismatch("scaler dimension does not match centroids")
        C.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "centroids", C)
        object.__setattr__(self, "thresholds", t)
        object.__setattr__(self, "boundary_rule", BoundaryRule(self.boundary_rule))

    @property
    def k(self) -> int:
        return self.centroids.shape[0]

    @property
    def dim(self) -> int:
        return self.centroids.shape[1]

    def normalize(self, raw_points) -> np.ndarray:
        """Apply the stored scaler (identity when the model has none)."""
        X = np.asarray(raw_points, dtype=float)
        if self.scaler is None:
            return X
        return apply_scaler(self.scaler, X)


def compute_thresholds(points, centroids, assignments, percentile: float | None = None) -> np.ndarray:
    """Per-cluster radius: the largest distance from a member to its centroid.

    With ``percentile`` set, the given percentile (0-100, linear
    interpolation) of member distances is used instead of the maximum.
    """
    X = np.asarray(points, dtype=float)
    C = np.asarray(centroids, dtype=float)
    labels = np.asarray(assignments, dtype=np.intp)
    if X.ndim != 2 or C.ndim != 2 or X.shape[1] != C.shape[1]:
        raise DimMismatch("points and centroids must be matrices of equal width")
    if labels.shape != (X.shape[0],):
        raise DimMismatch("one assignment per point is required")
    k = C.shape[0]
    counts = np.bincount(labels, minlength=k) if labels.size else np.zeros(k, int)
    if labels.size and (labels.min() < 0 or labels.max() >= k):
        raise InvalidSpec(f"assignment indices must lie in [0, {k})")
    if np.any(counts == 0):
        raise EmptyCluster(f"clusters {np.flatnonzero(counts == 0).tolist()} have no members")

    dist = np.sqrt(paired_sq_distances(X, C[labels]))
    if percentile is None:
        out = np.zeros(k)
        np.maximum.at(out, labels, dist)
        return out
    if not 0 <= percentile <= 100:
        raise InvalidSpec(f"percentile must lie in [0, 100], got {percentile}")
    order = np.argsort(labels, kind="stable")
    groups = np.split(dist[order], np.cumsum(counts)[:-1])
    return np.array([np.percentile(g, percentile) for g in groups])


def train_model(
    train_points,
    config: KMeansConfig,
    boundary_rule: BoundaryRule | str = BoundaryRule.INCLUSIVE,
    scaler: Scaler | None = None,
    radius_percentile: float | None = None,
) -> ZslModel:
    """Cluster the train-class points and derive one radius per cluster.

    ``train_points`` must already be in the model's feature space; ``scaler``
    is only stored so that raw points can be normalized later.
    """
    X = np.asarray(train_points, dtype=float)
    fit = kmeans_fit(X, config)
    thresholds = compute_thresholds(X, fit.centroids, fit.assignments, radius_percentile)
    return ZslModel(fit.centroids, thresholds, scaler, BoundaryRule(boundary_rule), radius_percentile)


def predict_arrays(model: ZslModel, points) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized prediction.

    Returns ``(is_train, nearest_cluster, distance)`` arrays.
    """
    X = np.asarray(points, dtype=float)
    if X.ndim == 2 and X.shape[0] == 0:
        return np.zeros(0, bool), np.zeros(0, np.intp), np.zeros(0)
    if X.ndim != 2 or X.shape[1] != model.dim:
        raise DimMismatch(f"expected points of dim {model.dim}, got shape {X.shape}")
    d2 = sq_distances(X, model.centroids)
    nearest = np.argmin(d2, axis=1)
    dist = np.sqrt(d2[np.arange(X.shape[0]), nearest])
    radius = model.thresholds[nearest]
    if model.boundary_rule is BoundaryRule.INCLUSIVE:
        is_train = dist <= radius
    else:
        is_train = dist < radius
    return is_train, nearest, dist


def predict_batch(model: ZslModel, points) -> list[ClassPrediction]:
    is_train, nearest, dist = predict_arrays(model, points)
    return [
        ClassPrediction(PredictedClass.TRAIN if t else PredictedClass.TARGET, int(j), float(d))
        for t, j, d in zip(is_train, nearest, dist)
    ]


def predict_point(model: ZslModel, point) -> ClassPrediction:
    x = np.asarray(point, dtype=float)
    if x.ndim != 1:
        raise DimMismatch(f"a single point must be a vector, got shape {x.shape}")
    return predict_batch(model, x.reshape(1, -1))[0]


def model_to_dict(model: ZslModel) -> dict:
    scaler = None
    if model.scaler is not None:
        scaler = {"means": model.scaler.means.tolist(), "stds": model.scaler.stds.tolist()}
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "k": model.k,
        "dim": model.dim,
        "boundary_rule": model.boundary_rule.value,
        "radius_percentile": model.radius_percentile,
        "centroids": model.centroids.tolist(),
        "thresholds": model.thresholds.tolist(),
        "scaler": scaler,
    }


def model_from_dict(data: dict) -> ZslModel:
    if not isinstance(data, dict) or data.get("format") != MODEL_FORMAT:
        raise ModelFormatError("not a clusterzsl model file")
    if data.get("version") != MODEL_VERSION:
        raise ModelFormatError(f"unsupported model version {data.get('version')!r}")
    try:
        k, dim = int(data["k"]), int(data["dim"])
        centroids = np.array(data["centroids"], dtype=float).reshape(k, dim)
        thresholds = np.array(data["thresholds"], dtype=float)
        scaler = None
        if data.get("scaler") is not None:
            scaler = Scaler(data["scaler"]["means"], data["scaler"]["stds"])
        return ZslModel(
            centroids,
            thresholds,
            scaler,
            BoundaryRule(data["boundary_rule"]),
            data.get("radius_percentile"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"invalid model file: {exc}") from None


def dumps_model(model: ZslModel) -> str:
    # json writes floats with repr(), the shortest round-tripping form
    return json.dumps(model_to_dict(model), indent=2) + "\n"


def loads_model(text: str) -> ZslModel:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"model file is not valid JSON: {exc}") from None
    return model_from_dict(data)

