"""Cluster-based zero-shot learning for binary multivariate data."""

from .clustering import KMeansConfig, KMeansResult, kmeans_fit
from .dataset import Dataset, Scaler, ZeroShotSplit, make_zero_shot_split, parse_csv, parse_keel
from .evaluation import ConfusionMatrix, SweepCurve, find_intersection, sweep_k
from .zsl import BoundaryRule, ZslModel, predict_batch, predict_point, train_model

__all__ = [
    "BoundaryRule",
    "ConfusionMatrix",
    "Dataset",
    "KMeansConfig",
    "KMeansResult",
    "Scaler",
    "SweepCurve",
    "ZeroShotSplit",
    "ZslModel",
    "find_intersection",
    "kmeans_fit",
    "make_zero_shot_split",
    "parse_csv",
    "parse_keel",
    "predict_batch",
    "predict_point",
    "sweep_k",
    "train_model",
]

__version__ = "0.1.0"
