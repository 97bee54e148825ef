"""Confusion matrix, per-class recall, K sweeps and best-K selection."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .clustering import KMeansConfig
from .dataset import ZeroShotSplit
from .errors import (
    EmptyCurve,
    InvalidSpec,
    KTooLarge,
    LengthMismatch,
    NoTargetClassSamples,
    NoTrainClassSamples,
)
from .zsl import BoundaryRule, ClassPrediction, PredictedClass, predict_arrays, train_model

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, k: int) -> int:
    """Seed for the K-means run at a given K: ``splitmix64(splitmix64(seed) ^ k)``."""
    return splitmix64(splitmix64(master_seed & _MASK64) ^ (k & _MASK64))


@dataclass(frozen=True)
class ConfusionMatrix:
    t_train: int = 0  # train class predicted train
    f_target: int = 0  # train class predicted target
    f_train: int = 0  # target class predicted train
    t_target: int = 0  # target class predicted target

    def __post_init__(self):
        if min(self.t_train, self.f_target, self.f_train, self.t_target) < 0:
            raise InvalidSpec("confusion counts must be non-negative")

    @classmethod
    def from_arrays(cls, predicted_train, truth) -> "ConfusionMatrix":
        pred = np.asarray(predicted_train, dtype=bool)
        true = np.asarray(truth, dtype=bool)
        if pred.shape != true.shape:
            raise LengthMismatch(f"{pred.size} predictions for {true.size} truth flags")
        return cls(
            int(np.count_nonzero(pred & true)),
            int(np.count_nonzero(~pred & true)),
            int(np.count_nonzero(pred & ~true)),
            int(np.count_nonzero(~pred & ~true)),
        )


def confusion(predictions: Sequence[ClassPrediction], truth: Sequence[bool]) -> ConfusionMatrix:
    if len(predictions) != len(truth):
        raise LengthMismatch(f"{len(predictions)} predictions for {len(truth)} truth flags")
    pred = [p.klass is PredictedClass.TRAIN for p in predictions]
    return ConfusionMatrix.from_arrays(np.array(pred, dtype=bool), np.array(list(truth), dtype=bool))


def recall_train(cm: ConfusionMatrix) -> float:
    denom = cm.t_train + cm.f_target
    if denom == 0:
        raise NoTrainClassSamples("no train-class rows in the test set")
    return cm.t_train / denom


def recall_target(cm: ConfusionMatrix) -> float:
    denom = cm.t_target + cm.f_train
    if denom == 0:
        raise NoTargetClassSamples("no target-class rows in the test set")
    return cm.t_target / denom


@dataclass(frozen=True)
class SweepCurve:
    k_values: tuple[int, ...]
    recall_train: tuple[float, ...]
    recall_target: tuple[float, ...]
    dataset_name: str = ""
    train_label: str = ""
    target_label: str = ""
    seed: int = 0

    def __post_init__(self):
        if not len(self.k_values) == len(self.recall_train) == len(self.recall_target):
            raise LengthMismatch("curve vectors differ in length")

    def __len__(self) -> int:
        return len(self.k_values)


@dataclass(frozen=True)
class IntersectionResult:
    found: bool
    k: int | None = None
    recall_train_at_k: float | None = None
    recall_target_at_k: float | None = None


def evaluate_k(
    split: ZeroShotSplit,
    k: int,
    base_config: KMeansConfig,
    boundary_rule: BoundaryRule | str = BoundaryRule.INCLUSIVE,
    master_seed: int | None = None,
    radius_percentile: float | None = None,
) -> ConfusionMatrix:
    """Train at one K (seed derived from the master seed and K) and score the test set."""
    seed = split.seed if master_seed is None else master_seed
    config = replace(base_config, k=k, seed=derive_seed(seed, k))
    model = train_model(split.train_features, config, boundary_rule, radius_percentile=radius_percentile)
    is_train, _, _ = predict_arrays(model, split.test_features)
    return ConfusionMatrix.from_arrays(is_train, split.test_truth)


def sweep_k(
    split: ZeroShotSplit,
    k_values: Iterable[int],
    base_config: KMeansConfig | None = None,
    boundary_rule: BoundaryRule | str = BoundaryRule.INCLUSIVE,
    *,
    master_seed: int | None = None,
    radius_percentile: float | None = None,
    workers: int = 1,
) -> SweepCurve:
    """Recall of both classes for every K in ``k_values``.

    Each K gets its own model seeded by :func:`derive_seed`, so the curve does
    not depend on evaluation order and ``workers > 1`` (threads) yields the
    same result as a sequential run.
    """
    ks = [int(k) for k in k_values]
    if any(k < 1 for k in ks):
        raise InvalidSpec("K values must be positive")
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise InvalidSpec("K values must be strictly ascending")
    for k in ks:
        if k > split.n_train:
            raise KTooLarge(f"K={k} exceeds the {split.n_train} training rows")
    base = base_config or KMeansConfig(k=1)
    seed = split.seed if master_seed is None else master_seed

    def run(k: int) -> ConfusionMatrix:
        return evaluate_k(split, k, base, boundary_rule, seed, radius_percentile)

    if workers > 1 and len(ks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            matrices = list(pool.map(run, ks))
    else:
        matrices = [run(k) for k in ks]
    return SweepCurve(
        tuple(ks),
        tuple(recall_train(cm) for cm in matrices),
        tuple(recall_target(cm) for cm in matrices),
        split.dataset_name,
        split.train_label,
        split.target_label,
        seed,
    )


def k_range(start: int, stop: int, step: int = 1) -> list[int]:
    if start < 1 or step < 1:
        raise InvalidSpec("start and step must be positive")
    if start > stop:
        raise InvalidSpec(f"start ({start}) exceeds stop ({stop})")
    return list(range(start, stop + 1, step))


def extended_sweep(split: ZeroShotSplit, start: int, step: int, stop: int, **kwargs) -> SweepCurve:
    """Sweep ``start, start + step, ...`` up to ``stop`` (e.g. 250..850 by 50)."""
    return sweep_k(split, k_range(start, stop, step), **kwargs)


def find_intersection(curve: SweepCurve) -> IntersectionResult:
    """First K where the recall curves meet.

    The crossing is the first entry whose train recall is not above its
    target recall. Between that entry and its predecessor the one with the
    smaller gap wins; ties go to the smaller K.
    """
    if len(curve) == 0:
        raise EmptyCurve("cannot search an empty curve")
    diff = [a - b for a, b in zip(curve.recall_train, curve.recall_target)]
    hit = next((i for i, d in enumerate(diff) if d <= 0), None)
    if hit is None:
        return IntersectionResult(False)
    i = hit
    if hit > 0 and abs(diff[hit - 1]) <= abs(diff[hit]):
        i = hit - 1
    return IntersectionResult(True, curve.k_values[i], curve.recall_train[i], curve.recall_target[i])


def least_squares_slope(x: Sequence[float], y: Sequence[float]) -> float:
    xs = np.asarray(x, dtype=float)
    ys = np.asarray(y, dtype=float)
    if xs.size < 2:
        return 0.0
    xc = xs - xs.mean()
    return float((xc * (ys - ys.mean())).sum() / (xc * xc).sum())


def curve_to_tsv(curve: SweepCurve) -> str:
    lines = ["k\trecall_train\trecall_target"]
    for k, a, b in zip(curve.k_values, curve.recall_train, curve.recall_target):
        lines.append(f"{k}\t{a:.6f}\t{b:.6f}")
    return "\n".join(lines) + "\n"


def build_report(curve: SweepCurve, intersection: IntersectionResult, config: dict) -> dict:
    return {
        "dataset": curve.dataset_name,
        "train_label": curve.train_label,
        "target_label": curve.target_label,
        "seed": curve.seed,
        "config": config,
        "curve": {
            "k": list(curve.k_values),
            "recall_train": list(curve.recall_train),
            "recall_target": list(curve.recall_target),
        },
        "intersection": {
            "found": intersection.found,
            "k": intersection.k,
            "recall_train": intersection.recall_train_at_k,
            "recall_target": intersection.recall_target_at_k,
        },
    }


def report_to_json(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"
