"""Seeded K-means: k-means++ seeding followed by Lloyd iterations.

All distances are Euclidean. Squared distances are accumulated one feature
at a time, left to right, so every routine here (and the threshold and
prediction code built on it) produces bit-identical distances for the same
pair of points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimMismatch, EmptyInput, InvalidSpec, KTooLarge

# bounds the temporary (rows x centroids) block in sq_distances
_BLOCK_ENTRIES = 1 << 22


def _as_matrix(points, name: str = "points") -> np.ndarray:
    X = np.asarray(points, dtype=float)
    if X.ndim != 2:
        raise DimMismatch(f"{name} must be a 2-D array, got shape {X.shape}")
    return X


def sq_distances(points, centroids) -> np.ndarray:
    """Squared Euclidean distances, shape ``(n_points, n_centroids)``."""
    X = _as_matrix(points)
    C = _as_matrix(centroids, "centroids")
    if X.shape[1] != C.shape[1]:
        raise DimMismatch(f"points have dim {X.shape[1]}, centroids dim {C.shape[1]}")
    n, k = X.shape[0], C.shape[0]
    out = np.zeros((n, k))
    step = max(1, _BLOCK_ENTRIES // max(k, 1))
    for lo in range(0, n, step):
        block = out[lo:lo + step]
        for j in range(X.shape[1]):
            diff = X[lo:lo + step, j, None] - C[None, :, j]
            block += diff * diff
    return out


def paired_sq_distances(points, others) -> np.ndarray:
    """Row-wise squared distances between ``points[i]`` and ``others[i]``."""
    X = _as_matrix(points)
    Y = _as_matrix(others, "others")
    if X.shape != Y.shape:
        raise DimMismatch(f"shape {X.shape} does not match {Y.shape}")
    out = np.zeros(X.shape[0])
    for j in range(X.shape[1]):
        diff = X[:, j] - Y[:, j]
        out += diff * diff
    return out


def euclidean_distance(a, b) -> float:
    a = np.asarray(a, dtype=float).reshape(1, -1)
    b = np.asarray(b, dtype=float).reshape(1, -1)
    if a.shape != b.shape:
        raise DimMismatch(f"vectors of length {a.shape[1]} and {b.shape[1]}")
    return math.sqrt(paired_sq_distances(a, b)[0])


@dataclass(frozen=True)
class KMeansConfig:
    """K-means settings.

    ``tolerance`` bounds the largest centroid movement in one Lloyd step.
    ``n_local_trials`` is the number of D^2-sampled candidates tried per
    k-means++ step; ``None`` means ``2 + int(ln k)`` and ``1`` gives plain
    k-means++ sampling.
    """

    k: int
    max_iterations: int = 300
    tolerance: float = 1e-6
    seed: int = 0
    n_local_trials: int | None = None

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise InvalidSpec(f"k must be a positive integer, got {self.k}")
        if self.max_iterations < 1:
            raise InvalidSpec("max_iterations must be positive")
        if not self.tolerance >= 0:
            raise InvalidSpec("tolerance must be non-negative")
        if self.seed < 0:
            raise InvalidSpec("seed must be unsigned")
        if self.n_local_trials is not None and self.n_local_trials < 1:
            raise InvalidSpec("n_local_trials must be positive")


@dataclass(frozen=True)
class KMeansResult:
    centroids: np.ndarray
    assignments: np.ndarray
    sse: float
    iterations: int
    converged: bool = True
    sse_trace: tuple[float, ...] = field(default=(), repr=False)

    @property
    def k(self) -> int:
        return self.centroids.shape[0]


def kmeanspp_init(points, k: int, seed: int, n_local_trials: int | None = None) -> np.ndarray:
    """Choose ``k`` initial centroids among ``points`` by k-means++.

    The first centroid is uniform; each candidate for the next one is drawn
    with probability proportional to its squared distance to the nearest
    centroid chosen so far, and of the candidates drawn the one giving the
    lowest total squared distance wins. Once every point coincides with a
    chosen centroid the remaining slots are filled by cycling through the
    centroids already chosen.
    """
    X = _as_matrix(points)
    n = X.shape[0]
    if n == 0:
        raise EmptyInput("cannot initialize centroids from zero points")
    if k > n:
        raise KTooLarge(f"k={k} exceeds the number of points ({n})")
    if k < 1:
        raise InvalidSpec(f"k must be positive, got {k}")
    trials = n_local_trials if n_local_trials is not None else 2 + int(math.log(k))
    rng = np.random.default_rng(seed)

    chosen = [int(rng.integers(n))]
    closest = sq_distances(X, X[chosen])[:, 0]
    while len(chosen) < k:
        cum = np.cumsum(closest)
        total = cum[-1]
        if total <= 0.0:
            base = list(chosen)
            while len(chosen) < k:
                chosen.append(base[(len(chosen) - len(base)) % len(base)])
            break
        r = (1.0 - rng.random(trials)) * total
        cand = np.minimum(np.searchsorted(cum, r, side="left"), n - 1)
        cand_d = sq_distances(X, X[cand])
        if trials == 1:
            best = 0
        else:
            potential = np.minimum(closest[:, None], cand_d).sum(axis=0)
            best = int(np.argmin(potential))
        chosen.append(int(cand[best]))
        closest = np.minimum(closest, cand_d[:, best])
    return X[chosen].copy()


def assign_points(points, centroids) -> np.ndarray:
    """Index of the nearest centroid per point; ties go to the lower index."""
    C = _as_matrix(centroids, "centroids")
    if C.shape[0] == 0:
        raise EmptyInput("no centroids to assign to")
    return np.argmin(sq_distances(points, C), axis=1)


def _check_assignments(assignments, n: int, k: int) -> np.ndarray:
    labels = np.asarray(assignments)
    if labels.shape != (n,):
        raise DimMismatch(f"expected {n} assignments, got shape {labels.shape}")
    labels = labels.astype(np.intp)
    if n and (labels.min() < 0 or labels.max() >= k):
        raise InvalidSpec(f"assignment indices must lie in [0, {k})")
    return labels


def _means(X: np.ndarray, labels: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    counts = np.bincount(labels, minlength=k)
    sums = np.zeros((k, X.shape[1]))
    np.add.at(sums, labels, X)
    nonempty = counts > 0
    sums[nonempty] /= counts[nonempty, None]
    return sums, counts


def update_centroids(points, assignments, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Lloyd update step with empty-cluster repair.

    Each centroid becomes the mean of its members. An empty cluster takes the
    point farthest from its assigned centroid (drawn only from clusters that
    keep at least one member); that point is reassigned to it. Returns the new
    centroids and the possibly repaired assignments.
    """
    X = _as_matrix(points)
    labels = _check_assignments(assignments, X.shape[0], k).copy()
    centroids, counts = _means(X, labels, k)
    empty = np.flatnonzero(counts == 0)
    if empty.size == 0:
        return centroids, labels
    if X.shape[0] < k:
        raise KTooLarge(f"k={k} exceeds the number of points ({X.shape[0]})")

    dist = paired_sq_distances(X, centroids[labels])
    for j in empty:
        movable = counts[labels] > 1
        score = np.where(movable, dist, -1.0)
        p = int(np.argmax(score))
        counts[labels[p]] -= 1
        labels[p] = j
        counts[j] = 1
        dist[p] = 0.0
    centroids, _ = _means(X, labels, k)
    return centroids, labels


def kmeans_fit(points, config: KMeansConfig) -> KMeansResult:
    X = _as_matrix(points)
    n, k = X.shape[0], config.k
    if n == 0:
        raise EmptyInput("cannot cluster zero points")
    if k > n:
        raise KTooLarge(f"k={k} exceeds the number of training points ({n})")

    centroids = kmeanspp_init(X, k, config.seed, config.n_local_trials)
    trace = []
    converged = False
    iterations = 0
    labels = None
    for iterations in range(1, config.max_iterations + 1):
        labels = assign_points(X, centroids)
        new_centroids, labels = update_centroids(X, labels, k)
        shift = math.sqrt(paired_sq_distances(new_centroids, centroids).max())
        centroids = new_centroids
        trace.append(float(paired_sq_distances(X, centroids[labels]).sum()))
        if shift <= config.tolerance:
            converged = True
            break

    final = assign_points(X, centroids)
    if np.bincount(final, minlength=k).min() > 0:
        labels = final
    else:
        # only reachable with duplicated points; keep the repaired partition
        centroids, labels = update_centroids(X, final, k)
    sse = float(paired_sq_distances(X, centroids[labels]).sum())
    centroids.setflags(write=False)
    labels.setflags(write=False)
    return KMeansResult(centroids, labels, sse, iterations, converged, tuple(trace))
