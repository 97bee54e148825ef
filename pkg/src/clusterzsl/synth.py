"""Deterministic synthetic datasets.

Each class is drawn from its own ``numpy.random.Generator`` (PCG64) seeded by
``numpy.random.SeedSequence(seed).spawn(2)``; class 1 rows come first.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import InvalidSpec

INNER_LABEL = "1"
OUTER_LABEL = "2"


@dataclass(frozen=True)
class RingSpec:
    """Gaussian core (class 1) enclosed by a uniform-radius shell (class 2).

    In ``dim`` dimensions the core's norms concentrate near
    ``inner_sigma * sqrt(dim)``; the defaults keep the shell clear of that.
    """

    n_inner: int = 1000
    n_outer: int = 1000
    inner_sigma: float = 0.5
    annulus_min: float = 4.0
    annulus_max: float = 6.0
    dim: int = 20
    seed: int = 0

    def validate(self) -> None:
        if self.n_inner < 0 or self.n_outer < 0:
            raise InvalidSpec("class sizes must be non-negative")
        if self.dim < 2:
            raise InvalidSpec("ring data needs dim >= 2")
        if not self.inner_sigma > 0:
            raise InvalidSpec("inner_sigma must be positive")
        if not 0 < self.annulus_min < self.annulus_max:
            raise InvalidSpec("need 0 < annulus_min < annulus_max")
        if not self.annulus_min > 3 * self.inner_sigma:
            raise InvalidSpec("annulus_min must exceed 3 * inner_sigma")
        if self.seed < 0:
            raise InvalidSpec("seed must be unsigned")


@dataclass(frozen=True)
class TwoBlobSpec:
    """Two isotropic Gaussians whose means differ by ``separation`` along axis 0."""

    n_per_class: int = 500
    dim: int = 2
    separation: float = 3.0
    sigma: float = 1.0
    seed: int = 0

    def validate(self) -> None:
        if self.n_per_class < 0:
            raise InvalidSpec("n_per_class must be non-negative")
        if self.dim < 1:
            raise InvalidSpec("dim must be positive")
        if not self.separation >= 0:
            raise InvalidSpec("separation must be non-negative")
        if not self.sigma > 0:
            raise InvalidSpec("sigma must be positive")
        if self.seed < 0:
            raise InvalidSpec("seed must be unsigned")


def _class_rngs(seed: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(2)]


def _dataset(a: np.ndarray, b: np.ndarray, dim: int) -> Dataset:
    features = np.vstack([a, b]).reshape(-1, dim)
    labels = (INNER_LABEL,) * a.shape[0] + (OUTER_LABEL,) * b.shape[0]
    return Dataset(features, labels, label_names=(INNER_LABEL, OUTER_LABEL))


def gen_ring(spec: RingSpec = RingSpec()) -> Dataset:
    spec.validate()
    inner_rng, outer_rng = _class_rngs(spec.seed)
    inner = inner_rng.normal(0.0, spec.inner_sigma, size=(spec.n_inner, spec.dim))
    directions = outer_rng.standard_normal((spec.n_outer, spec.dim))
    norms = np.linalg.norm(directions, axis=1, keepdims=True)
    # a zero draw has probability 0 but would divide by zero
    norms[norms == 0] = 1.0
    radii = outer_rng.uniform(spec.annulus_min, spec.annulus_max, size=(spec.n_outer, 1))
    outer = directions / norms * radii
    return _dataset(inner, outer, spec.dim)


def gen_two_blobs(spec: TwoBlobSpec = TwoBlobSpec()) -> Dataset:
    spec.validate()
    rng_a, rng_b = _class_rngs(spec.seed)
    shift = np.zeros(spec.dim)
    shift[0] = spec.separation / 2.0
    a = rng_a.normal(0.0, spec.sigma, size=(spec.n_per_class, spec.dim)) - shift
    b = rng_b.normal(0.0, spec.sigma, size=(spec.n_per_class, spec.dim)) + shift
    return _dataset(a, b, spec.dim)


_GENERATORS = {
    "ring": (RingSpec, gen_ring),
    "blobs": (TwoBlobSpec, gen_two_blobs),
    "two_blobs": (TwoBlobSpec, gen_two_blobs),
}


def parse_synth_spec(text: str, default_seed: int | None = None):
    """Parse ``kind:key=value,...`` (e.g. ``ring:dim=8,seed=3``) into a spec object.

    ``default_seed`` fills in the seed when the string does not set one.
    """
    kind, _, params = text.partition(":")
    kind = kind.strip().lower()
    if kind not in _GENERATORS:
        raise InvalidSpec(f"unknown generator {kind!r}; choose from {sorted(_GENERATORS)}")
    spec_cls, _ = _GENERATORS[kind]
    types = {f.name: f.type for f in dataclasses.fields(spec_cls)}
    values: dict[str, object] = {}
    for item in filter(None, (p.strip() for p in params.split(","))):
        key, sep, raw = item.partition("=")
        key = key.strip()
        if not sep or key not in types:
            raise InvalidSpec(f"bad parameter {item!r} for {kind}; known: {sorted(types)}")
        try:
            values[key] = int(raw) if types[key] == "int" else float(raw)
        except ValueError:
            raise InvalidSpec(f"parameter {key} has invalid value {raw!r}") from None
    if "seed" not in values and default_seed is not None:
        values["seed"] = default_seed
    spec = spec_cls(**values)
    spec.validate()
    return spec


def generate(spec) -> Dataset:
    if isinstance(spec, RingSpec):
        return gen_ring(spec)
    if isinstance(spec, TwoBlobSpec):
        return gen_two_blobs(spec)
    raise InvalidSpec(f"unsupported spec type {type(spec).__name__}")
