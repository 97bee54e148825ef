"""Dataset ingestion (KEEL ``.dat`` and CSV), z-score scaling and the zero-shot split."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ArityMismatch,
    DimMismatch,
    EmptyInput,
    LengthMismatch,
    MalformedHeader,
    NonNumericFeature,
    NotBinary,
    UnknownLabel,
    UnknownLabelColumn,
)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dataset:
    """Feature matrix with one label string per row.

    ``label_names`` keeps labels in order of first appearance. ``feature_names``
    is only used when writing the dataset back out.
    """

    features: np.ndarray
    labels: tuple[str, ...]
    label_names: tuple[str, ...] = ()
    feature_names: tuple[str, ...] = ()
    label_column: str = "class"

    def __post_init__(self):
        feats = _frozen(self.features)
        if feats.ndim != 2:
            raise DimMismatch(f"features must be 2-D, got shape {feats.shape}")
        labels = tuple(str(x) for x in self.labels)
        if feats.shape[0] != len(labels):
            raise ArityMismatch(
                f"{feats.shape[0]} feature rows but {len(labels)} labels"
            )
        if not np.all(np.isfinite(feats)):
            raise NonNumericFeature("features contain non-finite values")
        names = tuple(dict.fromkeys(labels))
        if self.label_names:
            declared = tuple(self.label_names)
            missing = set(names) - set(declared)
            if missing:
                raise UnknownLabel(f"labels {sorted(missing)} not in label_names")
            names = declared
        fnames = tuple(self.feature_names) or tuple(
            f"x{j}" for j in range(feats.shape[1])
        )
        if len(fnames) != feats.shape[1]:
            raise DimMismatch(
                f"{len(fnames)} feature names for {feats.shape[1]} columns"
            )
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "label_names", names)
        object.__setattr__(self, "feature_names", fnames)

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def __len__(self) -> int:
        return self.features.shape[0]

    def class_counts(self) -> dict[str, int]:
        counts = {name: 0 for name in self.label_names}
        for lab in self.labels:
            counts[lab] += 1
        return counts

    def to_csv(self) -> str:
        """Serialize as CSV with the label in the last column.

        Floats use ``repr`` so that :func:`parse_csv` restores them bit for bit.
        """
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([*self.feature_names, self.label_column])
        for row, lab in zip(self.features.tolist(), self.labels):
            writer.writerow([repr(v) for v in row] + [lab])
        return buf.getvalue()


def _parse_float(token: str, lineno: int, column: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise NonNumericFeature(
            f"line {lineno}: feature {column!r} has non-numeric value {token!r}"
        ) from None
    if not np.isfinite(value):
        raise NonNumericFeature(
            f"line {lineno}: feature {column!r} has non-finite value {token!r}"
        )
    return value


def _split_names(rest: str) -> list[str]:
    return [tok.strip() for tok in rest.split(",") if tok.strip()]


def parse_keel(text: str) -> Dataset:
    """Parse a KEEL ``.dat`` file.

    The class column is the attribute named by ``@outputs`` (or the last
    attribute when there is no ``@outputs`` line). Every other attribute is a
    numeric feature.
    """
    attributes: list[str] = []
    outputs: list[str] = []
    lines = text.splitlines()
    data_start = None
    for idx, raw in enumerate(lines):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if not line.startswith("@"):
            raise MalformedHeader(f"line {idx + 1}: data row before @data")
        keyword, _, rest = line.partition(" ")
        keyword = keyword.lower()
        rest = rest.strip()
        if keyword == "@attribute":
            name = rest.split(None, 1)[0] if rest else ""
            # "@attribute Class{a,b}" has no space before the brace
            name = name.split("{", 1)[0].split("[", 1)[0]
            if not name:
                raise MalformedHeader(f"line {idx + 1}: @attribute without a name")
            attributes.append(name)
        elif keyword in ("@output", "@outputs"):
            outputs = _split_names(rest)
        elif keyword == "@data":
            data_start = idx + 1
            break
    if data_start is None:
        raise MalformedHeader("no @data line found")
    if not attributes:
        raise MalformedHeader("no @attribute declarations before @data")

    if outputs:
        if len(outputs) != 1 or outputs[0] not in attributes:
            raise MalformedHeader(f"@outputs must name one declared attribute, got {outputs}")
        label_idx = attributes.index(outputs[0])
    else:
        label_idx = len(attributes) - 1
    feature_cols = [j for j in range(len(attributes)) if j != label_idx]

    rows: list[list[float]] = []
    labels: list[str] = []
    for idx in range(data_start, len(lines)):
        line = lines[idx].strip()
        if not line or line.startswith("%"):
            continue
        lineno = idx + 1
        tokens = [tok.strip() for tok in line.split(",")]
        if len(tokens) != len(attributes):
            raise ArityMismatch(
                f"line {lineno}: expected {len(attributes)} values, got {len(tokens)}"
            )
        rows.append([_parse_float(tokens[j], lineno, attributes[j]) for j in feature_cols])
        labels.append(tokens[label_idx])

    features = np.array(rows, dtype=float).reshape(len(rows), len(feature_cols))
    return Dataset(
        features,
        tuple(labels),
        feature_names=tuple(attributes[j] for j in feature_cols),
        label_column=attributes[label_idx],
    )


def _read_csv(text: str, label_column: str | None):
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise MalformedHeader("CSV input has no header line") from None
    if label_column is not None and label_column not in header:
        raise UnknownLabelColumn(
            f"label column {label_column!r} not in header {header}"
        )
    label_idx = header.index(label_column) if label_column is not None else -1
    feature_cols = [j for j in range(len(header)) if j != label_idx]

    rows: list[list[float]] = []
    labels: list[str] = []
    for tokens in reader:
        lineno = reader.line_num
        if not tokens or all(not t.strip() for t in tokens):
            continue
        if len(tokens) != len(header):
            raise ArityMismatch(
                f"line {lineno}: expected {len(header)} values, got {len(tokens)}"
            )
        tokens = [t.strip() for t in tokens]
        rows.append([_parse_float(tokens[j], lineno, header[j]) for j in feature_cols])
        if label_idx >= 0:
            labels.append(tokens[label_idx])

    features = np.array(rows, dtype=float).reshape(len(rows), len(feature_cols))
    return features, labels, [header[j] for j in feature_cols]


def parse_csv(text: str, label_column: str) -> Dataset:
    """Parse comma-separated text whose first line is a header."""
    features, labels, names = _read_csv(text, label_column)
    return Dataset(features, tuple(labels), feature_names=tuple(names), label_column=label_column)


def parse_feature_csv(text: str, label_column: str | None = None) -> np.ndarray:
    """Feature matrix of a CSV file; ``label_column`` is dropped when present."""
    reader = csv.reader(io.StringIO(text, newline=""))
    header = [h.strip() for h in next(reader, [])]
    if label_column not in header:
        label_column = None
    return _read_csv(text, label_column)[0]


@dataclass(frozen=True)
class Scaler:
    """Per-feature mean and population standard deviation."""

    means: np.ndarray
    stds: np.ndarray

    def __post_init__(self):
        means, stds = _frozen(self.means), _frozen(self.stds)
        if means.shape != stds.shape or means.ndim != 1:
            raise DimMismatch("means and stds must be vectors of equal length")
        if np.any(stds < 0):
            raise ValueError("standard deviations must be non-negative")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "stds", stds)

    @property
    def dim(self) -> int:
        return self.means.shape[0]

    def transform(self, features) -> np.ndarray:
        return apply_scaler(self, features)


def fit_scaler(features) -> Scaler:
    X = np.asarray(features, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyInput("cannot fit a scaler on zero rows")
    means = X.mean(axis=0)
    stds = X.std(axis=0, ddof=0)
    # rounding in the mean can leave a tiny nonzero std on a constant column
    constant = X.min(axis=0) == X.max(axis=0)
    means[constant] = X[0, constant]
    stds[constant] = 0.0
    return Scaler(means, stds)


def apply_scaler(scaler: Scaler, features) -> np.ndarray:
    """Z-score transform; constant features (std 0) map to 0."""
    X = np.asarray(features, dtype=float)
    if X.ndim != 2 or X.shape[1] != scaler.dim:
        raise DimMismatch(
            f"expected {scaler.dim} feature columns, got shape {X.shape}"
        )
    safe = np.where(scaler.stds > 0, scaler.stds, 1.0)
    out = (X - scaler.means) / safe
    out[:, scaler.stds == 0] = 0.0
    return out


@dataclass(frozen=True)
class ZeroShotSplit:
    """Training rows of the train class plus a mixed test set.

    ``test_truth[i]`` is True when test row ``i`` belongs to the train class.
    """

    train_features: np.ndarray
    test_features: np.ndarray
    test_truth: np.ndarray
    train_label: str
    target_label: str
    seed: int
    dataset_name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "train_features", _frozen(self.train_features))
        object.__setattr__(self, "test_features", _frozen(self.test_features))
        truth = np.array(self.test_truth, dtype=bool)
        truth.setflags(write=False)
        object.__setattr__(self, "test_truth", truth)
        if self.test_features.shape[0] != truth.shape[0]:
            raise LengthMismatch("test_features and test_truth differ in length")

    @property
    def n_train(self) -> int:
        return self.train_features.shape[0]

    def scaled(self, scaler: Scaler) -> "ZeroShotSplit":
        return ZeroShotSplit(
            apply_scaler(scaler, self.train_features),
            apply_scaler(scaler, self.test_features),
            self.test_truth,
            self.train_label,
            self.target_label,
            self.seed,
            self.dataset_name,
        )


def _check_binary(dataset: Dataset, train_label: str) -> str:
    present = tuple(dict.fromkeys(dataset.labels))
    if len(present) != 2:
        raise NotBinary(
            f"zero-shot split needs exactly 2 labels, found {len(present)}: {list(present)}"
        )
    if train_label not in present:
        raise UnknownLabel(
            f"train label {train_label!r} not among {list(present)}"
        )
    return present[1] if present[0] == train_label else present[0]


def make_zero_shot_split(
    dataset: Dataset, train_label: str, seed: int, name: str = ""
) -> ZeroShotSplit:
    """Half of the shuffled train-class rows train; the rest plus every
    target-class row form the test set.

    The shuffle uses ``numpy.random.default_rng(seed)`` (PCG64). Test rows keep
    file order: remaining train-class rows first, then target-class rows.
    """
    target_label = _check_binary(dataset, str(train_label))
    labels = np.array(dataset.labels, dtype=object)
    train_rows = np.flatnonzero(labels == train_label)
    target_rows = np.flatnonzero(labels == target_label)

    perm = np.random.default_rng(seed).permutation(train_rows.shape[0])
    n_fit = train_rows.shape[0] // 2
    fit_rows = np.sort(train_rows[perm[:n_fit]])
    held_rows = np.sort(train_rows[perm[n_fit:]])

    X = dataset.features
    test_rows = np.concatenate([held_rows, target_rows])
    truth = np.concatenate(
        [np.ones(held_rows.shape[0], bool), np.zeros(target_rows.shape[0], bool)]
    )
    return ZeroShotSplit(
        X[fit_rows], X[test_rows], truth, str(train_label), target_label, seed, name
    )


def prepare_split(
    dataset: Dataset,
    train_label: str,
    seed: int,
    scale_on_train: bool = False,
    name: str = "",
) -> tuple[ZeroShotSplit, Scaler]:
    """Split and z-score normalize.

    By default the scaler is fit on the full dataset before splitting; with
    ``scale_on_train`` it is fit on the training rows only.
    """
    split = make_zero_shot_split(dataset, train_label, seed, name)
    if scale_on_train:
        if split.n_train == 0:
            raise EmptyInput("training half is empty; cannot fit a scaler")
        scaler = fit_scaler(split.train_features)
    else:
        scaler = fit_scaler(dataset.features)
    return split.scaled(scaler), scaler


def load_dataset(path: str, label_column: str = "class") -> Dataset:
    """Read a KEEL ``.dat`` file (by extension) or a CSV file."""
    with open(path, encoding="utf-8", newline="") as fh:
        text = fh.read()
    if str(path).lower().endswith(".dat"):
        return parse_keel(text)
    return parse_csv(text, label_column)

