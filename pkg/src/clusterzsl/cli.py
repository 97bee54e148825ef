"""Command line front end: ``train``, ``predict``, ``sweep`` and ``generate``.

Exit status is 0 on success, 1 on data or runtime errors and 2 on malformed
flags. Every output file is written to a temporary sibling and renamed into
place, so a failed run never leaves a partial file behind.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from .clustering import KMeansConfig
from .dataset import (
    Dataset,
    fit_scaler,
    load_dataset,
    make_zero_shot_split,
    parse_feature_csv,
    parse_keel,
    prepare_split,
)
from .errors import ZslError
from .evaluation import (
    build_report,
    curve_to_tsv,
    derive_seed,
    find_intersection,
    k_range,
    report_to_json,
    sweep_k,
)
from .synth import generate, parse_synth_spec
from .zsl import BoundaryRule, dumps_model, loads_model, predict_arrays, train_model

DEFAULT_SEED = 42


def write_atomic(path: str | os.PathLike, text: str) -> None:
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent or ".", prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {value}")
    return value


def _unsigned_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"must be an unsigned 64-bit integer, got {value}")
    return value


def _non_negative_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
    if not value >= 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {value}")
    return value


def _percentile(text: str) -> float:
    value = _non_negative_float(text)
    if value > 100:
        raise argparse.ArgumentTypeError(f"percentile must be at most 100, got {value}")
    return value


def _add_source(p: argparse.ArgumentParser, required: bool = True) -> None:
    src = p.add_mutually_exclusive_group(required=required)
    src.add_argument("--data", metavar="PATH", help="KEEL .dat file or CSV file")
    src.add_argument("--synth", metavar="SPEC", help="generator spec, e.g. ring:dim=20 or blobs:separation=3")
    p.add_argument("--label-column", default="class", help="label column of CSV input (default: class)")
    p.add_argument("--seed", type=_unsigned_int, default=DEFAULT_SEED, help="master seed (default: 42)")


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--train-class", required=True, metavar="LABEL")
    p.add_argument("--scale-on-train", action="store_true", help="fit z-score statistics on the training half only")
    p.add_argument("--boundary", choices=[r.value for r in BoundaryRule], default=BoundaryRule.INCLUSIVE.value)
    p.add_argument("--radius-percentile", type=_percentile, default=None, metavar="P",
                   help="use the P-th percentile of member distances as cluster radius instead of the maximum")
    p.add_argument("--max-iterations", type=_positive_int, default=300)
    p.add_argument("--tolerance", type=_non_negative_float, default=1e-6)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clusterzsl", description="Cluster-based zero-shot learning")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit a model on half of the train-class rows")
    _add_source(p)
    _add_model_flags(p)
    p.add_argument("--k", type=_positive_int, required=True)
    p.add_argument("--out", required=True, metavar="PATH", help="model file (JSON)")
    p.add_argument("--dump-train", metavar="PATH", help="also write the raw training rows as CSV")

    p = sub.add_parser("predict", help="classify rows as train or target class")
    p.add_argument("--model", required=True, metavar="PATH")
    _add_source(p)
    p.add_argument("--out", required=True, metavar="PATH", help="predictions CSV")

    p = sub.add_parser("sweep", help="recall of both classes over a range of K")
    _add_source(p)
    _add_model_flags(p)
    p.add_argument("--k-min", type=_positive_int, default=1)
    p.add_argument("--k-max", type=_positive_int, default=200)
    p.add_argument("--k-step", type=_positive_int, default=1)
    p.add_argument("--out", required=True, metavar="PATH", help="report file (JSON)")
    p.add_argument("--curve", metavar="PATH", help="curve TSV (default: report path with .tsv suffix)")
    p.add_argument("--workers", type=_positive_int, default=1, help="threads evaluating K values")

    p = sub.add_parser("generate", help="write a synthetic dataset as CSV")
    p.add_argument("--synth", required=True, metavar="SPEC")
    p.add_argument("--seed", type=_unsigned_int, default=DEFAULT_SEED)
    p.add_argument("--out", required=True, metavar="PATH")
    return parser


def _load_source(args) -> tuple[Dataset, str]:
    if args.synth:
        return generate(parse_synth_spec(args.synth, args.seed)), args.synth
    return load_dataset(args.data, args.label_column), Path(args.data).name


def _base_config(args) -> KMeansConfig:
    return KMeansConfig(k=1, max_iterations=args.max_iterations, tolerance=args.tolerance)


def cmd_train(args) -> int:
    dataset, name = _load_source(args)
    raw_split = make_zero_shot_split(dataset, args.train_class, args.seed, name)
    scaler = fit_scaler(raw_split.train_features if args.scale_on_train else dataset.features)
    split = raw_split.scaled(scaler)
    config = KMeansConfig(
        k=args.k,
        max_iterations=args.max_iterations,
        tolerance=args.tolerance,
        seed=derive_seed(args.seed, args.k),
    )
    model = train_model(split.train_features, config, args.boundary, scaler, args.radius_percentile)
    write_atomic(args.out, dumps_model(model))
    if args.dump_train:
        dump = Dataset(
            raw_split.train_features,
            (raw_split.train_label,) * raw_split.n_train,
            feature_names=dataset.feature_names,
            label_column=dataset.label_column,
        )
        write_atomic(args.dump_train, dump.to_csv())
    print(f"k={model.k} n_train={split.n_train} max_threshold={float(model.thresholds.max()):.6f}")
    return 0


def _read_features(args, dim: int) -> np.ndarray:
    if args.synth:
        return generate(parse_synth_spec(args.synth, args.seed)).features
    with open(args.data, encoding="utf-8", newline="") as fh:
        text = fh.read()
    if not text.strip():
        return np.zeros((0, dim))
    if args.data.lower().endswith(".dat"):
        return parse_keel(text).features
    return parse_feature_csv(text, args.label_column)


def cmd_predict(args) -> int:
    with open(args.model, encoding="utf-8") as fh:
        model = loads_model(fh.read())
    raw = _read_features(args, model.dim)
    points = model.normalize(raw) if raw.shape[0] else raw.reshape(0, raw.shape[1])
    is_train, nearest, dist = predict_arrays(model, points)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["row_index", "predicted_class", "nearest_cluster", "distance"])
    for i, (t, j, d) in enumerate(zip(is_train.tolist(), nearest.tolist(), dist.tolist())):
        writer.writerow([i, "train" if t else "target", j, repr(d)])
    write_atomic(args.out, buf.getvalue())
    n_train = int(np.count_nonzero(is_train))
    print(f"rows={len(is_train)} train={n_train} target={len(is_train) - n_train}")
    return 0


def cmd_sweep(args) -> int:
    ks = k_range(args.k_min, args.k_max, args.k_step)
    dataset, name = _load_source(args)
    split, _ = prepare_split(dataset, args.train_class, args.seed, args.scale_on_train, name)
    curve = sweep_k(
        split,
        ks,
        _base_config(args),
        args.boundary,
        master_seed=args.seed,
        radius_percentile=args.radius_percentile,
        workers=args.workers,
    )
    hit = find_intersection(curve)
    config = {
        "k_min": args.k_min,
        "k_max": args.k_max,
        "k_step": args.k_step,
        "max_iterations": args.max_iterations,
        "tolerance": args.tolerance,
        "boundary_rule": args.boundary,
        "scale_on_train": args.scale_on_train,
        "radius_percentile": args.radius_percentile,
        "n_train": split.n_train,
        "n_test": int(split.test_truth.shape[0]),
    }
    report = report_to_json(build_report(curve, hit, config))
    curve_path = args.curve or str(Path(args.out).with_suffix(".tsv"))
    write_atomic(curve_path, curve_to_tsv(curve))
    write_atomic(args.out, report)
    if hit.found:
        print(f"intersection at K={hit.k} recall_train={hit.recall_train_at_k:.4f} "
              f"recall_target={hit.recall_target_at_k:.4f}")
    else:
        print(f"no intersection in range K={ks[0]}..{ks[-1]}")
    return 0


def cmd_generate(args) -> int:
    dataset = generate(parse_synth_spec(args.synth, args.seed))
    write_atomic(args.out, dataset.to_csv())
    counts = ", ".join(f"{k}={v}" for k, v in dataset.class_counts().items())
    print(f"rows={len(dataset)} dim={dataset.dim} {counts}")
    return 0


COMMANDS = {"train": cmd_train, "predict": cmd_predict, "sweep": cmd_sweep, "generate": cmd_generate}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "sweep" and args.k_min > args.k_max:
        parser.error(f"--k-min ({args.k_min}) exceeds --k-max ({args.k_max})")
    try:
        return COMMANDS[args.command](args)
    except ZslError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
