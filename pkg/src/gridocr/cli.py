"""Command-line interface.

Subcommands: ``split`` a dataset index, ``train`` a model, ``predict``
single images, ``eval`` a model on a test index, ``bench`` a configuration
sweep, and ``selfcheck`` the search index against an exhaustive scan.

Output conventions: machine-readable lines are stable ``key=value`` pairs,
accuracy percentages carry one decimal, runtimes carry three.  The exit
status is 0 exactly when no error lines were emitted, and every command is
deterministic given its flags, seed, and input files (timing excluded).
"""

from __future__ import annotations

import argparse
import re
import sys

import numpy as np

from .classifier import GridKnnDigitClassifier
from .features import BlankImageError
from .harness import (
    DEFAULT_PLAN,
    evaluate,
    fit_classifier,
    read_images,
    run_benchmark,
)
from .model_io import (
    DatasetIndexError,
    ModelFormatError,
    load_model,
    read_index,
    save_model,
    split_entries,
    write_index,
)
from .neighbors import KdTree, linear_scan
from .raster import PgmError, read_pgm


def _parse_grid(text: str) -> tuple[int, int]:
    match = re.fullmatch(r"(\d+)x(\d+)", text)
    if not match or int(match.group(1)) < 1 or int(match.group(2)) < 1:
        raise argparse.ArgumentTypeError(f"grid must look like COLSxROWS, e.g. 4x8, got {text!r}")
    return int(match.group(1)), int(match.group(2))


def _parse_plan_row(text: str) -> tuple[str, tuple[int, int]]:
    kind, sep, grid = text.partition(":")
    if not sep or kind not in ("mean", "gradient"):
        raise argparse.ArgumentTypeError(f"plan row must look like mean:4x8, got {text!r}")
    return kind, _parse_grid(grid)


def _pct(accuracy: float) -> str:
    return f"{100.0 * accuracy:.1f}"


def _sec(seconds: float) -> str:
    return f"{seconds:.3f}"


def _pipeline_flags(sub: argparse.ArgumentParser, with_features: bool = True) -> None:
    if with_features:
        sub.add_argument("--features", choices=("mean", "gradient"), default="mean",
                         help="cell summary (default mean)")
        sub.add_argument("--grid", type=_parse_grid, default=(4, 8), metavar="CxR",
                         help="grid as COLSxROWS (default 4x8)")
    sub.add_argument("--k", type=int, default=3, help="neighbors per query (default 3)")
    sub.add_argument("--threshold", type=float, default=0.5,
                     help="ink threshold in (0, 1) (default 0.5)")
    sub.add_argument("--polarity", choices=("dark", "light"), default="light",
                     help="whether ink is darker or brighter than the threshold (default light)")


def cmd_split(args) -> int:
    entries = read_index(args.index)
    train, test = split_entries(entries, args.test_per_class, args.seed)
    write_index(args.train_out, train)
    write_index(args.test_out, test)
    print(f"train_out={args.train_out}")
    print(f"test_out={args.test_out}")
    print(f"n_train={len(train)}")
    print(f"n_test={len(test)}")
    return 0


def cmd_train(args) -> int:
    entries = read_index(args.index)
    images, labels = read_images(entries)
    clf = GridKnnDigitClassifier(
        features=args.features,
        grid=args.grid,
        n_neighbors=args.k,
        threshold=args.threshold,
        polarity=args.polarity,
    )
    fit_classifier(clf, images, labels, jobs=args.jobs)
    save_model(clf, args.out)
    print(f"model_out={args.out}")
    print(f"n_points={clf.points_.shape[0]}")
    print(f"d={clf.n_features_}")
    print(f"blanks_skipped={clf.n_blank_skipped_}")
    return 0


def cmd_predict(args) -> int:
    clf = load_model(args.model)
    failed = False
    for path in args.images:
        try:
            image = read_pgm(path)
        except (OSError, ValueError) as exc:
            print(f"{path} ERROR unreadable")
            print(f"error: {path}: {exc}", file=sys.stderr)
            failed = True
            continue
        try:
            label, neighbors = clf.classify(image)
        except BlankImageError:
            print(f"{path} ERROR blank")
            failed = True
            continue
        distances = ",".join(repr(nb.distance) for nb in neighbors)
        print(f"{path} {label} {distances}")
    return 1 if failed else 0


def _eval_text(report) -> str:
    lines = ["confusion matrix (rows = true digit, cols = predicted):"]
    header = "    " + "".join(f"{c:>6}" for c in range(10))
    lines.append(header)
    for truth in range(10):
        row = "".join(f"{int(v):>6}" for v in report.confusion[truth])
        lines.append(f"  {truth} {row}")
    lines.append(f"accuracy_pct={_pct(report.accuracy)}")
    lines.append(f"runtime_s={_sec(report.seconds)}")
    lines.append(f"n_train={report.n_train}")
    lines.append(f"n_test={report.n_test}")
    lines.append(f"n_blank_test={report.n_blank_test}")
    lines.append(f"jobs={report.jobs}")
    return "\n".join(lines)


def cmd_eval(args) -> int:
    clf = load_model(args.model)
    entries = read_index(args.index)
    report = evaluate(clf, entries, jobs=args.jobs)
    text = _eval_text(report)
    print(text)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    return 0


def cmd_bench(args) -> int:
    train_entries = read_index(args.train_index)
    test_entries = read_index(args.test_index)
    plan = args.plan if args.plan else list(DEFAULT_PLAN)
    rows = run_benchmark(
        train_entries,
        test_entries,
        plan=plan,
        n_neighbors=args.k,
        threshold=args.threshold,
        polarity=args.polarity,
        jobs=args.jobs,
    )
    width = max(len(r.name) for r in rows)
    print(f"{'config':<{width}}  accuracy_pct  runtime_s")
    for row in rows:
        if row.report is not None:
            print(f"{row.name:<{width}}  {_pct(row.report.accuracy):>12}  {_sec(row.report.seconds):>9}")
        else:
            print(f"{row.name:<{width}}  ERROR: {row.error}")
    failed = False
    for row in rows:
        if row.report is not None:
            print(f"row={row.name} accuracy_pct={_pct(row.report.accuracy)} runtime_s={_sec(row.report.seconds)}")
        else:
            print(f"row={row.name} error={row.error}")
            failed = True
    return 1 if failed else 0


def cmd_selfcheck(args) -> int:
    if args.n < 1 or args.d < 1 or args.queries < 1 or args.k < 1:
        raise ValueError("n, d, queries, and k must all be positive")
    rng = np.random.default_rng(args.seed)
    points = rng.standard_normal((args.n, args.d))
    labels = rng.integers(0, 10, size=args.n)
    queries = rng.standard_normal((args.queries, args.d))
    tree = KdTree(points, labels)
    mismatches = 0
    total_evals = 0
    for qi, q in enumerate(queries):
        got, evals = tree.query_counted(q, args.k)
        total_evals += evals
        expected = linear_scan(points, labels, q, args.k)
        if got != expected:
            mismatches += 1
            if mismatches == 1:
                print(f"error: query {qi} disagrees with the exhaustive scan:", file=sys.stderr)
                print(f"  tree: {got}", file=sys.stderr)
                print(f"  scan: {expected}", file=sys.stderr)
    print(f"n={args.n} d={args.d} queries={args.queries} k={args.k} seed={args.seed}")
    print(f"tree_depth={tree.depth}")
    print(f"mean_distance_evals={total_evals / args.queries:.1f}")
    print(f"mismatches={mismatches}")
    return 1 if mismatches else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridocr",
        description="Handwritten digit recognition with grid features and kd-tree kNN.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("split", help="split a dataset index into train and test indexes")
    sub.add_argument("index", help="dataset index file")
    sub.add_argument("--test-per-class", type=int, default=50, metavar="N",
                     help="test images per digit class (default 50)")
    sub.add_argument("--seed", type=int, default=0, help="split seed (default 0)")
    sub.add_argument("--train-out", required=True, help="output path for the train index")
    sub.add_argument("--test-out", required=True, help="output path for the test index")
    sub.set_defaults(func=cmd_split)

    sub = subs.add_parser("train", help="train a model from an index and save it")
    sub.add_argument("index", help="training index file")
    _pipeline_flags(sub)
    sub.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    sub.add_argument("--out", required=True, help="output path for the model file")
    sub.set_defaults(func=cmd_train)

    sub = subs.add_parser("predict", help="classify PGM images with a saved model")
    sub.add_argument("--model", required=True, help="model file")
    sub.add_argument("images", nargs="+", help="PGM files to classify")
    sub.set_defaults(func=cmd_predict)

    sub = subs.add_parser("eval", help="evaluate a saved model on a test index")
    sub.add_argument("index", help="test index file")
    sub.add_argument("--model", required=True, help="model file")
    sub.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    sub.add_argument("--out", help="also write the report to this file")
    sub.set_defaults(func=cmd_eval)

    sub = subs.add_parser("bench", help="accuracy/runtime sweep over feature and grid configurations")
    sub.add_argument("train_index", help="training index file")
    sub.add_argument("test_index", help="test index file")
    sub.add_argument("--plan", type=_parse_plan_row, action="append", metavar="KIND:CxR",
                     help="benchmark row like mean:4x8; repeat for more rows "
                          "(default: mean 4x4, 8x4, 4x8, 8x8 and gradient 4x8)")
    _pipeline_flags(sub, with_features=False)
    sub.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    sub.set_defaults(func=cmd_bench)

    sub = subs.add_parser("selfcheck", help="verify kd-tree answers against an exhaustive scan")
    sub.add_argument("--n", type=int, default=500, help="indexed points (default 500)")
    sub.add_argument("--d", type=int, default=32, help="dimensions (default 32)")
    sub.add_argument("--queries", type=int, default=100, help="query count (default 100)")
    sub.add_argument("--k", type=int, default=3, help="neighbors per query (default 3)")
    sub.add_argument("--seed", type=int, default=0, help="generator seed (default 0)")
    sub.set_defaults(func=cmd_selfcheck)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (PgmError, ModelFormatError, DatasetIndexError, BlankImageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
