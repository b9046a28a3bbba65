"""Training and evaluation harness with a Table-style benchmark sweep.

Timing discipline: the reported seconds cover feature extraction plus
nearest-neighbor search for the whole test pass, wall clock, regardless of
worker count.  Image decoding happens before the clock starts.  Everything
except the seconds field is deterministic for a given dataset and
configuration.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .classifier import GridKnnDigitClassifier
from .features import BlankImageError, GridSpec
from .raster import read_pgm

N_CLASSES = 10

# The accuracy/runtime sweep run when no plan is given: the four mean-feature
# grids plus the gradient variant on the best mean grid.
DEFAULT_PLAN: tuple[tuple[str, tuple[int, int]], ...] = (
    ("mean", (4, 4)),
    ("mean", (8, 4)),
    ("mean", (4, 8)),
    ("mean", (8, 8)),
    ("gradient", (4, 8)),
)


@dataclass
class EvalReport:
    """Outcome of one evaluation pass over a test set."""

    accuracy: float
    seconds: float
    confusion: np.ndarray  # (10, 10) counts, [true label, predicted label]
    n_train: int
    n_test: int
    n_blank_test: int
    jobs: int


@dataclass
class BenchRow:
    """One benchmark configuration and its outcome (report or error)."""

    name: str
    features: str
    grid: tuple[int, int]
    report: EvalReport | None = None
    error: str | None = None


def plan_row_name(features: str, grid) -> str:
    spec = GridSpec(*grid)
    return f"{features}-{spec.cols}x{spec.rows}"


def read_images(entries) -> tuple[list[np.ndarray], list[int]]:
    """Decode every image of an index; an unreadable file fails naming its path."""
    images = []
    labels = []
    for path, label in entries:
        try:
            images.append(read_pgm(path))
        except OSError as exc:
            raise OSError(f"cannot read image {path}: {exc}") from exc
        except ValueError as exc:
            raise ValueError(f"{path}: {exc}") from exc
        labels.append(label)
    return images, labels


_WORKER_CLF: GridKnnDigitClassifier | None = None


def _init_worker(clf: GridKnnDigitClassifier) -> None:
    global _WORKER_CLF
    _WORKER_CLF = clf


def _extract_one(image) -> np.ndarray | None:
    try:
        return _WORKER_CLF.extract(image)
    except BlankImageError:
        return None


def _classify_one(task) -> int:
    image, algorithm = task
    try:
        return int(_WORKER_CLF.classify(image, algorithm=algorithm)[0])
    except BlankImageError:
        return -1


def fit_classifier(clf: GridKnnDigitClassifier, images, labels, jobs: int = 1) -> GridKnnDigitClassifier:
    """Fit ``clf`` on decoded images, extracting features on ``jobs`` workers.

    Worker count never changes the result: vectors are assembled in dataset
    order whatever the scheduling.
    """
    if jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")
    if jobs == 1:
        return clf.fit(images, labels)
    clf._check_all_params()
    with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker, initargs=(clf,)) as pool:
        feats = list(pool.map(_extract_one, images, chunksize=64))
    return clf._fit_from_features(feats, labels)


def evaluate(
    clf: GridKnnDigitClassifier,
    entries,
    jobs: int = 1,
    algorithm: str = "kdtree",
) -> EvalReport:
    """Classify every indexed image and tally a 10x10 confusion matrix.

    A blank test image counts as an error (it is in the accuracy
    denominator and in ``n_blank_test``) but cannot appear in the confusion
    matrix, having no predicted digit.
    """
    if jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")
    images, truths = read_images(entries)
    started = time.perf_counter()
    if jobs == 1:
        _init_worker(clf)
        preds = [_classify_one((img, algorithm)) for img in images]
    else:
        with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker, initargs=(clf,)) as pool:
            preds = list(pool.map(_classify_one, ((img, algorithm) for img in images), chunksize=16))
    seconds = time.perf_counter() - started

    confusion = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    n_blank = 0
    for truth, pred in zip(truths, preds):
        if pred < 0:
            n_blank += 1
        else:
            confusion[truth, pred] += 1
    n_test = len(images)
    accuracy = float(np.trace(confusion)) / n_test if n_test else 0.0
    return EvalReport(
        accuracy=accuracy,
        seconds=seconds,
        confusion=confusion,
        n_train=clf.points_.shape[0],
        n_test=n_test,
        n_blank_test=n_blank,
        jobs=jobs,
    )


def run_benchmark(
    train_entries,
    test_entries,
    plan=None,
    n_neighbors: int = 3,
    threshold: float = 0.5,
    polarity: str = "light",
    jobs: int = 1,
) -> list[BenchRow]:
    """Train and evaluate every (features, grid) configuration of ``plan``.

    Configurations must be unique.  A failing row reports its error and the
    remaining rows still run.
    """
    plan = list(DEFAULT_PLAN if plan is None else plan)
    if not plan:
        raise ValueError("benchmark plan is empty")
    normalized = [(features, tuple(GridSpec(*grid))) for features, grid in plan]
    if len(set(normalized)) != len(normalized):
        raise ValueError("benchmark plan contains duplicate configurations")

    train_images, train_labels = read_images(train_entries)
    rows: list[BenchRow] = []
    for features, grid in normalized:
        row = BenchRow(name=plan_row_name(features, grid), features=features, grid=grid)
        try:
            clf = GridKnnDigitClassifier(
                features=features,
                grid=grid,
                n_neighbors=n_neighbors,
                threshold=threshold,
                polarity=polarity,
            )
            fit_classifier(clf, train_images, train_labels, jobs=jobs)
            row.report = evaluate(clf, test_entries, jobs=jobs)
        except Exception as exc:
            row.error = str(exc)
        rows.append(row)
    return rows
