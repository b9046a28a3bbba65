"""Plain-text persistence for trained models and dataset indexes.

Model format, one record per line, trailing newline required::

    GRIDOCR 1
    kind=mean cols=4 rows=8 k=3 threshold=0.5 polarity=light
    n=1500 d=32
    <label> <v1> ... <vd>
    ...

Floats are written with ``repr``, the shortest decimal that round-trips, so
save -> load -> save reproduces the file byte for byte and loaded models
answer queries exactly like the originals.

A dataset index is a text file of ``relative/path.pgm,<digit>`` lines;
``#`` starts a comment and paths are resolved against the index file's own
directory.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from .classifier import GridKnnDigitClassifier
from .features import FEATURE_KINDS, GridSpec, feature_length
from .raster import POLARITIES

MODEL_MAGIC = "GRIDOCR"
MODEL_VERSION = 1


class ModelFormatError(ValueError):
    """Malformed model payload; the message names the offending line."""


class DatasetIndexError(ValueError):
    """Malformed dataset index or an impossible split request."""


def model_to_bytes(clf: GridKnnDigitClassifier) -> bytes:
    """Serialize a fitted classifier to the plain-text model format."""
    points = clf.points_
    labels = clf.labels_
    spec = GridSpec(*clf.grid)
    lines = [
        f"{MODEL_MAGIC} {MODEL_VERSION}",
        f"kind={clf.features} cols={spec.cols} rows={spec.rows} "
        f"k={int(clf.n_neighbors)} threshold={repr(float(clf.threshold))} "
        f"polarity={clf.polarity}",
        f"n={points.shape[0]} d={points.shape[1]}",
    ]
    for label, row in zip(labels, points):
        lines.append(f"{int(label)} " + " ".join(repr(float(v)) for v in row))
    return ("\n".join(lines) + "\n").encode("ascii")


def _fields(line: str, lineno: int, expected_keys: tuple[str, ...]) -> dict[str, str]:
    got: dict[str, str] = {}
    for token in line.split():
        key, eq, value = token.partition("=")
        if not eq or not value:
            raise ModelFormatError(f"line {lineno}: malformed field {token!r}")
        if key in got:
            raise ModelFormatError(f"line {lineno}: duplicate field {key!r}")
        got[key] = value
    if set(got) != set(expected_keys):
        raise ModelFormatError(
            f"line {lineno}: expected fields {expected_keys}, got {tuple(got)}"
        )
    return got


def _int_field(fields: dict[str, str], key: str, lineno: int, minimum: int) -> int:
    try:
        value = int(fields[key])
    except ValueError:
        raise ModelFormatError(f"line {lineno}: {key} must be an integer, got {fields[key]!r}") from None
    if value < minimum:
        raise ModelFormatError(f"line {lineno}: {key} must be >= {minimum}, got {value}")
    return value


def model_from_bytes(data: bytes) -> GridKnnDigitClassifier:
    """Parse model bytes into a fitted classifier, validating every record."""
    try:
        text = data.decode("ascii")
    except UnicodeDecodeError as exc:
        raise ModelFormatError(f"model is not ASCII text: {exc}") from None
    if not text.endswith("\n"):
        raise ModelFormatError("missing trailing newline")
    lines = text.split("\n")[:-1]
    if len(lines) < 3:
        raise ModelFormatError(f"header needs 3 lines, got {len(lines)}")

    magic = lines[0].split()
    if len(magic) != 2 or magic[0] != MODEL_MAGIC:
        raise ModelFormatError(f"line 1: bad magic {lines[0]!r}")
    if magic[1] != str(MODEL_VERSION):
        raise ModelFormatError(f"line 1: unsupported version {magic[1]!r}")

    cfg = _fields(lines[1], 2, ("kind", "cols", "rows", "k", "threshold", "polarity"))
    kind = cfg["kind"]
    if kind not in FEATURE_KINDS:
        raise ModelFormatError(f"line 2: kind must be one of {FEATURE_KINDS}, got {kind!r}")
    cols = _int_field(cfg, "cols", 2, 1)
    rows = _int_field(cfg, "rows", 2, 1)
    k = _int_field(cfg, "k", 2, 1)
    if cfg["polarity"] not in POLARITIES:
        raise ModelFormatError(f"line 2: polarity must be one of {POLARITIES}")
    try:
        threshold = float(cfg["threshold"])
    except ValueError:
        raise ModelFormatError(f"line 2: bad threshold {cfg['threshold']!r}") from None
    if not 0.0 < threshold < 1.0:
        raise ModelFormatError(f"line 2: threshold must lie inside (0, 1), got {threshold}")

    size = _fields(lines[2], 3, ("n", "d"))
    n = _int_field(size, "n", 3, 1)
    d = _int_field(size, "d", 3, 1)
    expected_d = feature_length(kind, GridSpec(cols, rows))
    if d != expected_d:
        raise ModelFormatError(
            f"line 3: d={d} contradicts {kind} features on a {cols}x{rows} grid "
            f"(must be {expected_d})"
        )
    if len(lines) - 3 != n:
        raise ModelFormatError(f"expected {n} point records, found {len(lines) - 3}")

    points = np.empty((n, d), dtype=np.float64)
    labels = np.empty(n, dtype=np.int64)
    for i in range(n):
        lineno = i + 4
        tokens = lines[i + 3].split()
        if len(tokens) != d + 1:
            raise ModelFormatError(
                f"line {lineno}: record {i} needs a label and {d} values, got {len(tokens)} tokens"
            )
        if not (len(tokens[0]) == 1 and tokens[0].isdigit()):
            raise ModelFormatError(f"line {lineno}: record {i} label must be a digit, got {tokens[0]!r}")
        labels[i] = int(tokens[0])
        for j, tok in enumerate(tokens[1:]):
            try:
                value = float(tok)
            except ValueError:
                raise ModelFormatError(f"line {lineno}: record {i} value {j} is not a number: {tok!r}") from None
            if not np.isfinite(value):
                raise ModelFormatError(f"line {lineno}: record {i} value {j} is not finite: {tok!r}")
            points[i, j] = value

    clf = GridKnnDigitClassifier(
        features=kind,
        grid=(cols, rows),
        n_neighbors=k,
        threshold=threshold,
        polarity=cfg["polarity"],
    )
    return clf._set_model(points, labels)


def save_model(clf: GridKnnDigitClassifier, path) -> None:
    Path(path).write_bytes(model_to_bytes(clf))


def load_model(path) -> GridKnnDigitClassifier:
    return model_from_bytes(Path(path).read_bytes())


def read_index(path) -> list[tuple[Path, int]]:
    """Parse a dataset index into (resolved path, label) pairs.

    ``#`` lines and blank lines are skipped; labels must be single decimal
    digits; duplicate paths are rejected.
    """
    path = Path(path)
    base = path.parent
    entries: list[tuple[Path, int]] = []
    seen: set[Path] = set()
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        rel, comma, label = line.rpartition(",")
        if not comma or not rel:
            raise DatasetIndexError(f"{path}:{lineno}: expected '<path>,<digit>', got {raw!r}")
        label = label.strip()
        if not (len(label) == 1 and label.isdigit()):
            raise DatasetIndexError(f"{path}:{lineno}: label must be a single digit, got {label!r}")
        resolved = (base / rel.strip()).resolve()
        if resolved in seen:
            raise DatasetIndexError(f"{path}:{lineno}: duplicate image path {resolved}")
        seen.add(resolved)
        entries.append((resolved, int(label)))
    return entries


def write_index(path, entries) -> None:
    """Write (path, label) pairs as an index file, paths relative to it."""
    path = Path(path)
    base = path.parent.resolve()
    lines = []
    for img_path, label in entries:
        rel = os.path.relpath(Path(img_path).resolve(), base)
        lines.append(f"{rel},{int(label)}")
    path.write_text("\n".join(lines) + ("\n" if lines else ""))


def split_entries(entries, test_per_class: int, seed: int):
    """Deterministic per-class split into (train, test), file order preserved.

    Exactly ``test_per_class`` images of every digit class present go to the
    test side, chosen by a generator seeded with ``seed``; everything else
    stays in train.  A class with too few images raises
    :class:`DatasetIndexError` naming it.
    """
    if test_per_class < 0:
        raise ValueError(f"test_per_class must be >= 0, got {test_per_class}")
    by_label: dict[int, list[int]] = {}
    for pos, (_, label) in enumerate(entries):
        by_label.setdefault(label, []).append(pos)
    rng = np.random.default_rng(seed)
    test_positions: set[int] = set()
    for label in sorted(by_label):
        positions = by_label[label]
        if len(positions) < test_per_class:
            raise DatasetIndexError(
                f"class {label} has {len(positions)} image(s), need {test_per_class} for the test side"
            )
        chosen = rng.choice(len(positions), size=test_per_class, replace=False)
        test_positions.update(positions[int(j)] for j in chosen)
    train = [e for i, e in enumerate(entries) if i not in test_positions]
    test = [e for i, e in enumerate(entries) if i in test_positions]
    return train, test
