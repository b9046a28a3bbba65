"""Feature extraction: effective region, grid partition, zoning descriptors.

A digit image is reduced to a fixed-length vector in three steps: find the
effective region (the tightest box around the ink), partition that box into
a cols x rows grid of rectangles, and summarize each rectangle.  Two
summaries are provided:

* mean features: fraction of skeleton pixels per cell, one value per cell;
* gradient features: largest absolute horizontal and vertical derivative of
  the gray values per cell, two values per cell.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .raster import binarize, check_bit_image, check_gray_image, thin

FEATURE_KINDS = ("mean", "gradient")


class BlankImageError(ValueError):
    """Raised when an operation needs ink pixels and the image has none."""


class GridSpec(NamedTuple):
    """Grid partition shape: ``cols`` spans x (width), ``rows`` spans y (height)."""

    cols: int
    rows: int

    def validate(self) -> "GridSpec":
        if self.cols < 1 or self.rows < 1:
            raise ValueError(f"grid must have positive cols and rows, got {self}")
        return self


@dataclass(frozen=True)
class BoundingBox:
    """Inclusive pixel bounds of a region: x spans columns, y spans rows."""

    min_x: int
    max_x: int
    min_y: int
    max_y: int

    def __post_init__(self):
        if self.min_x > self.max_x or self.min_y > self.max_y:
            raise ValueError(f"empty bounding box {self}")

    @property
    def width(self) -> int:
        return self.max_x - self.min_x + 1

    @property
    def height(self) -> int:
        return self.max_y - self.min_y + 1


def effective_region(bits) -> BoundingBox:
    """Tightest bounding box of the True pixels of a bit image.

    Raises :class:`BlankImageError` if the image has no ink at all.
    """
    arr = check_bit_image(bits)
    ys, xs = np.nonzero(arr)
    if ys.size == 0:
        raise BlankImageError("image has no ink pixels, no effective region")
    return BoundingBox(int(xs.min()), int(xs.max()), int(ys.min()), int(ys.max()))


def partition_boundaries(length: int, parts: int) -> list[int]:
    """Split ``length`` pixels into ``parts`` bands, rounding halves up.

    Returns the ``parts + 1`` boundary offsets; band ``i`` covers
    ``[boundaries[i], boundaries[i + 1])``.  Boundary ``i`` is
    ``round(i * length / parts)`` computed in exact integer arithmetic, so
    ties like 2.5 always round up (float rounding would round them to even).
    Bands can be empty when ``parts > length``; they never overlap and they
    always cover the full extent.
    """
    if length < 1 or parts < 1:
        raise ValueError("length and parts must be positive")
    return [(2 * i * length + parts) // (2 * parts) for i in range(parts + 1)]


def grid_cells(box: BoundingBox, spec: GridSpec) -> list[tuple[int, int, int, int]]:
    """Partition ``box`` into ``spec.cols * spec.rows`` half-open rectangles.

    Returns ``(x_lo, x_hi, y_lo, y_hi)`` tuples in absolute image
    coordinates, row-major (all cells of the first row band, then the
    next).  Every box pixel falls in exactly one cell; cells may be empty
    when the box is smaller than the grid.
    """
    spec = GridSpec(*spec).validate()
    xb = partition_boundaries(box.width, spec.cols)
    yb = partition_boundaries(box.height, spec.rows)
    cells = []
    for r in range(spec.rows):
        for c in range(spec.cols):
            cells.append(
                (
                    box.min_x + xb[c],
                    box.min_x + xb[c + 1],
                    box.min_y + yb[r],
                    box.min_y + yb[r + 1],
                )
            )
    return cells


def feature_length(kind: str, spec: GridSpec) -> int:
    """Vector length produced by ``kind`` on ``spec``: cells for mean, 2x for gradient."""
    spec = GridSpec(*spec).validate()
    if kind not in FEATURE_KINDS:
        raise ValueError(f"kind must be one of {FEATURE_KINDS}, got {kind!r}")
    cells = spec.cols * spec.rows
    return cells if kind == "mean" else 2 * cells


def mean_features(bits, spec: GridSpec) -> np.ndarray:
    """Per-cell ink density of a bit image over its own effective region.

    Cell value = ink pixels / cell area, in [0, 1]; zero-area cells
    contribute 0.  Length ``cols * rows``, cell order as in
    :func:`grid_cells`.
    """
    arr = check_bit_image(bits)
    box = effective_region(arr)
    cells = grid_cells(box, spec)
    out = np.zeros(len(cells), dtype=np.float64)
    for i, (x_lo, x_hi, y_lo, y_hi) in enumerate(cells):
        area = (x_hi - x_lo) * (y_hi - y_lo)
        if area:
            out[i] = np.count_nonzero(arr[y_lo:y_hi, x_lo:x_hi]) / area
    return out


def gradient_features(gray, box: BoundingBox, spec: GridSpec) -> np.ndarray:
    """Per-cell peak absolute derivatives of a gray image inside ``box``.

    Derivatives are taken over the cropped region only: central differences
    ``(f[p+1] - f[p-1]) / 2`` inside, one-sided first differences on the
    region border.  An axis with a single sample gets derivative 0.  Each
    cell emits ``(max |d/dx|, max |d/dy|)``; zero-area cells emit zeros.
    Length ``2 * cols * rows``, pairs in :func:`grid_cells` cell order.
    """
    arr = check_gray_image(gray)
    if not (0 <= box.min_y and box.max_y < arr.shape[0] and 0 <= box.min_x and box.max_x < arr.shape[1]):
        raise ValueError(f"{box} exceeds image shape {arr.shape}")
    crop = arr[box.min_y : box.max_y + 1, box.min_x : box.max_x + 1]
    dy = np.zeros_like(crop)
    dx = np.zeros_like(crop)
    if crop.shape[0] > 1:
        dy = np.gradient(crop, axis=0, edge_order=1)
    if crop.shape[1] > 1:
        dx = np.gradient(crop, axis=1, edge_order=1)
    cells = grid_cells(box, spec)
    out = np.zeros(2 * len(cells), dtype=np.float64)
    for i, (x_lo, x_hi, y_lo, y_hi) in enumerate(cells):
        if (x_hi - x_lo) * (y_hi - y_lo):
            window = (
                slice(y_lo - box.min_y, y_hi - box.min_y),
                slice(x_lo - box.min_x, x_hi - box.min_x),
            )
            out[2 * i] = np.abs(dx[window]).max()
            out[2 * i + 1] = np.abs(dy[window]).max()
    return out


def extract_features(
    gray,
    kind: str = "mean",
    spec: GridSpec = GridSpec(4, 8),
    threshold: float = 0.5,
    polarity: str = "light",
) -> np.ndarray:
    """Full image-to-vector pipeline for one gray image.

    ``mean``: binarize, thin, then ink densities over the skeleton's own
    effective region.  ``gradient``: binarize only to locate the effective
    region, then peak derivatives of the untouched gray values inside it.

    Raises :class:`BlankImageError` when binarization leaves no ink.
    """
    if kind not in FEATURE_KINDS:
        raise ValueError(f"kind must be one of {FEATURE_KINDS}, got {kind!r}")
    arr = check_gray_image(gray)
    bits = binarize(arr, threshold=threshold, polarity=polarity)
    if kind == "mean":
        return mean_features(thin(bits), spec)
    return gradient_features(arr, effective_region(bits), spec)
