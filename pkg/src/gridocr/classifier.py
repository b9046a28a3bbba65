"""Estimators tying the feature pipeline to nearest-neighbor voting.

Both classes follow the scikit-learn protocol: constructor arguments are
stored verbatim, validation happens in ``fit``, fitted state lives in
trailing-underscore attributes, and ``get_params``/``set_params``/``clone``
work as usual.  Raw samples are images (2-D gray arrays), which may differ
in shape from sample to sample.
"""

from __future__ import annotations

import warnings

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .features import (
    FEATURE_KINDS,
    BlankImageError,
    GridSpec,
    extract_features,
    feature_length,
)
from .neighbors import KdTree, Neighbor, linear_scan, majority_vote
from .raster import POLARITIES, check_gray_image

DIGITS = tuple(range(10))


def _checked_params(features, grid, threshold, polarity) -> GridSpec:
    if features not in FEATURE_KINDS:
        raise ValueError(f"features must be one of {FEATURE_KINDS}, got {features!r}")
    spec = GridSpec(*grid).validate()
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must lie strictly inside (0, 1), got {threshold}")
    if polarity not in POLARITIES:
        raise ValueError(f"polarity must be one of {POLARITIES}, got {polarity!r}")
    return spec


def _checked_labels(y, n: int) -> np.ndarray:
    labels = np.asarray(y)
    if labels.shape != (n,):
        raise ValueError(f"y must have shape ({n},), got {labels.shape}")
    if labels.size and (labels.astype(np.int64) != labels).any():
        raise ValueError("labels must be integers")
    labels = labels.astype(np.int64)
    if labels.size and (labels.min() < 0 or labels.max() > 9):
        raise ValueError("labels must be decimal digits 0-9")
    return labels


class GridFeatureExtractor(BaseEstimator, TransformerMixin):
    """Transformer from gray digit images to fixed-length grid feature vectors.

    Parameters
    ----------
    features : {"mean", "gradient"}
        Cell summary: skeleton ink density, or peak absolute derivatives.
    grid : tuple of (cols, rows)
        Partition of the effective region; cols spans width, rows height.
    threshold, polarity
        Binarization settings; with ``polarity="light"`` ink is brighter
        than the threshold.

    A blank image (no ink after binarization) cannot be embedded; it raises
    :class:`BlankImageError` naming the offending sample.
    """

    def __init__(self, features="mean", grid=(4, 8), threshold=0.5, polarity="light"):
        self.features = features
        self.grid = grid
        self.threshold = threshold
        self.polarity = polarity

    def fit(self, X=None, y=None):
        spec = _checked_params(self.features, self.grid, self.threshold, self.polarity)
        self.n_features_out_ = feature_length(self.features, spec)
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self)
        rows = []
        for i, img in enumerate(X):
            try:
                rows.append(self.extract(img))
            except BlankImageError as exc:
                raise BlankImageError(f"image {i} is blank: {exc}") from exc
        if not rows:
            return np.empty((0, self.n_features_out_), dtype=np.float64)
        return np.stack(rows)

    def extract(self, image) -> np.ndarray:
        """Feature vector of a single image under this configuration."""
        return extract_features(
            check_gray_image(image),
            kind=self.features,
            spec=GridSpec(*self.grid),
            threshold=self.threshold,
            polarity=self.polarity,
        )


class GridKnnDigitClassifier(BaseEstimator, ClassifierMixin):
    """k-nearest-neighbor digit classifier over grid features.

    Training extracts one feature vector per image and indexes them in a
    :class:`KdTree`; prediction embeds the query image and takes a majority
    vote over its ``n_neighbors`` nearest training points, breaking vote
    ties toward the label of the nearest tied neighbor.

    Parameters
    ----------
    features, grid, threshold, polarity
        Feature pipeline settings, see :class:`GridFeatureExtractor`.
    n_neighbors : int
        Number of neighbors consulted per query.

    Attributes
    ----------
    points_ : ndarray of shape (n_kept, d)
        Feature vectors of the non-blank training images, in dataset order.
    labels_ : ndarray of shape (n_kept,)
        Their digit labels.
    tree_ : KdTree
        Search index over ``points_``.
    classes_ : ndarray
        Distinct labels seen at fit time.
    n_features_ : int
        Feature vector length (cells, or 2x cells for gradient features).
    n_blank_skipped_ : int
        Blank training images dropped with a warning.
    """

    def __init__(
        self,
        features="mean",
        grid=(4, 8),
        n_neighbors=3,
        threshold=0.5,
        polarity="light",
    ):
        self.features = features
        self.grid = grid
        self.n_neighbors = n_neighbors
        self.threshold = threshold
        self.polarity = polarity

    def _extractor(self) -> GridFeatureExtractor:
        return GridFeatureExtractor(
            features=self.features,
            grid=self.grid,
            threshold=self.threshold,
            polarity=self.polarity,
        ).fit()

    def _check_all_params(self) -> None:
        _checked_params(self.features, self.grid, self.threshold, self.polarity)
        if not isinstance(self.n_neighbors, (int, np.integer)) or self.n_neighbors < 1:
            raise ValueError(f"n_neighbors must be a positive integer, got {self.n_neighbors!r}")

    def fit(self, X, y):
        """Fit on a sequence of gray images ``X`` and digit labels ``y``."""
        self._check_all_params()
        extractor = self._extractor()
        feats: list[np.ndarray | None] = []
        for img in X:
            try:
                feats.append(extractor.extract(img))
            except BlankImageError:
                feats.append(None)
        return self._fit_from_features(feats, y)

    def _fit_from_features(self, feats, y):
        """Install fitted state from per-image vectors (None marks a blank)."""
        self._check_all_params()
        labels = _checked_labels(y, len(feats))
        if len(feats) == 0:
            raise ValueError("training set is empty")
        keep = [i for i, f in enumerate(feats) if f is not None]
        n_blank = len(feats) - len(keep)
        if not keep:
            raise ValueError("every training image is blank, nothing to fit")
        if n_blank:
            warnings.warn(f"skipped {n_blank} blank training image(s)", UserWarning)
        points = np.stack([feats[i] for i in keep])
        self._set_model(points, labels[keep])
        self.n_blank_skipped_ = n_blank
        return self

    def _set_model(self, points: np.ndarray, labels: np.ndarray):
        """Install fitted state from a finished point matrix (also used when
        a model file is loaded)."""
        self._check_all_params()
        expected = feature_length(self.features, GridSpec(*self.grid))
        if points.ndim != 2 or points.shape[1] != expected:
            raise ValueError(
                f"points must have {expected} columns for {self.features} features "
                f"on grid {tuple(self.grid)}, got shape {points.shape}"
            )
        labels = _checked_labels(labels, points.shape[0])
        self.tree_ = KdTree(points, labels)
        self.points_ = self.tree_.points
        self.labels_ = self.tree_.labels
        self.classes_ = np.unique(labels)
        self.n_features_ = expected
        self.n_blank_skipped_ = 0
        return self

    def extract(self, image) -> np.ndarray:
        """Feature vector of one image under this classifier's configuration."""
        return self._extractor().extract(image)

    def classify(self, image, algorithm: str = "kdtree") -> tuple[int, list[Neighbor]]:
        """Predicted digit and the consulted neighbors for one image.

        ``algorithm="linear"`` answers from an exhaustive scan instead of
        the kd-tree; both must give identical results.
        """
        check_is_fitted(self)
        vec = self.extract(image)
        if algorithm == "kdtree":
            neighbors = self.tree_.query(vec, self.n_neighbors)
        elif algorithm == "linear":
            neighbors = linear_scan(self.points_, self.labels_, vec, self.n_neighbors)
        else:
            raise ValueError(f"algorithm must be 'kdtree' or 'linear', got {algorithm!r}")
        return majority_vote(neighbors), neighbors

    def predict(self, X) -> np.ndarray:
        """Predicted digits for a sequence of images.

        Raises :class:`BlankImageError` naming the sample index if an image
        has no ink; callers that must survive blanks catch it per image.
        """
        check_is_fitted(self)
        out = np.empty(len(X), dtype=np.int64)
        for i, img in enumerate(X):
            try:
                out[i] = self.classify(img)[0]
            except BlankImageError as exc:
                raise BlankImageError(f"image {i} is blank: {exc}") from exc
        return out

    def kneighbors(self, X, n_neighbors: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Distances and training-point ordinals of the nearest neighbors,
        one row per image, nearest first."""
        check_is_fitted(self)
        k = self.n_neighbors if n_neighbors is None else n_neighbors
        dists = []
        idxs = []
        for img in X:
            found = self.tree_.query(self.extract(img), k)
            dists.append([nb.distance for nb in found])
            idxs.append([nb.index for nb in found])
        return np.asarray(dists), np.asarray(idxs)
