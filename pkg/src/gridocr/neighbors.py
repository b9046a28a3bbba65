"""Exact k-nearest-neighbor search over labeled points.

The index is a static kd-tree built once over the training vectors.  Split
dimensions cycle with depth and each node sits at the lower median of its
subset, so the tree is balanced by construction.  Queries prune subtrees
whose bounding region is provably farther than the worst kept candidate,
tracking the squared query-to-region distance incrementally per dimension
(the bounds-overlap-ball test).  Candidate ranking everywhere is by
(squared distance, point id), which makes every query answer unique and
lets :func:`linear_scan` serve as a bit-exact oracle.
"""

from __future__ import annotations

import heapq
import math
from typing import NamedTuple, Sequence

import numpy as np


class Neighbor(NamedTuple):
    """One query answer: training-point ordinal, its label, Euclidean distance."""

    index: int
    label: int
    distance: float


def _check_points(points) -> np.ndarray:
    pts = np.ascontiguousarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] == 0:
        raise ValueError(f"points must be a nonempty 2-D array, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points contain non-finite values")
    return pts


def _check_query(q, dims: int, k: int) -> np.ndarray:
    vec = np.ascontiguousarray(q, dtype=np.float64)
    if vec.ndim != 1 or vec.shape[0] != dims:
        raise ValueError(f"query must be a 1-D vector of length {dims}, got shape {vec.shape}")
    if not np.all(np.isfinite(vec)):
        raise ValueError("query contains non-finite values")
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ValueError(f"k must be a positive integer, got {k!r}")
    return vec


class KdTree:
    """Static kd-tree over ``(n, d)`` float64 points with integer labels.

    The tree is immutable after construction: the point array is copied and
    marked read-only, and nodes are stored as parallel arrays indexed by
    point ordinal.  Building the same input always yields the same tree, and
    ``query`` returns exactly what :func:`linear_scan` returns.

    Attributes
    ----------
    dims : int
        Vector dimensionality.
    count : int
        Number of indexed points.
    depth : int
        Longest root-to-leaf node count; at most ``ceil(log2(count)) + 1``.
    """

    def __init__(self, points, labels: Sequence[int] | None = None):
        pts = _check_points(points).copy()
        pts.flags.writeable = False
        n = pts.shape[0]
        if labels is None:
            labs = np.zeros(n, dtype=np.int64)
        else:
            labs = np.asarray(labels, dtype=np.int64).copy()
            if labs.shape != (n,):
                raise ValueError(f"labels must have shape ({n},), got {labs.shape}")
        labs.flags.writeable = False
        self._points = pts
        self._labels = labs
        self._split_dim = np.empty(n, dtype=np.int32)
        self._left = np.full(n, -1, dtype=np.int32)
        self._right = np.full(n, -1, dtype=np.int32)
        self.depth = 0
        self._root = self._build(np.arange(n, dtype=np.int64), 0)
        for arr in (self._split_dim, self._left, self._right):
            arr.flags.writeable = False

    @property
    def dims(self) -> int:
        return self._points.shape[1]

    @property
    def count(self) -> int:
        return self._points.shape[0]

    @property
    def points(self) -> np.ndarray:
        """Read-only view of the indexed points, row ``i`` = ordinal ``i``."""
        return self._points

    @property
    def labels(self) -> np.ndarray:
        """Read-only view of the point labels."""
        return self._labels

    def _build(self, idx: np.ndarray, depth: int) -> int:
        axis = depth % self.dims
        # Sort by (coordinate, ordinal) so equal coordinates split the same
        # way on every build.
        idx = idx[np.lexsort((idx, self._points[idx, axis]))]
        mid = (len(idx) - 1) // 2
        node = int(idx[mid])
        self._split_dim[node] = axis
        self.depth = max(self.depth, depth + 1)
        if mid > 0:
            self._left[node] = self._build(idx[:mid], depth + 1)
        if mid + 1 < len(idx):
            self._right[node] = self._build(idx[mid + 1 :], depth + 1)
        return node

    def point_ids(self) -> list[int]:
        """All resident point ordinals, by in-order traversal."""
        out: list[int] = []
        stack: list[tuple[int, bool]] = [(self._root, False)]
        while stack:
            node, expanded = stack.pop()
            if node < 0:
                continue
            if expanded:
                out.append(node)
                continue
            stack.append((int(self._right[node]), False))
            stack.append((node, True))
            stack.append((int(self._left[node]), False))
        return out

    def query(self, q, k: int) -> list[Neighbor]:
        """The ``min(k, count)`` nearest points to ``q``, nearest first.

        Ranking is by (squared distance, ordinal); distances are reported as
        Euclidean.  Exact: agrees with :func:`linear_scan` on every input.
        """
        return self.query_counted(q, k)[0]

    def query_counted(self, q, k: int) -> tuple[list[Neighbor], int]:
        """Like :meth:`query`, also reporting how many point distances were evaluated."""
        vec = _check_query(q, self.dims, k)
        k = min(int(k), self.count)
        points = self._points
        split_dim = self._split_dim
        left = self._left
        right = self._right
        # Max-heap of the k best so far via negation: heap[0] is the worst
        # kept candidate, ties broken toward larger ordinal just like the
        # (squared distance, ordinal) ranking demands.
        heap: list[tuple[float, int]] = []
        evals = 0
        # Best-first traversal.  Each frontier entry is a pending subtree
        # with `box_d2`, a lower bound on the squared distance from the
        # query to every point in it: the sum over dimensions of `side`,
        # the squared offset from the query to the subtree's region along
        # each dimension.  Subtrees are expanded nearest-bound-first, so
        # once the smallest pending bound is beyond the worst kept
        # candidate the search is over.  `seq` only keeps heap entries
        # totally ordered.
        frontier: list[tuple[float, int, int, list[float]]] = [
            (0.0, 0, self._root, [0.0] * self.dims)
        ]
        seq = 1
        while frontier:
            box_d2, _, node, side = heapq.heappop(frontier)
            # Strictly beyond the worst candidate cannot win even on the
            # ordinal tie-break; every other pending bound is at least as
            # large, so the whole search stops.
            if len(heap) == k and box_d2 > -heap[0][0]:
                break
            # Walk the near-side chain of this subtree, deferring each
            # far child to the frontier with its updated lower bound:
            # crossing the splitting plane raises the region offset along
            # `axis` to delta**2.
            while node >= 0:
                diff = points[node] - vec
                d2 = float(np.einsum("i,i->", diff, diff))
                evals += 1
                entry = (-d2, -node)
                if len(heap) < k:
                    heapq.heappush(heap, entry)
                elif entry > heap[0]:
                    heapq.heapreplace(heap, entry)
                axis = int(split_dim[node])
                delta = float(vec[axis] - points[node, axis])
                if delta <= 0.0:
                    near, far = left[node], right[node]
                else:
                    near, far = right[node], left[node]
                if far >= 0:
                    far_box = box_d2 - side[axis] + delta * delta
                    # "Does not exceed" (<=) rather than "<": an equal
                    # distance can still win on the ordinal tie-break.
                    if len(heap) < k or far_box <= -heap[0][0]:
                        far_side = side.copy()
                        far_side[axis] = delta * delta
                        heapq.heappush(frontier, (far_box, seq, int(far), far_side))
                        seq += 1
                node = int(near)
        ranked = sorted(heap, reverse=True)
        labels = self._labels
        neighbors = [
            Neighbor(-nid, int(labels[-nid]), math.sqrt(-negd2)) for negd2, nid in ranked
        ]
        return neighbors, evals


def linear_scan(points, labels, q, k: int) -> list[Neighbor]:
    """Exhaustive exact kNN over ``points``; the oracle :class:`KdTree` must match.

    Same ranking rule as the tree: (squared distance, ordinal) ascending.
    """
    pts = _check_points(points)
    vec = _check_query(q, pts.shape[1], k)
    n = pts.shape[0]
    if labels is None:
        labs = np.zeros(n, dtype=np.int64)
    else:
        labs = np.asarray(labels, dtype=np.int64)
        if labs.shape != (n,):
            raise ValueError(f"labels must have shape ({n},), got {labs.shape}")
    diff = pts - vec
    d2 = np.einsum("ij,ij->i", diff, diff)
    order = np.lexsort((np.arange(n), d2))[: min(int(k), n)]
    return [Neighbor(int(i), int(labs[i]), math.sqrt(float(d2[i]))) for i in order]


def majority_vote(neighbors: Sequence[Neighbor]) -> int:
    """Most frequent label among ``neighbors`` (which must be in query order,
    nearest first); a frequency tie goes to the label of the nearest
    neighbor that carries one of the tied labels."""
    if not neighbors:
        raise ValueError("majority_vote needs at least one neighbor")
    counts: dict[int, int] = {}
    for nb in neighbors:
        counts[nb.label] = counts.get(nb.label, 0) + 1
    top = max(counts.values())
    tied = {label for label, c in counts.items() if c == top}
    if len(tied) == 1:
        return tied.pop()
    for nb in neighbors:
        if nb.label in tied:
            return nb.label
    raise AssertionError("unreachable")
