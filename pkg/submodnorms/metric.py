"""Finite metric spaces for online facility location.

Points are 0-based indices. Nearest-point queries break ties by lowest index.
"""
import math

import numpy as np
from scipy.spatial.distance import cdist

from .utils import ATOL, RTOL, ValidationError


class MetricSpace:
    type = "metric"

    @property
    def size(self):
        raise NotImplementedError

    def distance(self, a, b):
        raise NotImplementedError

    def distances(self, a, targets):
        return np.array([self.distance(a, b) for b in targets], dtype=float)

    def nearest(self, a, targets):
        """(distance, point) of the closest target, lowest index on ties; (inf, None) if empty."""
        targets = sorted(int(t) for t in targets)
        if not targets:
            return math.inf, None
        d = self.distances(a, targets)
        best = int(np.argmin(d))
        return float(d[best]), targets[best]

    def distance_to_set(self, a, targets):
        return self.nearest(a, targets)[0]

    def check_points(self, points, name="points"):
        for p in points:
            if not 0 <= int(p) < self.size:
                raise ValidationError(f"{name} contains {p}, outside the metric's {self.size} points")

    def descriptor(self):
        raise NotImplementedError


class MatrixMetric(MetricSpace):
    """Explicit distance matrix; symmetry, zero diagonal and triangle inequality checked on load."""

    type = "matrix"

    def __init__(self, distances, tol=RTOL):
        D = np.asarray(distances, dtype=float)
        if D.ndim != 2 or D.shape[0] != D.shape[1]:
            raise ValidationError(f"Distance matrix must be square, got shape {D.shape}")
        if np.any(np.isnan(D)) or np.any(D < 0):
            raise ValidationError("Distances must be non-negative numbers")
        if np.any(np.abs(np.diag(D)) > ATOL):
            raise ValidationError("Distance matrix must have a zero diagonal")
        if not np.allclose(D, D.T, rtol=tol, atol=ATOL):
            raise ValidationError("Distance matrix must be symmetric")

        slack = ATOL + tol * D.max(initial=0.0)
        for k in range(D.shape[0]):
            via = D[:, k, None] + D[None, k, :]
            bad = np.argwhere(D > via + slack)
            if bad.size:
                i, j = bad[0]
                raise ValidationError(
                    f"Triangle inequality fails: d({i},{j})={D[i, j]} > "
                    f"d({i},{k}) + d({k},{j}) = {via[i, j]}")
        self.matrix = D

    @property
    def size(self):
        return self.matrix.shape[0]

    def distance(self, a, b):
        return float(self.matrix[a, b])

    def distances(self, a, targets):
        return self.matrix[a, list(targets)]

    def descriptor(self):
        return {"type": "matrix", "distances": self.matrix.tolist()}


class EuclideanMetric(MetricSpace):
    type = "euclidean"

    def __init__(self, points):
        P = np.atleast_2d(np.asarray(points, dtype=float))
        if P.ndim != 2 or P.shape[0] == 0:
            raise ValidationError("Euclidean metric needs a non-empty list of points")
        if not np.all(np.isfinite(P)):
            raise ValidationError("Point coordinates must be finite")
        self.points = P
        self.matrix = cdist(P, P)

    @property
    def size(self):
        return self.points.shape[0]

    def distance(self, a, b):
        return float(self.matrix[a, b])

    def distances(self, a, targets):
        return self.matrix[a, list(targets)]

    def descriptor(self):
        return {"type": "euclidean", "points": self.points.tolist()}


class TreeMetric(MetricSpace):
    """Complete `arity`-ary tree of the given height in heap numbering.

    Node 0 is the root; the children of v are v*arity + 1 .. v*arity + arity.
    An edge from depth j to depth j + 1 has length edge_lengths[j].
    """

    type = "tree"

    def __init__(self, arity, height, edge_lengths):
        if arity < 2 or height < 1:
            raise ValidationError(f"Tree needs arity >= 2 and height >= 1, got {arity}, {height}")
        if len(edge_lengths) != height:
            raise ValidationError(f"Need one edge length per level ({height}), got {len(edge_lengths)}")
        if any(w < 0 for w in edge_lengths):
            raise ValidationError("Edge lengths must be non-negative")
        self.arity = int(arity)
        self.height = int(height)
        self.edge_lengths = [float(w) for w in edge_lengths]

        counts = [self.arity ** j for j in range(self.height + 1)]
        self._size = sum(counts)
        self.depth = np.repeat(np.arange(self.height + 1), counts)

    @property
    def size(self):
        return self._size

    def parent(self, v):
        return (v - 1) // self.arity

    def child(self, v, c):
        return v * self.arity + 1 + c

    def distance(self, a, b):
        a, b = int(a), int(b)
        total = 0.0
        while a != b:
            if self.depth[a] >= self.depth[b]:
                total += self.edge_lengths[self.depth[a] - 1]
                a = self.parent(a)
            else:
                total += self.edge_lengths[self.depth[b] - 1]
                b = self.parent(b)
        return total

    def descriptor(self):
        return {"type": "tree", "arity": self.arity, "height": self.height,
                "edge_lengths": list(self.edge_lengths)}


def metric_from_spec(spec):
    """Build a metric from a validated pydantic metric spec."""
    if spec.type == "matrix":
        return MatrixMetric(spec.distances)
    if spec.type == "euclidean":
        return EuclideanMetric(spec.points)
    if spec.type == "tree":
        return TreeMetric(spec.arity, spec.height, spec.edge_lengths)
    raise ValidationError(f"Unknown metric type {spec.type!r}")
