"""Ward agglomerative clustering of cities by their transition matrices."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .errors import InvalidK, ShapeMismatch
from .model import TransitionModel


def flatten(model: TransitionModel) -> np.ndarray:
    """Row-major copy of an order-1 matrix in canonical type order."""
    if model.order != 1:
        raise ValueError("only first-order models are flattened for clustering")
    return np.asarray(model.matrix, dtype=float).reshape(-1).copy()


@dataclass(frozen=True)
class Merge:
    cluster_a: int
    cluster_b: int
    merge_height: float
    new_size: int


@dataclass(frozen=True)
class Dendrogram:
    """Merge history over ``labels`` (sorted). Ids follow scipy: leaf ``i``, then ``n + step``.

    ``merge_height`` is the Euclidean-scale Ward distance, ``sqrt(2 * ΔSSE)``.
    """

    labels: tuple[str, ...]
    merges: tuple[Merge, ...]

    @property
    def n(self) -> int:
        return len(self.labels)

    def labels_for_k(self, k: int) -> dict[str, int]:
        """Cut into ``k`` clusters; clusters are numbered by their first label."""
        if not 1 <= k <= self.n:
            raise InvalidK(f"k must lie in [1, {self.n}], got {k}")
        parent = list(range(2 * self.n - 1))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for step, m in enumerate(self.merges[: self.n - k]):
            new = self.n + step
            parent[find(m.cluster_a)] = new
            parent[find(m.cluster_b)] = new
        numbering: dict[int, int] = {}
        out = {}
        for i, label in enumerate(self.labels):
            root = find(i)
            out[label] = numbering.setdefault(root, len(numbering))
        return out

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "merges": [
                {"a": m.cluster_a, "b": m.cluster_b, "height": m.merge_height, "size": m.new_size}
                for m in self.merges
            ],
        }


def squared_distances(x: np.ndarray) -> np.ndarray:
    diff = x[:, None, :] - x[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def ward_cluster(
    vectors: Sequence[tuple[str, Sequence[float]]], k: int
) -> tuple[Dendrogram, dict[str, int]]:
    """Cluster labelled vectors with Ward linkage and cut the tree at ``k``.

    Items are processed in label order, so the result does not depend on the
    order they were passed in.
    """
    if len(vectors) < 2:
        raise ShapeMismatch("need at least two vectors to cluster")
    labels = [label for label, _ in vectors]
    if len(set(labels)) != len(labels):
        raise ValueError("vector labels must be unique")
    if not 1 <= k <= len(vectors):
        raise InvalidK(f"k must lie in [1, {len(vectors)}], got {k}")
    lengths = {len(v) for _, v in vectors}
    if len(lengths) != 1:
        raise ShapeMismatch(f"vectors have differing lengths {sorted(lengths)}")
    items = sorted(vectors, key=lambda lv: lv[0])
    x = np.array([np.asarray(v, dtype=float) for _, v in items])
    raw = kernels.ward_lance_williams(squared_distances(x))
    merges = tuple(Merge(a, b, math.sqrt(max(cost, 0.0)), size) for a, b, cost, size in raw)
    dendro = Dendrogram(tuple(label for label, _ in items), merges)
    return dendro, dendro.labels_for_k(k)
