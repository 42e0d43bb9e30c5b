"""0-dimensional persistent homology of Rips filtrations.

For H0 every component is born at scale 0 and dies when it merges with
another one, so the finite deaths are exactly the edge weights picked by
Kruskal's algorithm on the complete distance graph. No simplicial complex
is ever materialised.
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from crashtopo.errors import ValidationError


@dataclass(frozen=True)
class PersistenceDiagram:
    """Finite points of a persistence diagram as (birth, death, multiplicity).

    The diagonal is implicit. Points are kept sorted so that equal diagrams
    compare equal regardless of how they were built.
    """

    points: tuple[tuple[float, float, int], ...] = ()
    homology_dim: int = 0

    def __post_init__(self):
        merged: Counter = Counter()
        for b, d, *mult in self.points:
            mu = int(mult[0]) if mult else 1
            b, d = float(b), float(d)
            if mu < 1:
                raise ValidationError(f"multiplicity must be positive, got {mu}")
            if not (np.isfinite(b) and np.isfinite(d)):
                raise ValidationError("diagram points must be finite")
            if d < b:
                raise ValidationError(f"death {d} precedes birth {b}")
            merged[(b, d)] += mu
        pts = tuple((b, d, mu) for (b, d), mu in sorted(merged.items()))
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_pairs(cls, pairs: Iterable, homology_dim: int = 0) -> PersistenceDiagram:
        return cls(tuple((b, d, 1) for b, d in pairs), homology_dim)

    def expanded(self) -> np.ndarray:
        """(k, 2) array with each point repeated by its multiplicity."""
        rows = [(b, d) for b, d, mu in self.points for _ in range(mu)]
        return np.array(rows, dtype=float).reshape(-1, 2)

    @property
    def deaths(self) -> list[float]:
        return [d for b, d, mu in self.points for _ in range(mu)]

    def __len__(self) -> int:
        return sum(mu for _, _, mu in self.points)

    def scaled(self, c: float) -> PersistenceDiagram:
        return PersistenceDiagram(
            tuple((c * b, c * d, mu) for b, d, mu in self.points), self.homology_dim
        )

    def to_dict(self) -> dict:
        return {
            "homology_dim": self.homology_dim,
            "points": [{"birth": b, "death": d, "multiplicity": mu} for b, d, mu in self.points],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> PersistenceDiagram:
        pts = tuple((p["birth"], p["death"], p.get("multiplicity", 1)) for p in data["points"])
        return cls(pts, int(data.get("homology_dim", 0)))

    @classmethod
    def from_json(cls, text: str) -> PersistenceDiagram:
        return cls.from_dict(json.loads(text))


def pairwise_distances(points) -> np.ndarray:
    """Euclidean distance matrix, exactly symmetric with a zero diagonal."""
    x = np.asarray(getattr(points, "points", points), dtype=float)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ValidationError("need at least one point")
    diff = x[:, None, :] - x[None, :, :]
    d = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    upper = np.triu(d, 1)
    return upper + upper.T


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, a: int) -> int:
        parent = self.parent
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return True


def _check_distance_matrix(d: np.ndarray) -> np.ndarray:
    d = np.asarray(d, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1] or d.shape[0] < 1:
        raise ValidationError(f"distance matrix must be square and non-empty, got {d.shape}")
    if np.any(np.diag(d) != 0) or np.any(d < 0) or not np.array_equal(d, d.T):
        raise ValidationError("distance matrix must be symmetric, nonnegative, zero on the diagonal")
    return d


def merge_scales(d) -> list[float]:
    """Kruskal merge weights in nondecreasing order (m - 1 values).

    Edges are visited by (weight, i, j) so ties merge deterministically.
    """
    d = _check_distance_matrix(d)
    m = d.shape[0]
    iu, ju = np.triu_indices(m, 1)
    w = d[iu, ju]
    order = np.lexsort((ju, iu, w))
    uf = _UnionFind(m)
    deaths: list[float] = []
    for k in order:
        if uf.union(int(iu[k]), int(ju[k])):
            deaths.append(float(w[k]))
            if len(deaths) == m - 1:
                break
    return deaths


def h0_persistence(d) -> PersistenceDiagram:
    """H0 diagram of the Rips filtration over a distance matrix.

    The essential class (the last surviving component) is left out, so an
    m-point input gives m - 1 finite points, all born at 0.
    """
    return PersistenceDiagram(tuple((0.0, w, 1) for w in merge_scales(d)), homology_dim=0)


def cloud_diagram(points) -> PersistenceDiagram:
    return h0_persistence(pairwise_distances(points))
