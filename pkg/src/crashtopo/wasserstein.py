"""Degree-p Wasserstein distances between persistence diagrams.

Ground metric is the sup norm. A point (b, d) sits at sup-norm distance
(d - b) / 2 from its projection onto the diagonal.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from crashtopo.errors import ValidationError
from crashtopo.persistence import PersistenceDiagram


def _check_degree(p: float) -> float:
    p = float(p)
    if not (np.isfinite(p) and p >= 1):
        raise ValidationError(f"degree p must be a finite number >= 1, got {p}")
    return p


def diagonal_distance(points: np.ndarray) -> np.ndarray:
    return (points[:, 1] - points[:, 0]) / 2.0


def wd_to_diagonal(pd: PersistenceDiagram, p: float = 2) -> float:
    """Distance from a diagram to the empty diagram (the bare diagonal)."""
    p = _check_degree(p)
    if not pd.points:
        return 0.0
    total = sum(mu * ((d - b) / 2.0) ** p for b, d, mu in pd.points)
    return float(total ** (1.0 / p))


def hungarian(cost: np.ndarray) -> np.ndarray:
    """Minimum-cost perfect assignment on a square matrix.

    Shortest augmenting path with row/column potentials, O(n^3); the inner
    column scan is vectorised. Returns ``col`` with row ``i`` assigned to
    column ``col[i]``.
    """
    cost = np.asarray(cost, dtype=float)
    n = cost.shape[0]
    if cost.shape != (n, n):
        raise ValidationError(f"cost matrix must be square, got {cost.shape}")
    if n == 0:
        return np.zeros(0, dtype=int)
    # 1-based arrays; column 0 is the virtual source of each augmentation.
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    row_of = np.zeros(n + 1, dtype=int)
    way = np.zeros(n + 1, dtype=int)
    for i in range(1, n + 1):
        row_of[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = row_of[j0]
            free = ~used
            free[0] = False
            reduced = cost[i0 - 1] - u[i0] - v[1:]
            better = free[1:] & (reduced < minv[1:])
            minv[1:][better] = reduced[better]
            way[1:][better] = j0
            candidates = np.where(free, minv, np.inf)
            j1 = int(np.argmin(candidates))
            delta = candidates[j1]
            u[row_of[used]] += delta
            v[used] -= delta
            minv[free] -= delta
            j0 = j1
            if row_of[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            row_of[j0] = row_of[j1]
            j0 = j1
    col = np.empty(n, dtype=int)
    col[row_of[1:] - 1] = np.arange(n)
    return col


@dataclass(frozen=True)
class Matching:
    """Optimal partial matching between two diagrams.

    ``pairs`` holds index pairs into ``source`` and ``target`` (points
    expanded by multiplicity); ``None`` on either side stands for the
    diagonal projection of the other point. ``cost`` is the sum of p-th
    powers, so the distance is ``cost ** (1/p)``.
    """

    source: np.ndarray
    target: np.ndarray
    pairs: tuple[tuple[int | None, int | None], ...]
    cost: float
    p: float

    @property
    def distance(self) -> float:
        return float(self.cost ** (1.0 / self.p))

    def to_dict(self) -> dict:
        def pt(arr, idx, other):
            if idx is not None:
                return {"birth": float(arr[idx, 0]), "death": float(arr[idx, 1]), "diagonal": False}
            mid = float(other.sum() / 2.0)
            return {"birth": mid, "death": mid, "diagonal": True}

        out = []
        for i, j in self.pairs:
            s_other = self.target[j] if j is not None else None
            t_other = self.source[i] if i is not None else None
            out.append({"source": pt(self.source, i, s_other), "target": pt(self.target, j, t_other)})
        return {"p": self.p, "cost": self.cost, "pairs": out}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def augmented_cost(x: np.ndarray, y: np.ndarray, p: float) -> np.ndarray:
    """(n1 + n2)-square cost matrix with diagonal slots on both sides."""
    n1, n2 = len(x), len(y)
    n = n1 + n2
    c = np.zeros((n, n))
    if n1 and n2:
        c[:n1, :n2] = np.max(np.abs(x[:, None, :] - y[None, :, :]), axis=2) ** p
    if n1:
        c[:n1, n2:] = (diagonal_distance(x) ** p)[:, None]
    if n2:
        c[n1:, :n2] = (diagonal_distance(y) ** p)[None, :]
    return c


def optimal_matching(pd1: PersistenceDiagram, pd2: PersistenceDiagram, p: float = 2) -> Matching:
    p = _check_degree(p)
    x, y = pd1.expanded(), pd2.expanded()
    n1, n2 = len(x), len(y)
    c = augmented_cost(x, y, p)
    col = hungarian(c)
    pairs = []
    total = 0.0
    for i, j in enumerate(col):
        if i < n1 or j < n2:
            total += c[i, j]
            pairs.append((i if i < n1 else None, int(j) if j < n2 else None))
    return Matching(x, y, tuple(pairs), float(total), p)


def wd_between(pd1: PersistenceDiagram, pd2: PersistenceDiagram, p: float = 2) -> float:
    """Degree-p Wasserstein distance between two diagrams.

    Arguments are put in a canonical order first so that swapping them
    returns the identical float.
    """
    a, b = (pd1, pd2) if pd1.points <= pd2.points else (pd2, pd1)
    return optimal_matching(a, b, p).distance


def wd_distance_matrix(diagrams, p: float = 2) -> np.ndarray:
    k = len(diagrams)
    out = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            out[i, j] = out[j, i] = wd_between(diagrams[i], diagrams[j], p)
    return out
