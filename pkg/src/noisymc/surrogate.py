"""k-nearest-neighbor regression surrogate over a growing design-node set.

The predictor is the mean value of the K nearest design nodes (squared
Euclidean distance, ties broken by insertion order), floored at delta > 0 so
acceptance ratios stay finite.  Until K nodes exist the surrogate is the
uniform fallback value u, matching a flat initialization.

Brute-force search defines correctness; an optional kd-tree accelerator
(scipy) must agree with it exactly on tie-free inputs.
"""

from __future__ import annotations

import numpy as np

from .domain import BoundedDomain, DomainError

try:  # accelerator only; brute force is the reference
    from scipy.spatial import cKDTree
except ImportError:  # pragma: no cover
    cKDTree = None

UNIFORM_FALLBACK = 1.0
DEFAULT_FLOOR = 1e-3 * UNIFORM_FALLBACK


class DesignSet:
    """Ordered (theta, value) nodes with preallocated growth."""

    def __init__(self, dim: int):
        self.dim = dim
        self._pts = np.empty((64, dim))
        self._vals = np.empty(64)
        self._n = 0

    def __len__(self) -> int:
        return self._n

    @property
    def points(self) -> np.ndarray:
        return self._pts[: self._n]

    @property
    def values(self) -> np.ndarray:
        return self._vals[: self._n]

    def append(self, theta: np.ndarray, value: float) -> None:
        if value < 0:
            raise ValueError("design values must be >= 0")
        if self._n == self._pts.shape[0]:
            self._pts = np.concatenate([self._pts, np.empty_like(self._pts)])
            self._vals = np.concatenate([self._vals, np.empty_like(self._vals)])
        self._pts[self._n] = theta
        self._vals[self._n] = value
        self._n += 1


def nearest_k(design: DesignSet, theta, k: int, upto: int | None = None) -> np.ndarray:
    """Indices of the k nearest nodes, ordered by (distance, insertion index).

    Exact search; equidistant nodes resolve to the earlier-inserted index.
    `upto` restricts the search to the first `upto` nodes (snapshot queries).
    """
    n = len(design) if upto is None else min(upto, len(design))
    if k < 1 or k > n:
        raise ValueError(f"need 1 <= k <= design size, got k={k}, size={n}")
    theta = np.asarray(theta, dtype=float)
    d2 = np.square(design.points[:n] - theta).sum(axis=1)
    if k == n:
        sel = np.arange(n)
    else:
        part = np.argpartition(d2, k - 1)[:k]
        kth = d2[part].max()
        strict = np.flatnonzero(d2 < kth)
        need = k - strict.size
        ties = np.flatnonzero(d2 == kth)[:need]
        sel = np.concatenate([strict, ties])
    order = np.lexsort((sel, d2[sel]))
    return sel[order]


class KnnSurrogate:
    """Mutable kNN surrogate; insert() grows the design in place."""

    def __init__(
        self,
        domain: BoundedDomain,
        k: int = 1,
        floor: float = DEFAULT_FLOOR,
        fallback: float = UNIFORM_FALLBACK,
        accelerate: bool = False,
    ):
        if k < 1:
            raise ValueError("k must be >= 1")
        if not floor > 0:
            raise ValueError("floor must be > 0")
        self.domain = domain
        self.k = k
        self.floor = floor
        self.fallback = fallback
        self.design = DesignSet(domain.dim)
        self._accel = _KdAccel(domain.dim) if (accelerate and cKDTree is not None) else None

    def __len__(self) -> int:
        return len(self.design)

    def insert(self, theta, value: float) -> "KnnSurrogate":
        theta = np.asarray(theta, dtype=float)
        if not self.domain.contains(theta):
            raise DomainError("design nodes must lie inside the domain")
        self.design.append(theta, float(value))
        if self._accel is not None:
            self._accel.notify_size(len(self.design), self.design)
        return self

    def predict(self, theta, upto: int | None = None) -> float:
        theta = np.asarray(theta, dtype=float)
        if not self.domain.contains(theta):
            raise DomainError("prediction point outside domain")
        n = len(self.design) if upto is None else min(upto, len(self.design))
        if n < self.k:
            return self.fallback
        if self._accel is not None and upto is None:
            idx = self._accel.query(self.design, theta, self.k)
        else:
            idx = nearest_k(self.design, theta, self.k, upto=n)
        return max(self.floor, float(self.design.values[idx].mean()))

    def predict_or_zero(self, theta, upto: int | None = None) -> float:
        """Prediction inside the domain, exact 0 outside (density truncation)."""
        theta = np.asarray(theta, dtype=float)
        if not self.domain.contains(theta):
            return 0.0
        return self.predict(theta, upto=upto)

    def save(self, path) -> None:
        """One node per line: whitespace-separated coordinates then value."""
        with open(path, "w") as fh:
            for pt, val in zip(self.design.points, self.design.values):
                fh.write(" ".join(format(c, ".17g") for c in pt) + " " + format(val, ".17g") + "\n")

    @classmethod
    def load(cls, path, domain: BoundedDomain, k: int = 1, **kwargs) -> "KnnSurrogate":
        surr = cls(domain, k=k, **kwargs)
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                parts = [float(tok) for tok in line.split()]
                if len(parts) != domain.dim + 1:
                    raise ValueError(f"expected {domain.dim} coordinates + value per line")
                surr.insert(np.array(parts[:-1]), parts[-1])
        return surr


class _KdAccel:
    """kd-tree over a frozen prefix plus brute force over the growing tail.

    The tree is rebuilt when the tail outgrows max(64, n/4); queried indices
    are re-ranked with the same squared distances as the brute-force path, so
    results are identical on tie-free inputs.
    """

    def __init__(self, dim: int):
        self.dim = dim
        self._tree = None
        self._tree_n = 0

    def notify_size(self, n: int, design: DesignSet) -> None:
        if n - self._tree_n > max(64, n // 4):
            self._tree = cKDTree(design.points[:n].copy())
            self._tree_n = n

    def query(self, design: DesignSet, theta: np.ndarray, k: int) -> np.ndarray:
        n = len(design)
        if self._tree is None or self._tree_n < k:
            return nearest_k(design, theta, k)
        kq = min(k, self._tree_n)
        _, tree_idx = self._tree.query(theta, k=kq)
        tree_idx = np.atleast_1d(tree_idx)
        tail_idx = np.arange(self._tree_n, n)
        cand = np.concatenate([tree_idx, tail_idx])
        d2 = np.square(design.points[cand] - theta).sum(axis=1)
        order = np.lexsort((cand, d2))[:k]
        return cand[order]
