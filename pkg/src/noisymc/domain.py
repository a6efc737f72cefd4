"""Bounded rectangular parameter domains."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class DomainError(ValueError):
    """A point lies outside the bounded domain where it is required inside."""


@dataclass(frozen=True)
class BoundedDomain:
    """Axis-aligned box in R^d with componentwise lower < upper bounds."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lo.ndim != 1 or lo.shape != hi.shape or lo.size < 1:
            raise ValueError("lower and upper must be 1-d arrays of equal length >= 1")
        if not np.all(lo < hi):
            raise ValueError("require lower[i] < upper[i] for all i")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def volume(self) -> float:
        return float(np.prod(self.upper - self.lower))

    def contains(self, theta) -> bool:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.dim,):
            raise DomainError(f"expected point of dimension {self.dim}, got shape {theta.shape}")
        return bool(np.all(theta >= self.lower) and np.all(theta <= self.upper))

    def contains_all(self, thetas: np.ndarray) -> np.ndarray:
        """Vectorized membership for an (n, d) array of points."""
        thetas = np.asarray(thetas, dtype=float)
        return np.all((thetas >= self.lower) & (thetas <= self.upper), axis=-1)

    def sample(self, rng: np.random.Generator, n: int | None = None) -> np.ndarray:
        if n is None:
            return rng.uniform(self.lower, self.upper)
        return rng.uniform(self.lower, self.upper, size=(n, self.dim))


def box(lower, upper) -> BoundedDomain:
    """Shorthand constructor accepting scalars or sequences."""
    lo = np.atleast_1d(np.asarray(lower, dtype=float))
    hi = np.atleast_1d(np.asarray(upper, dtype=float))
    if lo.size == 1 and hi.size > 1:
        lo = np.full(hi.size, lo[0])
    if hi.size == 1 and lo.size > 1:
        hi = np.full(lo.size, hi[0])
    return BoundedDomain(lo, hi)
