"""Proposal distributions for the MH and IS samplers."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domain import BoundedDomain


@dataclass(frozen=True)
class RandomWalkProposal:
    """Isotropic Gaussian random walk, N(. | center, scale^2 I); symmetric."""

    scale: float
    is_symmetric: bool = True

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("scale must be > 0")

    def sample(self, rng: np.random.Generator, center: np.ndarray) -> np.ndarray:
        return center + self.scale * rng.standard_normal(center.shape)

    def logpdf(self, theta: np.ndarray, center: np.ndarray) -> float:
        d = theta.size
        z2 = float(np.square((theta - center) / self.scale).sum())
        return -0.5 * z2 - d * math.log(self.scale * math.sqrt(2.0 * math.pi))


class UniformProposal:
    """Independent uniform proposal over the bounded domain."""

    def __init__(self, domain: BoundedDomain):
        self.domain = domain
        self._logpdf = -math.log(domain.volume)

    def sample(self, rng: np.random.Generator, n: int | None = None) -> np.ndarray:
        return self.domain.sample(rng, n)

    def pdf(self, theta) -> float:
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        return math.exp(self._logpdf) if self.domain.contains(theta) else 0.0

    def pdf_many(self, thetas: np.ndarray) -> np.ndarray:
        inside = self.domain.contains_all(np.asarray(thetas, dtype=float))
        return np.where(inside, math.exp(self._logpdf), 0.0)


class GaussianProposal:
    """Independent Gaussian proposal with diagonal covariance."""

    def __init__(self, mean, variances):
        self.mean = np.atleast_1d(np.asarray(mean, dtype=float))
        self.variances = np.atleast_1d(np.asarray(variances, dtype=float))
        if self.variances.shape != self.mean.shape or np.any(self.variances <= 0):
            raise ValueError("variances must match mean shape and be > 0")
        self._norm = 1.0 / np.sqrt(np.prod(2.0 * math.pi * self.variances))

    def sample(self, rng: np.random.Generator, n: int | None = None) -> np.ndarray:
        size = self.mean.shape if n is None else (n, self.mean.size)
        return self.mean + np.sqrt(self.variances) * rng.standard_normal(size)

    def pdf(self, theta) -> float:
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        z2 = float((np.square(theta - self.mean) / self.variances).sum())
        return self._norm * math.exp(-0.5 * z2)

    def pdf_many(self, thetas: np.ndarray) -> np.ndarray:
        thetas = np.asarray(thetas, dtype=float)
        z2 = (np.square(thetas - self.mean) / self.variances).sum(axis=-1)
        return self._norm * np.exp(-0.5 * z2)
