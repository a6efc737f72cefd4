"""Benchmark target densities, hard-truncated to their bounded domains.

All densities are unnormalized and return exactly 0 outside the domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .domain import BoundedDomain, DomainError, box


@dataclass(frozen=True)
class TargetDensity:
    """Deterministic unnormalized density on a bounded domain."""

    dimension: int
    domain: BoundedDomain
    fn: Callable[[np.ndarray], float]
    name: str = "target"
    vector_fn: Callable[[np.ndarray], np.ndarray] | None = None

    def eval(self, theta) -> float:
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if theta.shape != (self.dimension,):
            raise DomainError(
                f"{self.name}: expected dimension {self.dimension}, got shape {theta.shape}"
            )
        if not self.domain.contains(theta):
            return 0.0
        val = float(self.fn(theta))
        if not math.isfinite(val) or val < 0.0:
            raise ValueError(f"{self.name}: density must be finite and >= 0, got {val}")
        return val

    def __call__(self, theta) -> float:
        return self.eval(theta)

    def eval_grid(self, thetas: np.ndarray) -> np.ndarray:
        """Vectorized evaluation over an (..., d) array, 0 outside the domain."""
        thetas = np.asarray(thetas, dtype=float)
        if self.vector_fn is not None:
            vals = self.vector_fn(thetas)
        else:
            flat = thetas.reshape(-1, self.dimension)
            vals = np.array([self.fn(t) for t in flat]).reshape(thetas.shape[:-1])
        return np.where(self.domain.contains_all(thetas), vals, 0.0)


# Banana constants. The first quadratic's constant and the linear coefficient
# were fixed by matching the published moment ground truths on [-10,10]^2
# (mean [-0.48, 0], diag-cov [1.38, 8.90]); see the quadrature oracle tests.
BANANA_CONST = 4.0
BANANA_B = 10.0
BANANA_ETA0 = 4.0
BANANA_ETA1 = 3.5
BANANA_ETA2 = 3.5


def _banana_exponent(t1, t2):
    q = BANANA_CONST - BANANA_B * t1 - t2 * t2
    return (
        -(q * q) / (2.0 * BANANA_ETA0**2)
        - t1 * t1 / (2.0 * BANANA_ETA1**2)
        - t2 * t2 / (2.0 * BANANA_ETA2**2)
    )


def banana_density() -> TargetDensity:
    """Two-dimensional banana-shaped density on [-10, 10]^2."""
    return TargetDensity(
        2,
        box([-10.0, -10.0], [10.0, 10.0]),
        lambda th: math.exp(_banana_exponent(th[0], th[1])),
        name="banana",
        vector_fn=lambda ths: np.exp(_banana_exponent(ths[..., 0], ths[..., 1])),
    )


def eval_banana(theta) -> float:
    return banana_density().eval(theta)


_BIMODAL_VAR = 9.0  # 3^2 isotropic components


def _bimodal_val(ths):
    norm = 1.0 / (2.0 * math.pi * _BIMODAL_VAR)
    d2p = (ths[..., 0] - 10.0) ** 2 + ths[..., 1] ** 2
    d2m = (ths[..., 0] + 10.0) ** 2 + ths[..., 1] ** 2
    return 0.5 * norm * (np.exp(-d2p / (2.0 * _BIMODAL_VAR)) + np.exp(-d2m / (2.0 * _BIMODAL_VAR)))


def bimodal_density() -> TargetDensity:
    """Equal mixture of N([10,0], 9I) and N([-10,0], 9I) on [-20, 20]^2."""
    return TargetDensity(
        2,
        box([-20.0, -20.0], [20.0, 20.0]),
        lambda th: float(_bimodal_val(th)),
        name="bimodal",
        vector_fn=_bimodal_val,
    )


def eval_bimodal(theta) -> float:
    return bimodal_density().eval(theta)


# 1-d illustrative mixture: the second parameter of each component is its
# variance (density-notation convention), so component 2 has sd sqrt(2).
_G1_MEAN, _G1_VAR = -1.0, 1.0
_G2_MEAN, _G2_VAR = 5.0, 2.0


def _gauss(x, mean, var):
    return np.exp(-((x - mean) ** 2) / (2.0 * var)) / math.sqrt(2.0 * math.pi * var)


def _gaussmix_val(ths):
    x = ths[..., 0]
    return 0.5 * _gauss(x, _G1_MEAN, _G1_VAR) + 0.5 * _gauss(x, _G2_MEAN, _G2_VAR)


def gaussmix_1d_density() -> TargetDensity:
    """0.5 N(-1, 1) + 0.5 N(5, 2) restricted to [-8, 17]."""
    return TargetDensity(
        1,
        box([-8.0], [17.0]),
        lambda th: float(_gaussmix_val(th)),
        name="gaussmix-1d",
        vector_fn=_gaussmix_val,
    )


def eval_gaussmix_1d(theta) -> float:
    """Scalar-friendly wrapper around the 1-d mixture."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    return gaussmix_1d_density().eval(theta)


TARGETS = {
    "banana": banana_density,
    "bimodal": bimodal_density,
    "gaussmix-1d": gaussmix_1d_density,
}
