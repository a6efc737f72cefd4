"""Noise models turning exact density values into noisy realizations.

A noisy evaluation is m~ = H(p, eps) for one of the supported perturbation
kinds.  The rectified and folded Gaussian models admit closed-form mean
functions, implemented here and used as oracles throughout the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr  # standard normal cdf, |err| < 1e-15

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


def _phi(z):
    return np.exp(-0.5 * np.square(z)) / _SQRT_2PI


@dataclass(frozen=True)
class NoiseModel:
    """One of: none, multiplicative-exponential(rate), rectified-gaussian(sigma),
    folded-gaussian(sigma), log-additive-gaussian(sigma)."""

    kind: str
    rate: float = 1.0    # multiplicative-exponential
    sigma: float = 0.05  # additive kinds

    KINDS = (
        "none",
        "multiplicative-exponential",
        "rectified-gaussian",
        "folded-gaussian",
        "log-additive-gaussian",
    )

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.kind == "multiplicative-exponential" and not self.rate > 0:
            raise ValueError("rate must be > 0")
        if self.kind in ("rectified-gaussian", "folded-gaussian", "log-additive-gaussian"):
            if not self.sigma > 0:
                raise ValueError("sigma must be > 0")


def none_noise() -> NoiseModel:
    return NoiseModel("none")


def multiplicative_exponential(rate: float = 1.0) -> NoiseModel:
    return NoiseModel("multiplicative-exponential", rate=rate)


def rectified_gaussian(sigma: float) -> NoiseModel:
    return NoiseModel("rectified-gaussian", sigma=sigma)


def folded_gaussian(sigma: float) -> NoiseModel:
    return NoiseModel("folded-gaussian", sigma=sigma)


def log_additive_gaussian(sigma: float) -> NoiseModel:
    return NoiseModel("log-additive-gaussian", sigma=sigma)


def perturb(p_val: float, noise: NoiseModel, rng: np.random.Generator) -> float:
    """One noisy realization of a density value; the output is always >= 0.

    log-additive-gaussian is defined only for p_val > 0.
    """
    if p_val < 0:
        raise ValueError("p_val must be >= 0")
    kind = noise.kind
    if kind == "none":
        return p_val
    if kind == "multiplicative-exponential":
        return p_val * rng.standard_exponential() / noise.rate
    if kind == "rectified-gaussian":
        return max(0.0, p_val + noise.sigma * rng.standard_normal())
    if kind == "folded-gaussian":
        return abs(p_val + noise.sigma * rng.standard_normal())
    # log-additive-gaussian
    if p_val == 0.0:
        raise ValueError("log-additive-gaussian noise requires p_val > 0")
    return p_val * math.exp(noise.sigma * rng.standard_normal())


def perturb_many(p_vals: np.ndarray, noise: NoiseModel, rng: np.random.Generator) -> np.ndarray:
    """Vectorized perturb with one independent draw per entry."""
    p = np.asarray(p_vals, dtype=float)
    if np.any(p < 0):
        raise ValueError("p_vals must be >= 0")
    kind = noise.kind
    if kind == "none":
        return p.copy()
    if kind == "multiplicative-exponential":
        return p * rng.standard_exponential(p.shape) / noise.rate
    if kind == "rectified-gaussian":
        return np.maximum(0.0, p + noise.sigma * rng.standard_normal(p.shape))
    if kind == "folded-gaussian":
        return np.abs(p + noise.sigma * rng.standard_normal(p.shape))
    if np.any(p == 0.0):
        raise ValueError("log-additive-gaussian noise requires p_vals > 0")
    return p * np.exp(noise.sigma * rng.standard_normal(p.shape))


def rectified_mean(p_val, sigma: float):
    """E[max(0, p + eps)] for eps ~ N(0, sigma^2).

    Equals p * Phi(p/sigma) + sigma * phi(p/sigma); accepts arrays.
    """
    if not sigma > 0:
        raise ValueError("sigma must be > 0")
    z = np.asarray(p_val, dtype=float) / sigma
    out = np.asarray(p_val) * ndtr(z) + sigma * _phi(z)
    return float(out) if np.isscalar(p_val) or out.ndim == 0 else out


def folded_mean(p_val, sigma: float):
    """E[|p + eps|] for eps ~ N(0, sigma^2).

    Equals sigma*sqrt(2/pi)*exp(-p^2/(2 sigma^2)) + p*(1 - 2*Phi(-p/sigma)).
    """
    if not sigma > 0:
        raise ValueError("sigma must be > 0")
    p = np.asarray(p_val, dtype=float)
    z = p / sigma
    out = sigma * _SQRT_2_OVER_PI * np.exp(-0.5 * z * z) + p * (1.0 - 2.0 * ndtr(-z))
    return float(out) if np.isscalar(p_val) or out.ndim == 0 else out


def mean_function(p_val, noise: NoiseModel):
    """Mean of the noisy realization as a function of the exact value."""
    kind = noise.kind
    if kind == "none":
        return np.asarray(p_val, dtype=float) + 0.0 if not np.isscalar(p_val) else float(p_val)
    if kind == "multiplicative-exponential":
        scaled = np.asarray(p_val, dtype=float) / noise.rate
        return float(scaled) if np.isscalar(p_val) else scaled
    if kind == "rectified-gaussian":
        return rectified_mean(p_val, noise.sigma)
    if kind == "folded-gaussian":
        return folded_mean(p_val, noise.sigma)
    # log-additive: E[p e^eps] = p exp(sigma^2/2)
    scaled = np.asarray(p_val, dtype=float) * math.exp(0.5 * noise.sigma**2)
    return float(scaled) if np.isscalar(p_val) else scaled


NOISES = {
    "none": lambda: none_noise(),
    "exp1": lambda: multiplicative_exponential(1.0),
    "rectified-0.01": lambda: rectified_gaussian(0.01),
    "rectified-0.05": lambda: rectified_gaussian(0.05),
}
