"""Moment estimation, quadrature ground truths, and the benchmark error metric."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import BoundedDomain
from .samplers import Chain, WeightedSampleSet


@dataclass(frozen=True)
class MomentEstimate:
    mean: np.ndarray
    diag_cov: np.ndarray


@dataclass(frozen=True)
class GroundTruth:
    mean: np.ndarray
    diag_cov: np.ndarray
    provenance: str = "quadrature"   # "paper" or "quadrature"
    mass: float = float("nan")       # unnormalized integral over the domain


def chain_moments(chain: Chain, burn_in_fraction: float = 0.2) -> MomentEstimate:
    """Sample mean and per-coordinate sample variance of the post-burn-in states."""
    if not 0.0 <= burn_in_fraction < 1.0:
        raise ValueError("burn_in_fraction must be in [0, 1)")
    start = int(burn_in_fraction * len(chain))
    post = chain.states[start:]
    if post.shape[0] < 2:
        raise ValueError("need at least 2 post-burn-in states")
    return MomentEstimate(post.mean(axis=0), post.var(axis=0, ddof=1))


def weighted_moments(ws: WeightedSampleSet) -> MomentEstimate:
    """Self-normalized IS moments: sum w_n theta_n and sum w_n (theta_n - mean)^2."""
    w = ws.normalized_weights
    x = ws.samples
    mean = (w[:, None] * x).sum(axis=0)
    diag = (w[:, None] * np.square(x - mean)).sum(axis=0)
    return MomentEstimate(mean, diag)


def _midpoint_grid(domain: BoundedDomain, n_per_dim: int):
    axes = []
    for lo, hi in zip(domain.lower, domain.upper):
        step = (hi - lo) / n_per_dim
        axes.append(lo + step * (np.arange(n_per_dim) + 0.5))
    return axes


def quadrature_moments(
    density, domain: BoundedDomain, grid_points_per_dim: int = 2000
) -> GroundTruth:
    """Normalized mean and diagonal covariance by midpoint-rule tensor quadrature.

    `density` maps an (..., d) array of points to nonnegative values
    (a TargetDensity's eval_grid, or any vectorized callable).
    """
    if grid_points_per_dim < 64:
        raise ValueError("grid_points_per_dim must be >= 64")
    d = domain.dim
    if d > 2:
        raise ValueError("tensor-grid quadrature supported for dimension <= 2 only")
    axes = _midpoint_grid(domain, grid_points_per_dim)
    cell = np.prod((domain.upper - domain.lower) / grid_points_per_dim)
    if d == 1:
        pts = axes[0][:, None]
        w = np.asarray(density(pts), dtype=float)
        if not w.sum() > 0:
            raise ValueError("density has zero total mass on the grid")
        total = w.sum()
        mean = np.array([(axes[0] * w).sum() / total])
        var = np.array([(np.square(axes[0] - mean[0]) * w).sum() / total])
        return GroundTruth(mean, var, mass=float(total * cell))
    g1, g2 = np.meshgrid(axes[0], axes[1], indexing="ij")
    pts = np.stack([g1, g2], axis=-1)
    w = np.asarray(density(pts), dtype=float)
    total = w.sum()
    if not total > 0:
        raise ValueError("density has zero total mass on the grid")
    m1 = (g1 * w).sum() / total
    m2 = (g2 * w).sum() / total
    v1 = (np.square(g1 - m1) * w).sum() / total
    v2 = (np.square(g2 - m2) * w).sum() / total
    return GroundTruth(np.array([m1, m2]), np.array([v1, v2]), mass=float(total * cell))


def quadrature_integral(density, domain: BoundedDomain, grid_points_per_dim: int = 2000) -> float:
    """Unnormalized integral of the density over the domain (midpoint rule)."""
    return quadrature_moments(density, domain, grid_points_per_dim).mass


@dataclass(frozen=True)
class RelMedianError:
    """Median over runs of squared error, normalized by ||truth||^2 per block.

    When a block's truth vector is zero the unnormalized median squared error
    is reported and the corresponding *_normalized flag is False.
    """

    mean_error: float
    var_error: float
    mean_normalized: bool = True
    var_normalized: bool = True

    def __iter__(self):
        return iter((self.mean_error, self.var_error))


def rel_median_sq_error(estimates, truth: GroundTruth) -> RelMedianError:
    """Benchmark error metric over a sequence of MomentEstimate."""
    estimates = list(estimates)
    if not estimates:
        raise ValueError("need at least one estimate")

    def block(get_est, truth_vec):
        t2 = float(np.square(truth_vec).sum())
        sq = np.array([float(np.square(get_est(e) - truth_vec).sum()) for e in estimates])
        if t2 > 0:
            return float(np.median(sq / t2)), True
        return float(np.median(sq)), False

    mean_err, mean_norm = block(lambda e: e.mean, truth.mean)
    var_err, var_norm = block(lambda e: e.diag_cov, truth.diag_cov)
    return RelMedianError(mean_err, var_err, mean_norm, var_norm)


def save_ground_truth(path, key: str, truth: GroundTruth) -> None:
    """Append or replace one cached truth, keyed by (target, noise, grid) string."""
    lines = {}
    try:
        with open(path) as fh:
            for line in fh:
                if line.strip():
                    k = line.split()[0]
                    lines[k] = line.rstrip("\n")
    except FileNotFoundError:
        pass
    vals = list(truth.mean) + list(truth.diag_cov) + [truth.mass]
    lines[key] = key + " " + truth.provenance + " " + " ".join(format(v, ".17g") for v in vals)
    with open(path, "w") as fh:
        for k in sorted(lines):
            fh.write(lines[k] + "\n")


def load_ground_truth(path, key: str, dim: int) -> GroundTruth | None:
    try:
        with open(path) as fh:
            for line in fh:
                parts = line.split()
                if parts and parts[0] == key:
                    vals = [float(v) for v in parts[2:]]
                    return GroundTruth(
                        np.array(vals[:dim]), np.array(vals[dim : 2 * dim]),
                        provenance=parts[1], mass=vals[2 * dim],
                    )
    except FileNotFoundError:
        return None
    return None
