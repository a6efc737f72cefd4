"""Likelihood-free (ABC) noisy evaluator.

The noisy target value at theta is the average kernel discrepancy between the
observed data and n_pseudo simulated datasets, optionally corrected by
prior/proposal when theta is drawn from a generic proposal.  An adapter makes
this stream usable as a NoisyOracle by any sampler, with one oracle-unit per
evaluation and the simulator draws logged separately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .domain import BoundedDomain
from .oracle import BudgetLedger
from .proposals import GaussianProposal, UniformProposal


@dataclass(frozen=True)
class Simulator:
    """Forward model: iid pseudo-datasets given theta, plus an evaluable prior."""

    draw_batch: Callable[[np.ndarray, int, np.random.Generator], np.ndarray]
    prior: GaussianProposal | UniformProposal
    data_dim: int = 1


def gaussian_mean_simulator(likelihood_sd: float = 1.0,
                            prior_sd: float = 10.0) -> Simulator:
    """Conjugate toy: y | theta ~ N(theta, sd^2), scalar theta, prior N(0, prior_sd^2)."""

    def draw_batch(theta, n, rng):
        return rng.normal(float(theta[0]), likelihood_sd, size=(n, 1))

    return Simulator(draw_batch, GaussianProposal([0.0], [prior_sd**2]), data_dim=1)


@dataclass(frozen=True)
class ABCKernel:
    """Discrepancy kernel h(y_true | y, eps); kind is "indicator" or "gaussian".

    indicator: 1 if ||y_true - y|| < eps else 0.
    gaussian:  exp(-||y_true - y||^2 / (2 eps^2)), normalization omitted
               (samplers only use ratios).
    """

    kind: str
    eps: float

    def __post_init__(self):
        if self.kind not in ("indicator", "gaussian"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if not self.eps > 0:
            raise ValueError("eps must be > 0")

    def values(self, y_true: np.ndarray, ys: np.ndarray) -> np.ndarray:
        d2 = np.square(np.atleast_2d(ys) - np.asarray(y_true, dtype=float)).sum(axis=1)
        if self.kind == "indicator":
            return (d2 < self.eps**2).astype(float)
        return np.exp(-0.5 * d2 / self.eps**2)


def abc_noisy_eval(
    sim: Simulator,
    kernel: ABCKernel,
    y_true,
    theta,
    n_pseudo: int,
    rng: np.random.Generator,
    q: UniformProposal | GaussianProposal | None = None,
) -> float:
    """Average kernel value over n_pseudo simulated datasets at theta.

    With a proposal q supplied, the value is multiplied by g(theta)/q(theta)
    so the mean function stays proportional to the ABC target.
    """
    if n_pseudo < 1:
        raise ValueError("n_pseudo must be >= 1")
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    y_true = np.atleast_1d(np.asarray(y_true, dtype=float))
    ys = sim.draw_batch(theta, n_pseudo, rng)
    val = float(kernel.values(y_true, ys).mean())
    if q is not None:
        val *= sim.prior.pdf(theta) / q.pdf(theta)
    return val


def abc_target_pairs(
    sim: Simulator,
    kernel: ABCKernel,
    y_true,
    t_draws: int,
    n_pseudo: int,
    rng: np.random.Generator,
    proposal: UniformProposal | GaussianProposal | None = None,
) -> list[tuple[np.ndarray, float]]:
    """T pairs (theta_t, m~_eps(theta_t)); theta from the prior, or from a
    proposal with the g/q correction applied."""
    pairs = []
    for _ in range(t_draws):
        if proposal is None:
            theta = np.atleast_1d(sim.prior.sample(rng))
            val = abc_noisy_eval(sim, kernel, y_true, theta, n_pseudo, rng)
        else:
            theta = np.atleast_1d(proposal.sample(rng))
            val = abc_noisy_eval(sim, kernel, y_true, theta, n_pseudo, rng, q=proposal)
        pairs.append((theta, val))
    return pairs


class AbcOracle:
    """NoisyOracle-compatible ABC evaluator.

    One call = one oracle-unit against the ledger plus n_pseudo simulator
    draws, logged separately in simulator_units.  The correction proposal
    defaults to uniform-on-domain, making the mean function proportional to
    the kernel-smoothed posterior.
    """

    def __init__(
        self,
        sim: Simulator,
        kernel: ABCKernel,
        y_true,
        n_pseudo: int,
        domain: BoundedDomain,
        rng: np.random.Generator | None = None,
        ledger: BudgetLedger | None = None,
    ):
        self.sim = sim
        self.kernel = kernel
        self.y_true = np.atleast_1d(np.asarray(y_true, dtype=float))
        self.n_pseudo = n_pseudo
        self.domain = domain
        self.rng = rng if rng is not None else np.random.default_rng()
        self.ledger = ledger if ledger is not None else BudgetLedger()
        self.q = UniformProposal(domain)
        self.simulator_units = 0

    @property
    def dimension(self) -> int:
        return self.domain.dim

    def eval(self, theta) -> float:
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if not self.domain.contains(theta):
            return 0.0
        self.ledger.charge(1)
        self.simulator_units += self.n_pseudo
        return abc_noisy_eval(self.sim, self.kernel, self.y_true, theta,
                              self.n_pseudo, self.rng, q=self.q)

    __call__ = eval


def smoothed_posterior_moments(
    sim_likelihood_sd: float,
    prior_sd: float,
    y_true: float,
    eps: float,
) -> tuple[float, float]:
    """Gaussian-kernel ABC posterior of the conjugate toy: N(mean, var).

    The kernel widens the likelihood variance by eps^2.
    """
    like_var = sim_likelihood_sd**2 + eps**2
    prior_var = prior_sd**2
    post_var = 1.0 / (1.0 / prior_var + 1.0 / like_var)
    post_mean = post_var * y_true / like_var
    return post_mean, post_var


def abc_mean_function_1d(
    sim: Simulator,
    kernel: ABCKernel,
    y_true: float,
    thetas: np.ndarray,
    likelihood_sd: float = 1.0,
    y_grid_half_width: float = 12.0,
    y_grid_points: int = 4000,
) -> np.ndarray:
    """Deterministic quadrature of E[m~_eps(theta)] over a 1-d theta grid.

    Integrates kernel x likelihood over the data space through the same
    kernel code path used by the stochastic evaluator, times the prior.
    Used as the bias oracle for the conjugate toy.
    """
    thetas = np.asarray(thetas, dtype=float)
    out = np.empty(thetas.size)
    for i, th in enumerate(thetas):
        ys = np.linspace(th - y_grid_half_width, th + y_grid_half_width, y_grid_points)
        dy = ys[1] - ys[0]
        h = kernel.values(np.array([y_true]), ys[:, None])
        z = (ys - th) / likelihood_sd
        like = np.exp(-0.5 * z * z) / (likelihood_sd * math.sqrt(2.0 * math.pi))
        out[i] = float((h * like).sum() * dy) * sim.prior.pdf(np.array([th]))
    return out
