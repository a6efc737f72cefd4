"""Noisy oracle with budget accounting.

Every sampler draws its target evaluations through a NoisyOracle; the
attached BudgetLedger is the single source of truth for evaluation counts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .noise import NoiseModel, none_noise, perturb
from .targets import TargetDensity


class BudgetExhausted(RuntimeError):
    """An oracle evaluation was requested beyond the configured budget."""


@dataclass
class BudgetLedger:
    """Counts noisy-oracle evaluations against a maximum E (None = unlimited)."""

    budget: int | None = None
    spent: int = 0

    def charge(self, n: int = 1) -> None:
        if self.budget is not None and self.spent + n > self.budget:
            raise BudgetExhausted(f"budget {self.budget} exhausted (spent {self.spent}, need {n})")
        self.spent += n

    def can_spend(self, n: int = 1) -> bool:
        return self.budget is None or self.spent + n <= self.budget

    @property
    def remaining(self) -> float:
        return float("inf") if self.budget is None else self.budget - self.spent


class NoisyOracle:
    """Evaluates m~(theta) = H(p(theta), eps), charging one unit per call.

    Outside the bounded domain the target is identically 0 and the oracle
    returns 0.0 without consuming randomness or budget (hard truncation).
    """

    def __init__(
        self,
        target: TargetDensity,
        noise: NoiseModel | None = None,
        rng: np.random.Generator | None = None,
        ledger: BudgetLedger | None = None,
    ):
        self.target = target
        self.noise = noise if noise is not None else none_noise()
        self.rng = rng if rng is not None else np.random.default_rng()
        self.ledger = ledger if ledger is not None else BudgetLedger()

    @property
    def domain(self):
        return self.target.domain

    @property
    def dimension(self) -> int:
        return self.target.dimension

    @property
    def eval_count(self) -> int:
        return self.ledger.spent

    def eval(self, theta) -> float:
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if not self.domain.contains(theta):
            return 0.0
        self.ledger.charge(1)
        return perturb(self.target.eval(theta), self.noise, self.rng)

    __call__ = eval


def empirical_mean_var(oracle: NoisyOracle, theta, m: int) -> tuple[float, float]:
    """Sample mean and unbiased sample variance of m independent draws at theta.

    Charges m evaluations.
    """
    if m < 2:
        raise ValueError("need m >= 2 draws")
    draws = np.array([oracle.eval(theta) for _ in range(m)])
    return float(draws.mean()), float(draws.var(ddof=1))
