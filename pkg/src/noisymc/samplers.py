"""Noisy Monte Carlo samplers: plain noisy MH / IS and their
surrogate-accelerated variants (MH on a refined surrogate, delayed-acceptance
pseudo-marginal MH, and noisy deterministic-mixture importance sampling).

Budget discipline: all target evaluations go through the oracle's ledger.
Proposals falling outside the bounded domain are rejected without an oracle
call.  Accept decisions consume a uniform draw only when the acceptance ratio
is < 1, which makes matched-seed reduction tests exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import IO

import numpy as np

from .oracle import NoisyOracle
from .proposals import GaussianProposal, RandomWalkProposal, UniformProposal
from .surrogate import KnnSurrogate


class DegenerateWeightsError(ValueError):
    """All importance weights are zero; normalization is undefined."""


@dataclass
class Chain:
    """MCMC output: states, recycled noisy values, and bookkeeping counters."""

    states: np.ndarray               # (n_states, d), includes the initial state
    cached_values: np.ndarray        # recycled m~ per state (pseudo-marginal bookkeeping)
    accept_count: int
    budget_exhausted: bool = False
    info: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.states.shape[0]

    @property
    def iterations(self) -> int:
        return self.states.shape[0] - 1

    @property
    def acceptance_rate(self) -> float:
        return self.accept_count / max(1, self.iterations)


@dataclass
class WeightedSampleSet:
    """IS output with raw and normalized weights."""

    samples: np.ndarray
    raw_weights: np.ndarray
    normalized_weights: np.ndarray = field(init=False)
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.normalized_weights = normalize_weights(self.raw_weights)

    @property
    def z_estimate(self) -> float:
        """Unnormalized-mass estimate (1/N) sum of raw weights."""
        return float(self.raw_weights.mean())


def normalize_weights(raw) -> np.ndarray:
    """Scale nonnegative weights to sum to one."""
    raw = np.asarray(raw, dtype=float)
    if np.any(raw < 0):
        raise ValueError("weights must be >= 0")
    total = raw.sum()
    if not total > 0:
        raise DegenerateWeightsError("all weights are zero")
    return raw / total


def sir_resample(candidates: np.ndarray, weights, n: int, rng: np.random.Generator) -> np.ndarray:
    """Multinomial resampling: n draws with probabilities proportional to weights."""
    probs = normalize_weights(weights)
    idx = rng.choice(probs.size, size=n, p=probs)
    return np.asarray(candidates)[idx]


def _ratio_and_accept(m_now: float, m_bef: float, log_q_corr: float,
                      rng: np.random.Generator) -> tuple[float, bool]:
    """MH ratio (m_now/m_bef)*exp(log_q_corr) with zero handling, and the decision."""
    if m_now == 0.0 and m_bef == 0.0:
        return 1.0, True
    if m_now == 0.0:
        return 0.0, False
    if m_bef == 0.0:
        return np.inf, True
    log_ratio = np.log(m_now) - np.log(m_bef) + log_q_corr
    if log_ratio >= 0.0:
        return float(np.exp(min(log_ratio, 700.0))), True
    ratio = float(np.exp(log_ratio))
    return ratio, rng.uniform() < ratio


def _trace_line(fh: IO, t: int, state, prop, ratio: float, accepted: bool, spent: int) -> None:
    coords = " ".join(format(c, ".17g") for c in state)
    pcoords = " ".join(format(c, ".17g") for c in prop)
    fh.write(f"{t} {coords} {pcoords} {format(ratio, '.17g')} {int(accepted)} {spent}\n")


TRACE_COLUMNS = "iteration state... proposal... ratio accept oracle_calls"


def noisy_mh(
    oracle: NoisyOracle,
    proposal: RandomWalkProposal,
    theta0,
    t_iter: int,
    mode: str = "pseudo-marginal",
    rng: np.random.Generator | None = None,
    trace: IO | None = None,
) -> Chain:
    """Noisy Metropolis-Hastings.

    mode="pseudo-marginal" recycles the accepted state's noisy value;
    mode="mc-within-mh" redraws the current state's value every iteration
    (2 evaluations per in-domain proposal, no initial draw).
    """
    if mode not in ("pseudo-marginal", "mc-within-mh"):
        raise ValueError(f"unknown mode {mode!r}")
    rng = rng if rng is not None else np.random.default_rng()
    theta = np.atleast_1d(np.asarray(theta0, dtype=float))
    if not oracle.domain.contains(theta):
        raise ValueError("theta0 must lie inside the domain")
    pm = mode == "pseudo-marginal"

    states = [theta.copy()]
    accept_count = 0
    exhausted = False
    in_domain_props = 0
    refresh_draws = 0

    if pm:
        if not oracle.ledger.can_spend(1):
            return Chain(np.array(states), np.array([np.nan]), 0, budget_exhausted=True)
        m_bef = oracle.eval(theta)
    else:
        m_bef = np.nan
    cached = [m_bef]

    for t in range(1, t_iter + 1):
        prop = proposal.sample(rng, theta)
        if not oracle.domain.contains(prop):
            states.append(theta.copy())
            cached.append(m_bef)
            if trace is not None:
                _trace_line(trace, t, theta, prop, 0.0, False, oracle.ledger.spent)
            continue
        if not oracle.ledger.can_spend(1 if pm else 2):
            exhausted = True
            break
        if not pm:
            m_bef = oracle.eval(theta)
            refresh_draws += 1
        m_now = oracle.eval(prop)
        in_domain_props += 1
        log_q_corr = 0.0
        if not proposal.is_symmetric:
            log_q_corr = proposal.logpdf(theta, prop) - proposal.logpdf(prop, theta)
        ratio, accepted = _ratio_and_accept(m_now, m_bef, log_q_corr, rng)
        if accepted:
            theta = prop
            m_bef = m_now
            accept_count += 1
        states.append(theta.copy())
        cached.append(m_bef)
        if trace is not None:
            _trace_line(trace, t, theta, prop, ratio, accepted, oracle.ledger.spent)

    return Chain(
        np.array(states),
        np.array(cached),
        accept_count,
        budget_exhausted=exhausted,
        info={"in_domain_proposals": in_domain_props, "refresh_draws": refresh_draws},
    )


def noisy_is(
    oracle: NoisyOracle,
    proposal: UniformProposal | GaussianProposal,
    n: int,
    rng: np.random.Generator | None = None,
) -> WeightedSampleSet:
    """Noisy importance sampling: n iid proposal draws weighted by m~/q."""
    rng = rng if rng is not None else np.random.default_rng()
    if not oracle.ledger.can_spend(n):
        raise ValueError("oracle budget too small for n evaluations")
    samples = np.empty((n, oracle.dimension))
    raw = np.empty(n)
    for i in range(n):
        theta = np.atleast_1d(proposal.sample(rng))
        q = proposal.pdf(theta)
        samples[i] = theta
        raw[i] = oracle.eval(theta) / q
    return WeightedSampleSet(samples, raw)


def mh_s(
    oracle: NoisyOracle,
    surrogate: KnnSurrogate,
    proposal: RandomWalkProposal,
    theta0,
    t_iter: int,
    update_rule: str = "always",
    rng: np.random.Generator | None = None,
    trace: IO | None = None,
) -> tuple[Chain, KnnSurrogate]:
    """MH targeting an iteratively refined surrogate.

    The accept test runs entirely on the surrogate (no oracle call); after the
    test, the proposed point is evaluated and inserted into the design set
    with probability rho_update: 1 for update_rule="always", the iteration's
    acceptance event for "accept-prob" (coupled to the same uniform draw).
    Runs until t_iter iterations, stopping early once the budget is spent.
    """
    if update_rule not in ("always", "accept-prob"):
        raise ValueError(f"unknown update_rule {update_rule!r}")
    rng = rng if rng is not None else np.random.default_rng()
    theta = np.atleast_1d(np.asarray(theta0, dtype=float))
    if not oracle.domain.contains(theta):
        raise ValueError("theta0 must lie inside the domain")

    states = [theta.copy()]
    cached = [np.nan]
    accept_count = 0
    updates = 0
    exhausted = False

    for t in range(1, t_iter + 1):
        if not oracle.ledger.can_spend(1):
            exhausted = True
            break
        prop = proposal.sample(rng, theta)
        in_domain = oracle.domain.contains(prop)
        accepted = False
        ratio = 0.0
        if in_domain:
            s_now = surrogate.predict(prop)
            s_bef = surrogate.predict(theta)
            log_q_corr = 0.0
            if not proposal.is_symmetric:
                log_q_corr = proposal.logpdf(theta, prop) - proposal.logpdf(prop, theta)
            ratio, accepted = _ratio_and_accept(s_now, s_bef, log_q_corr, rng)
            if accepted:
                theta = prop
                accept_count += 1
        # out-of-domain proposals are auto-rejected and cannot be design nodes
        if in_domain and (update_rule == "always" or accepted):
            m_star = oracle.eval(prop)
            surrogate.insert(prop, m_star)
            updates += 1
        states.append(theta.copy())
        cached.append(np.nan)
        if trace is not None:
            _trace_line(trace, t, theta, prop, ratio, accepted, oracle.ledger.spent)

    return (
        Chain(np.array(states), np.array(cached), accept_count,
              budget_exhausted=exhausted, info={"updates": updates}),
        surrogate,
    )


def da_pm_mh(
    oracle: NoisyOracle,
    surrogate: KnnSurrogate,
    proposal: RandomWalkProposal,
    theta0,
    t_iter: int,
    t_surr: int = 1,
    rho_update: float = 1.0,
    rng: np.random.Generator | None = None,
    trace: IO | None = None,
) -> tuple[Chain, KnnSurrogate]:
    """Delayed-acceptance pseudo-marginal MH.

    Each iteration runs t_surr inner MH steps on the surrogate (no oracle
    calls); if every inner step rejected, the outer test is trivially accepted
    without a noisy realization.  Otherwise one fresh realization is drawn for
    the outer correction test, recycling the current state's value, and the
    fresh pair refines the surrogate with probability rho_update.
    """
    if t_surr < 1:
        raise ValueError("t_surr must be >= 1")
    rng = rng if rng is not None else np.random.default_rng()
    theta = np.atleast_1d(np.asarray(theta0, dtype=float))
    if not oracle.domain.contains(theta):
        raise ValueError("theta0 must lie inside the domain")

    states = [theta.copy()]
    accept_count = 0
    trivial = 0
    updates = 0
    outer_tests = 0
    exhausted = False

    if not oracle.ledger.can_spend(1):
        return (Chain(np.array(states), np.array([np.nan]), 0, budget_exhausted=True),
                surrogate)
    m_bef = oracle.eval(theta)
    cached = [m_bef]

    for t in range(1, t_iter + 1):
        if not oracle.ledger.can_spend(1):
            exhausted = True
            break
        xi = theta
        s_xi = surrogate.predict(xi)
        moved = False
        for _ in range(t_surr):
            cand = proposal.sample(rng, xi)
            if not oracle.domain.contains(cand):
                continue
            s_cand = surrogate.predict(cand)
            log_q_corr = 0.0
            if not proposal.is_symmetric:
                log_q_corr = proposal.logpdf(xi, cand) - proposal.logpdf(cand, xi)
            _, inner_ok = _ratio_and_accept(s_cand, s_xi, log_q_corr, rng)
            if inner_ok:
                xi, s_xi = cand, s_cand
                moved = True
        if not moved:
            # all inner steps rejected: trivially accepted, no noisy realization
            trivial += 1
            accept_count += 1
            states.append(theta.copy())
            cached.append(m_bef)
            if trace is not None:
                _trace_line(trace, t, theta, theta, 1.0, True, oracle.ledger.spent)
            continue
        m_now = oracle.eval(xi)
        outer_tests += 1
        s_theta = surrogate.predict(theta)
        ratio, accepted = _ratio_and_accept(m_now * s_theta, m_bef * s_xi, 0.0, rng)
        if accepted:
            theta = xi
            m_bef = m_now
            accept_count += 1
        if rho_update >= 1.0 or (rho_update > 0.0 and rng.uniform() < rho_update):
            surrogate.insert(xi, m_now)
            updates += 1
        states.append(theta.copy())
        cached.append(m_bef)
        if trace is not None:
            _trace_line(trace, t, theta, xi, ratio, accepted, oracle.ledger.spent)

    return (
        Chain(np.array(states), np.array(cached), accept_count,
              budget_exhausted=exhausted,
              info={"trivial_accepts": trivial, "outer_tests": outer_tests,
                    "updates": updates}),
        surrogate,
    )


def n_dis(
    oracle: NoisyOracle,
    surrogate: KnnSurrogate,
    proposal: UniformProposal | GaussianProposal,
    t_iter: int,
    n: int,
    l_aux: int | None = None,
    rng: np.random.Generator | None = None,
) -> tuple[WeightedSampleSet, KnnSurrogate]:
    """Noisy deterministic-mixture importance sampling.

    Per iteration: draw l_aux auxiliary points from q, weight them under the
    current surrogate, resample n of them, evaluate the noisy oracle there,
    and weight each evaluation by the temporal mixture of all past surrogate
    snapshots.  Snapshots are design-set prefix lengths, not copies.
    """
    rng = rng if rng is not None else np.random.default_rng()
    if l_aux is None:
        l_aux = 10 * n
    if n > l_aux // 10:
        raise ValueError("require n <= l_aux/10 (resampling needs n << L)")
    if not oracle.ledger.can_spend(n * t_iter):
        raise ValueError("oracle budget too small for n*t_iter evaluations")

    snapshot_sizes = [len(surrogate)]   # design size defining m_hat_{t-1}
    all_samples = []
    all_weights = []
    degenerate_rounds = 0

    for t in range(1, t_iter + 1):
        cands = np.atleast_2d(proposal.sample(rng, l_aux))
        qvals = proposal.pdf_many(cands)
        upto = snapshot_sizes[-1]
        gammas = np.array([surrogate.predict_or_zero(c, upto=upto) for c in cands]) / qvals
        if not gammas.sum() > 0:
            degenerate_rounds += 1
            gammas = np.ones(l_aux)
        picked = sir_resample(cands, gammas, n, rng)
        for theta in picked:
            m_val = oracle.eval(theta)
            denom = np.mean([surrogate.predict_or_zero(theta, upto=sz) for sz in snapshot_sizes])
            all_samples.append(theta)
            all_weights.append(m_val / denom if denom > 0 else 0.0)
            if oracle.domain.contains(theta):
                surrogate.insert(theta, m_val)
        snapshot_sizes.append(len(surrogate))

    ws = WeightedSampleSet(np.array(all_samples), np.array(all_weights),
                           info={"degenerate_rounds": degenerate_rounds,
                                 "snapshot_sizes": snapshot_sizes})
    return ws, surrogate
