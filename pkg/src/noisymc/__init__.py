"""Surrogate-accelerated Monte Carlo for noisy, costly target densities.

Core pieces: bounded-domain targets with pluggable noise models, a budgeted
noisy oracle, a kNN regression surrogate, five samplers (pseudo-marginal MH,
MC-within-MH, MH on a refined surrogate, delayed-acceptance PM-MH, and noisy
deterministic-mixture IS), a likelihood-free (ABC) evaluator, a double
cart-pole return oracle, and quadrature/moment diagnostics with a benchmark
CLI.
"""

from .abc import (ABCKernel, AbcOracle, Simulator, abc_noisy_eval,
                  abc_target_pairs, gaussian_mean_simulator)
from .cartpole import (CartPoleParams, EpisodeResult, LinearPolicy,
                       ReturnOracle, run_episode, return_oracle,
                       sample_initial_state, step)
from .domain import BoundedDomain, DomainError, box
from .estimators import (GroundTruth, MomentEstimate, chain_moments,
                         quadrature_integral, quadrature_moments,
                         rel_median_sq_error, weighted_moments)
from .noise import (NoiseModel, folded_gaussian, folded_mean,
                    log_additive_gaussian, mean_function,
                    multiplicative_exponential, none_noise, perturb,
                    perturb_many, rectified_gaussian, rectified_mean)
from .oracle import BudgetExhausted, BudgetLedger, NoisyOracle, empirical_mean_var
from .proposals import GaussianProposal, RandomWalkProposal, UniformProposal
from .samplers import (Chain, DegenerateWeightsError, WeightedSampleSet,
                       da_pm_mh, mh_s, n_dis, noisy_is, noisy_mh,
                       normalize_weights, sir_resample)
from .surrogate import DesignSet, KnnSurrogate, nearest_k
from .targets import (TargetDensity, banana_density, bimodal_density,
                      eval_banana, eval_bimodal, eval_gaussmix_1d,
                      gaussmix_1d_density)

__version__ = "0.1.0"
