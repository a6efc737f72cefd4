"""Double cart-pole environment: two rod poles hinged on a force-driven cart.

Physics: standard frictionless two-pole-on-cart Euler-Lagrange equations
(uniform rods, moment of inertia about the hinge 4/3 m l^2 with l the
half-length), integrated by classical RK4 at dt = 0.02 s with the force held
constant over the step.

Angle orientation convention: pole 1's angle is measured positive when the
pole leans toward -x, pole 2's toward +x.  This is a pure coordinate choice
(the mirror-symmetry, equilibrium, and energy contracts are unaffected); it
is the convention under which high-return linear policies carry the sign
pattern (theta_2 < 0, theta_4 > 0, theta_5 > 0) reported for this benchmark.

State vector: s = [x, x_dot, alpha1, alpha1_dot, alpha2, alpha2_dot].
An episode scores one reward point per step while |x| and both angles remain
within bounds; the return is the number of surviving steps, at most t_max.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domain import BoundedDomain, box
from .oracle import BudgetLedger

GRAVITY = 9.8

# orientation signs: pole-1 angle positive toward -x, pole-2 toward +x
_ORIENT = (-1.0, 1.0)


@dataclass(frozen=True)
class CartPoleParams:
    """Physical constants and episode configuration.

    The masses/lengths are the standard double-pole benchmark values; they are
    a documented design decision (see package README), not data.
    alpha1_init_half is printed asymmetrically in the benchmark description;
    symmetric_init=True replaces it with alpha2's interval.
    """

    cart_mass: float = 1.0
    pole_lengths: tuple[float, float] = (1.0, 0.1)   # full lengths, m
    pole_masses: tuple[float, float] = (0.1, 0.01)
    f_max: float = 10.0
    dt: float = 0.02
    x_bound: float = 2.4
    angle_bound: float = 0.628      # 36 degrees
    t_max: int = 1000
    # initial-state half-widths per component
    x_init_half: float = 1.944
    xdot_init_half: float = 1.215
    alpha1_init_half: float = 0.0472
    alpha1dot_init_half: float = 0.135088
    alpha2_init_half: float = 0.10472
    alpha2dot_init_half: float = 0.135088
    symmetric_init: bool = False

    @property
    def half_lengths(self) -> tuple[float, float]:
        return (self.pole_lengths[0] / 2.0, self.pole_lengths[1] / 2.0)

    def init_bounds(self) -> np.ndarray:
        a1 = self.alpha2_init_half if self.symmetric_init else self.alpha1_init_half
        return np.array([
            self.x_init_half, self.xdot_init_half,
            a1, self.alpha1dot_init_half,
            self.alpha2_init_half, self.alpha2dot_init_half,
        ])


DEFAULT_PARAMS = CartPoleParams()

POLICY_DOMAIN = box([-60.0] * 6, [60.0] * 6)


@dataclass(frozen=True)
class LinearPolicy:
    """Force = theta . state, saturated to [-f_max, f_max]."""

    theta: np.ndarray

    def __post_init__(self):
        th = np.asarray(self.theta, dtype=float)
        if th.shape != (6,):
            raise ValueError("policy parameter must be a 6-vector")
        object.__setattr__(self, "theta", th)

    def action(self, state: np.ndarray, f_max: float) -> float:
        a = float(np.dot(self.theta, state))
        return max(-f_max, min(f_max, a))


@dataclass
class EpisodeResult:
    length: int
    trajectory: list | None = None    # optional (state, action, reward) triplets

    @property
    def return_(self) -> int:
        return self.length


def sample_initial_state(rng: np.random.Generator,
                         params: CartPoleParams = DEFAULT_PARAMS) -> np.ndarray:
    """Each component uniform in its symmetric interval, independent."""
    half = params.init_bounds()
    return rng.uniform(-half, half)


def _derivatives(state, force, params: CartPoleParams):
    """Time derivatives of the state under constant force."""
    x, xd, a1, a1d, a2, a2d = state
    m = params.pole_masses
    hl = params.half_lengths
    num = force
    den = params.cart_mass
    phys = []
    for i, (a, ad) in enumerate(((a1, a1d), (a2, a2d))):
        pa = _ORIENT[i] * a
        pad = _ORIENT[i] * ad
        c, s = math.cos(pa), math.sin(pa)
        num += m[i] * hl[i] * pad * pad * s - 0.75 * m[i] * GRAVITY * s * c
        den += m[i] * (1.0 - 0.75 * c * c)
        phys.append((c, s))
    xdd = num / den
    add = []
    for i, (c, s) in enumerate(phys):
        pad2 = 0.75 / hl[i] * (GRAVITY * s - xdd * c)
        add.append(_ORIENT[i] * pad2)
    return (xd, xdd, a1d, add[0], a2d, add[1])


def step(state, force: float, params: CartPoleParams = DEFAULT_PARAMS,
         dt: float | None = None) -> np.ndarray:
    """One RK4 integration step; the force is saturated and held constant."""
    s = np.asarray(state, dtype=float)
    if not np.all(np.isfinite(s)) or not math.isfinite(force):
        raise ValueError("state and force must be finite")
    force = max(-params.f_max, min(params.f_max, float(force)))
    h = params.dt if dt is None else dt
    s = tuple(s)
    k1 = _derivatives(s, force, params)
    k2 = _derivatives(tuple(s[i] + 0.5 * h * k1[i] for i in range(6)), force, params)
    k3 = _derivatives(tuple(s[i] + 0.5 * h * k2[i] for i in range(6)), force, params)
    k4 = _derivatives(tuple(s[i] + h * k3[i] for i in range(6)), force, params)
    return np.array([s[i] + h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i])
                     for i in range(6)])


def energy(state, params: CartPoleParams = DEFAULT_PARAMS) -> float:
    """Total mechanical energy of the unforced system (test oracle)."""
    x, xd, a1, a1d, a2, a2d = np.asarray(state, dtype=float)
    e = 0.5 * params.cart_mass * xd * xd
    for i, (a, ad) in enumerate(((a1, a1d), (a2, a2d))):
        pa = _ORIENT[i] * a
        pad = _ORIENT[i] * ad
        m = params.pole_masses[i]
        l = params.half_lengths[i]
        e += 0.5 * m * (xd * xd + 2.0 * l * xd * pad * math.cos(pa) + l * l * pad * pad)
        e += m * l * l * pad * pad / 6.0
        e += m * GRAVITY * l * math.cos(pa)
    return float(e)


def _out_of_bounds(s, params: CartPoleParams) -> bool:
    return (abs(s[0]) > params.x_bound or abs(s[2]) > params.angle_bound
            or abs(s[4]) > params.angle_bound)


def _run_episode_python(theta, s0, params: CartPoleParams, t_max: int) -> int:
    s = np.asarray(s0, dtype=float)
    for t in range(1, t_max + 1):
        # sequential accumulation mirrors the jit path exactly
        a = 0.0
        for i in range(6):
            a += float(theta[i]) * float(s[i])
        s = step(s, a, params)
        if _out_of_bounds(s, params):
            return t - 1
    return t_max


# Optional numba acceleration of the episode inner loop; the pure-Python path
# is the reference and the two are asserted identical in tests.
try:
    import numba as _numba

    @_numba.njit(cache=True)
    def _episode_jit(theta, s, mc, m1, hl1, m2, hl2, fmax, dt, xb, ab, tmax):  # pragma: no cover
        k1 = np.empty(6); k2 = np.empty(6); k3 = np.empty(6); k4 = np.empty(6)
        tmp = np.empty(6)
        for t in range(1, tmax + 1):
            f = 0.0
            for i in range(6):
                f += theta[i] * s[i]
            if f > fmax:
                f = fmax
            elif f < -fmax:
                f = -fmax
            for stage in range(4):
                if stage == 0:
                    src = s
                elif stage == 1:
                    for i in range(6):
                        tmp[i] = s[i] + 0.5 * dt * k1[i]
                    src = tmp
                elif stage == 2:
                    for i in range(6):
                        tmp[i] = s[i] + 0.5 * dt * k2[i]
                    src = tmp
                else:
                    for i in range(6):
                        tmp[i] = s[i] + dt * k3[i]
                    src = tmp
                pa1 = -src[2]; pad1 = -src[3]
                c1 = np.cos(pa1); s1 = np.sin(pa1)
                pa2 = src[4]; pad2 = src[5]
                c2 = np.cos(pa2); s2 = np.sin(pa2)
                num = f
                num += m1 * hl1 * pad1 * pad1 * s1 - 0.75 * m1 * 9.8 * s1 * c1
                num += m2 * hl2 * pad2 * pad2 * s2 - 0.75 * m2 * 9.8 * s2 * c2
                den = mc + m1 * (1.0 - 0.75 * c1 * c1) + m2 * (1.0 - 0.75 * c2 * c2)
                xdd = num / den
                a1dd = -(0.75 / hl1 * (9.8 * s1 - xdd * c1))
                a2dd = 0.75 / hl2 * (9.8 * s2 - xdd * c2)
                if stage == 0:
                    k1[0] = src[1]; k1[1] = xdd; k1[2] = src[3]
                    k1[3] = a1dd; k1[4] = src[5]; k1[5] = a2dd
                elif stage == 1:
                    k2[0] = src[1]; k2[1] = xdd; k2[2] = src[3]
                    k2[3] = a1dd; k2[4] = src[5]; k2[5] = a2dd
                elif stage == 2:
                    k3[0] = src[1]; k3[1] = xdd; k3[2] = src[3]
                    k3[3] = a1dd; k3[4] = src[5]; k3[5] = a2dd
                else:
                    k4[0] = src[1]; k4[1] = xdd; k4[2] = src[3]
                    k4[3] = a1dd; k4[4] = src[5]; k4[5] = a2dd
            for i in range(6):
                s[i] = s[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            if np.abs(s[0]) > xb or np.abs(s[2]) > ab or np.abs(s[4]) > ab:
                return t - 1
        return tmax

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False


def run_episode(
    policy: LinearPolicy | np.ndarray,
    rng: np.random.Generator,
    params: CartPoleParams = DEFAULT_PARAMS,
    t_max: int | None = None,
    record: bool = False,
    initial_state: np.ndarray | None = None,
    use_jit: bool = True,
) -> EpisodeResult:
    """Simulate one episode from a sampled initial state.

    Reward is 1 per surviving step; terminates at the first bound violation
    or at t_max.  The return equals the number of surviving steps.
    """
    theta = policy.theta if isinstance(policy, LinearPolicy) else np.asarray(policy, float)
    tm = params.t_max if t_max is None else t_max
    s0 = sample_initial_state(rng, params) if initial_state is None else np.asarray(
        initial_state, dtype=float)
    if record:
        traj = []
        s = s0.copy()
        length = tm
        for t in range(1, tm + 1):
            a = max(-params.f_max, min(params.f_max, float(np.dot(theta, s))))
            s_next = step(s, a, params)
            alive = not _out_of_bounds(s_next, params)
            traj.append((s.copy(), a, 1 if alive else 0))
            s = s_next
            if not alive:
                length = t - 1
                break
        return EpisodeResult(length, trajectory=traj)
    if use_jit and _HAVE_NUMBA:
        hl = params.half_lengths
        length = int(_episode_jit(
            theta, s0.copy(), params.cart_mass,
            params.pole_masses[0], hl[0], params.pole_masses[1], hl[1],
            params.f_max, params.dt, params.x_bound, params.angle_bound, tm,
        ))
    else:
        length = _run_episode_python(theta, s0, params, tm)
    return EpisodeResult(length)


def return_oracle(
    policy, n_episodes: int, rng: np.random.Generator,
    params: CartPoleParams = DEFAULT_PARAMS,
) -> float:
    """Monte Carlo estimate of the expected return: mean over n iid episodes."""
    if n_episodes < 1:
        raise ValueError("n_episodes must be >= 1")
    total = 0
    for _ in range(n_episodes):
        total += run_episode(policy, rng, params).length
    return total / n_episodes


class ReturnOracle:
    """NoisyOracle-compatible expected-return evaluator on [-60, 60]^6.

    One call = one oracle-unit; episode simulations are logged separately.
    """

    def __init__(
        self,
        n_episodes: int = 1,
        params: CartPoleParams = DEFAULT_PARAMS,
        rng: np.random.Generator | None = None,
        ledger: BudgetLedger | None = None,
        domain: BoundedDomain = POLICY_DOMAIN,
    ):
        self.n_episodes = n_episodes
        self.params = params
        self.rng = rng if rng is not None else np.random.default_rng()
        self.ledger = ledger if ledger is not None else BudgetLedger()
        self.domain = domain
        self.episode_units = 0

    @property
    def dimension(self) -> int:
        return 6

    def eval(self, theta) -> float:
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if not self.domain.contains(theta):
            return 0.0
        self.ledger.charge(1)
        self.episode_units += self.n_episodes
        return return_oracle(theta, self.n_episodes, self.rng, self.params)

    __call__ = eval


def dump_trajectory(result: EpisodeResult, path) -> None:
    """One line per step: t, the six state components, action, reward."""
    if result.trajectory is None:
        raise ValueError("episode was not recorded")
    with open(path, "w") as fh:
        for t, (s, a, r) in enumerate(result.trajectory, start=1):
            comps = " ".join(format(c, ".17g") for c in s)
            fh.write(f"{t} {comps} {format(a, '.17g')} {r}\n")


TABLE8_POLICIES = {
    "pm-mh-1e6": np.array([-7.1281, -15.0300, 5.1756, 15.0946, 15.4696, 4.9734]),
    "pm-mh-1e5": np.array([-5.6738, -15.7544, 3.0080, 14.9182, 16.3909, 6.0570]),
    "mh-s-always": np.array([-6.6351, -10.2346, -1.9859, 12.5025, 12.8274, 6.0455]),
    "mh-s-accept": np.array([-8.9285, -17.0432, 4.0197, 13.3249, 15.7900, 3.9512]),
    "da-pm-mh": np.array([-5.7748, -17.5469, 6.6250, 15.9932, 17.5892, 5.2058]),
}
