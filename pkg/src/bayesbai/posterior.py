"""Closed-form Gaussian posterior mathematics.

With unit observation variance and a flat prior, an arm with reward sum S
over N pulls has posterior N(S/N, 1/N), posterior predictive N(S/N, 1 + 1/N),
and posterior-mean increment N(0, 1/(N(N+1))) after one more pull.  The three
variances satisfy 1/N = 1/(N(N+1)) + 1/(N+1) exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate

from . import kernels
from .core import ArmStats, BayesBaiError, BeliefState, BudgetExhaustedError, UndefinedPosteriorError

SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class GaussianParams:
    """Mean and variance of a one-dimensional Gaussian."""

    mean: float
    variance: float

    def __post_init__(self) -> None:
        if not self.variance > 0.0:
            raise ValueError("variance must be positive")

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)


def update(belief: BeliefState, arm: int, reward: float) -> BeliefState:
    """Fold one observation of `arm` (1-based) into the belief."""
    if belief.t >= belief.T:
        raise BudgetExhaustedError(f"all {belief.T} samples already consumed")
    if not (1 <= arm <= belief.K):
        raise BayesBaiError(f"arm {arm} outside [1..{belief.K}]")
    a = belief.arms[arm - 1]
    arms = list(belief.arms)
    arms[arm - 1] = ArmStats(a.S + float(reward), a.N + 1)
    return BeliefState(arms=tuple(arms), t=belief.t + 1, T=belief.T)


def _stats(belief: BeliefState, arm: int) -> ArmStats:
    if not (1 <= arm <= belief.K):
        raise BayesBaiError(f"arm {arm} outside [1..{belief.K}]")
    return belief.arms[arm - 1]


def posterior_params(
    belief: BeliefState, arm: int, prior_mean: Optional[float] = None
) -> GaussianParams:
    """Posterior N(S/N, 1/N) of one arm.

    In flat-prior mode an unpulled arm has no posterior; passing
    `prior_mean` switches to the informative mode where the prior itself
    is the unit-variance Gaussian centred there.
    """
    a = _stats(belief, arm)
    if a.N == 0:
        if prior_mean is None:
            raise UndefinedPosteriorError(
                f"arm {arm} has no observations and no informative prior"
            )
        return GaussianParams(float(prior_mean), 1.0)
    return GaussianParams(a.S / a.N, 1.0 / a.N)


def predictive_params(belief: BeliefState, arm: int) -> GaussianParams:
    """Distribution of the next observation: the posterior convolved with
    unit observation noise, N(S/N, 1 + 1/N)."""
    p = posterior_params(belief, arm)
    return GaussianParams(p.mean, 1.0 + p.variance)


def posterior_mean_increment_params(belief: BeliefState, arm: int) -> GaussianParams:
    """Distribution of the posterior-mean shift caused by one more pull.

    Zero mean by construction (the current posterior mean is a martingale),
    variance 1/(N(N+1)); equivalently the predictive draw X moves the mean
    by (X - S/N)/(N + 1).
    """
    a = _stats(belief, arm)
    if a.N == 0:
        raise UndefinedPosteriorError(f"arm {arm} has no observations")
    n = float(a.N)
    return GaussianParams(0.0, 1.0 / (n * (n + 1.0)))


def normal_tail(x: float) -> float:
    """P[Z > x] for standard normal Z."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def normal_tail_bounds(x: float) -> tuple[float, float]:
    """Sandwich bounds (1/x - 1/x^3) phi(x) <= P[Z > x] <= phi(x)/x, x > 0."""
    if x <= 0.0:
        raise ValueError("the sandwich bounds require x > 0")
    phi = math.exp(-0.5 * x * x) / SQRT_2PI
    return (1.0 / x - 1.0 / x**3) * phi, phi / x


def terminal_loss_two(delta_hat: float, N1: int, N2: int) -> float:
    """Expected shortfall of recommending the leading arm of a two-armed
    posterior with mean gap `delta_hat`: E[(r - |delta_hat|)_+] with
    r ~ N(0, 1/N1 + 1/N2), evaluated in closed form."""
    if N1 < 1 or N2 < 1:
        raise UndefinedPosteriorError("both arms need at least one pull")
    sigma = math.sqrt(1.0 / N1 + 1.0 / N2)
    a = abs(delta_hat)
    d = a / sigma
    phi = math.exp(-0.5 * d * d) / SQRT_2PI
    return sigma * phi - a * normal_tail(d)


def terminal_loss_general(belief: BeliefState, gl_order: int = kernels.DEFAULT_GL_ORDER) -> float:
    """E[max_i mu_i] - max_i mu_hat_i over the joint posterior: the expected
    shortfall of recommending the empirical best arm right now."""
    belief.means()  # raises if any arm is unobserved
    return float(kernels.terminal_loss(belief.sums(), belief.counts().astype(float), gl_order))


def best_arm_excess_mass(
    belief: BeliefState, arm: int, gl_order: int = kernels.DEFAULT_GL_ORDER
) -> float:
    """E[(mu_i - max_{j != i} mu_j)_+] over the joint posterior.

    Uses E[max over all arms] = E[max over others] + E[(mu_i - max others)_+],
    so the value falls out of two expected-maximum evaluations.
    """
    a = _stats(belief, arm)
    if a.N == 0:
        raise UndefinedPosteriorError(f"arm {arm} has no observations")
    mu = belief.means()
    var = 1.0 / belief.counts().astype(float)
    full = kernels.expected_max(mu, var, gl_order)
    others = np.delete(mu, arm - 1)
    if others.size == 1:
        rest = float(others[0])
    else:
        rest = kernels.expected_max(others, np.delete(var, arm - 1), gl_order)
    return max(full - rest, 0.0)


def expected_max_quad(mu, var, tol: float = 1e-10) -> float:
    """Adaptive-quadrature expected maximum of independent Gaussians.

    Slow reference implementation used for cross-checks: integrates
    P[max > x] above a centring point and P[max <= x] below it.
    """
    mu = np.asarray(mu, dtype=float)
    sd = np.sqrt(np.asarray(var, dtype=float))
    m = float(mu.max())
    lo = float(np.min(mu - 9.0 * sd))
    hi = float(np.max(mu + 9.0 * sd))

    def cdf_prod(x):
        z = (x - mu) / sd
        return np.prod(0.5 * np.array([math.erfc(-zz / math.sqrt(2.0)) for zz in z]))

    upper, _ = integrate.quad(lambda x: 1.0 - cdf_prod(x), m, hi, epsabs=tol, limit=200)
    lower, _ = integrate.quad(cdf_prod, lo, m, epsabs=tol, limit=200)
    return m + upper - lower
