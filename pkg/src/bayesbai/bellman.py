"""Exact small-horizon dynamic programming for the Bayesian sampling loss.

`exact_loss` evaluates the recursive loss of a belief with a given number of
draws remaining: with none left the loss is the terminal expected shortfall,
and otherwise the loss of committing the next draw to arm i integrates the
child loss over the predictive distribution N(S_i/N_i, 1 + 1/N_i).  The
one-draw improvement of arm i is the loss with one fewer draw minus the loss
of committing that draw to arm i; it is nonnegative and picking its argmax
is the optimal sampling rule.

Two integration schemes are available.  The default is plain Gauss-Hermite
(order m per level); it is fast and its error largely cancels in improvement
differences, but for three or more arms the integrand's policy-switch kinks
cap its absolute accuracy near 1e-3.  Setting DPConfig.refine switches to
the kink-located piecewise integrator in the kernels, accurate to ~1e-6 or
better, at a much higher cost; the Monte-Carlo oracle comparison uses it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .core import (
    BeliefState,
    CapacityError,
    RegretEstimate,
    Seed,
    UndefinedPosteriorError,
    chunk_ranges,
)
from .posterior import terminal_loss_two


@dataclass(frozen=True)
class DPConfig:
    """Limits and quadrature settings of the exact solver."""

    quadrature_order: int = 8
    gl_order: int = kernels.DEFAULT_GL_ORDER
    max_depth: int = 6
    max_arms_exact: int = 3
    node_budget: int = 20_000_000
    refine: bool = False

    def __post_init__(self) -> None:
        if self.quadrature_order < 1:
            raise ValueError("quadrature order must be >= 1")
        if self.max_depth < 0 or self.max_arms_exact < 2:
            raise ValueError("bad capacity limits")


@dataclass(frozen=True)
class BellmanResult:
    loss: float
    arm_losses: np.ndarray
    ebi: np.ndarray
    chosen_arm: Optional[int]  # 1-based; None when no draws remain
    nodes_evaluated: int
    quadrature_order: int


def _check_capacity(belief: BeliefState, budget: int, cfg: DPConfig) -> None:
    K = belief.K
    if K > cfg.max_arms_exact:
        raise CapacityError(
            f"{K} arms exceeds the exact-solver limit of {cfg.max_arms_exact}; "
            "use the Monte-Carlo oracle or the two-armed fast path"
        )
    if budget > cfg.max_depth:
        raise CapacityError(
            f"depth {budget} exceeds the configured limit of {cfg.max_depth}"
        )
    nodes = kernels.arm_losses_node_count(K, max(budget, 1), cfg.quadrature_order)
    if nodes > cfg.node_budget:
        raise CapacityError(
            f"{nodes} quadrature nodes exceed the budget of {cfg.node_budget}"
        )
    if any(a.N == 0 for a in belief.arms):
        raise UndefinedPosteriorError("exact solver needs every arm initialized")


def _arm_losses(S, N, budget: int, cfg: DPConfig) -> np.ndarray:
    if cfg.refine:
        return kernels.refined_arm_losses(S, N, budget, cfg.gl_order)
    return kernels.arm_losses(S, N, budget, cfg.quadrature_order, cfg.gl_order)


def _loss(S, N, budget: int, cfg: DPConfig) -> float:
    if budget <= 0:
        return kernels.terminal_loss(S, N, cfg.gl_order)
    return float(_arm_losses(S, N, budget, cfg).min())


def exact_loss(belief: BeliefState, budget_remaining: int, cfg: DPConfig = DPConfig()) -> BellmanResult:
    """Loss, per-arm losses, and improvement vector of a belief with
    `budget_remaining` draws left.  Ties break to the lowest arm index."""
    if budget_remaining < 0:
        raise ValueError("budget cannot be negative")
    _check_capacity(belief, budget_remaining, cfg)
    S = belief.sums()
    N = belief.counts().astype(float)
    if budget_remaining == 0:
        loss = kernels.terminal_loss(S, N, cfg.gl_order)
        return BellmanResult(
            loss=loss,
            arm_losses=np.empty(0),
            ebi=np.empty(0),
            chosen_arm=None,
            nodes_evaluated=1,
            quadrature_order=cfg.quadrature_order,
        )
    arm = _arm_losses(S, N, budget_remaining, cfg)
    shallower = _loss(S, N, budget_remaining - 1, cfg)
    improvement = shallower - arm
    chosen = int(np.argmin(arm)) + 1
    nodes = kernels.arm_losses_node_count(belief.K, budget_remaining, cfg.quadrature_order)
    if budget_remaining >= 2:
        nodes += kernels.loss_node_count(belief.K, budget_remaining - 1, cfg.quadrature_order)
    return BellmanResult(
        loss=float(arm.min()),
        arm_losses=arm,
        ebi=improvement,
        chosen_arm=chosen,
        nodes_evaluated=nodes,
        quadrature_order=cfg.quadrature_order,
    )


def ebi(belief: BeliefState, budget_remaining: int, cfg: DPConfig = DPConfig()) -> np.ndarray:
    """One-draw improvement of each arm; argmax is the optimal next draw."""
    if budget_remaining < 1:
        raise ValueError("improvement needs at least one draw remaining")
    return exact_loss(belief, budget_remaining, cfg).ebi


def two_armed_loss_fast(
    delta_hat: float, N1: int, N2: int, budget_remaining: int, gh_order: int = 192
) -> float:
    """Loss of the two-armed draw-least-pulled policy with an optimal final
    draw, in O(budget) time.

    Balancing the counts is optimal for two arms, so this equals the exact
    DP loss.  The mean gap right before the final draw is Gaussian around
    `delta_hat` with variance 1/N1 - 1/f1 + 1/N2 - 1/f2 (f = counts after
    the deterministic draws), and the final level is closed-form.
    """
    if N1 < 1 or N2 < 1:
        raise UndefinedPosteriorError("both arms need at least one pull")
    if budget_remaining == 0:
        return terminal_loss_two(delta_hat, N1, N2)
    f1, f2 = N1, N2
    for _ in range(budget_remaining - 1):
        if f1 <= f2:
            f1 += 1
        else:
            f2 += 1
    vs = (1.0 / N1 - 1.0 / f1) + (1.0 / N2 - 1.0 / f2)
    ghx, ghw = np.polynomial.hermite.hermgauss(gh_order)
    ghx = ghx * math.sqrt(2.0)
    ghw = ghw / math.sqrt(math.pi)
    sd = math.sqrt(vs)
    acc = 0.0
    for x, w in zip(ghx, ghw):
        d = delta_hat + sd * x
        acc += w * _two_armed_last_level(d, f1, f2)
    return acc


def _two_armed_last_level(delta_hat: float, f1: int, f2: int) -> float:
    # loss of a two-armed state (gap delta_hat, counts f1, f2) that commits
    # its one remaining draw to the least-pulled arm (the optimal final
    # action); committing keeps the integrand above smooth
    S = np.array([delta_hat * f1, 0.0])
    N = np.array([float(f1), float(f2)])
    j = 0 if f1 <= f2 else 1
    return float(kernels.arm_losses(S, N, 1, 2)[j])


def _decision_table(
    S: np.ndarray, N: np.ndarray, budget: int, first_arm: int, cfg: DPConfig
) -> tuple[np.ndarray, np.ndarray]:
    """Tabulate the second decision of the DP policy as a function of the
    first observed reward, by locating the argmin switches along it."""
    K = S.shape[0]
    j = first_arm
    n0 = N[j]
    lo = S[j] / n0 - 8.5 * math.sqrt(1.0 + 1.0 / n0)
    hi = S[j] / n0 + 8.5 * math.sqrt(1.0 + 1.0 / n0)

    def decide(x1: float) -> int:
        Sc = S.copy()
        Nc = N.copy()
        Sc[j] += x1
        Nc[j] += 1.0
        return int(np.argmin(_arm_losses(Sc, Nc, budget - 1, cfg)))

    grid = np.linspace(lo, hi, 161)
    arms = [decide(x) for x in grid]
    boundaries: list[float] = []
    table: list[int] = [arms[0]]
    for t in range(len(grid) - 1):
        if arms[t] == arms[t + 1]:
            continue
        a, b = grid[t], grid[t + 1]
        while b - a > 1e-11:
            mid = 0.5 * (a + b)
            if decide(mid) == arms[t]:
                a = mid
            else:
                b = mid
        boundaries.append(0.5 * (a + b))
        table.append(arms[t + 1])
    return np.array(boundaries), np.array(table, dtype=np.int64)


def loss_mc_oracle(
    belief: BeliefState,
    budget_remaining: int,
    policy=None,
    reps: int = 100_000,
    seed: Seed = Seed(0),
    cfg: DPConfig = DPConfig(),
) -> RegretEstimate:
    """Monte-Carlo estimate of the Bayesian loss of a policy from this belief.

    Per replication: draw true means from the posterior, run the policy on
    rewards N(mu, 1), and score the shortfall of the final recommendation
    (empirical best).  With `policy=None` the simulated policy is the DP
    policy itself (the same integrator `cfg` selects), so the estimate is
    directly comparable to `exact_loss`.
    """
    if reps < 1:
        raise ValueError("need at least one replication")
    S = belief.sums()
    N = belief.counts().astype(float)
    if np.any(N == 0):
        raise UndefinedPosteriorError("oracle needs every arm initialized")
    K = belief.K
    if policy is None:
        if budget_remaining >= 1:
            first_arm = int(np.argmin(_arm_losses(S, N, budget_remaining, cfg)))
        else:
            first_arm = 0
        if budget_remaining >= 3:
            bnd, barm = _decision_table(S, N, budget_remaining, first_arm, cfg)
        else:
            bnd, barm = np.empty(0), np.empty(0, dtype=np.int64)
    count = 0
    mean = 0.0
    m2 = 0.0
    for chunk, start, stop in chunk_ranges(reps):
        rng = seed.generator(chunk)
        normals = rng.standard_normal((stop - start, K + budget_remaining))
        if policy is None:
            out = kernels.oracle_dp_losses(
                S, N, budget_remaining, normals, first_arm, bnd, barm,
                cfg.quadrature_order, cfg.gl_order,
            )
        else:
            out = _simulate_policy(belief, budget_remaining, policy, normals)
        n_b = out.shape[0]
        mean_b = float(out.mean())
        m2_b = float(((out - mean_b) ** 2).sum())
        delta = mean_b - mean
        tot = count + n_b
        mean += delta * n_b / tot
        m2 += m2_b + delta * delta * count * n_b / tot
        count = tot
    se = math.sqrt(m2 / (count - 1) / count) if count > 1 else float("inf")
    name = "dp" if policy is None else getattr(policy, "name", "custom")
    return RegretEstimate(
        mean=mean, std_error=se, reps=count, seed=seed, policy=name, T=budget_remaining
    )


def _simulate_policy(
    belief: BeliefState, budget: int, policy, normals: np.ndarray
) -> np.ndarray:
    """Reference path: run an arbitrary policy object row by row."""
    from .posterior import update

    K = belief.K
    N0 = belief.counts().astype(float)
    mu0 = belief.sums() / N0
    out = np.empty(normals.shape[0])
    for r in range(normals.shape[0]):
        mu = mu0 + normals[r, :K] / np.sqrt(N0)
        b = belief
        if hasattr(policy, "reset"):
            policy.reset()
        for step in range(budget):
            arm = policy.select(b, b.t + 1)
            x = mu[arm - 1] + normals[r, K + step]
            b = update(b, arm, x)
        rec = int(np.argmax(b.means()))
        out[r] = mu.max() - mu[rec]
    return out
