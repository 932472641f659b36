"""Monte-Carlo harness: regret estimation and event-probability probes.

Replications are drawn from counter-based streams keyed by (root seed,
stream, chunk) and merged in canonical chunk order, so results are
bit-identical regardless of how many workers processed the chunks.

Row layout of the per-chunk normal draws for regret runs: T reward noises
first (one per round, in draw order), then K prior noises.  A frequentist
run generates and ignores the prior columns, which makes a Bayesian run
with a point prior (zero prior standard deviations) collapse to the
frequentist run on the same seeds exactly.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import log_ndtr

from . import kernels
from .core import (
    BeliefState,
    History,
    HistoryEntry,
    Instance,
    InvalidBudgetError,
    RegretEstimate,
    Seed,
    chunk_ranges,
)
from .policies import BasePolicy, SuccessiveRejects, successive_rejects_schedule

_FAST_POLICY_CODES = {"uniform": 0, "alternating": 1, "successive-rejects": 2}


def run_episode(policy: BasePolicy, instance: Instance, T: int, seed: Seed) -> History:
    """One fully deterministic episode: T draws, then a recommendation."""
    if T < instance.K:
        raise InvalidBudgetError(f"budget {T} cannot initialize {instance.K} arms")
    from .posterior import update

    rng = seed.generator(0)
    policy.reset()
    belief = BeliefState.initial(instance.K, T)
    history = History()
    for t in range(1, T + 1):
        arm = policy.select(belief, t)
        reward = instance.means[arm - 1] + rng.standard_normal()
        belief = update(belief, arm, reward)
        history.entries.append(HistoryEntry(round=t, arm=arm, reward=reward))
    history.recommendation = policy.recommend(belief)
    return history


def _merge_chunks(outputs: Sequence[np.ndarray]) -> tuple[int, float, float]:
    """Canonical (count, mean, M2) reduction over per-chunk regret arrays."""
    count = 0
    mean = 0.0
    m2 = 0.0
    for out in outputs:
        n_b = out.shape[0]
        mean_b = float(out.mean())
        m2_b = float(((out - mean_b) ** 2).sum())
        delta = mean_b - mean
        tot = count + n_b
        mean += delta * n_b / tot
        m2 += m2_b + delta * delta * count * n_b / tot
        count = tot
    return count, mean, m2


def _run_chunks(worker, reps: int, workers: int) -> list[np.ndarray]:
    chunks = chunk_ranges(reps)
    if workers <= 1 or len(chunks) == 1:
        return [worker(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, chunks))


def _regret_run(
    policy: BasePolicy,
    means: np.ndarray,
    prior_sds: np.ndarray,
    use_prior: bool,
    S0: np.ndarray,
    N0: np.ndarray,
    T: int,
    reps: int,
    seed: Seed,
    workers: int,
) -> RegretEstimate:
    K = means.shape[0]
    code = _FAST_POLICY_CODES.get(policy.name)
    if code == 2:
        sr_pulls = np.array(successive_rejects_schedule(K, T).phase_pulls, dtype=np.int64)
    else:
        sr_pulls = np.zeros(max(K - 1, 1), dtype=np.int64)

    def worker(chunk_spec):
        chunk, start, stop = chunk_spec
        rng = seed.generator(chunk)
        normals = rng.standard_normal((stop - start, T + K))
        if code is not None:
            return kernels.episode_regrets(
                code, means, prior_sds, use_prior, S0, N0, T, normals, sr_pulls
            )
        return _episodes_reference(policy, means, prior_sds, use_prior, S0, N0, T, normals)

    count, mean, m2 = _merge_chunks(_run_chunks(worker, reps, workers))
    se = math.sqrt(m2 / (count - 1) / count) if count > 1 else float("inf")
    return RegretEstimate(
        mean=mean, std_error=se, reps=count, seed=seed, policy=policy.name, T=T
    )


def _episodes_reference(policy, means, prior_sds, use_prior, S0, N0, T, normals):
    """Slow per-row episode loop for policies without a compiled kernel."""
    from .core import ArmStats
    from .posterior import update

    K = means.shape[0]
    out = np.empty(normals.shape[0])
    n0 = N0.astype(int)
    for r in range(normals.shape[0]):
        mu = means + prior_sds * normals[r, T:] if use_prior else means
        policy.reset()
        belief = BeliefState.from_stats(S0, n0, T=T + int(n0.sum()))
        for t in range(T):
            arm = policy.select(belief, belief.t + 1)
            belief = update(belief, arm, mu[arm - 1] + normals[r, t])
        rec = policy.recommend(belief)
        out[r] = mu.max() - mu[rec - 1]
    return out


def frequentist_regret(
    policy: BasePolicy,
    instance: Instance,
    T: int,
    reps: int,
    seed: Seed,
    workers: int = 1,
) -> RegretEstimate:
    """Mean shortfall of the recommendation over `reps` episodes with fixed
    true means."""
    K = instance.K
    return _regret_run(
        policy,
        np.asarray(instance.means, dtype=float),
        np.zeros(K),
        False,
        np.zeros(K),
        np.zeros(K),
        T,
        reps,
        seed,
        workers,
    )


def bayesian_regret(
    policy: BasePolicy,
    prior_means: Sequence[float],
    prior_sds: Sequence[float],
    T: int,
    reps: int,
    seed: Seed,
    mode: str = "flat-init",
    workers: int = 1,
) -> RegretEstimate:
    """Mean shortfall with true means redrawn from the prior each episode.

    mode "flat-init": episodes start with no observations and the policy's
    forced initialization supplies one pull per arm.  mode "informative":
    the prior N(prior_mean, 1) enters the belief as one pseudo-observation
    per arm and no forced initialization happens.
    """
    means = np.asarray(prior_means, dtype=float)
    sds = np.asarray(prior_sds, dtype=float)
    K = means.shape[0]
    if mode == "flat-init":
        S0 = np.zeros(K)
        N0 = np.zeros(K)
    elif mode == "informative":
        S0 = means.copy()
        N0 = np.ones(K)
    else:
        raise ValueError(f"unknown prior mode {mode!r}")
    return _regret_run(policy, means, sds, True, S0, N0, T, reps, seed, workers)


def drift_envelope(T: int) -> np.ndarray:
    """Allowed deviation of the n-th running mean from the final one,
    4 sqrt(log T) sqrt(sum_{m=n}^{T'-1} 1/m^2) for n = 1..T'."""
    tp = (T - 1) // 2
    inv_sq = 1.0 / np.arange(1, tp, dtype=float) ** 2
    tail = np.concatenate([np.cumsum(inv_sq[::-1])[::-1], [0.0]])
    return 4.0 * math.sqrt(math.log(T)) * np.sqrt(tail)


@dataclass(frozen=True)
class EventProbeResult:
    """Exact and estimated probabilities of the proof-level reward events,
    next to the closed-form bounds they are compared against."""

    T: int
    C_U: float
    Delta_G: float
    reps: int
    seed: Seed
    p_x: float
    log_p_x: float
    f_under: float
    p_y: float
    p_y_se: float
    f_close: float
    p_yz: float
    p_yz_se: float
    f_nodrift: float

    @property
    def T_prime(self) -> int:
        return (self.T - 1) // 2


def event_probes(
    T: int, C_U: float, Delta_G: float, reps: int, seed: Seed, workers: int = 1
) -> EventProbeResult:
    """Probe the three reward-stream events of one arm.

    The underestimation event (first draw at least C_U sqrt(log T) below its
    mean minus Delta_G) is a single Gaussian tail, computed exactly.  The
    small-final-mean event (|mean of T' draws| <= 1/T^2) and its
    intersection with a drift-envelope violation are estimated by
    simulating T' i.i.d. standard normal draws per replication.
    """
    if T < 3 or T % 2 == 0:
        raise ValueError("T must be odd and at least 3")
    if C_U <= 0 or Delta_G <= 0:
        raise ValueError("C_U and Delta_G must be positive")
    tp = (T - 1) // 2
    x = C_U * math.sqrt(math.log(T)) + Delta_G
    p_x = 0.5 * math.erfc(x / math.sqrt(2.0))
    log_p_x = float(log_ndtr(-x))
    f_under = T ** (-((C_U + Delta_G) ** 2) / 2.0) / (
        2.0 * (C_U + Delta_G) * math.sqrt(2.0 * math.pi * math.log(T))
    )
    f_close = 0.5 * math.sqrt(1.0 / (math.pi * T**3))
    f_nodrift = 2.0 * T ** (-3.5)
    y_thresh = 1.0 / T**2
    env = drift_envelope(T)

    def worker(chunk_spec):
        chunk, start, stop = chunk_spec
        rng = seed.generator(chunk)
        normals = rng.standard_normal((stop - start, tp))
        return kernels.event_flags(normals, y_thresh, env)

    flags = _run_chunks(worker, reps, workers)
    n_y = sum(int(np.count_nonzero(f & 1)) for f in flags)
    n_yz = sum(int(np.count_nonzero(f == 3)) for f in flags)
    p_y = n_y / reps
    p_yz = n_yz / reps
    return EventProbeResult(
        T=T,
        C_U=C_U,
        Delta_G=Delta_G,
        reps=reps,
        seed=seed,
        p_x=p_x,
        log_p_x=log_p_x,
        f_under=f_under,
        p_y=p_y,
        p_y_se=math.sqrt(max(p_y * (1.0 - p_y), 0.0) / reps),
        f_close=f_close,
        p_yz=p_yz,
        p_yz_se=math.sqrt(max(p_yz * (1.0 - p_yz), 0.0) / reps),
        f_nodrift=f_nodrift,
    )


def construct_w_state(T: int, C_U: float, n12: int) -> BeliefState:
    """Canonical three-armed starvation state: two tied arms with zero
    empirical means and n12 pulls each, one arm seen once far below them."""
    if T < 3 or T % 2 == 0:
        raise ValueError("T must be odd and at least 3")
    tp = (T - 1) // 2
    if not (1 <= n12 <= tp):
        raise ValueError(f"n12 must lie in [1, {tp}]")
    s3 = -C_U * math.sqrt(math.log(T))
    return BeliefState.from_stats([0.0, 0.0, s3], [n12, n12, 1], T=T)
