"""Sampling and recommendation policies.

Every policy exposes select (belief, round -> 1-based arm), recommend
(belief -> 1-based arm), and reset.  All policies pull any still-unpulled
arm first (forced initialization), so from a fresh belief rounds 1..K visit
arms 1..K in order.  Ties break to the lowest arm index throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import bellman
from .core import (
    BeliefState,
    InvalidBudgetError,
    UndefinedPosteriorError,
    UnsupportedArityError,
)


def recommend_empirical_best(belief: BeliefState) -> int:
    """1-based index of the arm with the largest empirical mean."""
    if any(a.N == 0 for a in belief.arms):
        raise UndefinedPosteriorError("recommendation needs every arm pulled at least once")
    return int(np.argmax(belief.means())) + 1


class BasePolicy:
    """Shared plumbing: forced initialization and the default recommender."""

    name = "base"
    is_deterministic = True

    def reset(self) -> None:
        pass

    def select(self, belief: BeliefState, round_: int) -> int:
        for i, a in enumerate(belief.arms):
            if a.N == 0:
                return i + 1
        return self._select(belief, round_)

    def _select(self, belief: BeliefState, round_: int) -> int:
        raise NotImplementedError

    def recommend(self, belief: BeliefState) -> int:
        return recommend_empirical_best(belief)


class Uniform(BasePolicy):
    """Round-robin over the arms in index order."""

    name = "uniform"

    def _select(self, belief: BeliefState, round_: int) -> int:
        return int(np.argmin(belief.counts())) + 1


class Alternating(BasePolicy):
    """Two-armed draw-least-pulled policy (optimal sampling order for K=2)."""

    name = "alternating"

    def _select(self, belief: BeliefState, round_: int) -> int:
        if belief.K != 2:
            raise UnsupportedArityError("the alternating policy is two-armed only")
        return 1 if belief.arms[0].N <= belief.arms[1].N else 2

    def select(self, belief: BeliefState, round_: int) -> int:
        if belief.K != 2:
            raise UnsupportedArityError("the alternating policy is two-armed only")
        return super().select(belief, round_)


class BayesOptimal(BasePolicy):
    """Exact-DP policy: draw the arm with the largest one-draw improvement.

    Horizons beyond the solver's capacity raise rather than approximate.
    """

    name = "bayes-optimal"

    def __init__(self, cfg: bellman.DPConfig = bellman.DPConfig()) -> None:
        self.cfg = cfg

    def _select(self, belief: BeliefState, round_: int) -> int:
        budget = belief.budget_remaining
        res = bellman.exact_loss(belief, budget, self.cfg)
        return res.chosen_arm


@dataclass(frozen=True)
class SRSchedule:
    """Cumulative per-arm pull targets and per-phase pull increments."""

    targets: tuple[int, ...]
    phase_pulls: tuple[int, ...]

    @property
    def phases(self) -> int:
        return len(self.phase_pulls)


def successive_rejects_schedule(K: int, T: int) -> SRSchedule:
    """Phase schedule of the phased-elimination baseline.

    With log_bar = 1/2 + sum_{i=2..K} 1/i, the cumulative target for phase k
    is ceil((T - K) / (log_bar * (K + 1 - k))); each phase pulls every
    survivor up to the target, then drops the empirically worst one.
    Increments are capped so the total never exceeds T, and every phase
    pulls at least once so eliminations are always informed.
    """
    if K < 2:
        raise UnsupportedArityError("need at least two arms")
    if T < K:
        raise InvalidBudgetError(f"budget {T} cannot initialize {K} arms")
    log_bar = 0.5 + sum(1.0 / i for i in range(2, K + 1))
    targets = [
        max(1, math.ceil((T - K) / (log_bar * (K + 1 - k)))) for k in range(1, K)
    ]
    pulls = []
    consumed = 0
    prev = 0
    for k, nk in enumerate(targets):
        survivors = K - k
        p = max(nk - prev, 1)  # always look at fresh data before eliminating
        cap = (T - consumed) // survivors
        p = min(p, cap)
        pulls.append(p)
        consumed += p * survivors
        prev = max(prev, nk)
    return SRSchedule(targets=tuple(targets), phase_pulls=tuple(pulls))


class SuccessiveRejects(BasePolicy):
    """Phased elimination: pull all survivors per the schedule, drop the
    empirically worst each phase (largest index on ties), spend leftover
    budget on the survivor, recommend the survivor."""

    name = "successive-rejects"

    def __init__(self, K: int, T: int) -> None:
        self.K = K
        self.T = T
        self.schedule = successive_rejects_schedule(K, T)
        self.reset()

    def reset(self) -> None:
        self._active = list(range(1, self.K + 1))
        self._phase = 0
        self._cursor = 0  # pulls issued in the current phase

    def _maybe_eliminate(self, belief: BeliefState) -> None:
        while (
            self._phase < self.schedule.phases
            and self._cursor >= self.schedule.phase_pulls[self._phase] * len(self._active)
        ):
            worst = self._active[0]
            wm = math.inf
            for arm in self._active:
                m = belief.arms[arm - 1].mean
                if m <= wm:
                    wm = m
                    worst = arm
            self._active.remove(worst)
            self._phase += 1
            self._cursor = 0

    def select(self, belief: BeliefState, round_: int) -> int:
        self._maybe_eliminate(belief)
        if self._phase < self.schedule.phases:
            k = self._cursor % len(self._active)
            self._cursor += 1
            return self._active[k]
        return self._active[0]

    def recommend(self, belief: BeliefState) -> int:
        self._maybe_eliminate(belief)
        return self._active[0]


def policy_by_name(name: str, K: int, T: int, cfg: bellman.DPConfig | None = None) -> BasePolicy:
    if name == "uniform":
        return Uniform()
    if name == "alternating":
        return Alternating()
    if name == "bayes-optimal":
        return BayesOptimal(cfg or bellman.DPConfig())
    if name == "successive-rejects":
        return SuccessiveRejects(K, T)
    raise ValueError(f"unknown policy {name!r}")
