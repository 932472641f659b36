"""Shared domain types: instances, sufficient statistics, beliefs, histories, seeds.

Arm indices are 1-based everywhere at the public interface (matching the
usual bandit convention); internal arrays are 0-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np


class BayesBaiError(Exception):
    """Base class for all package errors."""


class MalformedHistoryError(BayesBaiError):
    """A history references an arm outside [1..K] or is otherwise inconsistent."""


class BudgetExhaustedError(BayesBaiError):
    """An update was attempted after all T samples were consumed."""


class UndefinedPosteriorError(BayesBaiError):
    """Posterior quantities requested for an arm with no observations (flat-prior mode)."""


class CapacityError(BayesBaiError):
    """The exact solver was asked for a tree beyond its configured limits."""


class UnsupportedArityError(BayesBaiError):
    """An operation restricted to a fixed arm count was called with another K."""


class InvalidBudgetError(BayesBaiError):
    """A budget/horizon combination that cannot be scheduled."""


@dataclass(frozen=True)
class Instance:
    """Ground-truth arm means for frequentist evaluation."""

    means: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.means) < 2:
            raise ValueError("an instance needs at least two arms")
        if not all(math.isfinite(m) for m in self.means):
            raise ValueError("arm means must be finite")
        object.__setattr__(self, "means", tuple(float(m) for m in self.means))

    @property
    def K(self) -> int:
        return len(self.means)

    @property
    def best_mean(self) -> float:
        return max(self.means)

    @property
    def best_arm(self) -> int:
        """1-based index of the best arm (lowest index on ties)."""
        return int(np.argmax(self.means)) + 1

    def gap(self, arm: int) -> float:
        """Mean gap of `arm` (1-based) to the best arm."""
        return self.best_mean - self.means[arm - 1]


@dataclass(frozen=True)
class ArmStats:
    """Sufficient statistics of one arm: reward sum and pull count."""

    S: float = 0.0
    N: int = 0

    def __post_init__(self) -> None:
        if self.N < 0:
            raise ValueError("pull count cannot be negative")
        if self.N == 0 and self.S != 0.0:
            raise ValueError("an unpulled arm must have zero reward sum")

    @property
    def mean(self) -> float:
        if self.N == 0:
            raise UndefinedPosteriorError("empirical mean undefined before the first pull")
        return self.S / self.N


@dataclass(frozen=True)
class BeliefState:
    """Per-arm sufficient statistics plus the sampling clock.

    `t` counts samples consumed so far; `T` is the total budget.  The Gaussian
    posterior of arm i is N(S_i/N_i, 1/N_i) once N_i >= 1.
    """

    arms: tuple[ArmStats, ...]
    t: int
    T: int

    def __post_init__(self) -> None:
        if self.t > self.T:
            raise ValueError("clock past the budget")
        if sum(a.N for a in self.arms) > self.T:
            raise ValueError("more pulls recorded than the budget allows")

    @classmethod
    def initial(cls, K: int, T: int) -> "BeliefState":
        return cls(arms=tuple(ArmStats() for _ in range(K)), t=0, T=T)

    @classmethod
    def from_stats(
        cls,
        sums: Sequence[float],
        counts: Sequence[int],
        T: int,
        t: Optional[int] = None,
    ) -> "BeliefState":
        arms = tuple(ArmStats(float(s), int(n)) for s, n in zip(sums, counts))
        if t is None:
            t = int(sum(counts))
        return cls(arms=arms, t=t, T=T)

    @property
    def K(self) -> int:
        return len(self.arms)

    @property
    def budget_remaining(self) -> int:
        return self.T - self.t

    def sums(self) -> np.ndarray:
        return np.array([a.S for a in self.arms], dtype=np.float64)

    def counts(self) -> np.ndarray:
        return np.array([a.N for a in self.arms], dtype=np.int64)

    def means(self) -> np.ndarray:
        if any(a.N == 0 for a in self.arms):
            raise UndefinedPosteriorError("all arms need at least one pull")
        return np.array([a.S / a.N for a in self.arms], dtype=np.float64)


@dataclass(frozen=True)
class HistoryEntry:
    round: int
    arm: int  # 1-based
    reward: float


@dataclass
class History:
    """Ordered record of one episode, plus the final recommendation (if made)."""

    entries: list[HistoryEntry] = field(default_factory=list)
    recommendation: Optional[int] = None


def replay(history: History, K: int, T: Optional[int] = None) -> BeliefState:
    """Fold a history into the belief it induces.

    Raises MalformedHistoryError on out-of-range arm indices.
    """
    if T is None:
        T = len(history.entries)
    sums = [0.0] * K
    counts = [0] * K
    for e in history.entries:
        if not (1 <= e.arm <= K):
            raise MalformedHistoryError(f"arm {e.arm} outside [1..{K}]")
        sums[e.arm - 1] += e.reward
        counts[e.arm - 1] += 1
    return BeliefState.from_stats(sums, counts, T=T, t=len(history.entries))


# Replications draw from counter-based Philox streams keyed by
# (root, stream, chunk): results do not depend on how chunks are
# assigned to workers, which is what makes parallel merges bit-exact.
CHUNK_REPS = 1 << 16


@dataclass(frozen=True)
class Seed:
    """Root seed plus a stream index; (root, stream, chunk) keys a Philox stream."""

    root: int
    stream: int = 0

    def generator(self, chunk: int = 0) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.root, spawn_key=(self.stream, chunk))
        return np.random.Generator(np.random.Philox(ss))

    def with_stream(self, stream: int) -> "Seed":
        return Seed(self.root, stream)


def chunk_ranges(reps: int, chunk_size: int = CHUNK_REPS) -> list[tuple[int, int, int]]:
    """Canonical (chunk_index, start, stop) decomposition of a replication count."""
    out = []
    start = 0
    idx = 0
    while start < reps:
        stop = min(start + chunk_size, reps)
        out.append((idx, start, stop))
        start = stop
        idx += 1
    return out


@dataclass(frozen=True)
class RegretEstimate:
    """Monte-Carlo mean simple regret with its standard error."""

    mean: float
    std_error: float
    reps: int
    seed: Seed
    policy: str
    T: int
