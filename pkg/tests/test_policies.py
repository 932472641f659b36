import numpy as np
import pytest

from bayesbai.bellman import DPConfig
from bayesbai.core import (
    BeliefState,
    InvalidBudgetError,
    UndefinedPosteriorError,
    UnsupportedArityError,
)
from bayesbai.policies import (
    Alternating,
    BayesOptimal,
    SuccessiveRejects,
    Uniform,
    policy_by_name,
    recommend_empirical_best,
    successive_rejects_schedule,
)
from bayesbai.posterior import update


def run_rounds(policy, belief, rewards):
    """Feed scripted rewards; returns (belief, pulled arm sequence)."""
    arms = []
    policy.reset()
    for r in rewards:
        arm = policy.select(belief, belief.t + 1)
        arms.append(arm)
        belief = update(belief, arm, r)
    return belief, arms


def test_forced_initialization_visits_all_arms():
    for policy in (Uniform(), SuccessiveRejects(3, 9)):
        b = BeliefState.initial(3, 9)
        _, arms = run_rounds(policy, b, [0.0, 0.0, 0.0])
        assert arms == [1, 2, 3]


def test_uniform_is_round_robin():
    b = BeliefState.initial(3, 9)
    _, arms = run_rounds(Uniform(), b, [0.0] * 7)
    assert arms == [1, 2, 3, 1, 2, 3, 1]


def test_alternating_picks_least_pulled():
    p = Alternating()
    b = BeliefState.from_stats([0.0, 1.0], [3, 1], T=8)
    assert p.select(b, b.t + 1) == 2
    tied = BeliefState.from_stats([0.0, 1.0], [2, 2], T=8)
    assert p.select(tied, tied.t + 1) == 1
    with pytest.raises(UnsupportedArityError):
        p.select(BeliefState.initial(3, 9), 1)


def test_recommend_empirical_best():
    b = BeliefState.from_stats([0.9, 1.0, -3.0], [3, 2, 1], T=9)
    assert recommend_empirical_best(b) == 2
    with pytest.raises(UndefinedPosteriorError):
        recommend_empirical_best(BeliefState.initial(2, 4))


def test_schedule_worked_example_three_arms():
    s = successive_rejects_schedule(3, 60)
    assert s.targets == (15, 22)
    assert s.phase_pulls == (15, 7)
    assert s.phases == 2


def test_schedule_two_arms():
    assert successive_rejects_schedule(2, 10).phase_pulls == (4,)
    assert successive_rejects_schedule(2, 2).phase_pulls == (1,)


def test_schedule_never_overspends():
    for K in (2, 3):
        for T in range(K, 80):
            s = successive_rejects_schedule(K, T)
            spent = 0
            for k, p in enumerate(s.phase_pulls):
                survivors = K - k
                # a phase skips pulling only when the budget is already gone
                assert p >= 1 or (T - spent) < survivors
                spent += p * survivors
            assert spent <= T


def test_schedule_rejects_bad_inputs():
    with pytest.raises(UnsupportedArityError):
        successive_rejects_schedule(1, 10)
    with pytest.raises(InvalidBudgetError):
        successive_rejects_schedule(3, 2)


def test_successive_rejects_eliminates_worst():
    p = SuccessiveRejects(3, 60)
    b = BeliefState.initial(3, 60)
    # phase 1: 15 pulls each; make arm 2 clearly worst
    rewards = []
    for i in range(45):
        arm = i % 3
        rewards.append(-5.0 if arm == 1 else 1.0)
    b, arms = run_rounds(p, b, rewards)
    nxt = p.select(b, b.t + 1)
    assert nxt in (1, 3)
    counts = dict(zip(*np.unique(arms, return_counts=True)))
    assert counts == {1: 15, 2: 15, 3: 15}


def test_successive_rejects_tie_drops_largest_index():
    p = SuccessiveRejects(2, 4)  # single phase of 2 pulls each... schedule (1,)
    b = BeliefState.initial(2, 4)
    sched = p.schedule
    pulls = sched.phase_pulls[0] * 2
    b, _ = run_rounds(p, b, [0.0] * pulls)
    assert p.recommend(b) == 1  # exact tie: arm 2 is the one eliminated


def test_successive_rejects_spends_leftover_on_survivor():
    p = SuccessiveRejects(3, 60)
    b = BeliefState.initial(3, 60)
    rewards = [1.0 if i % 3 != 1 else -5.0 for i in range(45)]
    b, _ = run_rounds(p, b, rewards)
    seq = []
    while b.budget_remaining:
        arm = p.select(b, b.t + 1)
        seq.append(arm)
        b = update(b, arm, 1.0 if arm != 2 else -5.0)
    assert 2 not in seq  # eliminated arm never comes back
    assert p.recommend(b) in (1, 3)


def test_bayes_optimal_prefers_the_informative_arm():
    # one arm far behind: drawing it cannot change the recommendation
    b = BeliefState.from_stats([0.0, 0.0, -9.0], [2, 2, 1], T=9)
    p = BayesOptimal(DPConfig())
    assert p.select(b, b.t + 1) in (1, 2)


def test_policy_by_name():
    assert policy_by_name("uniform", 3, 9).name == "uniform"
    assert policy_by_name("alternating", 2, 8).name == "alternating"
    assert policy_by_name("successive-rejects", 3, 30).name == "successive-rejects"
    assert policy_by_name("bayes-optimal", 2, 6).name == "bayes-optimal"
    with pytest.raises(ValueError):
        policy_by_name("thompson", 2, 6)
