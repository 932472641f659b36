import math

import numpy as np
import pytest

from bayesbai.bellman import (
    DPConfig,
    ebi,
    exact_loss,
    loss_mc_oracle,
    two_armed_loss_fast,
)
from bayesbai.core import BeliefState, CapacityError, Seed, UndefinedPosteriorError
from bayesbai.posterior import terminal_loss_two

B = BeliefState.from_stats([0.6, -0.5, 0.2], [2, 1, 3], T=12)


def test_budget_zero_is_terminal_loss():
    res = exact_loss(B, 0)
    assert res.chosen_arm is None
    assert res.arm_losses.size == 0 and res.ebi.size == 0
    sym = BeliefState.from_stats([0.0, 0.0], [1, 1], T=4)
    assert exact_loss(sym, 0).loss == pytest.approx(1.0 / math.sqrt(math.pi), abs=1e-10)


def test_one_draw_reduces_loss():
    r0 = exact_loss(B, 0)
    r1 = exact_loss(B, 1)
    assert r1.loss < r0.loss
    np.testing.assert_allclose(r1.ebi, r0.loss - r1.arm_losses, atol=1e-14)
    assert r1.chosen_arm == int(np.argmin(r1.arm_losses)) + 1


def test_improvement_nonnegative_and_symmetric():
    sym = BeliefState.from_stats([0.0, 0.0], [1, 1], T=6)
    for budget in (1, 2, 3):
        e = ebi(sym, budget)
        assert np.all(e >= -1e-10)
        assert e[0] == pytest.approx(e[1], abs=1e-9)


def test_deeper_budget_never_hurts():
    losses = [exact_loss(B, k).loss for k in range(4)]
    assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))


def test_capacity_limits_raise():
    wide = BeliefState.from_stats([0.0] * 4, [1] * 4, T=10)
    with pytest.raises(CapacityError):
        exact_loss(wide, 1)
    with pytest.raises(CapacityError):
        exact_loss(B, 7)
    fresh = BeliefState.initial(2, 5)
    with pytest.raises(UndefinedPosteriorError):
        exact_loss(fresh, 1)
    with pytest.raises(ValueError):
        ebi(B, 0)


def test_two_armed_fast_path_matches_exact_dp():
    cases = [(0.0, 1, 1, 2), (0.7, 3, 1, 4), (-1.2, 2, 2, 3), (0.5, 1, 1, 5)]
    cfg = DPConfig(quadrature_order=24)
    for d, n1, n2, budget in cases:
        b = BeliefState.from_stats([d * n1, 0.0], [n1, n2], T=n1 + n2 + budget)
        exact = exact_loss(b, budget, cfg).loss
        fast = two_armed_loss_fast(d, n1, n2, budget)
        assert fast == pytest.approx(exact, abs=1e-6)


def test_two_armed_fast_path_budget_zero():
    assert two_armed_loss_fast(0.4, 2, 3, 0) == terminal_loss_two(0.4, 2, 3)
    with pytest.raises(UndefinedPosteriorError):
        two_armed_loss_fast(0.0, 0, 1, 1)


def test_refined_and_plain_integrators_agree_two_arms():
    b = BeliefState.from_stats([0.3, -0.1], [2, 1], T=8)
    plain = exact_loss(b, 2, DPConfig(quadrature_order=24))
    refined = exact_loss(b, 2, DPConfig(refine=True))
    np.testing.assert_allclose(refined.arm_losses, plain.arm_losses, atol=1e-6)


def test_oracle_matches_exact_loss():
    cfg = DPConfig(refine=True)
    res = exact_loss(B, 2, cfg)
    est = loss_mc_oracle(B, 2, reps=40_000, seed=Seed(21), cfg=cfg)
    target = float(res.arm_losses[res.chosen_arm - 1])
    assert est.mean == pytest.approx(target, abs=3.5 * est.std_error)


def test_oracle_custom_policy_path():
    from bayesbai.policies import Uniform

    cfg = DPConfig(refine=True)
    opt = loss_mc_oracle(B, 2, reps=20_000, seed=Seed(22), cfg=cfg)
    uni = loss_mc_oracle(B, 2, policy=Uniform(), reps=20_000, seed=Seed(22), cfg=cfg)
    # the DP policy is optimal, so any fixed policy can only do worse
    slack = 3.0 * (opt.std_error + uni.std_error)
    assert opt.mean <= uni.mean + slack


def test_node_accounting_grows_with_depth():
    n1 = exact_loss(B, 1).nodes_evaluated
    n2 = exact_loss(B, 2).nodes_evaluated
    n3 = exact_loss(B, 3).nodes_evaluated
    assert n1 < n2 < n3
