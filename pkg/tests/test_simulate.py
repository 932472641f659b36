import math

import numpy as np
import pytest

from bayesbai.core import Instance, InvalidBudgetError, Seed
from bayesbai.policies import Alternating, SuccessiveRejects, Uniform
from bayesbai.simulate import (
    bayesian_regret,
    construct_w_state,
    drift_envelope,
    event_probes,
    frequentist_regret,
    run_episode,
)


def test_run_episode_is_deterministic():
    inst = Instance((0.0, 0.5))
    a = run_episode(Uniform(), inst, T=6, seed=Seed(5))
    b = run_episode(Uniform(), inst, T=6, seed=Seed(5))
    assert a == b
    assert len(a.entries) == 6
    assert a.recommendation in (1, 2)
    c = run_episode(Uniform(), inst, T=6, seed=Seed(6))
    assert a != c


def test_run_episode_rejects_small_budget():
    with pytest.raises(InvalidBudgetError):
        run_episode(Uniform(), Instance((0.0, 0.5)), T=1, seed=Seed(0))


def test_frequentist_regret_reproducible_and_worker_invariant():
    inst = Instance((0.0, 0.0, 0.5))
    kw = dict(T=30, reps=140_000, seed=Seed(77))
    a = frequentist_regret(SuccessiveRejects(3, 30), inst, **kw, workers=1)
    b = frequentist_regret(SuccessiveRejects(3, 30), inst, **kw, workers=4)
    assert a.mean == b.mean and a.std_error == b.std_error
    assert a.reps == 140_000


def test_fast_and_reference_paths_agree():
    # a policy without a compiled kernel falls back to the python episode
    # loop; on a kernel-backed policy both paths must agree exactly
    from bayesbai.simulate import _FAST_POLICY_CODES

    inst = Instance((0.0, 0.4))

    class UniformNoKernel(Uniform):
        name = "uniform-reference"

    assert "uniform-reference" not in _FAST_POLICY_CODES
    fast = frequentist_regret(Uniform(), inst, T=6, reps=4000, seed=Seed(9))
    slow = frequentist_regret(UniformNoKernel(), inst, T=6, reps=4000, seed=Seed(9))
    assert fast.mean == pytest.approx(slow.mean, abs=1e-12)
    assert fast.std_error == pytest.approx(slow.std_error, abs=1e-12)


def test_point_prior_collapses_to_frequentist():
    means = (0.0, 0.5)
    freq = frequentist_regret(Alternating(), Instance(means), T=8, reps=5000, seed=Seed(31))
    bayes = bayesian_regret(Alternating(), means, (0.0, 0.0), T=8, reps=5000, seed=Seed(31))
    assert freq.mean == bayes.mean
    assert freq.std_error == bayes.std_error


def test_informative_mode_uses_pseudo_observation():
    est = bayesian_regret(
        Alternating(), (0.0, 0.0), (1.0, 1.0), T=8, reps=5000, seed=Seed(32),
        mode="informative",
    )
    assert est.mean > 0.0
    with pytest.raises(ValueError):
        bayesian_regret(Alternating(), (0.0, 0.0), (1.0, 1.0), T=8, reps=10,
                        seed=Seed(0), mode="bogus")


def test_regret_shrinks_with_horizon():
    inst = Instance((0.0, 0.5))
    short = frequentist_regret(Alternating(), inst, T=4, reps=40_000, seed=Seed(41))
    long = frequentist_regret(Alternating(), inst, T=40, reps=40_000, seed=Seed(41))
    assert long.mean < short.mean


def test_drift_envelope_shape():
    env = drift_envelope(11)
    assert env.shape == (5,)
    assert np.all(np.diff(env) <= 0.0)
    assert env[-1] == 0.0
    assert env[0] == pytest.approx(
        4.0 * math.sqrt(math.log(11)) * math.sqrt(sum(1.0 / m**2 for m in range(1, 5)))
    )


def test_event_probe_exact_and_bounds():
    r = event_probes(T=11, C_U=2.0, Delta_G=0.5, reps=30_000, seed=Seed(50))
    x = 2.0 * math.sqrt(math.log(11)) + 0.5
    assert r.p_x == pytest.approx(0.5 * math.erfc(x / math.sqrt(2.0)), rel=1e-12)
    assert r.f_close == pytest.approx(0.5 * math.sqrt(1.0 / (math.pi * 11**3)))
    assert r.f_nodrift == pytest.approx(2.0 * 11 ** (-3.5))
    assert r.T_prime == 5
    assert r.p_x >= r.f_under
    assert 0.0 <= r.p_y <= 1.0 and 0.0 <= r.p_yz <= r.p_y


def test_event_probe_input_validation():
    with pytest.raises(ValueError):
        event_probes(T=10, C_U=2.0, Delta_G=0.5, reps=10, seed=Seed(0))
    with pytest.raises(ValueError):
        event_probes(T=11, C_U=-1.0, Delta_G=0.5, reps=10, seed=Seed(0))


def test_construct_w_state():
    b = construct_w_state(T=9, C_U=3.0, n12=2)
    assert b.K == 3
    np.testing.assert_array_equal(b.counts(), [2, 2, 1])
    assert b.means()[2] == pytest.approx(-3.0 * math.sqrt(math.log(9)))
    assert b.budget_remaining == 9 - 5
    with pytest.raises(ValueError):
        construct_w_state(T=8, C_U=3.0, n12=2)
    with pytest.raises(ValueError):
        construct_w_state(T=9, C_U=3.0, n12=9)
