import numpy as np
import pytest

from bayesbai.core import (
    ArmStats,
    BeliefState,
    History,
    HistoryEntry,
    Instance,
    MalformedHistoryError,
    Seed,
    UndefinedPosteriorError,
    chunk_ranges,
    replay,
)


def test_instance_basics():
    inst = Instance((0.0, 0.0, 0.5))
    assert inst.K == 3
    assert inst.best_arm == 3
    assert inst.best_mean == 0.5
    assert inst.gap(1) == 0.5
    assert inst.gap(3) == 0.0


def test_instance_rejects_degenerate():
    with pytest.raises(ValueError):
        Instance((1.0,))
    with pytest.raises(ValueError):
        Instance((0.0, float("nan")))


def test_arm_stats_invariants():
    with pytest.raises(ValueError):
        ArmStats(S=1.0, N=0)
    with pytest.raises(ValueError):
        ArmStats(S=0.0, N=-1)
    with pytest.raises(UndefinedPosteriorError):
        _ = ArmStats().mean
    assert ArmStats(3.0, 2).mean == 1.5


def test_belief_state_accessors():
    b = BeliefState.from_stats([0.6, -0.5], [2, 1], T=8)
    assert b.K == 2
    assert b.t == 3
    assert b.budget_remaining == 5
    np.testing.assert_array_equal(b.sums(), [0.6, -0.5])
    np.testing.assert_array_equal(b.counts(), [2, 1])
    np.testing.assert_allclose(b.means(), [0.3, -0.5])


def test_belief_state_clock_invariants():
    with pytest.raises(ValueError):
        BeliefState.from_stats([0.0], [5], T=3)
    fresh = BeliefState.initial(3, 6)
    with pytest.raises(UndefinedPosteriorError):
        fresh.means()


def test_replay_round_trips():
    h = History(entries=[
        HistoryEntry(1, 1, 0.5),
        HistoryEntry(2, 2, -1.0),
        HistoryEntry(3, 1, 0.25),
    ])
    b = replay(h, K=2, T=5)
    np.testing.assert_allclose(b.sums(), [0.75, -1.0])
    np.testing.assert_array_equal(b.counts(), [2, 1])
    assert b.t == 3 and b.T == 5


def test_replay_rejects_bad_arm():
    h = History(entries=[HistoryEntry(1, 3, 0.0)])
    with pytest.raises(MalformedHistoryError):
        replay(h, K=2)


def test_seed_streams_are_independent_and_stable():
    a = Seed(7).generator(0).standard_normal(4)
    b = Seed(7).generator(0).standard_normal(4)
    np.testing.assert_array_equal(a, b)
    c = Seed(7).generator(1).standard_normal(4)
    d = Seed(7, stream=1).generator(0).standard_normal(4)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)
    assert not np.array_equal(c, d)
    assert Seed(7).with_stream(3) == Seed(7, 3)


def test_chunk_ranges_cover_exactly():
    ranges = chunk_ranges(150_000)
    assert ranges[0] == (0, 0, 65536)
    assert ranges[-1][2] == 150_000
    covered = sum(stop - start for _, start, stop in ranges)
    assert covered == 150_000
    assert chunk_ranges(10) == [(0, 0, 10)]
