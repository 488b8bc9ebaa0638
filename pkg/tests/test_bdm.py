from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mlincomp.algebra import SequencePrefix, make_field
from mlincomp.bdm import (
    BdmState,
    Discrepancy,
    DiscrepancyPattern,
    bdm_random,
    bdm_replay,
    bdm_step,
    ceil_share,
    default_checkpoints,
    trial_seed,
    within_eps,
)
from mlincomp.errors import DynamicsError, ParameterError
from mlincomp.mscfa import run_mscfa

Z, NZ = Discrepancy.ZERO, Discrepancy.NONZERO


def test_ceil_share() -> None:
    assert [ceil_share(n, 2) for n in range(7)] == [0, 1, 2, 2, 3, 4, 4]
    assert [ceil_share(n, 1) for n in range(5)] == [0, 1, 1, 2, 2]


@pytest.mark.parametrize(
    ("flags", "d", "b"),
    [
        ((NZ,), 0, (-1,)),
        ((Z,), -1, (0,)),
    ],
)
def test_first_step_single_sequence(flags: tuple[Discrepancy, ...], d: int, b: tuple[int, ...]) -> None:
    state = bdm_step(BdmState.initial(1), flags)
    assert (state.n, state.d, state.b) == (1, d, b)


def test_second_step_discharges_only_when_battery_exceeds_drain() -> None:
    state = bdm_step(BdmState.initial(1), (Z,))
    # n = 2 is a multiple of M+1: b rises to 1 and swaps with d = -1
    state = bdm_step(state, (NZ,))
    assert (state.d, state.b) == (1, (-1,))
    assert state.L == 2


def test_three_positions_all_nonzero() -> None:
    state = BdmState.initial(2)
    for _ in range(3):
        state = bdm_step(state, (NZ, NZ))
    assert (state.n, state.d, state.b) == (3, 0, (0, 0))
    assert state.L == 2


def test_flag_count_is_checked() -> None:
    with pytest.raises(ParameterError):
        bdm_step(BdmState.initial(2), (NZ,))


def test_all_zero_pattern() -> None:
    trajectory = bdm_replay(DiscrepancyPattern.all_zero(3, 40))
    assert not trajectory.L.any()
    assert trajectory.d.tolist() == [-ceil_share(n, 3) for n in range(1, 41)]


def test_all_nonzero_pattern_follows_typical_profile() -> None:
    trajectory = bdm_replay(DiscrepancyPattern.all_nonzero(3, 40))
    assert trajectory.L.tolist() == [ceil_share(n, 3) for n in range(1, 41)]


def test_replay_rejects_short_pattern() -> None:
    with pytest.raises(ParameterError):
        bdm_replay(DiscrepancyPattern.all_zero(1, 3), 4)


def test_pattern_shape() -> None:
    with pytest.raises(ParameterError):
        DiscrepancyPattern(np.zeros((3, 0), dtype=bool))
    pattern = DiscrepancyPattern.from_rows([(1, 0), (0, 1)], 2)
    assert (pattern.M, pattern.N) == (2, 2)
    assert pattern.row(2) == (Z, NZ)
    assert pattern.truncate(1) == DiscrepancyPattern.from_rows([(1, 0)], 2)


def test_invariant_over_many_random_steps() -> None:
    rng = np.random.default_rng(5)
    for M in (1, 2, 3, 5):
        pattern = DiscrepancyPattern(rng.integers(0, 2, size=(100_000 // M, M)) != 0)
        trajectory = bdm_replay(pattern)
        trajectory.check_invariant()
        for n in rng.integers(1, pattern.N, size=20).tolist():
            assert trajectory.at(n).invariant_residual() == 0


def test_invariant_violation_is_reported() -> None:
    trajectory = bdm_replay(DiscrepancyPattern.all_nonzero(2, 5))
    trajectory.d[2] += 1
    with pytest.raises(DynamicsError):
        trajectory.check_invariant()


def test_trajectory_at_matches_stepping() -> None:
    pattern = DiscrepancyPattern(np.random.default_rng(9).integers(0, 2, size=(50, 3)) != 0)
    trajectory = bdm_replay(pattern)
    state = trajectory.at(0)
    for n in range(1, 51):
        state = bdm_step(state, pattern.row(n))
        assert trajectory.at(n) == state
    rows = list(trajectory.rows())
    assert rows[-1].n == 50
    assert rows[-1].L == state.L


@settings(max_examples=40, deadline=None)
@given(
    st.sampled_from([2, 3, 5]),
    st.integers(1, 4),
    st.integers(1, 80),
    st.integers(0, 2**32 - 1),
)
def test_replay_agrees_with_engine(q: int, M: int, N: int, seed: int) -> None:
    field = make_field(q)
    engine = run_mscfa(SequencePrefix(field, np.random.default_rng(seed).integers(0, q, size=(N, M))))
    assert bdm_replay(engine.recorded_pattern()) == engine.trajectory()


def test_trial_seeds() -> None:
    assert trial_seed(1, 0) == trial_seed(1, 0)
    assert len({trial_seed(1, t) for t in range(50)}) == 50
    assert trial_seed(1, 0) != trial_seed(2, 0)


def test_within_eps() -> None:
    assert within_eps(67, 100, 2, Fraction(1, 100))
    assert not within_eps(68, 100, 2, Fraction(1, 100))


def test_default_checkpoints() -> None:
    assert default_checkpoints(100) == (10, 20, 30, 40, 50, 60, 70, 80, 90, 100)
    assert default_checkpoints(3) == (1, 2, 3)


def test_random_trials_are_reproducible() -> None:
    first = bdm_random(2, 2, 500, 20, 77)
    second = bdm_random(2, 2, 500, 20, 77)
    assert first == second
    assert first.checkpoints[-1] == 500
    assert [t.trial for t in first.trials] == list(range(20))
    assert bdm_random(2, 2, 500, 20, 78).trials != first.trials


def test_random_trials_do_not_depend_on_worker_count() -> None:
    assert bdm_random(3, 2, 300, 6, 5, workers=2) == bdm_random(3, 2, 300, 6, 5)


def test_random_statistics_rows() -> None:
    stats = bdm_random(2, 1, 200, 10, 3, checkpoints=[50, 100])
    assert stats.checkpoints == (50, 100, 200)
    for row in stats.rows:
        assert row.d_min <= row.d_mean <= row.d_max
        assert 0 <= row.frac_within_eps <= 1


def test_random_parameters_are_checked() -> None:
    with pytest.raises(ParameterError):
        bdm_random(2, 2, 100, 0, 1)
    with pytest.raises(ParameterError):
        bdm_random(2, 2, 100, 1, 1, checkpoints=[0])


@pytest.mark.slow
def test_complexity_concentrates_around_typical_value() -> None:
    stats = bdm_random(2, 2, 10_000, 200, 20240101)
    assert stats.fraction_within(Fraction(1, 100)) >= Fraction(95, 100)
