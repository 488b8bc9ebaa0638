from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mlincomp.algebra import (
    FieldSpec,
    Polynomial,
    SequencePrefix,
    make_field,
    parse_field_spec,
    residual_coeff,
)
from mlincomp.bdm import BdmState, bdm_replay, bdm_step, ceil_share
from mlincomp.errors import DynamicsError, ParameterError
from mlincomp.mscfa import Mscfa, StepCase, run_mscfa

GF2 = make_field(2)
FIELDS = [
    make_field(2),
    make_field(3),
    parse_field_spec("2^2/7"),
    make_field(5),
    parse_field_spec("2^3/11"),
    parse_field_spec("3^2/10"),
]


def test_single_sequence_example() -> None:
    engine = Mscfa(GF2, 1)
    engine.feed([1])
    engine.feed([1])
    engine.feed([0])
    assert engine.profile.tolist() == [1, 1, 2]
    v, (u,) = engine.approximant()
    assert v == Polynomial.from_coeffs(GF2, [1, 1, 1])
    assert u == Polynomial.monomial(GF2, 1)
    aux = engine.auxiliary(0)
    assert aux.v == Polynomial.from_coeffs(GF2, [1, 1])
    assert aux.u == (Polynomial.one(GF2),)
    assert aux.delta == 1


@pytest.mark.parametrize(
    ("row", "cases", "deviation"),
    [
        ((1, 1), [StepCase.JUMP, StepCase.CORRECTION], (0, (-1, 0))),
        ((1, 0), [StepCase.JUMP, StepCase.UNCHANGED], (0, (-1, 0))),
        ((0, 1), [StepCase.UNCHANGED, StepCase.JUMP], (0, (0, -1))),
        ((0, 0), [StepCase.UNCHANGED, StepCase.UNCHANGED], (-1, (0, 0))),
    ],
)
def test_first_position_of_two_sequences(
    row: tuple[int, int], cases: list[StepCase], deviation: tuple[int, tuple[int, ...]]
) -> None:
    engine = Mscfa(GF2, 2)
    assert engine.feed(row) == cases
    assert engine.deviation_map() == deviation


def test_initial_state() -> None:
    engine = Mscfa(GF2, 3)
    assert engine.pending == (0, 1)
    assert engine.deviation_map() == (0, (0, 0, 0))
    v, u = engine.approximant()
    assert v == Polynomial.one(GF2)
    assert all(p.is_zero for p in u)
    assert engine.auxiliary(1).u[1] == Polynomial.one(GF2)


def test_out_of_order_step() -> None:
    engine = Mscfa(GF2, 2)
    with pytest.raises(DynamicsError):
        engine.step(1, 0)
    engine.step(0, 1)
    with pytest.raises(DynamicsError):
        engine.step(0, 1)
    with pytest.raises(DynamicsError):
        engine.deviation_map()


def test_invalid_multiplicity() -> None:
    with pytest.raises(ParameterError):
        Mscfa(GF2, 0)


def test_symbol_outside_field() -> None:
    with pytest.raises(ParameterError):
        Mscfa(GF2, 1).step(0, 2)


def test_zero_sequence_has_zero_complexity() -> None:
    engine = run_mscfa(SequencePrefix.zeros(GF2, 3, 20))
    assert not engine.profile.any()
    assert not engine.recorded_pattern().flags.any()
    assert engine.deviation_map() == (-ceil_share(20, 3), (20 // 4,) * 3)


@pytest.mark.parametrize("field", FIELDS, ids=str)
@pytest.mark.parametrize("M", [1, 2, 3])
def test_all_nonzero_discrepancies_reach_the_typical_profile(field: FieldSpec, M: int) -> None:
    engine = Mscfa(field, M)
    for _ in range(30):
        for m in range(M):
            engine.step(m, engine.symbol_for_discrepancy(m, 1))
    assert engine.profile.tolist() == [ceil_share(n, M) for n in range(1, 31)]
    assert engine.recorded_pattern().flags.all()


@pytest.mark.parametrize("field", FIELDS, ids=str)
@pytest.mark.parametrize("M", [1, 2, 3])
def test_discrepancy_is_a_bijection_of_the_symbol(field: FieldSpec, M: int) -> None:
    rng = np.random.default_rng(field.q * 10 + M)
    for _ in range(100):
        engine = Mscfa(field, M)
        for _ in range(8):
            for m in range(M):
                values = [engine.discrepancy(m, a) for a in field.elements()]
                assert sorted(values) == list(field.elements())
                assert engine.discrepancy(m, engine.forced_symbol(m)) == 0
                engine.step(m, int(rng.integers(0, field.q)))


def _check_order_conditions(engine: Mscfa, seq: SequencePrefix) -> None:
    v, u = engine.approximant()
    assert v.leading == 1
    assert v.degree == engine.deg
    for k in range(seq.M):
        assert u[k].degree < engine.deg  # type: ignore[operator]
        for j in range(1, engine.n + 1):
            assert residual_coeff(v, u[k], seq, k, j) == 0


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_order_conditions_and_deviation_invariant(data: st.DataObject) -> None:
    field = data.draw(st.sampled_from(FIELDS))
    M = data.draw(st.integers(1, 3))
    N = data.draw(st.integers(1, 16))
    rows = data.draw(
        st.lists(st.lists(st.integers(0, field.q - 1), min_size=M, max_size=M), min_size=N, max_size=N)
    )
    seq = SequencePrefix.from_rows(field, rows)
    engine = Mscfa(field, M)
    state = BdmState.initial(M)
    for n, row in enumerate(rows, start=1):
        engine.feed(row)
        state = bdm_step(state, engine.recorded_pattern().flags[n - 1].tolist())
        d, b = engine.deviation_map()
        assert d + sum(b) + n % (M + 1) == 0
        assert (d, b) == (state.d, state.b)
        _check_order_conditions(engine, seq.truncate(n))


@pytest.mark.parametrize("field", [FIELDS[0], FIELDS[1], FIELDS[2], FIELDS[5]], ids=str)
@pytest.mark.parametrize("M", [2, 3])
def test_order_conditions_after_every_inner_step(field: FieldSpec, M: int) -> None:
    N = 64
    seq = SequencePrefix(field, np.random.default_rng(field.q * 10 + M).integers(0, field.q, size=(N, M)))
    engine = Mscfa(field, M)
    for n in range(1, N + 1):
        for m in range(M):
            engine.step(m, seq.symbol(n, m))
            v, u = engine.approximant()
            assert v.degree == engine.deg
            for k in range(M):
                order = n if k <= m else n - 1
                for j in range(1, order + 1):
                    assert residual_coeff(v, u[k], seq, k, j) == 0, (n, m, k, j)


@settings(max_examples=50, deadline=None)
@given(st.data())
def test_trajectory_matches_replay_of_recorded_pattern(data: st.DataObject) -> None:
    field = data.draw(st.sampled_from(FIELDS))
    M = data.draw(st.integers(1, 4))
    N = data.draw(st.integers(1, 60))
    seed = data.draw(st.integers(0, 2**32 - 1))
    symbols = np.random.default_rng(seed).integers(0, field.q, size=(N, M))
    engine = run_mscfa(SequencePrefix(field, symbols))
    trajectory = engine.trajectory()
    assert trajectory == bdm_replay(engine.recorded_pattern())
    assert trajectory.L.tolist() == engine.profile.tolist()
    trajectory.check_invariant()


def test_profile_is_nondecreasing_and_bounded() -> None:
    field = parse_field_spec("3^2/10")
    symbols = np.random.default_rng(3).integers(0, field.q, size=(400, 2))
    profile = run_mscfa(SequencePrefix(field, symbols)).profile
    assert (np.diff(profile) >= 0).all()
    assert (profile <= np.arange(1, 401)).all()


def test_sequence_round_trip() -> None:
    seq = SequencePrefix.from_rows(GF2, [[1, 0], [1, 1], [0, 1]])
    assert run_mscfa(seq).sequence() == seq
