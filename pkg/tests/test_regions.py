from __future__ import annotations

from fractions import Fraction as F

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from mlincomp.errors import ParameterError
from mlincomp.regions import (
    LimitPair,
    admissible_for_K,
    admissible_set,
    hausdorff_bounds,
    k_prime,
    measure_constant,
    region_geometry,
)


def test_limit_pair() -> None:
    pair = LimitPair(F(3, 5), F(17, 20))
    assert pair.tilde(3) == (F(-3, 20), F(1, 10))
    with pytest.raises(ParameterError):
        LimitPair(F(1, 2), F(1, 3))
    with pytest.raises(ParameterError):
        LimitPair(F(0), F(6, 5))


@pytest.mark.parametrize(
    ("I", "S", "K", "expected"),
    [
        (F(2, 3), F(2, 3), 2, True),
        (F(3, 5), F(17, 20), 3, True),
        (F(0), F(0), 0, True),
        (F(0), F(1), 1, True),
        (F(1, 2), F(1, 2), 1, True),
        (F(1, 5), F(9, 10), 1, False),
        (F(1, 5), F(9, 10), 2, True),
    ]
    + [(F(1, 2), F(3, 5), K, False) for K in range(10)],
)
def test_admissible_for_K(I: F, S: F, K: int, expected: bool) -> None:
    assert admissible_for_K(I, S, K) is expected


def test_admissibility_boundary_is_exact() -> None:
    assert admissible_for_K(F(2, 3), F(2, 3), 2)
    assert not admissible_for_K(F(2, 3) - F(1, 10**12), F(2, 3) - F(1, 10**12), 2)


def test_slack_widens_the_region() -> None:
    assert not admissible_for_K(F(666, 1000), F(666, 1000), 2)
    assert admissible_for_K(F(666, 1000), F(666, 1000), 2, slack=F(1, 100))


@pytest.mark.parametrize(
    ("I", "S", "M", "expected"),
    [
        (F(1, 5), F(9, 10), 1, None),
        (F(1, 5), F(9, 10), 2, 2),
        (F(3, 5), F(17, 20), 3, 3),
        (F(0), F(0), 1, 0),
        (F(0), F(0), 5, 0),
        (F(2, 3), F(2, 3), 3, 2),
    ],
)
def test_k_prime(I: F, S: F, M: int, expected: int | None) -> None:
    assert k_prime(I, S, M) == expected


def test_half_and_three_fifths_is_never_admissible() -> None:
    for M in range(1, 9):
        report = admissible_set(F(1, 2), F(3, 5), M)
        assert not report.admissible
        assert report.k_prime is None


def test_admissible_set_lists_every_K() -> None:
    report = admissible_set(F(2, 3), F(2, 3), 4)
    assert report.admissible_K == frozenset({2})
    assert admissible_set(F(0), F(1), 3).admissible_K == frozenset({1, 2, 3})
    with pytest.raises(ParameterError):
        admissible_set(F(0), F(0), 0)


@given(st.fractions(0, 1), st.fractions(0, 1))
def test_single_series_segment(I: F, S: F) -> None:
    assert admissible_for_K(I, S, 1) == (I + S == 1 and S >= F(1, 2))


def test_region_geometry() -> None:
    assert [piece.vertices for piece in region_geometry(1)] == [
        ((F(0), F(0)),),
        ((F(0), F(1)), (F(1, 2), F(1, 2))),
    ]
    pieces = region_geometry(2)
    assert pieces[-1].K == 2
    assert pieces[-1].vertices == ((F(0), F(1)), (F(1, 2), F(1)), (F(2, 3), F(2, 3)))
    with pytest.raises(ParameterError):
        region_geometry(0)


@pytest.mark.parametrize("M", [1, 2, 3, 6])
def test_region_boundary_points_are_admissible(M: int) -> None:
    for piece in region_geometry(M):
        vertices = piece.vertices
        for i, (I0, S0) in enumerate(vertices):
            I1, S1 = vertices[(i + 1) % len(vertices)]
            for step in range(11):
                t = F(step, 10)
                assert admissible_for_K(I0 + t * (I1 - I0), S0 + t * (S1 - S0), piece.K)


def test_hausdorff_bounds() -> None:
    assert hausdorff_bounds(F(3, 5), F(17, 20), 3) == (F(15, 64), F(1))
    assert hausdorff_bounds(F(3, 4), F(3, 4), 3)[1] == 1
    assert hausdorff_bounds(F(0), F(0), 2) == (F(0), F(0))
    # K' = 2 < M keeps M + 1 in the lower bound's denominator
    lower, upper = hausdorff_bounds(F(1, 5), F(9, 10), 3)
    assert upper == F(2, 3)
    assert lower == F(2, 3) * F(1, 10) / (4 * F(4, 5) ** 2)
    with pytest.raises(ParameterError):
        hausdorff_bounds(F(1, 2), F(3, 5), 3)


@given(st.data())
def test_hausdorff_lower_bound_is_positive_below_one(data: st.DataObject) -> None:
    M = data.draw(st.integers(1, 6))
    piece = region_geometry(M)[data.draw(st.integers(1, M))]
    weights = [data.draw(st.integers(0, 100)) for _ in piece.vertices]
    assume(sum(weights))
    total = sum(weights)
    I = sum(F(w, total) * v[0] for w, v in zip(weights, piece.vertices))
    S = sum(F(w, total) * v[1] for w, v in zip(weights, piece.vertices))
    assert k_prime(I, S, M) is not None
    lower, upper = hausdorff_bounds(I, S, M)
    assert lower <= upper
    if S < 1:
        assert lower > 0


def test_measure_constant() -> None:
    assert measure_constant(F(2, 3), F(2, 3), 2) == 1
    assert measure_constant(F(3, 5), F(17, 20), 3) == 0
    assert measure_constant(F(0), F(0), 1) == 0
