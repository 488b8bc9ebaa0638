from __future__ import annotations

from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mlincomp.algebra import SequencePrefix, make_field
from mlincomp.analysis import (
    audit_bounds,
    check_targets,
    deviation_profile,
    tail_extrema,
    tail_window,
    window_extrema,
)
from mlincomp.bdm import DiscrepancyPattern, bdm_replay
from mlincomp.errors import MismatchError, ParameterError
from mlincomp.mscfa import run_mscfa


def test_deviation_profile() -> None:
    assert deviation_profile(np.array([1, 1, 2]), 1).tolist() == [0, 0, 0]
    assert deviation_profile(np.array([0, 0, 0, 0]), 2).tolist() == [-1, -2, -2, -3]


def test_deviation_of_all_nonzero_pattern_is_the_drain() -> None:
    trajectory = bdm_replay(DiscrepancyPattern.all_nonzero(3, 100))
    assert deviation_profile(trajectory.L, 3).tolist() == trajectory.d.tolist()


def test_window_extrema_are_exact() -> None:
    L = np.array([1, 1, 2, 2, 3, 3])
    assert window_extrema(L, 2, 5) == (F(1, 2), F(2, 3))
    assert window_extrema(L, 0, 1) == (F(1), F(1))
    with pytest.raises(ParameterError):
        window_extrema(L, 4, 3)
    with pytest.raises(ParameterError):
        window_extrema(L, 1, 7)


def test_tail_window() -> None:
    assert tail_window(100, F(1, 2)) == (50, 100)
    assert tail_window(7, F(1)) == (1, 7)
    with pytest.raises(ParameterError):
        tail_window(10, F(0))


def test_tail_extrema_of_constant_slope() -> None:
    n = np.arange(1, 1001)
    L = -(-2 * n // 3)
    I_hat, S_hat = tail_extrema(L)
    assert F(2, 3) <= I_hat <= S_hat <= F(2, 3) + F(1, 500)


def test_tail_extrema_of_zero_profile() -> None:
    assert tail_extrema(np.zeros(50, dtype=np.int64)) == (0, 0)


@given(st.lists(st.integers(0, 3), min_size=2, max_size=200))
def test_wider_tails_give_wider_extrema(steps: list[int]) -> None:
    L = np.minimum(np.cumsum(steps), np.arange(1, len(steps) + 1))
    narrow = tail_extrema(L, F(1, 4))
    wide = tail_extrema(L, F(3, 4))
    assert wide[0] <= narrow[0] <= narrow[1] <= wide[1]


def test_audit_of_engine_profile() -> None:
    rng = np.random.default_rng(99)
    seq = SequencePrefix(make_field(2), rng.integers(0, 2, size=(10_000, 2)))
    report = audit_bounds(run_mscfa(seq).profile, 2)
    assert report.bounded and report.monotone
    assert abs(report.I_hat - F(2, 3)) <= F(1, 100)
    assert abs(report.S_hat - F(2, 3)) <= F(1, 100)
    assert 2 in report.admissible_K
    assert report.ok


def test_audit_flags_malformed_profiles() -> None:
    report = audit_bounds(np.array([1, 2, 1, 2]), 1, tail=F(1))
    assert not report.monotone
    assert report.first_decrease == 3
    assert report.bounded
    assert not report.ok

    report = audit_bounds(np.array([0, 3, 3]), 1, tail=F(1))
    assert report.first_above_n == 2
    assert not report.bounded


def test_audit_report_lines() -> None:
    lines = audit_bounds(np.array([0, 0, 0, 0]), 2).to_lines()
    assert lines[:4] == ["N=4", "M=2", "tail=1/2", "window=2,4"]
    assert "admissible_K=0" in lines
    assert "I_hat_decimal=0.000000000000" in lines


def test_check_targets() -> None:
    check_targets(F(3, 5), F(17, 20), F(3, 5), F(17, 20), F(0))
    check_targets(F(59, 100), F(86, 100), F(3, 5), F(17, 20), F(1, 100))
    with pytest.raises(MismatchError):
        check_targets(F(1, 2), F(17, 20), F(3, 5), F(17, 20), F(1, 100))
