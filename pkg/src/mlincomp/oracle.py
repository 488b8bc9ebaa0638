"""Brute-force linear complexity from the minimal common denominator definition.

``L_a(n)`` is the least L for which a monic ``v`` of degree L satisfies

    sum_{j=0..L} v_j a[s - L + j][m] = 0    for all m and L+1 <= s <= n,

i.e. ``v G_m`` has no terms of degree L-n .. -1 beyond its polynomial part.
Solved by Gaussian elimination over F_q; intended as ground truth for tests.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from mlincomp.algebra import FieldElement, FieldSpec, Polynomial, SequencePrefix
from mlincomp.errors import ParameterError


def solve(
    field: FieldSpec, rows: Sequence[Sequence[int]], rhs: Sequence[int], unknowns: int
) -> list[FieldElement] | None:
    """A solution of ``rows @ x = rhs`` over the field, or None if inconsistent."""
    matrix = [list(row) + [b] for row, b in zip(rows, rhs)]
    pivots: list[int] = []
    r = 0
    for col in range(unknowns):
        pivot = next((i for i in range(r, len(matrix)) if matrix[i][col]), None)
        if pivot is None:
            continue
        matrix[r], matrix[pivot] = matrix[pivot], matrix[r]
        scale = field.inv(matrix[r][col])
        matrix[r] = [field.mul(scale, x) for x in matrix[r]]
        for i in range(len(matrix)):
            factor = matrix[i][col]
            if i != r and factor:
                matrix[i] = [
                    field.sub(x, field.mul(factor, y)) for x, y in zip(matrix[i], matrix[r])
                ]
        pivots.append(col)
        r += 1

    if any(row[-1] for row in matrix[r:]):
        return None
    solution = [0] * unknowns
    for i, col in enumerate(pivots):
        solution[col] = matrix[i][-1]
    return solution


def _system(seq: SequencePrefix, n: int, L: int) -> tuple[list[list[int]], list[int]]:
    field = seq.field
    rows, rhs = [], []
    for m in range(seq.M):
        for s in range(L + 1, n + 1):
            rows.append([seq.symbol(s - L + j, m) for j in range(L)])
            rhs.append(field.neg(seq.symbol(s, m)))
    return rows, rhs


def _check_length(seq: SequencePrefix, n: int) -> None:
    if not 0 <= n <= seq.N:
        raise ParameterError(
            code="mlincomp::oracle::prefix_too_short",
            message=f"Position {n} is outside the prefix of length {seq.N}",
        )


def minimal_denominator(seq: SequencePrefix, n: int, start: int = 0) -> Polynomial:
    """A monic denominator of least degree approximating all sequences through position n."""
    _check_length(seq, n)
    for L in range(start, n + 1):
        rows, rhs = _system(seq, n, L)
        solution = solve(seq.field, rows, rhs, L)
        if solution is not None:
            return Polynomial.from_coeffs(seq.field, [*solution, 1])
    raise AssertionError("degree n always admits a solution")


def min_lc(seq: SequencePrefix, n: int) -> int:
    return int(minimal_denominator(seq, n).degree)  # type: ignore[arg-type]


def profile_oracle(seq: SequencePrefix, N: int | None = None) -> np.ndarray:
    """L(1..N); each search starts at the previous value since the profile is nondecreasing."""
    N = seq.N if N is None else N
    _check_length(seq, N)
    profile: list[int] = []
    previous = 0
    for n in range(1, N + 1):
        previous = int(minimal_denominator(seq, n, start=previous).degree)  # type: ignore[arg-type]
        profile.append(previous)
    return np.array(profile, dtype=np.int64)
