"""Battery Discharge Model: the integer dynamics of the drain d and battery charges b_m.

``d = deg - ceil(n M / (M+1))`` and ``b_m = floor(n / (M+1)) - w_m`` evolve by a
per-position pre-adjustment followed by discharges (swaps of ``b_m`` and ``d``)
wherever the discrepancy is nonzero and ``b_m > d``. Replay mode takes the
nonzero flags from a pattern, stochastic mode draws them with probability
(q-1)/q.
"""

from __future__ import annotations

import enum
import logging
from collections.abc import Iterable, Iterator, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from mlincomp.errors import DynamicsError, ParameterError

logger = logging.getLogger(__name__)


class Discrepancy(enum.IntEnum):
    ZERO = 0
    NONZERO = 1


def ceil_share(n: int, M: int) -> int:
    return -(-n * M // (M + 1))


@dataclass(frozen=True)
class BdmState:
    M: int
    n: int = 0
    d: int = 0
    b: tuple[int, ...] = ()

    @classmethod
    def initial(cls, M: int) -> BdmState:
        return cls(M, 0, 0, (0,) * M)

    @property
    def L(self) -> int:
        return ceil_share(self.n, self.M) + self.d

    def invariant_residual(self) -> int:
        """Zero whenever d + sum(b) + (n mod (M+1)) = 0 holds."""
        return self.d + sum(self.b) + self.n % (self.M + 1)


def advance_position(d: int, b: list[int], n: int, M: int, flags: Sequence[int | bool]) -> int:
    """Move the (d, b) pair to position ``n``; mutates ``b`` and returns the new drain."""
    if n % (M + 1) == 0:
        for m in range(M):
            b[m] += 1
    else:
        d -= 1
    for m in range(M):
        if flags[m] and b[m] > d:
            b[m], d = d, b[m]
    return d


def bdm_step(state: BdmState, flags: Sequence[int | bool]) -> BdmState:
    if len(flags) != state.M:
        raise ParameterError(
            code="mlincomp::bdm::flag_count",
            message=f"Expected {state.M} discrepancy flags, got {len(flags)}",
        )
    b = list(state.b)
    d = advance_position(state.d, b, state.n + 1, state.M, flags)
    return BdmState(state.M, state.n + 1, d, tuple(b))


@dataclass(frozen=True, eq=False)
class DiscrepancyPattern:
    """Nonzero-discrepancy flags; row t-1 holds position t, one column per sequence."""

    flags: np.ndarray

    def __post_init__(self) -> None:
        if self.flags.ndim != 2 or self.flags.shape[1] < 1:
            raise ParameterError(
                code="mlincomp::bdm::invalid_pattern_shape",
                message=f"A discrepancy pattern needs shape (N, M) with M >= 1, got {self.flags.shape}",
            )

    @classmethod
    def from_array(cls, flags: np.ndarray) -> DiscrepancyPattern:
        array = np.asarray(flags, dtype=bool).copy()
        array.flags.writeable = False
        return cls(array)

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[int | bool]], M: int) -> DiscrepancyPattern:
        array = np.array([list(row) for row in rows], dtype=bool).reshape(-1, M)
        return cls.from_array(array)

    @classmethod
    def all_zero(cls, M: int, N: int) -> DiscrepancyPattern:
        return cls.from_array(np.zeros((N, M), dtype=bool))

    @classmethod
    def all_nonzero(cls, M: int, N: int) -> DiscrepancyPattern:
        return cls.from_array(np.ones((N, M), dtype=bool))

    @property
    def M(self) -> int:
        return int(self.flags.shape[1])

    @property
    def N(self) -> int:
        return int(self.flags.shape[0])

    def row(self, t: int) -> tuple[Discrepancy, ...]:
        return tuple(Discrepancy(int(flag)) for flag in self.flags[t - 1])

    def truncate(self, N: int) -> DiscrepancyPattern:
        return DiscrepancyPattern(self.flags[:N])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DiscrepancyPattern):
            return NotImplemented
        return np.array_equal(self.flags, other.flags)

    def __hash__(self) -> int:
        return hash((self.flags.tobytes(), self.flags.shape))


@dataclass(frozen=True)
class TrajectoryRow:
    n: int
    d: int
    b: tuple[int, ...]
    L: int


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Drain and battery values after positions 1..N, with L(n) = ceil(nM/(M+1)) + d."""

    M: int
    d: np.ndarray
    b: np.ndarray

    @property
    def N(self) -> int:
        return len(self.d)

    @property
    def n(self) -> np.ndarray:
        return np.arange(1, self.N + 1, dtype=np.int64)

    @property
    def L(self) -> np.ndarray:
        n = self.n
        return -(-n * self.M // (self.M + 1)) + self.d

    def at(self, n: int) -> BdmState:
        if n == 0:
            return BdmState.initial(self.M)
        return BdmState(
            self.M, n, int(self.d[n - 1]), tuple(int(x) for x in self.b[n - 1])
        )

    def rows(self) -> Iterator[TrajectoryRow]:
        L = self.L.tolist()
        for i, (d, b) in enumerate(zip(self.d.tolist(), self.b.tolist())):
            yield TrajectoryRow(i + 1, d, tuple(b), L[i])

    def __len__(self) -> int:
        return self.N

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Trajectory):
            return NotImplemented
        return (
            self.M == other.M
            and np.array_equal(self.d, other.d)
            and np.array_equal(self.b, other.b)
        )

    def __hash__(self) -> int:
        return hash((self.M, self.d.tobytes(), self.b.tobytes()))

    def check_invariant(self) -> None:
        residual = self.d + self.b.sum(axis=1) + self.n % (self.M + 1)
        bad = np.flatnonzero(residual)
        if bad.size:
            n = int(bad[0]) + 1
            raise DynamicsError(
                code="mlincomp::bdm::invariant_violation",
                message=f"d + sum(b) + (n mod (M+1)) = {int(residual[bad[0]])} at n = {n}",
            )


def bdm_replay(pattern: DiscrepancyPattern, N: int | None = None) -> Trajectory:
    N = pattern.N if N is None else N
    if N > pattern.N:
        raise ParameterError(
            code="mlincomp::bdm::pattern_too_short",
            message=f"Requested {N} positions from a pattern of length {pattern.N}",
        )
    M = pattern.M
    d, b = 0, [0] * M
    ds: list[int] = []
    bs: list[list[int]] = []
    for n, flags in enumerate(pattern.flags[:N].tolist(), start=1):
        d = advance_position(d, b, n, M, flags)
        ds.append(d)
        bs.append(b.copy())
    return Trajectory(
        M,
        np.array(ds, dtype=np.int64),
        np.array(bs, dtype=np.int64).reshape(N, M),
    )


def trial_seed(master_seed: int, trial: int) -> int:
    """Per-trial 64-bit seed derived from the master seed by trial index."""
    sequence = np.random.SeedSequence(entropy=master_seed, spawn_key=(trial,))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def within_eps(L: int, n: int, M: int, eps: Fraction) -> bool:
    """|L/n - M/(M+1)| <= eps, exactly."""
    return abs(Fraction(L, n) - Fraction(M, M + 1)) <= eps


@dataclass(frozen=True)
class TrialResult:
    trial: int
    seed: int
    d_at: tuple[int, ...]
    L_at: tuple[int, ...]

    @property
    def L_final(self) -> int:
        return self.L_at[-1]

    @property
    def d_final(self) -> int:
        return self.d_at[-1]


@dataclass(frozen=True)
class CheckpointStats:
    n: int
    d_min: int
    d_max: int
    d_mean: Fraction
    frac_within_eps: Fraction


@dataclass(frozen=True)
class BdmStatistics:
    q: int
    M: int
    N: int
    master_seed: int
    eps: Fraction
    checkpoints: tuple[int, ...]
    rows: tuple[CheckpointStats, ...]
    trials: tuple[TrialResult, ...] = field(repr=False)

    def fraction_within(self, eps: Fraction | None = None) -> Fraction:
        """Fraction of trials with |L(N)/N - M/(M+1)| <= eps."""
        eps = self.eps if eps is None else eps
        hits = sum(within_eps(t.L_final, self.N, self.M, eps) for t in self.trials)
        return Fraction(hits, len(self.trials))


def _run_trial(q: int, M: int, N: int, master_seed: int, trial: int, checkpoints: tuple[int, ...]) -> TrialResult:
    seed = trial_seed(master_seed, trial)
    rng = np.random.default_rng(seed)
    pattern = DiscrepancyPattern(rng.integers(0, q, size=(N, M)) != 0)
    trajectory = bdm_replay(pattern)
    trajectory.check_invariant()
    index = np.array(checkpoints, dtype=np.int64) - 1
    logger.debug("trial %d (seed %d) finished with L(N) = %d", trial, seed, int(trajectory.L[-1]))
    return TrialResult(
        trial,
        seed,
        tuple(int(x) for x in trajectory.d[index]),
        tuple(int(x) for x in trajectory.L[index]),
    )


def default_checkpoints(N: int, count: int = 10) -> tuple[int, ...]:
    return tuple(sorted({max(1, N * i // count) for i in range(1, count + 1)}))


def bdm_random(
    q: int,
    M: int,
    N: int,
    trials: int,
    master_seed: int,
    eps: Fraction = Fraction(1, 100),
    checkpoints: Sequence[int] | None = None,
    workers: int = 1,
) -> BdmStatistics:
    if trials < 1 or N < 1 or M < 1 or q < 2:
        raise ParameterError(
            code="mlincomp::bdm::invalid_parameters",
            message=f"Need trials >= 1, N >= 1, M >= 1 and q >= 2 (got trials={trials}, N={N}, M={M}, q={q})",
        )
    # N is always a checkpoint so that TrialResult.L_final is L(N)
    points = tuple(sorted({N, *(default_checkpoints(N) if checkpoints is None else checkpoints)}))
    if points[0] < 1 or points[-1] > N:
        raise ParameterError(
            code="mlincomp::bdm::invalid_checkpoints",
            message=f"Checkpoints must lie in [1, {N}]",
        )

    args = [(q, M, N, master_seed, trial, points) for trial in range(trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_trial, *zip(*args)))
    else:
        results = [_run_trial(*arg) for arg in args]
    results.sort(key=lambda result: result.trial)

    rows = []
    for i, n in enumerate(points):
        ds = [result.d_at[i] for result in results]
        hits = sum(within_eps(result.L_at[i], n, M, eps) for result in results)
        rows.append(
            CheckpointStats(
                n, min(ds), max(ds), Fraction(sum(ds), trials), Fraction(hits, trials)
            )
        )
    return BdmStatistics(q, M, N, master_seed, eps, points, tuple(rows), tuple(results))
