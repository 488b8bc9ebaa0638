"""Discrepancy patterns, and sequences, with prescribed limits (I, S) of L(n)/n.

The construction stacks "hexagons". Each starts from all-zero batteries at t0
and runs three phases against exact rational thresholds t1 <= tx:

1. positions t with t - 1 < t1 (and t < tx): sequence 0 is held, all others
   discharge, so L(n)/n sinks towards I;
2. positions t1 <= t - 1 (and t < tx): nothing discharges;
3. from the first t >= tx: everything discharges, the held battery first, so
   L(n)/n jumps towards S, until the batteries are all zero again.

The schedule is computed with K active sequences; the other M - K sequences
are identically zero and never influence L or d.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import ceil

import numpy as np

from mlincomp.algebra import SequencePrefix
from mlincomp.bdm import BdmState, DiscrepancyPattern, Trajectory, advance_position, bdm_replay
from mlincomp.errors import DynamicsError, ParameterError
from mlincomp.models import SynthesisPlan
from mlincomp.mscfa import Mscfa

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HexagonSchedule:
    t0: Fraction
    t1: Fraction
    tx: Fraction
    t2: Fraction
    tstar: Fraction
    A: Fraction


def schedule(t0: Fraction | int, M: int, I_tilde: Fraction, S_tilde: Fraction) -> HexagonSchedule:
    if M < 1:
        raise ParameterError(
            code="mlincomp::hexagon::invalid_multiplicity",
            message=f"Need M >= 1, got {M}",
        )
    if not 0 < S_tilde < Fraction(1, M + 1):
        raise ParameterError(
            code="mlincomp::hexagon::s_tilde_out_of_range",
            message=f"Need 0 < S~ < 1/{M + 1}, got {S_tilde}",
            notes=["Adapt boundary values with effective_s_tilde first"],
        )
    t0 = Fraction(t0)
    tx = t0 / (1 - S_tilde * (M + 1))
    A = I_tilde if M == 1 else (-S_tilde - I_tilde) / (M - 1)
    return HexagonSchedule(
        t0=t0,
        t1=tx * (1 + I_tilde - A),
        tx=tx,
        t2=tx * (1 + S_tilde - A),
        tstar=t0 + (M + 1) * (S_tilde - I_tilde) * tx,
        A=A,
    )


def effective_s_tilde(S_tilde: Fraction, t0: Fraction | int, M: int) -> Fraction:
    """Move the boundary values 0 and 1/(M+1) inside by 1/t0."""
    if S_tilde == 0:
        return Fraction(1) / t0
    if S_tilde == Fraction(1, M + 1):
        return Fraction(1, M + 1) - Fraction(1) / t0
    return Fraction(S_tilde)


@dataclass(frozen=True)
class HexagonRecord:
    """One generated hexagon; ``schedule`` is None for the bootstrap and padding runs."""

    index: int
    t0: int
    t1: Fraction
    tx: Fraction
    schedule: HexagonSchedule | None
    t_end: int
    gap: bool
    completed: bool


@dataclass(frozen=True)
class PatternResult:
    pattern: DiscrepancyPattern
    trajectory: Trajectory
    hexagons: tuple[HexagonRecord, ...]

    def completed_hexagons(self) -> list[HexagonRecord]:
        return [h for h in self.hexagons if h.completed and h.schedule is not None]

    def last_completed_hexagon(self) -> HexagonRecord | None:
        completed = self.completed_hexagons()
        return completed[-1] if completed else None


class HexagonWalker:
    """Emits flag rows for K sequences while stepping the discharge model from ``state``.

    Rows are kept as runs ``(first, last, flags)`` of identical flags.
    """

    def __init__(self, state: BdmState, N: int) -> None:
        self.K = state.M
        self.N = N
        self.start = state.n
        self.t = state.n
        self.d = state.d
        self.b = list(state.b)
        self.runs: list[tuple[int, int, tuple[bool, ...]]] = []
        self.hold_first = (False,) + (True,) * (self.K - 1)
        self.hold_all = (False,) * self.K
        self.discharge_all = (True,) * self.K

    @property
    def done(self) -> bool:
        return self.t >= self.N

    @property
    def state(self) -> BdmState:
        return BdmState(self.K, self.t, self.d, tuple(self.b))

    def emit(self, flags: tuple[bool, ...]) -> None:
        self.t += 1
        self.d = advance_position(self.d, self.b, self.t, self.K, flags)
        if self.runs and self.runs[-1][2] is flags:
            self.runs[-1] = (self.runs[-1][0], self.t, flags)
        else:
            self.runs.append((self.t, self.t, flags))

    def run_hexagon(self, t1: Fraction, tx: Fraction, tstar: Fraction) -> bool:
        """Phases 1-3. True when the batteries came back to zero before N."""
        while self.t + 1 < tx:
            if self.done:
                return False
            self.emit(self.hold_first if self.t < t1 else self.hold_all)
        return self.settle(guard=2 * ceil(tstar) + (self.K + 1) ** 2, minimum=1)

    def settle(self, guard: int, minimum: int = 0) -> bool:
        """Discharge everything for at least ``minimum`` positions, then until all b are zero."""
        steps = 0
        while steps < minimum or any(self.b):
            if self.done:
                return False
            if self.t + 1 > guard:
                raise DynamicsError(
                    code="mlincomp::hexagon::termination_guard",
                    message=f"Batteries did not return to zero by position {guard}",
                    notes=[f"state at n = {self.t}: d = {self.d}, b = {self.b}"],
                )
            self.emit(self.discharge_all)
            steps += 1
        return True

    def discharge(self, count: int) -> bool:
        for _ in range(count):
            if self.done:
                return False
            self.emit(self.discharge_all)
        return True

    def flags(self) -> np.ndarray:
        out = np.zeros((self.t - self.start, self.K), dtype=bool)
        for first, last, row in self.runs:
            out[first - 1 - self.start : last - self.start] = row
        return out


def generate_pattern(plan: SynthesisPlan) -> PatternResult:
    """Hexagon-stacked discrepancy pattern over the K active sequences, with its trajectory."""
    K = plan.active_count
    if K < 1:
        raise ParameterError(
            code="mlincomp::hexagon::no_active_sequences",
            message="The target (0, 0) has no active sequences and needs no pattern",
        )
    I_tilde, S_tilde = plan.target.tilde(K)
    walker = HexagonWalker(BdmState.initial(K), plan.N)
    records: list[HexagonRecord] = []
    bootstrap = Fraction(K + 1)
    completed = True

    while completed and not walker.done:
        index, t0 = len(records), walker.t
        sched: HexagonSchedule | None = None
        if index == 0:
            t1 = tx = bootstrap
            completed = walker.run_hexagon(t1, tx, bootstrap)
        else:
            S_hat = effective_s_tilde(S_tilde, t0, K)
            if 0 < S_hat < Fraction(1, K + 1):
                sched = schedule(t0, K, I_tilde, S_hat)
                t1, tx = sched.t1, sched.tx
                completed = walker.run_hexagon(t1, tx, sched.tstar)
            else:
                # only for t0 <= K+1: grow t0 before scheduling
                t1 = tx = Fraction(t0 + K + 1)
                completed = walker.settle(t0 + 2 * (K + 1) ** 2, minimum=K + 1)

        gap = completed and plan.gap(index)
        if gap:
            completed = walker.discharge(K + 1)
        records.append(HexagonRecord(index, t0, t1, tx, sched, walker.t, gap, completed))
        logger.debug(
            "hexagon %d: t0=%d tx=%s t_end=%d gap=%s%s",
            index, t0, tx, walker.t, gap, "" if completed else " (cut at N)",
        )

    pattern = DiscrepancyPattern.from_array(walker.flags())
    trajectory = bdm_replay(pattern)
    trajectory.check_invariant()
    logger.info("generated %d positions in %d hexagons", pattern.N, len(records))
    return PatternResult(pattern, trajectory, tuple(records))


def realize_pattern(plan: SynthesisPlan, result: PatternResult) -> SequencePrefix:
    """Symbols whose discrepancies follow ``result.pattern``; inactive columns are zero."""
    K = result.pattern.M
    engine = Mscfa(plan.field, K)
    hold, fire = engine.forced_symbol, engine.symbol_for_discrepancy
    for row in result.pattern.flags.tolist():
        for m, flag in enumerate(row):
            engine.step(m, fire(m, plan.nonzero) if flag else hold(m))

    if engine.recorded_pattern() != result.pattern:
        raise DynamicsError(
            code="mlincomp::hexagon::pattern_mismatch",
            message="The realized symbols do not reproduce the requested discrepancy pattern",
        )
    symbols = np.zeros((plan.N, plan.M), dtype=np.int64)
    symbols[:, :K] = engine.sequence().symbols
    symbols.flags.writeable = False
    return SequencePrefix(plan.field, symbols)


def synthesize(plan: SynthesisPlan) -> SequencePrefix:
    if plan.active_count == 0:
        return SequencePrefix.zeros(plan.field, plan.M, plan.N)
    return realize_pattern(plan, generate_pattern(plan))
