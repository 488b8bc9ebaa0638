"""Online multi-strict continued fraction algorithm.

The engine reads one symbol at a time in the order (0, 1), (1, 1), ...,
(M-1, 1), (0, 2), ... and keeps a monic common denominator ``v`` with
numerators ``u_k`` such that after step (m, n)

    v G_k - u_k = o(x^(deg - n))        for k <= m
    v G_k - u_k = o(x^(deg - (n - 1)))  for k > m

Every sequence m keeps the approximant that was current when its last degree
jump happened (initially a virtual failure at position 0). Its residual
against G_m has leading term ``delta' x^(-w_m)``, so a nonzero discrepancy is
cancelled by subtracting a shifted multiple of it.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from mlincomp.algebra import FieldElement, FieldSpec, Polynomial, SequencePrefix
from mlincomp.bdm import DiscrepancyPattern, Trajectory, ceil_share
from mlincomp.errors import DynamicsError, ParameterError

logger = logging.getLogger(__name__)


class StepCase(enum.Enum):
    UNCHANGED = "2a"
    JUMP = "2b"
    CORRECTION = "2c"


@dataclass(frozen=True)
class AuxApproximant:
    v: Polynomial
    u: tuple[Polynomial, ...]
    delta: FieldElement


class _Saved(NamedTuple):
    v: np.ndarray
    u: tuple[np.ndarray, ...]
    delta: FieldElement


def _combine(
    field: FieldSpec, f: np.ndarray, f_shift: int, c: FieldElement, g: np.ndarray, g_shift: int
) -> np.ndarray:
    out = np.zeros(max(len(f) + f_shift, len(g) + g_shift), dtype=np.int64)
    out[f_shift : f_shift + len(f)] = f
    if len(g):
        window = out[g_shift : g_shift + len(g)]
        out[g_shift : g_shift + len(g)] = field.vsub(window, field.vscale(c, g))
    return out


class Mscfa:
    """Mutable, strictly sequential engine state for M sequences over ``field``."""

    def __init__(self, field: FieldSpec, M: int) -> None:
        if M < 1:
            raise ParameterError(
                code="mlincomp::mscfa::invalid_multiplicity",
                message=f"Need at least one sequence, got M = {M}",
            )
        self.field = field
        self.M = M
        self.n = 0
        self.deg = 0
        self.w = [0] * M
        self._pending = 0
        self._v = np.ones(1, dtype=np.int64)
        self._u = [np.zeros(0, dtype=np.int64) for _ in range(M)]
        minus_one = np.array([field.neg(1)], dtype=np.int64)
        self._aux = [
            _Saved(
                np.ones(1, dtype=np.int64),
                tuple(minus_one if k == m else np.zeros(0, dtype=np.int64) for k in range(M)),
                1,
            )
            for m in range(M)
        ]
        self._symbols = np.zeros((64, M), dtype=np.int64)
        self._flags = np.zeros((64, M), dtype=bool)
        self._w_history = np.zeros((64, M), dtype=np.int64)
        self._profile: list[int] = []

    @property
    def pending(self) -> tuple[int, int]:
        return self._pending, self.n + 1

    def _check_order(self, m: int) -> None:
        if m != self._pending:
            raise DynamicsError(
                code="mlincomp::mscfa::out_of_order",
                message=f"Expected a symbol for sequence {self._pending} at position {self.n + 1}, got sequence {m}",
            )

    def _offset(self, m: int) -> FieldElement:
        """The discrepancy minus the candidate symbol, which enters with slope v_deg = 1."""
        n, deg = self.n + 1, self.deg
        start = n - deg
        lo = max(1, start)
        window = self._symbols[lo - 1 : n - 1, m]
        total = self.field.vdot(self._v[lo - start : deg], window)
        if deg >= n:
            u = self._u[m]
            total = self.field.sub(total, int(u[deg - n]) if deg - n < len(u) else 0)
        return total

    def discrepancy(self, m: int, a: FieldElement) -> FieldElement:
        self._check_order(m)
        return self.field.add(self.field.check(a), self._offset(m))

    def forced_symbol(self, m: int) -> FieldElement:
        self._check_order(m)
        return self.field.neg(self._offset(m))

    def symbol_for_discrepancy(self, m: int, target: FieldElement) -> FieldElement:
        return self.field.add(self.forced_symbol(m), self.field.check(target))

    def _grow(self) -> None:
        if self.n < len(self._symbols):
            return
        size = 2 * len(self._symbols)
        for name in ("_symbols", "_flags", "_w_history"):
            old = getattr(self, name)
            new = np.zeros((size, self.M), dtype=old.dtype)
            new[: len(old)] = old
            setattr(self, name, new)

    def step(self, m: int, a: FieldElement) -> StepCase:
        delta = self.discrepancy(m, a)
        n = self.n + 1
        self._grow()
        self._symbols[n - 1, m] = a

        if delta == 0:
            case = StepCase.UNCHANGED
        else:
            self._flags[n - 1, m] = True
            field = self.field
            saved = self._aux[m]
            c = field.div(delta, saved.delta)
            gap = n - self.deg - self.w[m]
            if gap <= 0:
                shift = -gap
                self._v = _combine(field, self._v, 0, c, saved.v, shift)
                self._u = [
                    _combine(field, u, 0, c, u_saved, shift)
                    for u, u_saved in zip(self._u, saved.u)
                ]
                case = StepCase.CORRECTION
            else:
                self._aux[m] = _Saved(self._v, tuple(self._u), delta)
                self._v = _combine(field, self._v, gap, c, saved.v, 0)
                self._u = [
                    _combine(field, u, gap, c, u_saved, 0)
                    for u, u_saved in zip(self._u, saved.u)
                ]
                deg_copy = self.deg
                self.deg = n - self.w[m]
                self.w[m] = n - deg_copy
                case = StepCase.JUMP
            self._normalize()

        self._pending += 1
        if self._pending == self.M:
            self._pending = 0
            self.n = n
            self._profile.append(self.deg)
            self._w_history[n - 1] = self.w
        return case

    def _normalize(self) -> None:
        nonzero = np.flatnonzero(self._v)
        top = int(nonzero[-1])
        if top != self.deg:
            raise DynamicsError(
                code="mlincomp::mscfa::degree_mismatch",
                message=f"Denominator degree {top} differs from the tracked degree {self.deg}",
            )
        self._v = self._v[: top + 1]
        lead = int(self._v[-1])
        if lead != 1:
            scale = self.field.inv(lead)
            self._v = self.field.vscale(scale, self._v)
            self._u = [self.field.vscale(scale, u) for u in self._u]

    def feed(self, row: list[int] | tuple[int, ...] | np.ndarray) -> list[StepCase]:
        return [self.step(m, int(a)) for m, a in enumerate(row)]

    @property
    def profile(self) -> np.ndarray:
        return np.array(self._profile, dtype=np.int64)

    def deviation_map(self) -> tuple[int, tuple[int, ...]]:
        """(d, b) at the current position boundary."""
        if self._pending:
            raise DynamicsError(
                code="mlincomp::mscfa::not_at_boundary",
                message=f"Position {self.n + 1} is incomplete",
            )
        d = self.deg - ceil_share(self.n, self.M)
        return d, tuple(self.n // (self.M + 1) - w for w in self.w)

    def trajectory(self) -> Trajectory:
        n = np.arange(1, self.n + 1, dtype=np.int64)
        return Trajectory(
            self.M,
            self.profile - (-(-n * self.M // (self.M + 1))),
            (n // (self.M + 1))[:, None] - self._w_history[: self.n],
        )

    def recorded_pattern(self) -> DiscrepancyPattern:
        return DiscrepancyPattern.from_array(self._flags[: self.n])

    def sequence(self) -> SequencePrefix:
        symbols = self._symbols[: self.n].copy()
        symbols.flags.writeable = False
        return SequencePrefix(self.field, symbols)

    def approximant(self) -> tuple[Polynomial, tuple[Polynomial, ...]]:
        return (
            Polynomial.from_coeffs(self.field, self._v),
            tuple(Polynomial.from_coeffs(self.field, u) for u in self._u),
        )

    def auxiliary(self, m: int) -> AuxApproximant:
        saved = self._aux[m]
        return AuxApproximant(
            Polynomial.from_coeffs(self.field, saved.v),
            tuple(Polynomial.from_coeffs(self.field, u) for u in saved.u),
            saved.delta,
        )


def run_mscfa(seq: SequencePrefix) -> Mscfa:
    engine = Mscfa(seq.field, seq.M)
    for row in seq.symbols.tolist():
        engine.feed(row)
    return engine
