"""Post-processing of linear complexity profiles L(1..N)."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil

import numpy as np

from mlincomp.errors import MismatchError, ParameterError
from mlincomp.regions import admissible_for_K


def deviation_profile(L: np.ndarray, M: int) -> np.ndarray:
    n = np.arange(1, len(L) + 1, dtype=np.int64)
    return np.asarray(L, dtype=np.int64) + (-n * M // (M + 1))


def window_extrema(L: np.ndarray, start: int, end: int) -> tuple[Fraction, Fraction]:
    """Exact min and max of L(n)/n for start <= n <= end."""
    start = max(start, 1)
    if end < start or end > len(L):
        raise ParameterError(
            code="mlincomp::analysis::empty_window",
            message=f"Window [{start}, {end}] is empty or outside the profile of length {len(L)}",
        )
    n = np.arange(start, end + 1, dtype=np.int64)
    values = np.asarray(L[start - 1 : end], dtype=np.int64)
    ratio = values / n

    def exact(indices: np.ndarray) -> list[Fraction]:
        return [Fraction(int(values[i]), int(n[i])) for i in indices]

    return (
        min(exact(np.flatnonzero(ratio == ratio.min()))),
        max(exact(np.flatnonzero(ratio == ratio.max()))),
    )


def tail_window(N: int, tail: Fraction) -> tuple[int, int]:
    if not 0 < tail <= 1:
        raise ParameterError(
            code="mlincomp::analysis::invalid_tail",
            message=f"The tail fraction must lie in (0, 1], got {tail}",
        )
    return max(1, ceil((1 - tail) * N)), N


def tail_extrema(L: np.ndarray, tail: Fraction = Fraction(1, 2)) -> tuple[Fraction, Fraction]:
    """Estimates of (I, S): extrema of L(n)/n over the trailing ``tail`` share of positions."""
    return window_extrema(L, *tail_window(len(L), Fraction(tail)))


@dataclass(frozen=True)
class AuditReport:
    N: int
    M: int
    tail: Fraction
    window: tuple[int, int]
    first_above_n: int | None
    first_decrease: int | None
    I_hat: Fraction
    S_hat: Fraction
    slack: Fraction
    admissible_K: tuple[int, ...]

    @property
    def bounded(self) -> bool:
        return self.first_above_n is None

    @property
    def monotone(self) -> bool:
        return self.first_decrease is None

    @property
    def inside_region(self) -> bool:
        return bool(self.admissible_K)

    @property
    def ok(self) -> bool:
        return self.bounded and self.monotone and self.inside_region

    def to_lines(self) -> list[str]:
        def fmt(value: object) -> str:
            match value:
                case None:
                    return "none"
                case bool():
                    return str(value).lower()
                case tuple():
                    return ",".join(str(x) for x in value) or "none"
                case _:
                    return str(value)

        return [
            f"{key}={fmt(value)}"
            for key, value in (
                ("N", self.N),
                ("M", self.M),
                ("tail", self.tail),
                ("window", self.window),
                ("L_le_n", self.bounded),
                ("first_L_gt_n", self.first_above_n),
                ("monotone", self.monotone),
                ("first_decrease", self.first_decrease),
                ("I_hat", self.I_hat),
                ("S_hat", self.S_hat),
                ("I_hat_decimal", f"{float(self.I_hat):.12f}"),
                ("S_hat_decimal", f"{float(self.S_hat):.12f}"),
                ("slack", self.slack),
                ("admissible_K", self.admissible_K),
                ("inside_region", self.inside_region),
            )
        ]


def _first(mask: np.ndarray, offset: int) -> int | None:
    hits = np.flatnonzero(mask)
    return int(hits[0]) + offset if hits.size else None


def audit_bounds(
    L: np.ndarray,
    M: int,
    tail: Fraction = Fraction(1, 2),
    slack: Fraction = Fraction(1, 100),
) -> AuditReport:
    """Check 0 <= L(n) <= n, monotonicity, and whether the tail estimates fit the region."""
    L = np.asarray(L, dtype=np.int64)
    n = np.arange(1, len(L) + 1, dtype=np.int64)
    window = tail_window(len(L), Fraction(tail))
    I_hat, S_hat = window_extrema(L, *window)
    return AuditReport(
        N=len(L),
        M=M,
        tail=Fraction(tail),
        window=window,
        first_above_n=_first((L > n) | (L < 0), 1),
        # a decrease between n and n+1 is reported at n+1
        first_decrease=_first(np.diff(L) < 0, 2),
        I_hat=I_hat,
        S_hat=S_hat,
        slack=slack,
        admissible_K=tuple(
            K for K in range(M + 1) if admissible_for_K(I_hat, S_hat, K, slack)
        ),
    )


def check_targets(
    I_hat: Fraction, S_hat: Fraction, I: Fraction, S: Fraction, tolerance: Fraction
) -> None:
    misses = [
        f"{name}_hat = {estimate} ({float(estimate):.6f}) is {float(abs(estimate - target)):.6f} away from {target}"
        for name, estimate, target in (("I", I_hat, I), ("S", S_hat, S))
        if abs(estimate - target) > tolerance
    ]
    if misses:
        raise MismatchError(
            code="mlincomp::analysis::target_mismatch",
            message=f"Tail extrema miss the target by more than {tolerance}",
            notes=misses,
        )
