"""Which (I, S) pairs of normalized-complexity limits a multisequence can have.

For K active series the pair must satisfy

    K = 0:   I = S = 0
    K >= 1:  K/(K+1) <= S <= 1  and  K(1 - S) <= I <= 1 - S/K

so the region is a point, the segment I + S = 1 for K = 1, and one triangle
per K >= 2. All comparisons are exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from mlincomp.errors import ParameterError

Point = tuple[Fraction, Fraction]


@dataclass(frozen=True)
class LimitPair:
    I: Fraction
    S: Fraction

    def __post_init__(self) -> None:
        if not 0 <= self.I <= self.S <= 1:
            raise ParameterError(
                code="mlincomp::regions::invalid_limits",
                message=f"Need 0 <= I <= S <= 1, got I = {self.I}, S = {self.S}",
            )

    def tilde(self, M: int) -> tuple[Fraction, Fraction]:
        mean = Fraction(M, M + 1)
        return self.I - mean, self.S - mean

    def __str__(self) -> str:
        return f"(I, S) = ({self.I}, {self.S})"


def admissible_for_K(I: Fraction, S: Fraction, K: int, slack: Fraction = Fraction(0)) -> bool:
    """Exact membership test; ``slack`` widens every inequality for finite-N estimates."""
    if K < 0:
        return False
    if K == 0:
        return abs(I) <= slack and abs(S) <= slack
    return (
        Fraction(K, K + 1) - slack <= S <= 1 + slack
        and K * (1 - S) - slack <= I <= 1 - S / K + slack
    )


@dataclass(frozen=True)
class AdmissibilityReport:
    pair: LimitPair
    M: int
    admissible_K: frozenset[int]

    @property
    def k_prime(self) -> int | None:
        return max(self.admissible_K, default=None)

    @property
    def admissible(self) -> bool:
        return bool(self.admissible_K)


def admissible_set(I: Fraction, S: Fraction, M: int) -> AdmissibilityReport:
    if M < 1:
        raise ParameterError(
            code="mlincomp::regions::invalid_multiplicity",
            message=f"Need M >= 1, got {M}",
        )
    pair = LimitPair(Fraction(I), Fraction(S))
    return AdmissibilityReport(
        pair, M, frozenset(K for K in range(M + 1) if admissible_for_K(pair.I, pair.S, K))
    )


def k_prime(I: Fraction, S: Fraction, M: int) -> int | None:
    """The largest admissible active count K <= M, or None."""
    return admissible_set(I, S, M).k_prime


@dataclass(frozen=True)
class RegionPiece:
    K: int
    vertices: tuple[Point, ...]


def region_geometry(M: int) -> list[RegionPiece]:
    """Vertices (I, S) of the admissible point, segment and triangles for K = 0..M."""
    if M < 1:
        raise ParameterError(
            code="mlincomp::regions::invalid_multiplicity",
            message=f"Need M >= 1, got {M}",
        )
    zero, one = Fraction(0), Fraction(1)
    half = Fraction(1, 2)
    pieces = [
        RegionPiece(0, ((zero, zero),)),
        RegionPiece(1, ((zero, one), (half, half))),
    ]
    for K in range(2, M + 1):
        corner = Fraction(K, K + 1)
        pieces.append(
            RegionPiece(K, ((zero, one), (Fraction(K - 1, K), one), (corner, corner)))
        )
    return pieces


def hausdorff_bounds(I: Fraction, S: Fraction, M: int) -> tuple[Fraction, Fraction]:
    """Lower and upper bounds on the Hausdorff dimension of the set with limits (I, S).

    The lower bound keeps (M+1) in its denominator even when K' < M.
    """
    report = admissible_set(I, S, M)
    K = report.k_prime
    if K is None:
        raise ParameterError(
            code="mlincomp::regions::not_admissible",
            message=f"{report.pair} is not admissible for M = {M}",
        )
    if K == 0:
        return Fraction(0), Fraction(0)
    I, S = report.pair.I, report.pair.S
    upper = Fraction(K, M)
    return upper * (1 - S) / ((M + 1) * (1 - I) ** 2), upper


def measure_constant(I: Fraction, S: Fraction, M: int) -> int:
    """Haar measure of the set with limits (I, S): 1 on the diagonal point M/(M+1), else 0."""
    mean = Fraction(M, M + 1)
    return int(I == mean and S == mean)
