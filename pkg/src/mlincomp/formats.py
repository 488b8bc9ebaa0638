"""Reading and writing sequence, pattern, profile and statistics files.

Text formats are parsed with the grammar in ``formats.lark``; CSV outputs are
written with exact decimal rounding so identical inputs give identical bytes.
"""

from __future__ import annotations

import csv
import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, TextIO

import numpy as np
from lark import Lark, Token, Transformer, UnexpectedCharacters, UnexpectedToken
from pyagnostics.exceptions import DiagnosticError
from pyagnostics.spans import LabeledSpan, SourceSpan

from mlincomp.algebra import SequencePrefix, parse_field_spec
from mlincomp.analysis import AuditReport
from mlincomp.bdm import BdmStatistics, DiscrepancyPattern, Trajectory, within_eps
from mlincomp.errors import ParameterError
from mlincomp.regions import RegionPiece

logger = logging.getLogger(__name__)

DECIMAL_DIGITS = 12


def _span(tokens: Sequence[Token]) -> SourceSpan:
    assert tokens[0].start_pos is not None and tokens[-1].end_pos is not None
    return SourceSpan(tokens[0].start_pos, tokens[-1].end_pos)


@dataclass(frozen=True)
class _Row:
    tokens: tuple[Token, ...]

    @property
    def span(self) -> SourceSpan:
        return _span(self.tokens)


@dataclass(frozen=True)
class _Document:
    header: tuple[Token, ...]
    rows: tuple[_Row, ...]


# noinspection PyMethodMayBeStatic
class ToDocumentTransformer(Transformer):
    def __header(self, tokens: list[Token]) -> tuple[Token, ...]:
        return tuple(tokens)

    sequence_header = __header
    pattern_header = __header

    def __row(self, tokens: list[Token]) -> _Row:
        return _Row(tuple(tokens))

    symbol_row = __row
    flag_row = __row

    def __document(self, children: list[object]) -> _Document:
        header, *rows = children
        return _Document(header, tuple(rows))  # type: ignore[arg-type]

    start_sequence = __document
    start_pattern = __document


def _parse(text: str, start: str) -> _Document:
    if not text.endswith("\n"):
        text += "\n"
    try:
        lark = Lark.open(
            "formats.lark",
            parser="lalr",
            start=start,
            cache=True,
            rel_to=__file__,
        )
        return ToDocumentTransformer().transform(lark.parse(text))
    except UnexpectedCharacters as e:
        assert e.pos_in_stream is not None
        raise DiagnosticError(
            code="mlincomp::formats::unexpected_character",
            message="The lexer encountered an unexpected character",
            labels=[
                LabeledSpan(
                    SourceSpan(e.pos_in_stream, e.pos_in_stream + 1),
                    "Unexpected character",
                )
            ],
        ) from None
    except UnexpectedToken as e:
        if e.token.type == "$END":
            raise DiagnosticError(
                code="mlincomp::formats::unexpected_eof",
                message="The file ended before its header was complete",
            ) from None
        assert e.token.start_pos is not None and e.token.end_pos is not None
        raise DiagnosticError(
            code="mlincomp::formats::unexpected_token",
            message="The parser encountered an unexpected token",
            labels=[
                LabeledSpan(
                    SourceSpan(e.token.start_pos, e.token.end_pos), "Unexpected token"
                )
            ],
            notes=[f"Got {e.token.value!r} instead"],
        ) from None


def _check_row_count(doc: _Document, N: int) -> None:
    if len(doc.rows) != N:
        raise DiagnosticError(
            code="mlincomp::formats::row_count",
            message=f"The header announces {N} rows but the file has {len(doc.rows)}",
            labels=[LabeledSpan(_span(doc.header), "header")],
        )


def parse_sequence(text: str) -> SequencePrefix:
    doc = _parse(text, "start_sequence")
    spec, M_token, N_token = doc.header
    try:
        field = parse_field_spec(spec.value)
    except ParameterError as e:
        raise ParameterError(
            code=e.code,
            message=e.message,
            labels=[LabeledSpan(_span([spec]), "field spec")],
        ) from None
    M, N = int(M_token), int(N_token)
    if M < 1:
        raise ParameterError(
            code="mlincomp::formats::invalid_multiplicity",
            message="A sequence file needs M >= 1",
            labels=[LabeledSpan(_span([M_token]), "M")],
        )
    _check_row_count(doc, N)

    symbols = np.zeros((N, M), dtype=np.int64)
    for i, row in enumerate(doc.rows):
        if len(row.tokens) != M:
            raise DiagnosticError(
                code="mlincomp::formats::row_width",
                message=f"Row {i + 1} has {len(row.tokens)} symbols, expected {M}",
                labels=[LabeledSpan(row.span, "row")],
            )
        for m, token in enumerate(row.tokens):
            if int(token) >= field.q:
                raise DiagnosticError(
                    code="mlincomp::formats::invalid_symbol",
                    message=f"{token.value} is not an element code of GF({field.q})",
                    labels=[LabeledSpan(_span([token]), "symbol")],
                )
            symbols[i, m] = int(token)
    symbols.flags.writeable = False
    return SequencePrefix(field, symbols)


def parse_pattern(text: str) -> DiscrepancyPattern:
    doc = _parse(text, "start_pattern")
    M_token, N_token = doc.header
    M, N = int(M_token), int(N_token)
    if M < 1:
        raise ParameterError(
            code="mlincomp::formats::invalid_multiplicity",
            message="A pattern file needs M >= 1",
            labels=[LabeledSpan(_span([M_token]), "M")],
        )
    _check_row_count(doc, N)
    rows = []
    for i, row in enumerate(doc.rows):
        (bits,) = row.tokens
        if len(bits) != M:
            raise DiagnosticError(
                code="mlincomp::formats::row_width",
                message=f"Row {i + 1} has {len(bits)} flags, expected {M}",
                labels=[LabeledSpan(row.span, "row")],
            )
        rows.append([c == "1" for c in bits.value])
    return DiscrepancyPattern.from_array(np.array(rows, dtype=bool).reshape(N, M))


def read_sequence(path: Path) -> SequencePrefix:
    return parse_sequence(path.read_text())


def format_sequence(seq: SequencePrefix) -> str:
    lines = [f"{seq.field} {seq.M} {seq.N}"]
    lines.extend(" ".join(map(str, row)) for row in seq.symbols.tolist())
    return "\n".join(lines) + "\n"


def format_pattern(pattern: DiscrepancyPattern) -> str:
    lines = [f"{pattern.M} {pattern.N}"]
    lines.extend("".join("1" if f else "0" for f in row) for row in pattern.flags.tolist())
    return "\n".join(lines) + "\n"


def format_decimal(value: Fraction, digits: int = DECIMAL_DIGITS) -> str:
    """Exact decimal rounding, halves away from zero."""
    scale = 10**digits
    rounded = int(abs(value) * scale + Fraction(1, 2))
    sign = "-" if value < 0 and rounded else ""
    whole, frac = divmod(rounded, scale)
    return f"{sign}{whole}.{frac:0{digits}d}" if digits else f"{sign}{whole}"


def _csv_writer(out: TextIO) -> Any:
    return csv.writer(out, lineterminator="\n")


def write_profile(out: TextIO, L: np.ndarray, M: int) -> None:
    writer = _csv_writer(out)
    writer.writerow(["n", "L", "d", "L_over_n"])
    for n, value in enumerate(L.tolist(), start=1):
        d = value - (-(-n * M // (M + 1)))
        writer.writerow([n, value, d, format_decimal(Fraction(value, n))])


def write_trajectory(out: TextIO, trajectory: Trajectory) -> None:
    writer = _csv_writer(out)
    writer.writerow(["n", "d", *(f"b{m + 1}" for m in range(trajectory.M)), "L"])
    for row in trajectory.rows():
        writer.writerow([row.n, row.d, *row.b, row.L])


def write_statistics(out: TextIO, stats: BdmStatistics) -> None:
    out.write(
        f"# q={stats.q} M={stats.M} N={stats.N} trials={len(stats.trials)} "
        f"seed={stats.master_seed} eps={stats.eps}\n"
    )
    writer = _csv_writer(out)
    writer.writerow(["n", "d_min", "d_max", "d_mean", "frac_within_eps"])
    for row in stats.rows:
        writer.writerow(
            [
                row.n,
                row.d_min,
                row.d_max,
                format_decimal(row.d_mean),
                format_decimal(row.frac_within_eps),
            ]
        )


def write_trials(out: TextIO, stats: BdmStatistics) -> None:
    out.write(f"# master_seed={stats.master_seed} eps={stats.eps}\n")
    writer = _csv_writer(out)
    writer.writerow(["trial", "seed", "L_N", "d_N", "within_eps"])
    for trial in stats.trials:
        within = within_eps(trial.L_final, stats.N, stats.M, stats.eps)
        writer.writerow([trial.trial, trial.seed, trial.L_final, trial.d_final, int(within)])


def write_region(out: TextIO, pieces: Iterable[RegionPiece]) -> None:
    writer = _csv_writer(out)
    writer.writerow(["K", "vertex_index", "I", "S"])
    for piece in pieces:
        for i, (I, S) in enumerate(piece.vertices):
            writer.writerow([piece.K, i, I, S])


def write_audit(out: TextIO, report: AuditReport) -> None:
    out.write("\n".join(report.to_lines()) + "\n")


def write_text(path: Path, text: str) -> None:
    path.write_text(text)
    logger.info("wrote %s", path)
