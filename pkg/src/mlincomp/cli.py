from __future__ import annotations

import argparse
import contextlib
import logging
import sys
from collections.abc import Callable, Iterator
from fractions import Fraction
from pathlib import Path
from typing import TextIO

import numpy as np
from pyagnostics.exceptions import DiagnosticError, DiagnosticErrorGroup
from pyagnostics.source import InMemorySource
from rich.console import Console
from rich.logging import RichHandler

from mlincomp import formats
from mlincomp.algebra import SequencePrefix
from mlincomp.analysis import audit_bounds, check_targets, window_extrema
from mlincomp.bdm import DiscrepancyPattern, bdm_replay
from mlincomp.errors import DynamicsError, MismatchError, ParameterError
from mlincomp.hexagon import generate_pattern, realize_pattern
from mlincomp.models import BdmExperiment, SynthesisPlan, load_model, parse_rational
from mlincomp.mscfa import run_mscfa
from mlincomp.oracle import profile_oracle
from mlincomp.regions import admissible_set, hausdorff_bounds, measure_constant, region_geometry
from mlincomp.rich_utils import grid_table, key_value_table

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_PARAMETERS = 2
EXIT_MISMATCH = 3


class Session:
    """Console handles plus the text of the last file read, for rendering diagnostics."""

    def __init__(self, argv: list[str]) -> None:
        self.out = Console(highlight=False)
        self.err = Console(stderr=True, highlight=False)
        self.source = " ".join(argv)

    def read(self, path: Path) -> str:
        self.source = path.read_text()
        return self.source

    def read_sequence(self, path: Path) -> SequencePrefix:
        return formats.parse_sequence(self.read(path))

    @contextlib.contextmanager
    def output(self, path: Path | None) -> Iterator[TextIO]:
        if path is None:
            yield sys.stdout
            return
        with path.open("w", newline="") as f:
            yield f
        logger.info("wrote %s", path)


def _rational(text: str | None, flag: str) -> Fraction | None:
    if text is None:
        return None
    try:
        return parse_rational(text)
    except ValueError as e:
        raise ParameterError(
            code="mlincomp::cli::invalid_rational",
            message=f"{flag}: {e}",
        ) from None


def cmd_profile(session: Session, args: argparse.Namespace) -> int:
    seq = session.read_sequence(args.input)
    engine = run_mscfa(seq)
    with session.output(args.out) as out:
        formats.write_profile(out, engine.profile, seq.M)
    return EXIT_OK


def cmd_synthesize(session: Session, args: argparse.Namespace) -> int:
    plan = load_model(
        SynthesisPlan,
        {
            "field": args.q,
            "M": args.M,
            "I": args.I,
            "S": args.S,
            "N": args.n,
            "K": args.K,
            "gap_bits": args.gaps or "",
            "nonzero": args.nonzero,
        },
        flags={"field": "--q", "N": "--n", "gap_bits": "--gaps", "nonzero": "--nonzero"},
    )
    K = plan.active_count
    if K == 0:
        seq = SequencePrefix.zeros(plan.field, plan.M, plan.N)
        pattern = DiscrepancyPattern.all_zero(plan.M, plan.N)
        trajectory = bdm_replay(pattern)
        hexagons = 0
    else:
        result = generate_pattern(plan)
        seq = realize_pattern(plan, result)
        pattern, trajectory = result.pattern, result.trajectory
        hexagons = len(result.completed_hexagons())

    with session.output(args.out) as out:
        out.write(formats.format_sequence(seq))
    if args.pattern is not None:
        formats.write_text(args.pattern, formats.format_pattern(pattern))
    if args.trajectory is not None:
        with session.output(args.trajectory) as out:
            formats.write_trajectory(out, trajectory)

    session.err.print(
        key_value_table(
            "synthesis",
            [
                ("field", str(plan.field)),
                ("M", plan.M),
                ("K", K),
                ("target", str(plan.target)),
                ("N", plan.N),
                ("completed hexagons", hexagons),
            ],
        )
    )
    return EXIT_OK


def cmd_bdm(session: Session, args: argparse.Namespace) -> int:
    experiment = load_model(
        BdmExperiment,
        {
            "field": args.q,
            "M": args.M,
            "N": args.n,
            "trials": args.trials,
            "seed": args.seed,
            "eps": args.eps,
            "checkpoints": args.checkpoints,
            "workers": args.workers,
        },
        flags={"field": "--q", "N": "--n"},
    )
    stats = experiment.run()
    with session.output(args.out) as out:
        formats.write_statistics(out, stats)
    if args.trials_out is not None:
        with session.output(args.trials_out) as out:
            formats.write_trials(out, stats)
    return EXIT_OK


def cmd_oracle(session: Session, args: argparse.Namespace) -> int:
    seq = session.read_sequence(args.input)
    N = seq.N if args.n is None else args.n
    expected = profile_oracle(seq, N)
    if args.diff:
        actual = run_mscfa(seq.truncate(N)).profile
        mismatches = np.flatnonzero(actual != expected)
        if mismatches.size:
            n = int(mismatches[0]) + 1
            raise MismatchError(
                code="mlincomp::cli::oracle_mismatch",
                message=f"Engine and oracle disagree at {mismatches.size} of {N} positions",
                notes=[
                    f"first at n = {n}: engine L = {actual[n - 1]}, oracle L = {expected[n - 1]}"
                ],
            )
        logger.info("engine and oracle agree on all %d positions", N)
    formats.write_profile(sys.stdout, expected, seq.M)
    return EXIT_OK


def cmd_check(session: Session, args: argparse.Namespace) -> int:
    I = _rational(args.I, "--I")
    S = _rational(args.S, "--S")
    if (I is None) != (S is None):
        raise ParameterError(
            code="mlincomp::cli::incomplete_target",
            message="--I and --S must be given together",
        )
    tail = _rational(args.tail, "--tail")
    slack = _rational(args.slack, "--slack")
    tolerance = _rational(args.tol, "--tol")
    assert tail is not None and slack is not None and tolerance is not None

    seq = session.read_sequence(args.input)
    report = audit_bounds(run_mscfa(seq).profile, seq.M, tail=tail, slack=slack)
    with session.output(args.out) as out:
        formats.write_audit(out, report)
    if not (report.bounded and report.monotone):
        raise MismatchError(
            code="mlincomp::cli::audit_failed",
            message="The profile violates 0 <= L(n) <= n or is not monotone",
        )
    if I is not None and S is not None:
        check_targets(report.I_hat, report.S_hat, I, S, tolerance)
    return EXIT_OK


def cmd_region(session: Session, args: argparse.Namespace) -> int:
    with session.output(args.out) as out:
        formats.write_region(out, region_geometry(args.M))
    return EXIT_OK


def cmd_classify(session: Session, args: argparse.Namespace) -> int:
    I = _rational(args.I, "--I")
    S = _rational(args.S, "--S")
    assert I is not None and S is not None
    report = admissible_set(I, S, args.M)
    rows: list[tuple[str, object]] = [
        ("M", args.M),
        ("I", I),
        ("S", S),
        ("admissible K", ", ".join(map(str, sorted(report.admissible_K))) or None),
        ("K'", report.k_prime),
    ]
    if report.admissible:
        lower, upper = hausdorff_bounds(I, S, args.M)
        rows += [("Hausdorff lower bound", lower), ("Hausdorff upper bound", upper)]
    rows.append(("measure", measure_constant(I, S, args.M)))
    session.out.print(key_value_table("admissibility", rows))
    if not report.admissible:
        raise ParameterError(
            code="mlincomp::cli::not_admissible",
            message=f"{report.pair} is not admissible for M = {args.M}",
        )
    return EXIT_OK


def cmd_hexagons(session: Session, args: argparse.Namespace) -> int:
    """Per-hexagon extrema of L(n)/n for a synthesis plan, without realizing symbols."""
    plan = load_model(
        SynthesisPlan,
        {"field": 2, "M": args.M, "I": args.I, "S": args.S, "N": args.n, "K": args.K},
        flags={"N": "--n"},
    )
    result = generate_pattern(plan)
    L = result.trajectory.L
    rows = []
    for h in result.completed_hexagons():
        lo, hi = window_extrema(L, h.t0, h.t_end)
        rows.append((h.index, h.t0, h.tx, h.t_end, f"{float(lo):.6f}", f"{float(hi):.6f}"))
    session.out.print(grid_table("hexagons", ["#", "t0", "tx", "end", "min L/n", "max L/n"], rows))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lc", description="Multisequence linear complexity toolkit"
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(
        name: str, handler: Callable[[Session, argparse.Namespace], int], summary: str
    ) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=summary)
        p.set_defaults(handler=handler)
        return p

    p = command("profile", cmd_profile, "linear complexity profile of a sequence file")
    p.add_argument("--in", dest="input", type=Path, required=True)
    p.add_argument("--out", type=Path)

    p = command("synthesize", cmd_synthesize, "sequences with prescribed (I, S)")
    p.add_argument("--q", required=True, help="field spec: p or p^k/modulus-code")
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--I", required=True)
    p.add_argument("--S", required=True)
    p.add_argument("--K", type=int)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--gaps", help="per-hexagon gap bits, e.g. 0101")
    p.add_argument("--nonzero", type=int, default=1)
    p.add_argument("--out", type=Path)
    p.add_argument("--pattern", type=Path)
    p.add_argument("--trajectory", type=Path)

    p = command("bdm", cmd_bdm, "seeded random runs of the discharge model")
    p.add_argument("--q", required=True)
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eps", default="1/100")
    p.add_argument("--checkpoints", type=int, default=10)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", type=Path)
    p.add_argument("--trials-out", type=Path)

    p = command("oracle", cmd_oracle, "brute-force profile, optionally compared with the engine")
    p.add_argument("--in", dest="input", type=Path, required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--diff", action="store_true")

    p = command("check", cmd_check, "tail extrema and bound audit of a sequence file")
    p.add_argument("--in", dest="input", type=Path, required=True)
    p.add_argument("--tail", default="1/2")
    p.add_argument("--I")
    p.add_argument("--S")
    p.add_argument("--tol", default="1/100")
    p.add_argument("--slack", default="1/100")
    p.add_argument("--out", type=Path)

    p = command("region", cmd_region, "vertices of the admissible (I, S) region")
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--out", type=Path)

    p = command("classify", cmd_classify, "admissible K, K' and dimension bounds of a pair")
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--I", required=True)
    p.add_argument("--S", required=True)

    p = command("hexagons", cmd_hexagons, "per-hexagon extrema of a synthesis plan")
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--I", required=True)
    p.add_argument("--S", required=True)
    p.add_argument("--K", type=int)
    p.add_argument("--n", type=int, required=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    args = build_parser().parse_args(argv)
    session = Session(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=session.err, show_path=False)],
        force=True,
    )

    try:
        return args.handler(session, args)
    except (ParameterError, DiagnosticErrorGroup) as e:
        code = EXIT_PARAMETERS
        diagnostic: DiagnosticError | DiagnosticErrorGroup = e
    except MismatchError as e:
        code, diagnostic = EXIT_MISMATCH, e
    except (DynamicsError, DiagnosticError) as e:
        code, diagnostic = EXIT_INPUT, e
    except OSError as e:
        session.err.print(f"[red]error:[/red] {e}")
        return EXIT_INPUT

    session.err.print(diagnostic.with_source_code(InMemorySource(session.source)))
    return code


if __name__ == "__main__":
    sys.exit(main())
