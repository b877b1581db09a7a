"""Command-line front end: `python -m app <subcommand> ...`.

Data goes to stdout (or --out); logs and errors go to stderr. Exit status is
0 on success, 1 on a domain error or failed verification, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import TextIO

from pydantic import ValidationError

from app.core.config import AMBIENTS, normalize_ambient
from app.core.exceptions import AppException
from app.core.logging import resolve_level, setup_logging
from app.schemas.census import CensusConfig
from app.schemas.cli import CliConfig
from app.services import (
    braid_service,
    census_service,
    closure_service,
    dynamics_service,
    garside_service,
    link_group_service,
    mixed_braid_service,
    quandle_service,
)

logger = logging.getLogger(__name__)


class _UsageError(Exception):
    pass


def _add_output_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", help="Write output to PATH instead of stdout.")
    parser.add_argument("--format", dest="output_format", choices=("text", "records"), default="text")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="braidcensus", description="Braids, closures, quandles and census tools.")
    parser.add_argument("--log-level", default="WARNING", help="Logging level for stderr diagnostics.")
    commands = parser.add_subparsers(dest="subcommand", required=True)

    normalize = commands.add_parser("normalize", help="Print the canonical word of a braid.")
    normalize.add_argument("word")
    normalize.add_argument("--strands", type=int)
    _add_output_flags(normalize)

    equal = commands.add_parser("equal", help="Decide equality of two braids.")
    equal.add_argument("left")
    equal.add_argument("right")
    equal.add_argument("--strands", type=int)
    _add_output_flags(equal)

    conj = commands.add_parser("conj", help="Bounded conjugacy test.")
    conj.add_argument("left")
    conj.add_argument("right")
    conj.add_argument("--strands", type=int)
    conj.add_argument("--budget", type=int)
    _add_output_flags(conj)

    close = commands.add_parser("close", help="Closure invariants of a braid or mixed braid.")
    close.add_argument("word")
    close.add_argument("--strands", type=int)
    close.add_argument("--ambient", default="sphere3", help="sphere3 | solid-torus")
    _add_output_flags(close)

    color = commands.add_parser("color", help="Quandle coloring counts.")
    color.add_argument("word")
    color.add_argument("--strands", type=int)
    color.add_argument("--quandle", action="append", help="d<n> or dihedral<n>; repeatable.")
    color.add_argument("--quandle-file", help="Quandle table file.")
    color.add_argument("--panel", help="Comma-separated panel, e.g. d3,d4,d5.")
    _add_output_flags(color)

    census = commands.add_parser("census", help="Enumerate and classify closed braids.")
    census.add_argument("--config", dest="config_path", help="key=value census configuration file.")
    census.add_argument("--ambient", help="sphere3 | solid-torus")
    census.add_argument("--strands", type=int, help="Largest strand count.")
    census.add_argument("--min-strands", type=int)
    census.add_argument("--max-length", type=int)
    census.add_argument("--depth", type=int)
    census.add_argument("--panel")
    census.add_argument("--budget", type=int, help="Move-search state budget.")
    census.add_argument("--workers", type=int)
    census.add_argument("--db", help="Also store the report in this database URL.")
    _add_output_flags(census)

    witness = commands.add_parser("witness", help="Essential solid-torus knots of winding 1..k.")
    witness.add_argument("count", type=int)
    _add_output_flags(witness)

    dynamics = commands.add_parser("dynamics-verify", help="Verify the model flow ingredients.")
    dynamics.add_argument("--tol", dest="tolerance", type=float)
    dynamics.add_argument("--samples", type=int)
    dynamics.add_argument("--seed", type=int)
    _add_output_flags(dynamics)

    mixed = commands.add_parser("mixed-verify", help="Check the B_{m,n} relators after embedding.")
    mixed.add_argument("fixed", type=int)
    mixed.add_argument("moving", type=int)
    _add_output_flags(mixed)

    group = commands.add_parser("group", help="Link group presentation and S_k homomorphism counts.")
    group.add_argument("word")
    group.add_argument("--strands", type=int)
    group.add_argument("--degree", type=int, default=3, help="Count homomorphisms into S_2..S_degree.")
    _add_output_flags(group)

    quandles = commands.add_parser("quandles", help="Enumerate quandle tables of a given order.")
    quandles.add_argument("order", type=int)
    _add_output_flags(quandles)
    return parser


def _cli_config(args: argparse.Namespace) -> CliConfig:
    try:
        return CliConfig(
            subcommand=args.subcommand,
            ambient=getattr(args, "ambient", None),
            strands=getattr(args, "strands", None),
            min_strands=getattr(args, "min_strands", None),
            max_length=getattr(args, "max_length", None),
            depth=getattr(args, "depth", None),
            panel=getattr(args, "panel", None),
            budget=getattr(args, "budget", None),
            workers=getattr(args, "workers", None),
            tolerance=getattr(args, "tolerance", None),
            output_format=args.output_format,
            out=args.out,
            config_path=getattr(args, "config_path", None),
        )
    except ValidationError as exc:
        raise _UsageError(exc.errors()[0]["msg"]) from exc


def _braid(text: str, strands: int | None):
    return braid_service.parse_braid_text(text, strands)


def _record_line(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True)


def _normalize(args, config: CliConfig) -> tuple[str, int]:
    word = _braid(args.word, config.strands)
    nf = garside_service.left_normal_form(word)
    canonical = braid_service.format_braid(garside_service.word_from_normal_form(nf))
    if config.output_format == "records":
        payload = {
            "word": braid_service.format_braid(word),
            "canonical": canonical,
            "infimum": nf.infimum,
            "factors": [factor.cycle_notation() for factor in nf.factors],
        }
        return _record_line(payload) + "\n", 0
    return canonical + "\n", 0


def _equal(args, config: CliConfig) -> tuple[str, int]:
    left, right = _braid(args.left, config.strands), _braid(args.right, config.strands)
    result = garside_service.words_equal(left, right)
    if config.output_format == "records":
        return _record_line({"left": braid_service.format_braid(left), "right": braid_service.format_braid(right), "equal": result}) + "\n", 0
    return ("true" if result else "false") + "\n", 0


def _conj(args, config: CliConfig) -> tuple[str, int]:
    left, right = _braid(args.left, config.strands), _braid(args.right, config.strands)
    result = garside_service.conjugate_test(left, right, budget=config.budget)
    witness = braid_service.format_braid(result.witness) if result.witness is not None else "-"
    if config.output_format == "records":
        payload = {"verdict": result.verdict, "witness": witness, "certificate": result.certificate, "details": result.details}
        return _record_line(payload) + "\n", 0
    return f"{result.verdict}\t{witness}\t{result.certificate or '-'}\n", 0


def _close(args, config: CliConfig) -> tuple[str, int]:
    ambient = normalize_ambient(config.ambient)
    if ambient not in AMBIENTS:
        raise _UsageError(f"unknown ambient {config.ambient!r}")
    word = closure_service.parse_closure_input(args.word, ambient, config.strands)
    link = closure_service.close_in(word)
    essential = None if link.ambient == "sphere3" else closure_service.is_essential(link)
    if config.output_format == "records":
        payload = link.model_dump(mode="json")
        payload["essential"] = essential
        return _record_line(payload) + "\n", 0
    line = closure_service.format_link(link)
    if essential is not None:
        line += "\tessential" if essential else "\tuncertified"
    return line + "\n", 0


def _color(args, config: CliConfig) -> tuple[str, int]:
    word = _braid(args.word, config.strands)
    quandles = []
    if config.panel:
        quandles.extend(quandle_service.parse_panel(config.panel))
    for token in args.quandle or []:
        quandles.append(quandle_service.parse_quandle_spec(token))
    if args.quandle_file:
        path = Path(args.quandle_file)
        try:
            text = path.read_text()
        except OSError as exc:
            raise AppException(f"Cannot read quandle file {path}: {exc}", code="quandle.table_format") from exc
        quandles.append(quandle_service.parse_quandle_table(text, name=path.stem))
    if not quandles:
        raise _UsageError("color needs --quandle, --quandle-file or --panel")
    rows = [(quandle.name or f"q{quandle.order}", quandle_service.coloring_count(word, quandle)) for quandle in quandles]
    if config.output_format == "records":
        return "".join(_record_line({"quandle": name, "colorings": count}) + "\n" for name, count in rows), 0
    if len(rows) == 1:
        return f"{rows[0][1]}\n", 0
    return "".join(f"{name}\t{count}\n" for name, count in rows), 0


def _census_config(args, config: CliConfig) -> CensusConfig:
    if config.ambient is not None and normalize_ambient(config.ambient) not in AMBIENTS:
        raise _UsageError(f"unknown ambient {config.ambient!r}")
    base = CensusConfig()
    if config.config_path:
        base = census_service.load_census_config(config.config_path, base)
    overrides = {
        "ambient": config.ambient,
        "max_strands": config.strands,
        "min_strands": config.min_strands,
        "max_length": config.max_length,
        "depth": config.depth,
        "panel": config.panel,
        "state_budget": config.budget,
        "workers": config.workers,
    }
    return census_service.census_config_from_mapping(overrides, base)


def _census(args, config: CliConfig) -> tuple[str, int]:
    census_config = _census_config(args, config)
    report = census_service.run_census(census_config)
    if args.db:
        from app.services import census_store_service

        with census_store_service.open_session(args.db) as db:
            run = census_store_service.save_report(db, report)
            logger.warning("census.stored run_id=%s url=%s", run.id, args.db)
    return census_service.format_report(report, config.output_format), 0


def _witness(args, config: CliConfig) -> tuple[str, int]:
    words = census_service.essential_witnesses(args.count)
    lines = []
    for word in words:
        link = closure_service.close_mixed(word)
        essential = closure_service.is_essential(link)
        if config.output_format == "records":
            lines.append(_record_line({"word": mixed_braid_service.format_mixed(word), "winding": list(link.winding), "essential": essential}))
        else:
            lines.append(f"{mixed_braid_service.format_mixed(word)}\t{closure_service.format_link(link)}\t{'essential' if essential else 'uncertified'}")
    return "\n".join(lines) + "\n", 0


def _dynamics(args, config: CliConfig) -> tuple[str, int]:
    report = dynamics_service.verify_dynamics(tolerance=config.tolerance, samples=args.samples, seed=args.seed)
    status = 0 if report.all_passed else 1
    if config.output_format == "records":
        return _record_line(report.model_dump(mode="json")) + "\n", status
    return dynamics_service.format_report(report), status


def _mixed_verify(args, config: CliConfig) -> tuple[str, int]:
    report = mixed_braid_service.verify_presentation(args.fixed, args.moving)
    lines = [f"# B{args.fixed},{args.moving} relators={len(report.checks)}"]
    for check in report.checks:
        if config.output_format == "records":
            lines.append(_record_line({"family": check.family, "relator": check.label, "passed": check.passed}))
        else:
            lines.append(f"{check.family}\t{check.label}\t{'pass' if check.passed else 'FAIL'}")
    return "\n".join(lines) + "\n", 0 if report.all_passed else 1


def _format_free_word(word) -> str:
    return " ".join(f"x{letter}" if letter > 0 else f"X{-letter}" for letter in word) or "1"


def _group(args, config: CliConfig) -> tuple[str, int]:
    word = _braid(args.word, config.strands)
    presentation = link_group_service.link_group(word)
    counts = {degree: link_group_service.count_homomorphisms(presentation, degree) for degree in range(2, args.degree + 1)}
    if config.output_format == "records":
        payload = {
            "generators": presentation.generators,
            "relators": [list(relator) for relator in presentation.relators],
            "homomorphisms": {f"S{degree}": count for degree, count in counts.items()},
        }
        return _record_line(payload) + "\n", 0
    lines = [f"generators\t{presentation.generators}"]
    lines.extend(f"relator\t{_format_free_word(relator)}" for relator in presentation.relators)
    lines.extend(f"hom_S{degree}\t{count}" for degree, count in counts.items())
    return "\n".join(lines) + "\n", 0


def _quandles(args, config: CliConfig) -> tuple[str, int]:
    found = quandle_service.enumerate_quandles(args.order)
    if config.output_format == "records":
        return "".join(_record_line({"name": q.name, "order": q.order, "table": [list(row) for row in q.table]}) + "\n" for q in found), 0
    chunks = [f"# order={args.order} count={len(found)}"]
    chunks.extend(quandle_service.format_quandle_table(quandle).rstrip("\n") for quandle in found)
    return "\n".join(chunks) + "\n", 0


_HANDLERS = {
    "normalize": _normalize,
    "equal": _equal,
    "conj": _conj,
    "close": _close,
    "color": _color,
    "census": _census,
    "witness": _witness,
    "dynamics-verify": _dynamics,
    "mixed-verify": _mixed_verify,
    "group": _group,
    "quandles": _quandles,
}


def run(argv: list[str] | None = None, stdout: TextIO | None = None, stderr: TextIO | None = None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    setup_logging(resolve_level(args.log_level, logging.WARNING), stream=stderr)
    try:
        config = _cli_config(args)
        output, status = _HANDLERS[args.subcommand](args, config)
    except _UsageError as exc:
        parser.print_usage(stderr)
        print(f"{parser.prog}: error: {exc}", file=stderr)
        return 2
    except AppException as exc:
        print(f"error: {exc.message}" + (f" [{exc.code}]" if exc.code else ""), file=stderr)
        return 1
    if config.out:
        try:
            Path(config.out).write_text(output)
        except OSError as exc:
            print(f"error: Cannot write {config.out}: {exc.strerror or exc} [cli.output]", file=stderr)
            return 1
    else:
        stdout.write(output)
    return status


def main() -> int:
    return run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
