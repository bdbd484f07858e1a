"""Command-line front end for the deciders, the oracle and corpus runs."""
from __future__ import annotations

import argparse
import asyncio
import json
import logging
import sys
from pathlib import Path
from typing import Any, NoReturn, Sequence

from pydantic import ValidationError

from .algebra import ElementKind, Instance, classify, invariant_lines
from .config import get_settings, resolve_caps
from .corpus import curated_instances, random_corpus, run_corpus
from .csv_export import export_corpus_to_csv
from .errors import InputError, ResourceError
from .models import Caps, ClassifyReport, GeneratorClassReport, InstanceFile, LineReport
from .oracle import bfs_semigroup
from .pipeline import Decision, DecisionTag, decide_group_problem, decide_identity_problem
from .render import render_cells_svg
from .sl2group import GroupKind, analyze_group
from .witness import PowerWord, verify_identity_certificate, verify_identity_word

logger = logging.getLogger(__name__)

EXIT_YES = 0
EXIT_NO = 1
EXIT_INCONCLUSIVE = 2
EXIT_INVALID = 3

_EXIT_CODES = {
    DecisionTag.IS_GROUP: EXIT_YES,
    DecisionTag.NOT_GROUP: EXIT_NO,
    DecisionTag.INCONCLUSIVE: EXIT_INCONCLUSIVE,
}


def _configure_logging(verbosity: int) -> None:
    if verbosity >= 2:
        level: int | str = logging.DEBUG
    elif verbosity == 1:
        level = logging.INFO
    else:
        level = get_settings().log_level.upper()
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def load_instance_file(path: str | Path) -> InstanceFile:
    """
    Read and validate an instance file.

    Raises:
        InputError: If the file is missing or not JSON
        ValidationError: If the document does not match the instance schema
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return InstanceFile.model_validate_json(text)
    except ValidationError as exc:
        # malformed JSON surfaces as a validation error of type json_invalid
        if any(err["type"] == "json_invalid" for err in exc.errors()):
            raise InputError(f"{path} is not valid JSON") from exc
        raise


def _load(args: argparse.Namespace) -> tuple[Instance, Caps]:
    document = load_instance_file(args.file)
    caps = resolve_caps(document.caps, depth=args.caps_depth, norm=args.caps_norm)
    return document.to_instance(), caps


def _emit(args: argparse.Namespace, payload: dict[str, Any], lines: Sequence[str]) -> None:
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        for line in lines:
            print(line)


def _decision_lines(decision: Decision, question: str) -> list[str]:
    answer = {
        DecisionTag.IS_GROUP: "yes",
        DecisionTag.NOT_GROUP: "no",
        DecisionTag.INCONCLUSIVE: "inconclusive",
    }[decision.tag]
    lines = [f"{question}: {answer} ({decision.tag.value})"]
    if decision.case:
        lines.append(f"case: {decision.case.value}")
    if decision.subset:
        lines.append(f"subset: {list(decision.subset)}")
    if decision.stage:
        lines.append(f"stage: {decision.stage}")
    if decision.reason:
        lines.append(f"reason: {decision.reason}")
    if decision.certificate is not None:
        lines.append(f"certificate: {decision.certificate}")
        lines.append(f"certificate factors: {len(decision.certificate)}")
    return lines


def _cmd_decide_group(args: argparse.Namespace) -> int:
    inst, caps = _load(args)
    decision = decide_group_problem(inst, caps)
    _emit(args, decision.to_report().model_dump(mode="json"), _decision_lines(decision, "group"))
    return _EXIT_CODES[decision.tag]


def _cmd_decide_identity(args: argparse.Namespace) -> int:
    inst, caps = _load(args)
    decision = decide_identity_problem(inst, caps)
    _emit(args, decision.to_report().model_dump(mode="json"), _decision_lines(decision, "identity reachable"))
    return _EXIT_CODES[decision.tag]


def _class_report(index: int, inst: Instance) -> GeneratorClassReport:
    matrix = inst.matrices[index - 1]
    element_class = classify(matrix)
    lines = []
    if element_class.kind not in (ElementKind.IDENTITY, ElementKind.MINUS_IDENTITY):
        lines = [
            LineReport(
                direction=(float(line.direction[0]), float(line.direction[1])),
                eigenvalue=float(line.eigenvalue),
                role=line.role.value,
            )
            for line in invariant_lines(matrix)
        ]
    return GeneratorClassReport(
        index=index, kind=element_class.kind.value, torsion_order=element_class.torsion_order, lines=lines
    )


def _cmd_classify(args: argparse.Namespace) -> int:
    inst, caps = _load(args)
    group = analyze_group(inst.matrices, caps)
    report = ClassifyReport(
        generators=[_class_report(i, inst) for i in range(1, inst.k + 1)],
        group_case=str(group),
        groupness=group.groupness.verdict.value,
        generator=[list(row) for row in group.generator.rows] if group.generator else None,
        exponents=list(group.exponents) if group.exponents else None,
    )
    lines = []
    for entry in report.generators:
        order = f" order {entry.torsion_order}" if entry.torsion_order else ""
        lines.append(f"generator {entry.index}: {entry.kind}{order}")
        for line in entry.lines:
            lines.append(
                f"  {line.role} line ({line.direction[0]:.6g}, {line.direction[1]:.6g}), eigenvalue {line.eigenvalue:.6g}"
            )
    lines.append(f"matrix group: {report.group_case} (semigroup is a group: {report.groupness})")
    if group.kind is GroupKind.CYCLIC:
        lines.append(f"cyclic generator {report.generator}, exponents {report.exponents}")
    _emit(args, report.model_dump(mode="json"), lines)
    return EXIT_YES


def _read_certificate(path: str, k: int) -> tuple[PowerWord, bool]:
    """Certificate word and whether it came from an identity decision with a subset."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc.msg}") from exc
    subset = False
    if isinstance(data, dict):
        subset = bool(data.get("subset"))
        data = data.get("certificate")
    if not isinstance(data, list):
        raise InputError(f"{path} holds no certificate")
    return PowerWord.from_list(data, k), subset


def _cmd_verify(args: argparse.Namespace) -> int:
    inst, _ = _load(args)
    word, subset = _read_certificate(args.certificate, inst.k)
    if subset:
        valid = verify_identity_word(word, inst.generators)
    else:
        valid = verify_identity_certificate(word, inst.generators)
    payload = {"valid": valid, "full_image": word.full_image, **word.stats()}
    _emit(args, payload, [f"certificate {'valid' if valid else 'invalid'}: {word}"])
    return EXIT_YES if valid else EXIT_NO


def _cmd_oracle(args: argparse.Namespace) -> int:
    inst, caps = _load(args)
    report = bfs_semigroup(inst.generators, caps.oracle_depth, caps.norm, caps.max_states)
    # always JSON
    print(report.model_dump_json(indent=2))
    return EXIT_YES if report.full_image_identity_found else EXIT_NO


def _cmd_corpus(args: argparse.Namespace) -> int:
    settings = get_settings()
    caps = resolve_caps(depth=args.caps_depth, norm=args.caps_norm)
    entries = curated_instances() if args.curated else []
    if args.count:
        entries += random_corpus(args.seed, args.count, settings.corpus_entry_bound)
    if not entries:
        raise InputError("nothing to validate: give --count or --curated")
    concurrency = args.concurrency or settings.corpus_concurrency
    run = asyncio.run(run_corpus(entries, caps, concurrency))
    summary = run.summary()
    if args.csv:
        Path(args.csv).write_text(export_corpus_to_csv(run.results), encoding="utf-8")
    lines = [
        f"instances: {summary.progress.total} (errors {summary.progress.errors})",
        f"is-group {summary.is_group}, not-group {summary.not_group}, inconclusive {summary.inconclusive}",
        f"oracle aborted: {summary.oracle_aborted}",
        f"contradictions: {summary.contradictions}",
    ]
    lines += [f"  {name}" for name in summary.contradiction_names]
    lines += [f"error: {error}" for error in run.errors]
    _emit(args, summary.model_dump(mode="json"), lines)
    return EXIT_NO if summary.contradictions or run.errors else EXIT_YES


def _cmd_render_cells(args: argparse.Namespace) -> int:
    inst, caps = _load(args)
    path = render_cells_svg(inst, args.output, caps)
    print(f"wrote {path}")
    return EXIT_YES


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with the invalid-input code."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="Machine-readable output")
    common.add_argument("--caps-depth", type=int, default=None, help="Word length for inverse-witness BFS")
    common.add_argument("--caps-norm", type=int, default=None, help="Largest entry kept during BFS")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")

    parser = _Parser(
        prog="sa2-decide", description="Decide the Group and Identity Problems for sub-semigroups of SA(2,Z)."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, handler, help_text in (
        ("decide-group", _cmd_decide_group, "Is the generated semigroup a group?"),
        ("decide-identity", _cmd_decide_identity, "Is (I, 0) in the generated semigroup?"),
        ("classify", _cmd_classify, "Classify generators and the matrix-part group"),
        ("oracle", _cmd_oracle, "Bounded enumeration report as JSON"),
    ):
        cmd = sub.add_parser(name, parents=[common], help=help_text)
        cmd.add_argument("file", help="Instance JSON file")
        cmd.set_defaults(handler=handler)

    verify = sub.add_parser("verify", parents=[common], help="Check an identity certificate")
    verify.add_argument("file", help="Instance JSON file")
    verify.add_argument("certificate", help="JSON [[index, exponent], ...] or a decision report")
    verify.set_defaults(handler=_cmd_verify)

    corpus = sub.add_parser("corpus", parents=[common], help="Cross-validate decisions against the oracle")
    corpus.add_argument("--seed", type=int, default=0)
    corpus.add_argument("--count", type=int, default=0, help="Random instances to generate")
    corpus.add_argument("--curated", action="store_true", help="Include the curated instances")
    corpus.add_argument("--csv", default=None, help="Write per-instance rows to this CSV file")
    corpus.add_argument("--concurrency", type=int, default=None)
    corpus.set_defaults(handler=_cmd_corpus)

    render = sub.add_parser("render-cells", parents=[common], help="Plot the positive-scale cells as SVG")
    render.add_argument("file", help="Instance JSON file")
    render.add_argument("output", help="SVG path")
    render.set_defaults(handler=_cmd_render_cells)
    return parser


def run_cli(argv: Sequence[str] | None = None) -> int:
    """
    Run one subcommand and return its exit code.

    Exit codes: 0 yes / valid, 1 no / invalid, 2 inconclusive or caps
    exhausted, 3 invalid input.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)
    try:
        return args.handler(args)
    except ValidationError as exc:
        first = exc.errors()[0]
        location = ".".join(str(part) for part in first["loc"])
        print(f"error: invalid instance at {location or 'document'}: {first['msg']}", file=sys.stderr)
        return EXIT_INVALID
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ResourceError as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE


def main() -> None:
    sys.exit(run_cli())
