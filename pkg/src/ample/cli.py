"""Command line interface: validation, tables, bisections, and the batch
equivalence / Morita verification reports.

Commands: validate, table, bisections, equivalence, morita, examples.
Reports are plain text by default; ``--out json`` switches to a
machine-readable certificate document.  Both forms are byte-reproducible
for fixed inputs and seeds.  Exit codes: 0 all checks passed, 1 a check or
input file failed, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import os
import random
import sys
from typing import Any

from . import builders
from .algebra import multiplication_table
from .documents import (
    ParseError,
    ParsedDocument,
    dump_payload,
    functor_payload,
    graph_payload,
    groupoid_payload,
    load_document,
    module_payload,
    sheaf_payload,
)
from .equivalence import NaturalIsoCertificate, check_naturality, epsilon, eta
from .gmodule import random_hom, validate_module
from .groupoid import FiniteGroupoid, enumerate_bisections, validate_groupoid
from .gsheaf import validate_sheaf
from .morita import is_essential_equivalence, validate_functor, validate_span, verify_morita
from .rings import Ring, ring_from_name
from .validation import ValidationReport


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="ample", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="parse a document and check its axioms")
    p_validate.add_argument("file")
    _common_flags(p_validate)

    p_table = sub.add_parser("table", help="structure constants of the arrow singletons")
    p_table.add_argument("file", help="groupoid or graph document")
    _common_flags(p_table)

    p_bis = sub.add_parser("bisections", help="enumerate all compact open bisections")
    p_bis.add_argument("file", help="groupoid or graph document")
    _common_flags(p_bis)

    p_eq = sub.add_parser("equivalence", help="certify eta/epsilon and naturality on samples")
    p_eq.add_argument("--groupoid", required=True, help="groupoid or graph document")
    _common_flags(p_eq)

    p_mor = sub.add_parser("morita", help="verify a span of essential equivalences")
    p_mor.add_argument("--span", required=True, help="span document")
    _common_flags(p_mor)

    p_ex = sub.add_parser("examples", help="emit the builder fixture corpus")
    p_ex.add_argument("--dir", required=True, help="output directory")
    _common_flags(p_ex)

    return parser


def _common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--ring", default="Q", help="Q, Z, Fp:<p> or Zmod:<m>")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--samples", type=int, default=10)
    parser.add_argument("--max-rank", type=int, default=3, dest="max_rank")
    parser.add_argument("--out", choices=("text", "json"), default="text", help="report format")


def run_command(argv: list[str]) -> tuple[int, str]:
    """Run one command; returns (exit code, report text)."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        return 2, f"usage error: {exc}"
    except SystemExit as exc:  # argparse prints help/version itself
        return int(exc.code or 0), ""
    try:
        ring = ring_from_name(args.ring)
    except ValueError as exc:
        return 2, f"usage error: {exc}"
    handler = {
        "validate": _cmd_validate,
        "table": _cmd_table,
        "bisections": _cmd_bisections,
        "equivalence": _cmd_equivalence,
        "morita": _cmd_morita,
        "examples": _cmd_examples,
    }[args.command]
    try:
        return handler(args, ring)
    except ParseError as exc:
        return 1, exc.describe()
    except UsageError as exc:
        return 2, f"usage error: {exc}"


def main() -> None:
    code, text = run_command(sys.argv[1:])
    print(text)
    raise SystemExit(code)


# -- validate --------------------------------------------------------------------


def _summary(kind: str, value: Any) -> str:
    if kind == "groupoid":
        return f"{len(value.arrows)} arrows, {len(value.objects)} objects"
    if kind == "module":
        return f"rank {value.rank}, {len(value.groupoid.arrows)} arrows"
    if kind == "sheaf":
        ranks = ",".join(str(value.stalk_rank[x]) for x in value.groupoid.objects)
        return f"stalk ranks {ranks or '-'}"
    if kind == "functor":
        return f"{len(value.source.objects)} objects -> {len(value.target.objects)} objects"
    if kind == "span":
        return f"apex {len(value.apex.objects)} objects"
    if kind == "graph":
        return f"{len(value.vertices)} vertices, {len(value.edges)} edges"
    return ""


def _validate_parsed(doc: ParsedDocument) -> ValidationReport:
    if doc.kind == "groupoid":
        return validate_groupoid(doc.value)
    if doc.kind == "module":
        return validate_module(doc.value)
    if doc.kind == "sheaf":
        return validate_sheaf(doc.value)
    if doc.kind == "functor":
        return validate_functor(doc.value)
    if doc.kind == "span":
        return validate_span(doc.value)
    if doc.kind == "graph":
        try:
            groupoid = builders.acyclic_graph_groupoid(doc.value)
        except ValueError as exc:
            from .validation import Failure

            return ValidationReport("graph", (Failure("acyclicity", str(exc)),))
        return validate_groupoid(groupoid)
    raise AssertionError(doc.kind)


def _cmd_validate(args: argparse.Namespace, ring: Ring) -> tuple[int, str]:
    doc = load_document(args.file)
    report = _validate_parsed(doc)
    if args.out == "json":
        payload = {
            "command": "validate",
            "kind": doc.kind,
            "summary": _summary(doc.kind, doc.value),
            "result": "pass" if report.ok else "fail",
            "failures": [{"law": f.law, "witness": f.witness} for f in report.failures],
        }
        return (0 if report.ok else 1), dump_payload(payload).rstrip("\n")
    if report.ok:
        return 0, f"{doc.kind}: PASS ({_summary(doc.kind, doc.value)})"
    lines = [f"{doc.kind}: FAIL"] + [f"  {f}" for f in report.failures]
    return 1, "\n".join(lines)


# -- groupoid-consuming commands ---------------------------------------------------


def _groupoid_from_file(path: str) -> FiniteGroupoid:
    doc = load_document(path)
    if doc.kind == "graph":
        groupoid = builders.acyclic_graph_groupoid(doc.value)
    elif doc.kind == "groupoid":
        groupoid = doc.value
    else:
        raise UsageError(f"{path} is a {doc.kind} document; expected groupoid or graph")
    report = validate_groupoid(groupoid)
    if not report.ok:
        raise ParseError(
            f"groupoid axioms fail: {report.first()}",
            hint="run the validate command for the full report",
            source=path,
        )
    return groupoid


def _cmd_table(args: argparse.Namespace, ring: Ring) -> tuple[int, str]:
    groupoid = _groupoid_from_file(args.file)
    table = multiplication_table(groupoid, ring)
    if args.out == "json":
        payload = {
            "command": "table",
            "arrows": list(groupoid.arrows),
            "cells": {f"{a}|{b}": table.cells[(a, b)] for a in groupoid.arrows for b in groupoid.arrows},
        }
        return 0, dump_payload(payload).rstrip("\n")
    return 0, table.to_tsv().rstrip("\n")


def _cmd_bisections(args: argparse.Namespace, ring: Ring) -> tuple[int, str]:
    groupoid = _groupoid_from_file(args.file)
    found = enumerate_bisections(groupoid)
    if args.out == "json":
        payload = {
            "command": "bisections",
            "count": len(found),
            "bisections": [list(u.arrows) for u in found],
        }
        return 0, dump_payload(payload).rstrip("\n")
    lines = [f"bisections: {len(found)}"] + [u.label() for u in found]
    return 0, "\n".join(lines)


# -- equivalence -----------------------------------------------------------------


def _cmd_equivalence(args: argparse.Namespace, ring: Ring) -> tuple[int, str]:
    if not ring.supports_elimination:
        raise UsageError(f"ring {ring.name} has a composite modulus; use Q, Z or Fp:<p>")
    groupoid = _groupoid_from_file(args.groupoid)
    rng = random.Random(args.seed)
    lines = [
        "equivalence report",
        f"groupoid: {args.groupoid} ({_summary('groupoid', groupoid)})",
        f"ring: {ring.name}  seed: {args.seed}  samples: {args.samples}  max-rank: {args.max_rank}",
    ]
    records: dict[str, Any] = {"eta": [], "epsilon": [], "naturality": []}
    ok = True

    for i in range(args.samples):
        seed = rng.randrange(2**32)
        module = builders.random_module(groupoid, ring, args.max_rank, seed)
        result = eta(module)
        if result.ok:
            cert = result
            assert isinstance(cert, NaturalIsoCertificate)
            stalks = ",".join(
                str(cert.sheafification.sheaf.stalk_rank[x]) for x in groupoid.objects
            )
            lines.append(f"eta[{i:02d}] seed={seed} rank={module.rank} stalks={stalks} : PASS")
            records["eta"].append({"index": i, "seed": seed, "rank": module.rank, "result": "pass"})
        else:
            ok = False
            lines.append(f"eta[{i:02d}] seed={seed} rank={module.rank} : FAIL ({result.check}: {result.witness})")
            records["eta"].append({"index": i, "seed": seed, "rank": module.rank, "result": "fail"})

    for i in range(args.samples):
        seed = rng.randrange(2**32)
        sheaf = builders.random_sheaf(groupoid, ring, args.max_rank, seed)
        result = epsilon(sheaf)
        stalks = ",".join(str(sheaf.stalk_rank[x]) for x in groupoid.objects)
        if result.ok:
            lines.append(f"epsilon[{i:02d}] seed={seed} stalks={stalks} : PASS")
            records["epsilon"].append({"index": i, "seed": seed, "result": "pass"})
        else:
            ok = False
            lines.append(f"epsilon[{i:02d}] seed={seed} stalks={stalks} : FAIL ({result.check}: {result.witness})")
            records["epsilon"].append({"index": i, "seed": seed, "result": "fail"})

    for i in range(args.samples):
        seed_a = rng.randrange(2**32)
        seed_b = rng.randrange(2**32)
        m1 = builders.random_module(groupoid, ring, max(1, args.max_rank - 1), seed_a)
        m2 = builders.random_module(groupoid, ring, max(1, args.max_rank - 1), seed_b)
        hom = random_hom(m1, m2, rng)
        report = check_naturality(hom)
        verdict = "PASS" if report.ok else f"FAIL ({report.witness})"
        ok = ok and report.ok
        lines.append(f"naturality[{i:02d}] ranks {m1.rank}->{m2.rank} : {verdict}")
        records["naturality"].append(
            {"index": i, "ranks": [m1.rank, m2.rank], "result": "pass" if report.ok else "fail"}
        )

    n = args.samples
    lines.append(f"RESULT: {'PASS' if ok else 'FAIL'} ({n} eta + {n} epsilon + {n} naturality)")
    if args.out == "json":
        payload = {
            "command": "equivalence",
            "groupoid": args.groupoid,
            "ring": ring.name,
            "seed": args.seed,
            "samples": args.samples,
            "max_rank": args.max_rank,
            "certificates": records,
            "result": "pass" if ok else "fail",
        }
        return (0 if ok else 1), dump_payload(payload).rstrip("\n")
    return (0 if ok else 1), "\n".join(lines)


# -- morita ----------------------------------------------------------------------


def _cmd_morita(args: argparse.Namespace, ring: Ring) -> tuple[int, str]:
    if not ring.supports_elimination:
        raise UsageError(f"ring {ring.name} has a composite modulus; use Q, Z or Fp:<p>")
    doc = load_document(args.span)
    if doc.kind != "span":
        raise UsageError(f"{args.span} is a {doc.kind} document; expected span")
    span = doc.value
    report = verify_morita(span, ring, args.samples, args.seed)

    left_report = is_essential_equivalence(span.left)
    right_report = is_essential_equivalence(span.right)
    lines = [
        "morita report",
        f"span: {args.span}",
        f"ring: {ring.name}  seed: {args.seed}  samples: {args.samples}",
        "legs: left {}, right {}".format(
            "PASS" if left_report.ok else f"FAIL ({left_report.first()})",
            "PASS" if right_report.ok else f"FAIL ({right_report.first()})",
        ),
    ]
    if report.rejected:
        lines.append("RESULT: REJECTED (span legs are not essential equivalences)")
        text = "\n".join(lines)
        if args.out == "json":
            payload = {
                "command": "morita", "span": args.span, "ring": ring.name,
                "seed": args.seed, "samples": args.samples,
                "legs": {
                    "left": "pass" if left_report.ok else str(left_report.first()),
                    "right": "pass" if right_report.ok else str(right_report.first()),
                },
                "result": "rejected",
            }
            return 1, dump_payload(payload).rstrip("\n")
        return 1, text

    lines.append("rank table:")
    lines.append("sample\tdirection\trank\ttransported\tround_trip")
    for s in report.samples:
        lines.append(
            f"{s.index}\t{s.direction}\t{s.source_rank}\t{s.transported_rank}\t"
            + ("PASS" if s.round_trip_ok else "FAIL")
        )
    if report.hom_dims:
        all_equal = all(a == b for (_, _, a, b) in report.hom_dims)
        lines.append(
            f"hom-dims: {len(report.hom_dims)} pairs compared, "
            + ("all equal" if all_equal else "MISMATCH")
        )
    lines.append(f"RESULT: {'PASS' if report.ok else 'FAIL'}")
    if args.out == "json":
        payload = {
            "command": "morita",
            "span": args.span,
            "ring": ring.name,
            "seed": args.seed,
            "samples": args.samples,
            "rank_table": [
                {
                    "sample": s.index,
                    "direction": s.direction,
                    "rank": s.source_rank,
                    "transported": s.transported_rank,
                    "round_trip": "pass" if s.round_trip_ok else "fail",
                }
                for s in report.samples
            ],
            "hom_dims": [list(t) for t in report.hom_dims],
            "result": "pass" if report.ok else "fail",
        }
        return (0 if report.ok else 1), dump_payload(payload).rstrip("\n")
    return (0 if report.ok else 1), "\n".join(lines)


# -- examples ---------------------------------------------------------------------


def _cmd_examples(args: argparse.Namespace, ring: Ring) -> tuple[int, str]:
    from .gmodule import regular_module
    from .gsheaf import constant_sheaf
    from .morita import GroupoidFunctor, identity_functor

    os.makedirs(args.dir, exist_ok=True)
    point = builders.trivial_groupoid()
    p2 = builders.pair_groupoid(2)
    p3 = builders.pair_groupoid(3)
    z2_elems, z2_table = builders.cyclic_group(2)
    z3_elems, z3_table = builders.cyclic_group(3)
    z2 = builders.group_groupoid(z2_elems, z2_table)
    z3 = builders.group_groupoid(z3_elems, z3_table)
    z2_action = builders.action_groupoid(z2_elems, z2_table, list(z2_elems), dict(z2_table))
    graph = builders.single_edge_graph()

    incl_p2 = GroupoidFunctor(point, p2, {"1": "1"}, {"(1,1)": "(1,1)"})
    incl_action = GroupoidFunctor(point, z2_action, {"1": "e"}, {"(1,1)": "(e,e)"})
    collapse_z2 = GroupoidFunctor(z2, point, {"*": "1"}, {"e": "(1,1)", "g": "(1,1)"})

    files: list[tuple[str, dict[str, Any]]] = [
        ("point.json", groupoid_payload(point)),
        ("p2.json", groupoid_payload(p2)),
        ("p3.json", groupoid_payload(p3)),
        ("z2.json", groupoid_payload(z2)),
        ("z3.json", groupoid_payload(z3)),
        ("z2-action.json", groupoid_payload(z2_action)),
        ("single-edge-graph.json", graph_payload(graph)),
        (
            "single-edge-groupoid.json",
            groupoid_payload(builders.acyclic_graph_groupoid(graph)),
        ),
        ("functor-point-to-p2.json", functor_payload(incl_p2, "point.json", "p2.json")),
        ("functor-point-id.json", functor_payload(identity_functor(point), "point.json", "point.json")),
        (
            "functor-point-to-z2action.json",
            functor_payload(incl_action, "point.json", "z2-action.json"),
        ),
        ("functor-z2-to-point.json", functor_payload(collapse_z2, "z2.json", "point.json")),
        ("functor-z2-id.json", functor_payload(identity_functor(z2), "z2.json", "z2.json")),
        (
            "span-p2-point.json",
            {"kind": "span", "apex": "point.json", "left": "functor-point-to-p2.json",
             "right": "functor-point-id.json"},
        ),
        (
            "span-z2action-point.json",
            {"kind": "span", "apex": "point.json", "left": "functor-point-to-z2action.json",
             "right": "functor-point-id.json"},
        ),
        (
            "span-broken.json",
            {"kind": "span", "apex": "z2.json", "left": "functor-z2-to-point.json",
             "right": "functor-z2-id.json"},
        ),
        ("module-p2-regular.json", module_payload(regular_module(p2, ring), "p2.json")),
        ("sheaf-p2-constant.json", sheaf_payload(constant_sheaf(p2, ring, 1), "p2.json")),
    ]
    lines = []
    for name, payload in files:
        with open(os.path.join(args.dir, name), "w", encoding="utf-8") as handle:
            handle.write(dump_payload(payload))
        lines.append(f"wrote {name}")
    return 0, "\n".join(lines)


if __name__ == "__main__":
    main()
