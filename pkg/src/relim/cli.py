"""Command-line surface over the engine.

Exit codes: 0 on success, 1 when a check or certificate comes out false,
2 on usage or parse errors.  Problems are read from a file argument or stdin
(``-``).  ``--format json`` prints the canonical JSON the HTTP service also
emits, byte for byte.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import family as fam
from . import jsonio
from .analysis import Verdict
from .core import parse_problem, rename_problem, serialize_problem
from .diagram import build_diagram, diagram_to_dot
from .errors import BlowupError, ParseError, PreconditionError, SequenceError
from .roundelim import LiftedProblem, re, rere
from .simtree import (
    check_labeling,
    generate_valid_labeling,
    greedy_kods,
    kods_to_family_labeling,
    plus_to_family_transform,
    proper_edge_coloring,
    random_tree,
)
from .verify import format_suite, run_suite


def _read_problem(path: str):
    text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    return parse_problem(text)


def _print_lifted(lp: LiftedProblem, fmt: str) -> None:
    if fmt == "json":
        sys.stdout.write(jsonio.canonical_dumps(jsonio.lifted_to_json(lp)))
        return
    # Dictionary lines are comments so the text output stays a valid problem
    # file and transforms can be piped.
    sys.stdout.write(serialize_problem(lp.problem))
    sys.stdout.write("# sets:\n")
    for name, members in lp.sets:
        sys.stdout.write(f"# {name} = {{{' '.join(sorted(members))}}}\n")


def _parse_rename_keys(key: str, lp: LiftedProblem) -> str | None:
    """Resolve a rename-table key to an engine-assigned name.

    Keys may be the engine name itself, or the member list of a set
    ("M X", "M,X", or juxtaposed single-character labels like "MX").
    """
    names = dict(lp.sets)
    if key in names:
        return key
    for sep in (" ", ","):
        if sep in key:
            members = frozenset(part for part in key.replace(",", " ").split() if part)
            break
    else:
        members = frozenset(key)
    for name, s in lp.sets:
        if s == members:
            return name
    return None


def _apply_rename(lp: LiftedProblem, table: dict[str, str]) -> LiftedProblem:
    mapping = {name: name for name, _ in lp.sets}
    for key, new in table.items():
        resolved = _parse_rename_keys(key, lp)
        if resolved is None:
            raise PreconditionError(f"rename key {key!r} matches no label set")
        mapping[resolved] = new
    problem = rename_problem(lp.problem, mapping)
    sets = tuple(sorted((mapping[name], members) for name, members in lp.sets))
    return LiftedProblem(problem, sets, lp.transform)


def _emit_problem(p, fmt: str) -> None:
    if fmt == "json":
        sys.stdout.write(jsonio.canonical_dumps(jsonio.problem_to_json(p)))
    else:
        sys.stdout.write(serialize_problem(p))


def cmd_transform(args, transform) -> int:
    lp = transform(
        _read_problem(args.problem),
        max_labels=args.max_labels,
        max_configs=args.max_configs,
        workers=args.workers,
    )
    if args.rename_file:
        import json as _json

        table = _json.load(open(args.rename_file, encoding="utf-8"))
        lp = _apply_rename(lp, table)
    _print_lifted(lp, args.format)
    return 0


def cmd_diagram(args) -> int:
    d = build_diagram(_read_problem(args.problem), args.side)
    if args.format == "json":
        sys.stdout.write(jsonio.canonical_dumps(jsonio.diagram_to_json(d)))
    else:
        sys.stdout.write(diagram_to_dot(d))
    return 0


def cmd_family(args) -> int:
    _emit_problem(fam.make_family_problem(fam.FamilyParams(args.delta, args.a, args.x)), args.format)
    return 0


def cmd_plus(args) -> int:
    _emit_problem(fam.make_plus_problem(fam.FamilyParams(args.delta, args.a, args.x)), args.format)
    return 0


def cmd_mis(args) -> int:
    _emit_problem(fam.make_mis_problem(args.delta), args.format)
    return 0


def cmd_sequence(args) -> int:
    try:
        cert = fam.build_sequence(args.delta, args.x0, args.epsilon, mechanize=args.mechanize)
    except SequenceError as exc:
        sys.stderr.write(f"sequence failed: {exc}\n")
        return 1
    if args.format == "json":
        sys.stdout.write(jsonio.canonical_dumps(jsonio.certificate_to_json(cert)))
    else:
        sys.stdout.write(jsonio.certificate_report(cert))
    return 0


def cmd_verify_paper(args) -> int:
    results = run_suite(args.delta_max)
    sys.stdout.write(format_suite(results))
    return 0 if all(r.passed for r in results) else 1


def _emit_verdict(verdict: Verdict, fmt: str, extra: dict | None = None) -> int:
    if fmt == "json":
        payload = jsonio.verdict_to_json(verdict)
        if extra:
            payload.update(extra)
        sys.stdout.write(jsonio.canonical_dumps(payload))
    else:
        sys.stdout.write(("valid: " if verdict.holds else "INVALID: ") + verdict.narrative + "\n")
        if not verdict.holds:
            sys.stdout.write(f"witness: {verdict.witness}\n")
    return 0 if verdict.holds else 1


def cmd_simulate(args) -> int:
    if args.action == "kods":
        tree = random_tree(args.n, args.delta, args.seed)
        sol = greedy_kods(tree, args.k)
        labeled = kods_to_family_labeling(tree, sol, args.a, args.k)
        problem = fam.make_family_problem(fam.FamilyParams(args.delta, args.a, args.k))
        verdict = check_labeling(labeled, problem)
        extra = None
        if args.format == "json":
            extra = {
                "tree": jsonio.tree_to_json(labeled),
                "solution": jsonio.dsolution_to_json(sol),
                "dot": jsonio.tree_to_dot(labeled),
            }
        return _emit_verdict(verdict, args.format, extra)
    if args.action == "plus-transform":
        tree = proper_edge_coloring(random_tree(args.n, args.delta, args.seed))
        plus = fam.make_plus_problem(fam.FamilyParams(args.delta, args.a, args.x))
        labeled = generate_valid_labeling(tree, plus, seed=args.seed)
        if labeled is None:
            sys.stderr.write("no valid labeling of the extended problem found\n")
            return 1
        out = plus_to_family_transform(labeled, args.a, args.x)
        stepped = fam.FamilyParams(args.delta, (args.a - 2 * args.x - 1) // 2, args.x + 1)
        verdict = check_labeling(out, fam.make_family_problem(stepped))
        extra = None
        if args.format == "json":
            extra = {"tree": jsonio.tree_to_json(out), "dot": jsonio.tree_to_dot(out)}
        return _emit_verdict(verdict, args.format, extra)
    if args.action == "check":
        import json as _json

        tree = jsonio.tree_from_json(_json.load(open(args.tree, encoding="utf-8")))
        problem = _read_problem(args.problem)
        return _emit_verdict(check_labeling(tree, problem), args.format)
    raise AssertionError(args.action)


def cmd_iso(args) -> int:
    from relim.core import problems_isomorphic

    p1 = _read_problem(args.first)
    p2 = _read_problem(args.second)
    mapping = problems_isomorphic(p1, p2)
    if args.format == "json":
        sys.stdout.write(jsonio.canonical_dumps({"isomorphic": mapping is not None, "mapping": mapping}))
    elif mapping is None:
        sys.stdout.write("not isomorphic\n")
    else:
        sys.stdout.write("isomorphic: " + " ".join(f"{k}->{v}" for k, v in sorted(mapping.items())) + "\n")
    return 0 if mapping is not None else 1


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(
        create_app(ui_dir=args.ui), host=args.host, port=args.port, log_level="warning"
    )
    return 0


def _add_format(p: argparse.ArgumentParser, choices=("text", "json")) -> None:
    p.add_argument("--format", choices=choices, default="text")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relim",
        description="round-elimination engine for locally checkable problems on regular trees",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, transform in (("re", re), ("rere", rere)):
        p = sub.add_parser(name, help=f"apply the {name} transform to a problem")
        p.add_argument("problem", help="problem file, or - for stdin")
        p.add_argument("--max-labels", type=int, default=10_000)
        p.add_argument("--max-configs", type=int, default=100_000)
        p.add_argument("--workers", type=int, default=0)
        p.add_argument("--rename-file", help="JSON table renaming the fresh labels")
        _add_format(p)
        p.set_defaults(func=lambda a, t=transform: cmd_transform(a, t))

    p = sub.add_parser("diagram", help="strength diagram of a problem")
    p.add_argument("problem")
    p.add_argument("--side", choices=("node", "edge"), required=True)
    _add_format(p)
    p.set_defaults(func=cmd_diagram)

    p = sub.add_parser("family", help="emit a family problem")
    p.add_argument("--delta", type=int, required=True)
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--x", type=int, required=True)
    _add_format(p)
    p.set_defaults(func=cmd_family)

    p = sub.add_parser("plus", help="emit the extended six-label family problem")
    p.add_argument("--delta", type=int, required=True)
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--x", type=int, required=True)
    _add_format(p)
    p.set_defaults(func=cmd_plus)

    p = sub.add_parser("mis", help="emit the maximal-independent-set encoding")
    p.add_argument("--delta", type=int, required=True)
    _add_format(p)
    p.set_defaults(func=cmd_mis)

    p = sub.add_parser("sequence", help="build a lower-bound chain certificate")
    p.add_argument("--delta", type=int, required=True)
    p.add_argument("--x0", type=int, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--mechanize", action="store_true", help="engine-verify each step (delta <= 6)")
    _add_format(p)
    p.set_defaults(func=cmd_sequence)

    p = sub.add_parser("verify", help="run the full verification suite")
    p.add_argument("--delta-max", type=int, required=True)
    p.set_defaults(func=cmd_verify_paper)

    p = sub.add_parser("iso", help="isomorphism check between two problems")
    p.add_argument("first", help="problem file, or - for stdin")
    p.add_argument("second", help="problem file")
    _add_format(p)
    p.set_defaults(func=cmd_iso)

    p = sub.add_parser("simulate", help="run tree simulations")
    act = p.add_subparsers(dest="action", required=True)

    k = act.add_parser("kods", help="greedy dominating set and its one-round labeling")
    k.add_argument("--n", type=int, required=True)
    k.add_argument("--delta", type=int, required=True)
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--k", type=int, required=True)
    k.add_argument("--a", type=int, default=0)
    _add_format(k)
    k.set_defaults(func=cmd_simulate)

    t = act.add_parser("plus-transform", help="generate, rewrite by colors, and check")
    t.add_argument("--n", type=int, required=True)
    t.add_argument("--delta", type=int, required=True)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--a", type=int, required=True)
    t.add_argument("--x", type=int, required=True)
    _add_format(t)
    t.set_defaults(func=cmd_simulate)

    c = act.add_parser("check", help="check a labeled tree against a problem")
    c.add_argument("--tree", required=True, help="tree JSON file")
    c.add_argument("--problem", required=True, help="problem file")
    _add_format(c)
    c.set_defaults(func=cmd_simulate)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default=os.environ.get("RELIM_HOST", "127.0.0.1"))
    p.add_argument("--port", type=int, default=int(os.environ.get("RELIM_PORT", "8008")))
    p.add_argument(
        "--ui",
        default=os.environ.get("RELIM_UI"),
        help="serve a built workbench UI directory under /ui",
    )
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        sys.stderr.write(f"parse error: {exc}\n")
        return 2
    except FileNotFoundError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except PreconditionError as exc:
        sys.stderr.write(f"precondition failed: {exc}\n")
        return 1
    except BlowupError as exc:
        sys.stderr.write(f"size cap exceeded: {exc} {exc.stats}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
