"""Command-line front end.

    hornlp run FILE --query "?- ..." [--strategy unif|tm|struct|partial] ...
    hornlp transform FILE (--realizability | --functionalise)
    hornlp analyze FILE (--termination | --overlap | --productivity local --query ...)

``run`` exits 0 when some derivation succeeds, 1 when every outcome is
stuck, 2 when some branch ran out of bound and none succeeded, 3 on usage
or parse errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

from .evidence import build_evidence_all, type_check
from .productivity import FailsAt, HoldsUpTo, check_local_productivity, check_non_overlapping
from .resolution import (
    BoundExceeded,
    DerivationStep,
    SearchLimits,
    Stuck,
    Success,
    replay,
    solve,
)
from .substitution import Substitution
from .syntax import ParseError, format_goals, parse_program, parse_query, query_warnings
from .termination import Nonterminating, Terminating, analyze_termination
from .transform import (
    ExistentialVariablesError,
    evidence_functor_names,
    format_rules,
    functionalise,
    realizability_transform,
)

ARROWS = {"unif": "~>", "tm": "->", "subst": "+>", "partial": "?>"}
EXIT_SUCCESS, EXIT_STUCK, EXIT_BOUND, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def subst_pairs(s: Substitution) -> list[dict]:
    return [{"var": str(k), "term": str(v)} for k, v in s.items()]


def format_subst(s: Substitution) -> str:
    return "{" + ", ".join(f"{k}:={v}" for k, v in s.items()) + "}"


def format_step(st: DerivationStep) -> str:
    arrow = ARROWS[st.kind]
    if st.kind == "tm":
        return f"{arrow}[{st.clause_label}] {format_goals(st.goals_after)}"
    return f"{arrow}[{st.clause_label}, {format_subst(st.unifier)}] {format_goals(st.goals_after)}"


@dataclass
class TraceReport:
    program: str
    query: str
    strategy: str
    outcome: str
    answer: list = field(default_factory=list)
    residual: list = field(default_factory=list)
    evidence: Optional[list] = None
    steps: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=False)


def step_record(st: DerivationStep) -> dict:
    return {
        "kind": st.kind,
        "clause_label": st.clause_label,
        "goal_index": st.goal_index,
        "unifier": subst_pairs(st.unifier),
        "state_after": subst_pairs(st.state_after),
        "goals_after": [str(a) for a in st.goals_after],
        "text": format_step(st),
    }


def replay_report(report: dict) -> list[dict]:
    """Re-run a report's steps against its program and render them again."""
    p = parse_program(Path(report["program"]).read_text())
    goals = parse_query(report["query"])
    steps = [(s["kind"], s["clause_label"], s["goal_index"]) for s in report["steps"]]
    return [step_record(st) for st in replay(p, goals, steps)]


def _answer_text(o) -> str:
    if not o.answer:
        return "yes"
    return ", ".join(f"{k} = {v}" for k, v in o.answer.items())


def _load(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return parse_program(text)
    except ParseError as exc:
        raise UsageError(f"{path}:{exc}") from None


def _query(text: str, p):
    try:
        goals = parse_query(text)
    except ParseError as exc:
        raise UsageError(f"query:{exc}") from None
    for w in query_warnings(goals, p):
        print(f"warning: {w}", file=sys.stderr)
    return goals


def cmd_run(args) -> int:
    p = _load(args.file)
    goals = _query(args.query, p)
    limits = SearchLimits(
        max_steps=args.max_steps,
        max_solutions=10**9 if args.all else args.max_solutions,
        tm_phase_bound=args.tm_bound,
        max_depth_partial=args.max_steps,
        max_nodes=args.max_nodes,
    )
    outcomes = solve(args.strategy, p, goals, limits, args.search)
    for o in outcomes:
        ev = None
        if args.evidence and not isinstance(o, BoundExceeded):
            ev = []
            for j in build_evidence_all(p, o, goals):
                ok = type_check(j)
                ev.append(str(j) + ("" if ok else f"  [REJECTED: {ok.reason}]"))
        if args.json:
            report = TraceReport(
                program=args.file,
                query=args.query,
                strategy=args.strategy,
                outcome=o.kind,
                answer=subst_pairs(o.answer) if isinstance(o, Success) else [],
                residual=[str(a) for a in o.residual],
                evidence=ev,
                steps=[step_record(st) for st in o.trace],
            )
            print(report.to_json())
            continue
        if args.trace:
            print(f"   {format_goals(goals)}")
            for st in o.trace:
                print(f"   {format_step(st)}")
        if isinstance(o, Success):
            line = f"success: {_answer_text(o)}"
            if o.residual:
                line += f"  relative to {format_goals(o.residual)}"
        elif isinstance(o, Stuck):
            line = f"stuck: {format_goals(o.residual)}  state {format_subst(o.state)}"
        else:
            line = f"bound exceeded after {len(o.trace)} steps: {format_goals(o.residual)}"
        print(line)
        for e in ev or ():
            print(f"  evidence: {e}")
    kinds = {o.kind for o in outcomes}
    if "success" in kinds:
        return EXIT_SUCCESS
    if "bound" in kinds:
        return EXIT_BOUND
    return EXIT_STUCK


def cmd_transform(args) -> int:
    p = _load(args.file)
    if args.realizability:
        _, notes = evidence_functor_names(p)
        for n in notes:
            print(f"note: {n}", file=sys.stderr)
        sys.stdout.write(str(realizability_transform(p)))
        return 0
    try:
        rules = functionalise(p)
    except ExistentialVariablesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(format_rules(rules))
    return 0


def cmd_analyze(args) -> int:
    p = _load(args.file)
    doc: dict = {"program": args.file}
    if args.termination:
        v = analyze_termination(p)
        doc.update(analysis="termination", verdict=v.name)
        lines = [v.name]
        if isinstance(v, Terminating):
            doc["measures"] = list(v.measures)
            lines += [f"  measure: {m}" for m in v.measures] or ["  no recursive calls"]
        elif isinstance(v, Nonterminating):
            w = v.witness
            doc["witness"] = {"pairs": [str(x) for x in w.pairs], "start": str(w.start),
                              "unifier": subst_pairs(w.unifier)}
            lines += [f"  witness: {x}" for x in w.pairs] + [f"  loops from: {w.start}"]
        else:
            doc["reason"] = v.reason
            lines.append(f"  reason: {v.reason}")
    elif args.overlap:
        pairs = check_non_overlapping(p)
        doc.update(analysis="overlap", overlapping=[list(x) for x in pairs])
        lines = ["OVERLAPPING" if pairs else "NON-OVERLAPPING"] + [f"  ({a}, {b})" for a, b in pairs]
    else:
        if not args.query:
            raise UsageError("--productivity needs --query")
        goals = _query(args.query, p)
        vars_ = None
        if args.vars:
            vars_ = [parse_query(f"v({v.strip().rstrip('^')}^)")[0].args[0] for v in args.vars.split(",")]
        v = check_local_productivity(p, goals, vars_, args.depth, SearchLimits(max_nodes=args.max_nodes))
        doc.update(analysis="local-productivity", verdict=v.name, depth=v.depth_checked, text=str(v))
        if isinstance(v, HoldsUpTo):
            doc["witnesses"] = [
                {"level": lvl, "var": str(x), "binding": str(b), "clauses": list(labels)}
                for lvl, x, b, labels in v.witnesses
            ]
        if isinstance(v, FailsAt):
            doc.update(level=v.level, var=str(v.variable), reason=v.reason)
        lines = [str(v)]
    if args.json:
        print(json.dumps(doc))
    else:
        print("\n".join(lines))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hornlp", description="Horn-clause resolution engines and analyses")
    sub = ap.add_subparsers(dest="command", required=True)
    defaults = SearchLimits()

    run = sub.add_parser("run", help="solve a query")
    run.add_argument("file")
    run.add_argument("--query", "-q", required=True)
    run.add_argument("--strategy", "-s", choices=["unif", "tm", "struct", "partial"], default="unif")
    run.add_argument("--search", choices=["dfs", "bfs", "iddfs"], default="iddfs",
                     help="branch exploration order (default: iddfs, which is complete up to the bound)")
    run.add_argument("--max-steps", type=int, default=defaults.max_steps)
    run.add_argument("--max-solutions", type=int, default=defaults.max_solutions)
    run.add_argument("--max-nodes", type=int, default=20_000)
    run.add_argument("--tm-bound", type=int, default=defaults.tm_phase_bound)
    run.add_argument("--all", action="store_true", help="enumerate every answer within the bounds")
    run.add_argument("--json", action="store_true")
    run.add_argument("--trace", action="store_true")
    run.add_argument("--evidence", action="store_true")
    run.set_defaults(func=cmd_run)

    tr = sub.add_parser("transform", help="print a transformed program")
    tr.add_argument("file")
    g = tr.add_mutually_exclusive_group(required=True)
    g.add_argument("--realizability", action="store_true")
    g.add_argument("--functionalise", "--functionalize", action="store_true")
    tr.set_defaults(func=cmd_transform)

    an = sub.add_parser("analyze", help="termination, overlap or local productivity")
    an.add_argument("file")
    g = an.add_mutually_exclusive_group(required=True)
    g.add_argument("--termination", action="store_true")
    g.add_argument("--overlap", action="store_true")
    g.add_argument("--productivity", choices=["local"])
    an.add_argument("--query", "-q")
    an.add_argument("--depth", type=int, default=3)
    an.add_argument("--vars", help="comma-separated labelled variables (default: all)")
    an.add_argument("--max-nodes", type=int, default=defaults.max_nodes)
    an.add_argument("--json", action="store_true")
    an.set_defaults(func=cmd_analyze)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else 0
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
