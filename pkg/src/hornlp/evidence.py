"""Proof evidence for derivations: construction, normalisation, checking.

Evidence is built from a derivation trace by tracking one hole per goal.
Resolving goal ``i`` with clause ``k`` (m body atoms) fills hole ``i`` with
``k h'1 ... h'm`` for new holes ``h'j``, one per inserted body atom.  Holes
left at the end become lambda parameters ``h1, h2, ...`` in goal order.

The raw mode replays the same trace by composing closed evidence terms
(the cut composition ``\\bs. e b1 .. (k cs) .. bn``) starting from the
identity, which only agrees with the direct form after beta normalisation.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

from .resolution import BoundExceeded, DerivationOutcome
from .substitution import EMPTY, apply, compose, erase_labels, unify
from .syntax import (
    App,
    Atom,
    Const,
    EVar,
    Evidence,
    Fn,
    Formula,
    Lam,
    Program,
    Var,
    apply_evidence,
    format_evidence,
    free_vars,
    horn_formula,
    rename_clause,
    split_horn,
)

RESOLVING = ("unif", "tm", "partial")


@dataclass(frozen=True)
class TypedJudgement:
    context: Program
    evidence: Evidence
    formula: Formula

    def __str__(self) -> str:
        return f"{format_evidence(self.evidence)} : {format_formula(self.formula)}"


def format_formula(f: Formula) -> str:
    qs, body, head = split_horn(f)
    s = ", ".join(map(str, body)) + (" => " if body else "=> ") + str(head)
    if qs:
        s = "forall " + " ".join(map(str, qs)) + ". " + s
    return s


# Construction


def _holes(p: Program, n_goals: int, trace) -> tuple[dict, list]:
    holes = list(range(n_goals))
    fill: dict = {}
    fresh = itertools.count(n_goals)
    for st in trace:
        if st.kind not in RESOLVING:
            continue
        m = len(p.clause(st.clause_label).body)
        new = [next(fresh) for _ in range(m)]
        fill[holes[st.goal_index]] = (st.clause_label, new)
        holes[st.goal_index:st.goal_index + 1] = new
    return fill, holes


def _reachable(fill: dict, root: int) -> set:
    out, todo = set(), [root]
    while todo:
        h = todo.pop()
        out.add(h)
        if h in fill:
            todo.extend(fill[h][1])
    return out


def _check_outcome(outcome: DerivationOutcome) -> None:
    if isinstance(outcome, BoundExceeded):
        raise ValueError("no evidence for a derivation that exceeded its bound")


def build_evidence_all(
    p: Program, outcome: DerivationOutcome, goals: Sequence[Atom]
) -> list[TypedJudgement]:
    """One judgement per query atom, for a successful or stuck derivation."""
    _check_outcome(outcome)
    fill, residual_holes = _holes(p, len(goals), outcome.trace)
    if len(residual_holes) != len(outcome.residual):
        raise ValueError("trace does not belong to this query")
    out = []
    for j, goal in enumerate(goals):
        reach = _reachable(fill, j)
        params = [h for h in residual_holes if h in reach]
        names = {h: f"h{i}" for i, h in enumerate(params, 1)}

        def build(h):
            if h in names:
                return EVar(names[h])
            label, kids = fill[h]
            return apply_evidence(Const(label), [build(k) for k in kids])

        e = build(j)
        for h in reversed(params):
            e = Lam(names[h], e)
        premises = [erase_labels(a) for h, a in zip(residual_holes, outcome.residual) if h in reach]
        head = erase_labels(apply(outcome.state, goal))
        out.append(TypedJudgement(p, e, horn_formula(premises, head)))
    return out


def build_evidence(p: Program, outcome: DerivationOutcome, query: Atom) -> TypedJudgement:
    """Evidence for ``residual => state(query)`` from a single-atom derivation."""
    return build_evidence_all(p, outcome, [query])[0]


def raw_evidence(p: Program, outcome: DerivationOutcome) -> Evidence:
    """Cut-composed (not normalised) evidence for a single-atom derivation."""
    _check_outcome(outcome)
    names = (f"a{i}" for i in itertools.count())
    a = next(names)
    e: Evidence = Lam(a, EVar(a))
    n = 1
    for st in outcome.trace:
        if st.kind not in RESOLVING:
            continue
        m = len(p.clause(st.clause_label).body)
        i = st.goal_index
        bs = [next(names) for _ in range(n - 1)]
        cs = [next(names) for _ in range(m)]
        piece = apply_evidence(Const(st.clause_label), map(EVar, cs))
        args = [EVar(b) for b in bs[:i]] + [piece] + [EVar(b) for b in bs[i:]]
        body = apply_evidence(e, args)
        for x in reversed(bs[:i] + cs + bs[i:]):
            body = Lam(x, body)
        e = body
        n += m - 1
    return e


# Beta reduction


class FuelExhausted(RuntimeError):
    pass


def evidence_vars(e: Evidence) -> set:
    if isinstance(e, EVar):
        return {e.name}
    if isinstance(e, Const):
        return set()
    if isinstance(e, App):
        return evidence_vars(e.fn) | evidence_vars(e.arg)
    return evidence_vars(e.body) - {e.param}


def _all_names(e: Evidence) -> set:
    if isinstance(e, EVar):
        return {e.name}
    if isinstance(e, Const):
        return set()
    if isinstance(e, App):
        return _all_names(e.fn) | _all_names(e.arg)
    return _all_names(e.body) | {e.param}


def substitute(e: Evidence, name: str, value: Evidence) -> Evidence:
    """Capture-avoiding ``[value/name]e``."""
    if isinstance(e, EVar):
        return value if e.name == name else e
    if isinstance(e, Const):
        return e
    if isinstance(e, App):
        return App(substitute(e.fn, name, value), substitute(e.arg, name, value))
    if e.param == name or name not in evidence_vars(e.body):
        return e
    if e.param in evidence_vars(value):
        taken = _all_names(e.body) | _all_names(value) | {name}
        fresh = next(f"{e.param}{i}" for i in itertools.count(1) if f"{e.param}{i}" not in taken)
        return Lam(fresh, substitute(substitute(e.body, e.param, EVar(fresh)), name, value))
    return Lam(e.param, substitute(e.body, name, value))


def _step(e: Evidence) -> Optional[Evidence]:
    """One leftmost-outermost beta step, or None at a normal form."""
    if isinstance(e, App):
        if isinstance(e.fn, Lam):
            return substitute(e.fn.body, e.fn.param, e.arg)
        r = _step(e.fn)
        if r is not None:
            return App(r, e.arg)
        r = _step(e.arg)
        return None if r is None else App(e.fn, r)
    if isinstance(e, Lam):
        r = _step(e.body)
        return None if r is None else Lam(e.param, r)
    return None


def beta_normalize(e: Evidence, fuel: int = 10_000) -> Evidence:
    """Normal form by leftmost-outermost reduction, at most ``fuel`` steps."""
    if fuel < 0:
        raise ValueError("fuel must be non-negative")
    for _ in range(fuel + 1):
        r = _step(e)
        if r is None:
            return e
        e = r
    raise FuelExhausted(f"no normal form within {fuel} beta steps")


def evidence_size(e: Evidence) -> int:
    if isinstance(e, (Const, EVar)):
        return 1
    if isinstance(e, App):
        return evidence_size(e.fn) + evidence_size(e.arg)
    return 1 + evidence_size(e.body)


def alpha_equivalent(e1: Evidence, e2: Evidence) -> bool:
    def db(e, env):
        if isinstance(e, EVar):
            return ("v", env.index(e.name)) if e.name in env else ("f", e.name)
        if isinstance(e, Const):
            return ("c", e.label)
        if isinstance(e, App):
            return ("@", db(e.fn, env), db(e.arg, env))
        return ("\\", db(e.body, [e.param] + env))

    return db(e1, []) == db(e2, [])


def is_first_order(e: Evidence) -> bool:
    if isinstance(e, (Const, EVar)):
        return True
    if isinstance(e, App):
        return is_first_order(e.fn) and is_first_order(e.arg)
    return False


def spine(e: Evidence) -> tuple[Evidence, list]:
    args = []
    while isinstance(e, App):
        args.append(e.arg)
        e = e.fn
    return e, args[::-1]


# Representation as terms


def evidence_functor(label: str) -> str:
    return f"k_{label}"


def represent_evidence(n: Evidence, env: Optional[dict] = None, names: Optional[dict] = None):
    """First-order normal evidence as a term: ``k c1 .. cm`` becomes ``k_k(...)``.

    ``names`` overrides the functor chosen for a clause label.
    """
    env = env or {}
    names = names or {}

    def go(e):
        head, args = spine(e)
        if isinstance(head, Lam) or any(isinstance(a, Lam) for a in args):
            raise ValueError(f"not first-order normal evidence: {format_evidence(n)}")
        if isinstance(head, EVar):
            if args:
                raise ValueError(f"applied evidence variable {head.name}")
            try:
                return env[head.name]
            except KeyError:
                raise ValueError(f"unbound evidence variable {head.name}") from None
        return Fn(names.get(head.label, evidence_functor(head.label)), tuple(go(a) for a in args))

    return go(n)


# Type checking


class CheckResult(NamedTuple):
    ok: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


class _Reject(Exception):
    pass


def _freeze(x, table: dict):
    if isinstance(x, Var):
        return table.get(x, x)
    if isinstance(x, Fn):
        return Fn(x.functor, tuple(_freeze(a, table) for a in x.args)) if x.args else x
    return Atom(x.pred, tuple(_freeze(a, table) for a in x.args))


def _as_term(a):
    return Fn(f"{a.pred}/{a.arity}", a.args) if isinstance(a, Atom) else a


@dataclass
class _Checker:
    program: Program
    ctx: dict
    counter: itertools.count
    eqs: list

    def instance(self, head: Evidence):
        """Body atoms and head of a fresh instance of the formula for ``head``."""
        if isinstance(head, Const):
            try:
                c = self.program.clause(head.label)
            except KeyError:
                raise _Reject(f"unknown constant {head.label}") from None
            r = rename_clause(c, next(self.counter))
            return list(r.body), r.head, head.label
        if isinstance(head, EVar):
            if head.name in self.ctx:
                return [], self.ctx[head.name], head.name
            for name, f in self.program.assumptions:
                if name == head.name:
                    qs, body, concl = split_horn(f)
                    k = next(self.counter)
                    ren = {v: Var(v.name, k, v.labelled) for v in qs}
                    frozen = {v: Fn(f"{v}'") for v in free_vars(f)}
                    table = {**frozen, **ren}
                    return [_freeze(b, table) for b in body], _freeze(concl, table), name
            raise _Reject(f"unbound evidence variable {head.name}")
        raise _Reject("abstraction where an atomic formula is expected")

    def gen(self, e: Evidence, target: Atom, leftover: Optional[list] = None) -> None:
        head, args = spine(e)
        body, concl, name = self.instance(head)
        if len(args) > len(body):
            raise _Reject(f"{name} takes {len(body)} arguments, given {len(args)}")
        missing = body[len(args):]
        if leftover is None and missing:
            raise _Reject(f"{name} takes {len(body)} arguments, given {len(args)}")
        if leftover is not None:
            if len(missing) != len(leftover):
                raise _Reject(f"{name} leaves {len(missing)} premises, formula has {len(leftover)}")
            self.eqs.extend((name, m, l) for m, l in zip(missing, leftover))
        self.eqs.append((name, concl, target))
        for a, b in zip(args, body):
            if isinstance(a, Lam):
                raise _Reject("abstraction where an atomic formula is expected")
            self.gen(a, b)

    def solve(self):
        s = EMPTY
        for name, lhs, rhs in self.eqs:
            u = unify(_as_term(apply(s, lhs)), _as_term(apply(s, rhs)))
            if u is None:
                raise _Reject(f"{name}: {apply(s, lhs)} does not match {apply(s, rhs)}")
            s = compose(u, s)
        return s


def type_check(j: TypedJudgement, fuel: int = 10_000) -> CheckResult:
    """Check ``context |- evidence : formula`` for Horn-shaped formulas.

    Free and quantified variables of the formula are treated as constants;
    each use of a clause gets its own instance.  Redexes are normalised
    first.
    """
    try:
        e = beta_normalize(j.evidence, fuel)
        qs, premises, concl = split_horn(j.formula)
    except (FuelExhausted, ValueError) as exc:
        return CheckResult(False, str(exc))
    table = {v: Fn(f"{v}'") for v in free_vars([*premises, concl]) | set(qs)}
    premises = [_freeze(a, table) for a in premises]
    concl = _freeze(concl, table)
    ctx = {}
    while isinstance(e, Lam):
        if not premises:
            return CheckResult(False, "more abstractions than premises")
        ctx[e.param] = premises.pop(0)
        e = e.body
    checker = _Checker(j.context, ctx, itertools.count(1), [])
    try:
        checker.gen(e, concl, leftover=premises)
        checker.solve()
    except _Reject as exc:
        return CheckResult(False, str(exc))
    return CheckResult(True)


def infer_conclusion(p: Program, e: Evidence) -> Optional[Atom]:
    """Most general atom ``A`` with ``p |- e : => A``, or None."""
    target = Var("Goal'", 0)
    checker = _Checker(p, {}, itertools.count(1), [])
    try:
        e = beta_normalize(e)
        checker.gen(e, target, leftover=[])
        s = checker.solve()
    except (_Reject, FuelExhausted):
        return None
    t = apply(s, target)
    if not isinstance(t, Fn) or "/" not in t.functor:
        return None
    pred = t.functor.rsplit("/", 1)[0]
    return Atom(pred, t.args)


def ground_evidence(labels: Sequence[str], max_size: int) -> list[Evidence]:
    """Every application tree over ``labels`` with at most ``max_size`` constants."""
    by_size: dict[int, list] = {1: [Const(l) for l in labels]}
    for n in range(2, max_size + 1):
        by_size[n] = [App(f, a) for k in range(1, n) for f in by_size[k] for a in by_size[n - k]]
    return [e for n in range(1, max_size + 1) for e in by_size[n]]


def check_outcome(p: Program, outcome: DerivationOutcome, goals: Sequence[Atom]) -> list[CheckResult]:
    """Build and check the evidence of every query atom of an outcome."""
    return [type_check(j) for j in build_evidence_all(p, outcome, goals)]
