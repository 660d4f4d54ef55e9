"""Program transformations.

``functionalise`` turns each clause ``B :- A1, ..., An`` into a rewrite rule
``B -> k(A1, ..., An)`` over mixed terms (atoms and clause-label
applications).  ``realizability_transform`` adds an evidence argument to
every predicate so that each head records which clause proved it.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

from .evidence import evidence_functor
from .substitution import apply, match
from .syntax import Atom, Fn, HornClause, Program, Var, free_vars


class ExistentialVariablesError(ValueError):
    def __init__(self, labels: list[str]):
        super().__init__("clauses with body-only variables: " + ", ".join(labels))
        self.labels = labels


def check_no_existential_vars(p: Program) -> list[str]:
    """Labels of clauses with a body variable that does not occur in the head."""
    return [c.label for c in p if c.has_existential_vars]


# Functionalisation


@dataclass(frozen=True)
class RewriteRule:
    lhs: Atom
    rhs_label: str
    rhs_args: tuple = ()

    def __str__(self) -> str:
        rhs = self.rhs_label
        if self.rhs_args:
            rhs += "(" + ", ".join(map(str, self.rhs_args)) + ")"
        return f"{self.lhs} -> {rhs}."


@dataclass(frozen=True)
class AxiomApp:
    label: str
    args: tuple = ()

    def __str__(self) -> str:
        if not self.args:
            return self.label
        return f"{self.label}(" + ", ".join(map(str, self.args)) + ")"


MixedTerm = Union[Atom, AxiomApp]


def functionalise(p: Program) -> list[RewriteRule]:
    bad = check_no_existential_vars(p)
    if bad:
        raise ExistentialVariablesError(bad)
    return [RewriteRule(c.head, c.label, c.body) for c in p]


def formula_leaves(q: MixedTerm) -> list[Atom]:
    if isinstance(q, Atom):
        return [q]
    return [a for x in q.args for a in formula_leaves(x)]


def is_atom_free(q: MixedTerm) -> bool:
    return not formula_leaves(q)


def _rewrite_first(rules: Sequence[RewriteRule], q: MixedTerm) -> Optional[tuple[MixedTerm, str]]:
    """Rewrite the leftmost formula position some rule matches."""
    if isinstance(q, Atom):
        for r in rules:
            sigma = match(r.lhs, q)
            if sigma is not None:
                return AxiomApp(r.rhs_label, tuple(apply(sigma, a) for a in r.rhs_args)), r.rhs_label
        return None
    for i, x in enumerate(q.args):
        hit = _rewrite_first(rules, x)
        if hit is not None:
            return AxiomApp(q.label, q.args[:i] + (hit[0],) + q.args[i + 1:]), hit[1]
    return None


def rewrite_normalize(
    rules: Sequence[RewriteRule], q: MixedTerm, max_steps: int, trace: Optional[list] = None
) -> tuple[MixedTerm, bool]:
    """Rewrite formula positions, leftmost first, until none matches.

    Axiom applications are constructors, so every redex is a formula leaf
    and leftmost-innermost amounts to the leftmost rewritable leaf.
    Labels of the rules used are appended to ``trace`` when given.
    """
    if max_steps < 0:
        raise ValueError("max_steps must be non-negative")
    for _ in range(max_steps):
        hit = _rewrite_first(rules, q)
        if hit is None:
            return q, True
        q = hit[0]
        if trace is not None:
            trace.append(hit[1])
    return q, _rewrite_first(rules, q) is None


def to_evidence(q: MixedTerm):
    """An atom-free mixed term read as (ground, first-order) proof evidence."""
    from .syntax import Const, apply_evidence

    if isinstance(q, Atom):
        raise ValueError(f"formula {q} left in mixed term")
    return apply_evidence(Const(q.label), [to_evidence(a) for a in q.args])


def format_rules(rules: Iterable[RewriteRule]) -> str:
    return "".join(f"{r}\n" for r in rules)


# Realizability


def evidence_functor_names(p: Program) -> tuple[dict, list[str]]:
    """Functor used for each clause label, plus a note for every rename.

    The default is ``k_<label>``; a name already used as a program functor
    (or produced for an earlier label) gets a numeric suffix.
    """
    taken = set(p.functors())
    names, notes = {}, []
    for c in p:
        base = evidence_functor(c.label)
        name = base
        for i in itertools.count(1):
            if name not in taken:
                break
            name = f"{base}_{i}"
        if name != base:
            notes.append(f"functor {base} already in use; clause {c.label} records evidence as {name}")
        taken.add(name)
        names[c.label] = name
    return names, notes


def _slot_vars(taken: set, m: int) -> list[Var]:
    names = {v.name for v in taken}
    for base in itertools.chain(["U", "V", "W"], (f"U{k}_" for k in itertools.count())):
        cand = [f"{base}{i}" for i in range(1, m + 1)]
        if not names.intersection(cand):
            return [Var(n) for n in cand]
    raise AssertionError("unreachable")


def _extend(a: Atom, t) -> Atom:
    return Atom(a.pred, a.args + (t,))


def realize_clause(c: HornClause, functor: str) -> HornClause:
    us = _slot_vars(c.variables, len(c.body))
    body = tuple(_extend(b, u) for b, u in zip(c.body, us))
    return HornClause(c.label, _extend(c.head, Fn(functor, tuple(us))), body)


def realizability_transform(p: Program) -> Program:
    """Add an evidence argument to every predicate.

    ``k: B :- A1, ..., Am`` becomes ``k: B[k_k(U1..Um)] :- A1[U1], ..., Am[Um]``.
    """
    if p.assumptions:
        raise ValueError("realizability is defined for Horn clauses only; drop the assumptions first")
    names, _ = evidence_functor_names(p)
    return Program(tuple(realize_clause(c, names[c.label]) for c in p))


def transform_query(a: Atom, taken: Iterable[Var] = ()) -> Atom:
    """Append one fresh unlabelled variable as the evidence slot."""
    return transform_goals([a], taken)[0][0]


def transform_goals(goals: Sequence[Atom], taken: Iterable[Var] = ()) -> tuple[list[Atom], list[Var]]:
    """Extend every goal with its own fresh evidence variable."""
    used = {v.name for v in free_vars(list(goals))} | {v.name for v in taken}
    if len(goals) == 1:
        cands = (f"U{i}" if i else "U" for i in itertools.count())
    else:
        cands = (f"U{i}" for i in itertools.count(1))
    slots = []
    for _ in goals:
        name = next(n for n in cands if n not in used)
        used.add(name)
        slots.append(Var(name))
    return [_extend(a, u) for a, u in zip(goals, slots)], slots
