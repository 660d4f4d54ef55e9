"""Bounded local productivity and the non-overlap condition.

``({A1..An}, V)`` is productive to depth ``m + 1`` when every labelled
variable ``x`` in ``V`` can be driven, by some partial derivation, to a
binding headed by a function symbol, and the goals reached are productive to
depth ``m`` at the labelled variables of that binding.  The existential
search is breadth-first over all labelled goals and clauses and prunes
configurations that are variants of ones already seen.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .resolution import GoalState, SearchLimits, partial_lp_unif_step
from .substitution import EMPTY, apply, labelled_vars, unify
from .syntax import Atom, Fn, Program, Var, rename_clause, term_vars_in_order


@dataclass(frozen=True)
class ProductivityVerdict:
    depth_checked: int

    name = "verdict"


@dataclass(frozen=True)
class HoldsUpTo(ProductivityVerdict):
    # (level, variable, binding, clause labels) for every observation made
    witnesses: tuple = ()
    name = "HOLDS"

    def __str__(self) -> str:
        return f"HoldsUpTo({self.depth_checked})"


@dataclass(frozen=True)
class FailsAt(ProductivityVerdict):
    level: int = 0
    variable: Optional[Var] = None
    reason: str = ""
    name = "FAILS"

    def __str__(self) -> str:
        return f"FailsAt({self.level}, {self.variable}): {self.reason}"


@dataclass(frozen=True)
class Inconclusive(ProductivityVerdict):
    reason: str = ""
    name = "INCONCLUSIVE"

    def __str__(self) -> str:
        return f"Inconclusive: {self.reason}"


def _canonical(x):
    """Rename variables to positions of first occurrence, keeping labels."""
    order = term_vars_in_order(x)
    table = {v: Var(f"V{i}", 0, v.labelled) for i, v in enumerate(order)}
    return apply(table, x)


@dataclass
class _Budget:
    nodes: int

    def spend(self) -> bool:
        self.nodes -= 1
        return self.nodes >= 0


class _Exhausted(Exception):
    pass


def _holds(p, goals, fresh, vars_, m, level, depth, budget, witnesses):
    """True, or (level, var, reason) on refutation; raises _Exhausted on budget."""
    if m == 0:
        return True
    for x in sorted(vars_):
        result = _witness(p, goals, fresh, x, m, level, depth, budget, witnesses)
        if result is not True:
            return result
    return True


def _witness(p, goals, fresh, x, m, level, depth, budget, witnesses):
    root = GoalState(tuple(goals), EMPTY, 0, fresh)
    frontier = deque([(root, ())])
    seen = {_canonical((x, root.goals))}
    deepest = (level, x, "no partial derivation binds it to a function symbol")
    inconclusive = False
    while frontier:
        gs, labels = frontier.popleft()
        if not budget.spend():
            raise _Exhausted()
        if len(labels) >= depth:
            inconclusive = True
            continue
        for i, a in enumerate(gs.goals):
            if not labelled_vars(a):
                continue
            for lab, nxt in partial_lp_unif_step(p, gs, i):
                trail = labels + (lab,)
                b = apply(nxt.state, x)
                if isinstance(b, Fn):
                    sub = _holds(p, nxt.goals, nxt.fresh, labelled_vars(nxt.state), m - 1,
                                 level + 1, depth, budget, witnesses)
                    if sub is True:
                        witnesses.append((level, x, b, trail))
                        return True
                    if sub is not None and sub[0] >= deepest[0]:
                        deepest = sub
                    if sub is None:
                        inconclusive = True
                    continue
                key = _canonical((b, nxt.goals))
                if key in seen:
                    continue
                seen.add(key)
                frontier.append((nxt, trail))
    return None if inconclusive else deepest


def check_local_productivity(
    p: Program,
    goals: Sequence[Atom],
    vars_: Optional[Iterable[Var]] = None,
    m: int = 3,
    limits: SearchLimits = SearchLimits(),
    level_depth: int = 50,
) -> ProductivityVerdict:
    """Decide membership in the depth-``m`` local productivity relation.

    ``vars_`` defaults to every labelled variable of the goals.  Each level's
    existential search takes at most ``level_depth`` steps; the whole check
    expands at most ``limits.max_nodes`` configurations.
    """
    if m < 0:
        raise ValueError("m must be non-negative")
    present = set().union(*(labelled_vars(a) for a in goals)) if goals else set()
    vars_ = present if vars_ is None else {v.labelled_version for v in vars_}
    extra = sorted(vars_ - present)
    if extra:
        return FailsAt(m, 0, extra[0], "not a labelled variable of the query")
    witnesses: list = []
    try:
        res = _holds(p, goals, 0, vars_, m, 1, level_depth, _Budget(limits.max_nodes), witnesses)
    except _Exhausted:
        return Inconclusive(m, f"more than {limits.max_nodes} configurations explored")
    except RecursionError:
        return Inconclusive(m, "nesting too deep")
    if res is True:
        return HoldsUpTo(m, tuple(sorted(witnesses, key=lambda w: w[0])))
    if res is None:
        return Inconclusive(m, f"no witness within {level_depth} steps per level")
    level, var, reason = res
    return FailsAt(m, level, var, reason)


def check_non_overlapping(p: Program) -> list[tuple[str, str]]:
    """Pairs of distinct clauses whose heads, renamed apart, unify."""
    out = []
    cs = list(p)
    for i, c in enumerate(cs):
        hi = rename_clause(c, 1).head
        for d in cs[i + 1:]:
            if unify(hi, rename_clause(d, 2).head) is not None:
                out.append((c.label, d.label))
    return out
