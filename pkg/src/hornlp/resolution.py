"""The four reduction systems over goal lists, and bounded derivation search.

Step functions take a `GoalState` and the index of the selected goal and
return one `Successor` per applicable clause, in program order:

* ``lp_unif_step``          resolution by unification (SLD)
* ``lp_tm_step``            resolution by one-way term matching
* ``subst_step``            unify, instantiate every goal, keep the goal
* ``partial_lp_unif_step``  labelled unification on goals carrying labels

Fresh variables are made by giving a clause the renaming index
``fresh + 1``.  The index is only consumed when a renamed variable survives
into the successor (its goals, or its state for the unifying systems), so a
matching step whose clause variables all get instantiated leaves the
counter alone.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, NamedTuple, Optional, Sequence

from .substitution import (
    EMPTY,
    Substitution,
    apply,
    compose,
    erase_labels,
    label_by_subst,
    labelled_unify,
    labelled_vars,
    match,
    unify,
)
from .syntax import Atom, HornClause, Program, free_vars, rename_clause

KINDS = ("unif", "tm", "subst", "partial")


@dataclass(frozen=True)
class SearchLimits:
    max_steps: int = 1000
    max_solutions: int = 1
    tm_phase_bound: int = 10000
    max_depth_partial: int = 1000
    # total node expansions over the whole search
    max_nodes: int = 200_000
    # non-success outcomes kept in the result list
    max_failures: int = 64

    def __post_init__(self):
        for name in ("max_solutions", "tm_phase_bound", "max_depth_partial", "max_nodes"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.max_steps < 0 or self.max_failures < 0:
            raise ValueError("max_steps and max_failures must be non-negative")


@dataclass(frozen=True)
class GoalState:
    goals: tuple
    state: Substitution = EMPTY
    step_count: int = 0
    fresh: int = 0
    # the step that produced this state; not part of its identity
    last: Optional["DerivationStep"] = field(default=None, compare=False, repr=False)

    @classmethod
    def initial(cls, goals: Iterable[Atom]) -> GoalState:
        return cls(tuple(goals))


@dataclass(frozen=True)
class DerivationStep:
    kind: str
    clause_label: str
    goal_index: int
    unifier: Substitution
    state_after: Substitution
    goals_after: tuple


class Successor(NamedTuple):
    label: str
    state: GoalState

    @property
    def step(self) -> DerivationStep:
        return self.state.last


@dataclass(frozen=True)
class DerivationOutcome:
    trace: tuple
    state: Substitution
    residual: tuple

    kind = "outcome"


@dataclass(frozen=True)
class Success(DerivationOutcome):
    answer: Substitution = EMPTY

    kind = "success"


@dataclass(frozen=True)
class Stuck(DerivationOutcome):
    kind = "stuck"


@dataclass(frozen=True)
class BoundExceeded(DerivationOutcome):
    kind = "bound"


# Steps


def _mentions_index(xs, index: int) -> bool:
    return any(v.index == index for v in free_vars(xs))


def _consumed(idx: int, unifier: Optional[Substitution], new_atoms) -> bool:
    """Does a variable renamed with ``idx`` survive into the successor?

    Such variables can only reach the successor through the instantiated
    body atoms or, for the unifying systems, through the unifier (bound
    clause variables become state keys; others appear in its codomain).
    """
    if _mentions_index(new_atoms, idx):
        return True
    if unifier is None:
        return False
    return any(k.index == idx for k in unifier) or _mentions_index(list(unifier.values()), idx)


@lru_cache(maxsize=8192)
def _renamed(c: HornClause, idx: int) -> HornClause:
    return rename_clause(c, idx)


def _candidates(p: Program, goal: Atom, idx: int):
    """Clauses whose head has the goal's predicate, renamed with ``idx``."""
    for c in p:
        if c.head.pred == goal.pred and c.head.arity == goal.arity:
            yield c, _renamed(c, idx)


def _successor(s: GoalState, kind, label, goal_index, unifier, goals, state, idx, used) -> Successor:
    step = DerivationStep(kind, label, goal_index, unifier, state, goals)
    return Successor(label, GoalState(goals, state, s.step_count + 1, idx if used else s.fresh, step))


def _check_index(s: GoalState, goal_index: int) -> Atom:
    if not 0 <= goal_index < len(s.goals):
        raise IndexError(f"goal index {goal_index} out of range for {len(s.goals)} goals")
    return s.goals[goal_index]


def lp_unif_step(p: Program, s: GoalState, goal_index: int) -> list[Successor]:
    goal = _check_index(s, goal_index)
    idx = s.fresh + 1
    out = []
    for c, r in _candidates(p, goal, idx):
        g = unify(r.head, goal)
        if g is None:
            continue
        body = apply(g, r.body)
        goals = apply(g, s.goals[:goal_index]) + body + apply(g, s.goals[goal_index + 1:])
        state = compose(g, s.state)
        used = _consumed(idx, g, body)
        out.append(_successor(s, "unif", c.label, goal_index, g, goals, state, idx, used))
    return out


def lp_tm_step(p: Program, s: GoalState, goal_index: int) -> list[Successor]:
    goal = _check_index(s, goal_index)
    idx = s.fresh + 1
    out = []
    for c, r in _candidates(p, goal, idx):
        sigma = match(r.head, goal)
        if sigma is None:
            continue
        body = apply(sigma, r.body)
        goals = s.goals[:goal_index] + body + s.goals[goal_index + 1:]
        used = _consumed(idx, None, body)
        out.append(_successor(s, "tm", c.label, goal_index, sigma, goals, s.state, idx, used))
    return out


def subst_step(p: Program, s: GoalState, goal_index: int) -> list[Successor]:
    goal = _check_index(s, goal_index)
    idx = s.fresh + 1
    out = []
    for c, r in _candidates(p, goal, idx):
        g = unify(r.head, goal)
        if g is None:
            continue
        goals = apply(g, s.goals)
        state = compose(g, s.state)
        used = _consumed(idx, g, ())
        out.append(_successor(s, "subst", c.label, goal_index, g, goals, state, idx, used))
    return out


def partial_lp_unif_step(p: Program, s: GoalState, goal_index: int) -> list[Successor]:
    goal = _check_index(s, goal_index)
    if not labelled_vars(goal):
        return []
    idx = s.fresh + 1
    out = []
    for c, r in _candidates(p, goal, idx):
        g = labelled_unify(r.head, goal)
        if g is None:
            continue
        # labels from the codomain reach the new body atoms and, so that one
        # variable never occurs both labelled and unlabelled, the other goals
        body = apply(g, tuple(label_by_subst(g, a) for a in r.body))
        rest = [apply(g, label_by_subst(g, a)) for a in s.goals]
        goals = tuple(rest[:goal_index]) + body + tuple(rest[goal_index + 1:])
        state = compose(g, s.state)
        used = _consumed(idx, g, body)
        out.append(_successor(s, "partial", c.label, goal_index, g, goals, state, idx, used))
    return out


STEP_FUNCTIONS: dict[str, Callable] = {
    "unif": lp_unif_step,
    "tm": lp_tm_step,
    "subst": subst_step,
    "partial": partial_lp_unif_step,
}


def tm_reducible_index(p: Program, s: GoalState) -> Optional[int]:
    """Index of the leftmost goal some clause head matches, if any."""
    for i, goal in enumerate(s.goals):
        for _, r in _candidates(p, goal, s.fresh + 1):
            if match(r.head, goal) is not None:
                return i
    return None


def lp_tm_normalize(
    p: Program, s: GoalState, max_steps: int, trace: Optional[list] = None
) -> tuple[GoalState, bool]:
    """Term-matching steps (leftmost reducible goal, first clause) to a normal form.

    Returns the last state and whether a normal form was reached within
    ``max_steps``.  Steps taken are appended to ``trace`` when given.
    """
    if max_steps < 0:
        raise ValueError("max_steps must be non-negative")
    taken = 0
    while True:
        i = tm_reducible_index(p, s)
        if i is None:
            return s, True
        if taken >= max_steps:
            return s, False
        succ = lp_tm_step(p, s, i)[0]
        if trace is not None:
            trace.append(succ.step)
        s = succ.state
        taken += 1


# Search


@dataclass
class _Node:
    state: GoalState
    step: Optional[DerivationStep]
    parent: Optional["_Node"]
    depth: int
    tm_run: int = 0

    def trace(self) -> tuple:
        out = []
        n = self
        while n is not None and n.step is not None:
            out.append(n.step)
            n = n.parent
        return tuple(reversed(out))


class SearchResult(list):
    """Outcomes in discovery order; ``truncated`` is set when the node budget
    ran out, so branches may be missing rather than cut at the depth bound."""

    truncated: bool = False
    # every derivation of at most this many steps has been explored
    complete_depth: int = 0


# expand(node) returns ("success" | "stuck" | "bound", []) or ("expand", successors)
Expander = Callable[[_Node], tuple]


@dataclass
class _Search:
    limits: SearchLimits
    max_depth: int
    answer: Callable[[GoalState], Substitution]
    residual: Callable[[GoalState], tuple] = lambda gs: gs.goals
    outcomes: SearchResult = field(default_factory=SearchResult)
    successes: int = 0
    failures: int = 0

    def record(self, cls, node: _Node) -> None:
        gs = node.state
        if cls is Success:
            self.outcomes.append(Success(node.trace(), gs.state, self.residual(gs), self.answer(gs)))
            self.successes += 1
        elif self.failures < self.limits.max_failures:
            self.outcomes.append(cls(node.trace(), gs.state, gs.goals))
            self.failures += 1

    def run(self, root: GoalState, expand: Expander, order: str) -> list:
        if order not in ("dfs", "bfs", "iddfs"):
            raise ValueError(f"unknown search order {order!r}")
        if order == "iddfs":
            return self._iddfs(root, expand)
        frontier = deque([_Node(root, None, None, 0)])
        nodes = 0
        self.outcomes.complete_depth = self.max_depth
        while frontier:
            node = frontier.pop() if order == "dfs" else frontier.popleft()
            nodes += 1
            if nodes > self.limits.max_nodes:
                self.record(BoundExceeded, node)
                self.outcomes.truncated = True
                # level order has finished every shallower node; depth-first has no such guarantee
                self.outcomes.complete_depth = node.depth - 1 if order == "bfs" else 0
                break
            if self._visit(node, expand, frontier, order, self.max_depth):
                if frontier:
                    self.outcomes.complete_depth = node.depth - 1 if order == "bfs" else 0
                break
        return self.outcomes

    def _visit(self, node, expand, frontier, order, depth_limit) -> bool:
        status, succs = expand(node)
        if status == "success":
            self.record(Success, node)
            return self.successes >= self.limits.max_solutions
        if status in ("stuck", "bound"):
            self.record(Stuck if status == "stuck" else BoundExceeded, node)
            return False
        if node.depth >= depth_limit:
            self.record(BoundExceeded, node)
            return False
        kids = _children(node, succs)
        frontier.extend(reversed(kids) if order == "dfs" else kids)
        return False

    def _iddfs(self, root, expand) -> list:
        """Depth-limited passes with growing limits; a node is only reported
        in the pass whose limit equals its depth, so nothing repeats."""
        nodes = 0
        self.outcomes.complete_depth = self.max_depth
        for limit in range(0, self.max_depth + 1):
            stack = [_Node(root, None, None, 0)]
            cut = False
            while stack:
                node = stack.pop()
                nodes += 1
                if nodes > self.limits.max_nodes:
                    self.record(BoundExceeded, node)
                    self.outcomes.truncated = True
                    self.outcomes.complete_depth = limit - 1
                    return self.outcomes
                status, succs = expand(node)
                at_limit = node.depth == limit
                if status == "success":
                    if at_limit:
                        self.record(Success, node)
                        if self.successes >= self.limits.max_solutions:
                            self.outcomes.complete_depth = limit - 1
                            return self.outcomes
                elif status != "expand":
                    if at_limit:
                        self.record(Stuck if status == "stuck" else BoundExceeded, node)
                elif at_limit:
                    cut = True
                    if limit == self.max_depth:
                        self.record(BoundExceeded, node)
                else:
                    stack.extend(reversed(_children(node, succs)))
            if not cut:
                break
        return self.outcomes


def _children(node: _Node, succs) -> list:
    return [
        _Node(s.state, s.step, node, node.depth + 1, node.tm_run + 1 if s.step.kind == "tm" else 0)
        for s in succs
    ]


def _query_answer(goals: Sequence[Atom]):
    qvars = sorted(free_vars(list(goals)))

    def answer(gs: GoalState) -> Substitution:
        return Substitution((v, apply(gs.state, v)) for v in qvars)

    return answer


def lp_unif_solve(
    p: Program, goals: Sequence[Atom], limits: SearchLimits = SearchLimits(), order: str = "dfs"
) -> list[DerivationOutcome]:
    """Bounded SLD search: leftmost goal, clauses in program order.

    ``order`` is ``"dfs"`` (backtracking), ``"bfs"`` (level order) or
    ``"iddfs"`` (iterative deepening; answers come shortest first).
    """

    def expand(node):
        gs = node.state
        if not gs.goals:
            return "success", []
        succ = lp_unif_step(p, gs, 0)
        return ("expand", succ) if succ else ("stuck", [])

    search = _Search(limits, limits.max_steps, _query_answer(goals))
    return search.run(GoalState.initial(goals), expand, order)


def lp_tm_solve(
    p: Program, goals: Sequence[Atom], limits: SearchLimits = SearchLimits(), order: str = "dfs"
) -> list[DerivationOutcome]:
    """LP-TM as a search: leftmost reducible goal, one branch per matching clause."""

    def expand(node):
        gs = node.state
        if not gs.goals:
            return "success", []
        i = tm_reducible_index(p, gs)
        if i is None:
            return "stuck", []
        return "expand", lp_tm_step(p, gs, i)

    search = _Search(limits, limits.max_steps, _query_answer(goals))
    return search.run(GoalState.initial(goals), expand, order)


def lp_struct_solve(
    p: Program, goals: Sequence[Atom], limits: SearchLimits = SearchLimits(), order: str = "dfs"
) -> list[DerivationOutcome]:
    """Structural resolution: term matching to normal form, then at most one
    substitutional step on the leftmost goal, repeated.

    Choice points are the clauses of each substitutional step and, for
    overlapping heads, the clauses matching the reduced goal.
    """

    def expand(node):
        gs = node.state
        i = tm_reducible_index(p, gs)
        if i is not None:
            if node.tm_run >= limits.tm_phase_bound:
                return "bound", []
            return "expand", lp_tm_step(p, gs, i)
        if not gs.goals:
            return "success", []
        succ = subst_step(p, gs, 0)
        return ("expand", succ) if succ else ("stuck", [])

    search = _Search(limits, limits.max_steps, _query_answer(goals))
    return search.run(GoalState.initial(goals), expand, order)


def leftmost_labelled_index(s: GoalState) -> Optional[int]:
    for i, a in enumerate(s.goals):
        if labelled_vars(a):
            return i
    return None


def partial_lp_unif_solve(
    p: Program, goals: Sequence[Atom], limits: SearchLimits = SearchLimits(), order: str = "dfs"
) -> list[DerivationOutcome]:
    """Lazy resolution of the goals carrying labelled variables.

    A branch succeeds once no goal carries a label; its answer is the state
    on the query's labelled variables with labels erased, relative to the
    unlabelled goals left over.
    """
    targets = sorted({v for v in free_vars(list(goals)) if v.labelled})

    def answer(gs: GoalState) -> Substitution:
        return Substitution((v.erased, erase_labels(apply(gs.state, v))) for v in targets)

    def expand(node):
        i = leftmost_labelled_index(node.state)
        if i is None:
            return "success", []
        succ = partial_lp_unif_step(p, node.state, i)
        return ("expand", succ) if succ else ("stuck", [])

    search = _Search(limits, limits.max_depth_partial, answer)
    return search.run(GoalState.initial(goals), expand, order)


SOLVERS: dict[str, Callable] = {
    "unif": lp_unif_solve,
    "tm": lp_tm_solve,
    "struct": lp_struct_solve,
    "partial": partial_lp_unif_solve,
}


def solve(strategy: str, p: Program, goals, limits: SearchLimits = SearchLimits(), order: str = "dfs"):
    try:
        solver = SOLVERS[strategy]
    except KeyError:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {sorted(SOLVERS)}") from None
    return solver(p, goals, limits, order)


def replay(p: Program, goals: Sequence[Atom], steps: Iterable[tuple]) -> list[DerivationStep]:
    """Re-run ``(kind, clause_label, goal_index)`` triples from the initial goals."""
    gs = GoalState.initial(goals)
    out = []
    for kind, label, index in steps:
        matches = [s for s in STEP_FUNCTIONS[kind](p, gs, index) if s.label == label]
        if not matches:
            raise ValueError(f"step {len(out) + 1}: clause {label} does not apply ({kind} at goal {index})")
        out.append(matches[0].step)
        gs = matches[0].state
    return out


def final_state(p: Program, goals: Sequence[Atom], trace: Sequence[DerivationStep]) -> GoalState:
    """Goal state reached by replaying ``trace``."""
    gs = GoalState.initial(goals)
    for st in trace:
        gs = next(s.state for s in STEP_FUNCTIONS[st.kind](p, gs, st.goal_index) if s.label == st.clause_label)
    return gs
