from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hornlp import load_fixture
from hornlp.generate import GeneratorConfig, random_program, random_query
from hornlp.resolution import (
    BoundExceeded,
    GoalState,
    SearchLimits,
    Stuck,
    Success,
    final_state,
    lp_struct_solve,
    lp_tm_normalize,
    lp_tm_solve,
    lp_tm_step,
    lp_unif_solve,
    lp_unif_step,
    partial_lp_unif_solve,
    replay,
    solve,
    subst_step,
    tm_reducible_index,
)
from hornlp.substitution import apply
from hornlp.syntax import Var, parse_program, parse_query, parse_term


def q(s):
    return parse_query(s)


def successes(outcomes):
    return [o for o in outcomes if isinstance(o, Success)]


def test_unif_step_renames_with_the_step_number():
    p = load_fixture("connect")
    (first, *_) = lp_unif_step(p, GoalState.initial(q("connect(X, Y)")), 0)
    assert first.label == "k1"
    assert str(first.step.unifier) == "[X/X_1, Y/Z_1]"
    assert [str(a) for a in first.state.goals] == ["connect(X, Y_1)", "connect(Y_1, Y)"]
    assert first.state.fresh == 1


def test_connect_states():
    p = load_fixture("connect")
    (s,) = successes(lp_unif_solve(p, q("connect(X, Y)"), SearchLimits(max_steps=3)))
    assert [st.clause_label for st in s.trace] == ["k1", "k2", "k3"]
    assert [str(st.state_after) for st in s.trace] == [
        "[X/X_1, Y/Z_1]",
        "[node1/X, node2/Y_1, node1/X_1, Y/Z_1]",
        "[node3/Y, node1/X, node2/Y_1, node1/X_1, node3/Z_1]",
    ]
    assert str(s.answer) == "[node1/X, node3/Y]"


def test_tm_step_never_instantiates_the_goal():
    p = load_fixture("connect")
    gs = GoalState.initial(q("connect(node1, Y)"))
    for succ in lp_tm_step(p, gs, 0):
        assert succ.step.unifier == {} or all(k.index > 0 for k in succ.step.unifier)
        assert succ.state.state == {}


def test_tm_normal_form_for_a_variable_goal():
    p = load_fixture("stream")
    gs, done = lp_tm_normalize(p, GoalState.initial(q("stream(X)")), 100)
    assert done and gs.step_count == 0
    assert tm_reducible_index(p, gs) is None


def test_tm_normalize_reports_the_bound():
    p = load_fixture("connect")
    trace: list = []
    gs, done = lp_tm_normalize(p, GoalState.initial(q("connect(X, Y)")), 10, trace)
    assert not done
    assert len(trace) == 10


def test_subst_step_keeps_the_goal():
    p = load_fixture("stream")
    (succ,) = subst_step(p, GoalState.initial(q("stream(X)")), 0)
    assert [str(a) for a in succ.state.goals] == ["stream(cons(0, Y_1))"]
    assert succ.step.kind == "subst"


def test_struct_stream_alternates():
    p = load_fixture("stream")
    (o,) = lp_struct_solve(p, q("stream(X)"), SearchLimits(max_steps=6))
    assert isinstance(o, BoundExceeded)
    assert [st.kind for st in o.trace] == ["subst", "tm"] * 3
    assert str(o.trace[-1].state_after) == (
        "[cons(0, Y_3)/Y_2, cons(0, cons(0, Y_3))/Y_1, cons(0, cons(0, cons(0, Y_3)))/X]"
    )


def test_overlap_divergence():
    p = load_fixture("overlap")
    (u,) = successes(lp_unif_solve(p, q("p(X)")))
    assert str(u.answer) == "[k/X]"
    outcomes = lp_struct_solve(p, q("p(X)"), SearchLimits(max_solutions=10))
    assert len(outcomes) == 1
    assert isinstance(outcomes[0], Stuck)
    assert [str(a) for a in outcomes[0].residual] == ["q(X)"]


def test_stuck_outcome_keeps_state():
    p = load_fixture("stuck")
    (o,) = lp_unif_solve(p, q("p1(X)"))
    assert isinstance(o, Stuck)
    assert [str(a) for a in o.residual] == ["p2(k)"]
    assert str(o.state) == "[k/X]"


def test_partial_nth_from():
    p = load_fixture("nthfrom")
    (o,) = successes(partial_lp_unif_solve(p, q("nth(s(z), Y, Z^), from(s(z), Y)")))
    assert str(o.answer) == "[s(s(z))/Z]"
    assert [str(a) for a in o.residual] == ["from(s(s(s(z))), Y_4)"]
    assert all(st.kind == "partial" for st in o.trace)


def test_partial_ignores_unlabelled_goals():
    p = load_fixture("nthfrom_false")
    (o,) = successes(partial_lp_unif_solve(p, q("nth(s(z), Y, Z^), from(s(z), Y)")))
    assert str(o.answer) == "[s(s(z))/Z]"
    assert "false(a)" in [str(a) for a in o.residual]


def test_partial_fib():
    p = load_fixture("fib")
    (o,) = successes(partial_lp_unif_solve(p, q("take(s(s(s(z))), Y, Z^), fib(a, b, Y)")))
    assert o.answer[Var("Z")] == parse_term("cons(a, cons(b, cons(app(a, b), nil)))")


@pytest.mark.parametrize("order", ["dfs", "bfs", "iddfs"])
def test_search_orders_agree_on_finite_trees(order):
    p = parse_program("k1: e(a, b). k2: e(b, c). k3: path(X, Y) :- e(X, Y). k4: path(X, Z) :- e(X, Y), path(Y, Z).")
    out = lp_unif_solve(p, q("path(a, W)"), SearchLimits(max_solutions=10), order)
    assert sorted(str(o.answer) for o in successes(out)) == ["[b/W]", "[c/W]"]


def test_iddfs_returns_shortest_answers_first():
    p = load_fixture("connect")
    limits = SearchLimits(max_steps=30, max_nodes=5000)
    (d,) = successes(lp_unif_solve(p, q("connect(node1, Y)"), limits, "dfs"))
    (i,) = successes(lp_unif_solve(p, q("connect(node1, Y)"), limits, "iddfs"))
    assert len(i.trace) == 1 < len(d.trace)
    assert str(i.answer) == "[node2/Y]"


def test_iddfs_reports_each_node_once():
    p = parse_program("k1: n(z). k2: n(s(X)) :- n(X).")
    out = lp_unif_solve(p, q("n(Y)"), SearchLimits(max_steps=4, max_solutions=100), "iddfs")
    assert [len(o.trace) for o in successes(out)] == [1, 2, 3, 4]


def test_bfs_complete_depth_after_truncation():
    p = load_fixture("connect")
    out = lp_unif_solve(p, q("connect(X, Y)"), SearchLimits(max_steps=50, max_solutions=10**6, max_nodes=300), "bfs")
    assert out.truncated
    assert 0 < out.complete_depth < 50
    untruncated = lp_unif_solve(p, q("connect(X, Y)"), SearchLimits(max_steps=out.complete_depth,
                                                                    max_solutions=10**6), "bfs")
    assert {str(o.answer) for o in successes(untruncated)} == {str(o.answer) for o in successes(out)
                                                              if len(o.trace) <= out.complete_depth}


def test_tm_solve_branches_over_matching_clauses():
    p = parse_program("k1: p(X) :- q(X). k2: p(a). k3: q(a).")
    out = lp_tm_solve(p, q("p(a)"), SearchLimits(max_solutions=5))
    assert sorted("".join(st.clause_label for st in o.trace) for o in successes(out)) == ["k1k3", "k2"]


def test_limits_are_validated():
    with pytest.raises(ValueError):
        SearchLimits(max_nodes=0)
    with pytest.raises(ValueError):
        solve("nope", load_fixture("stream"), q("stream(X)"))
    with pytest.raises(ValueError):
        lp_unif_solve(load_fixture("stream"), q("stream(X)"), order="random")


def test_replay_reproduces_the_trace():
    p = load_fixture("connect")
    (s,) = successes(lp_unif_solve(p, q("connect(X, Y)"), SearchLimits(max_steps=3)))
    again = replay(p, q("connect(X, Y)"), [(st.kind, st.clause_label, st.goal_index) for st in s.trace])
    assert list(again) == list(s.trace)
    assert final_state(p, q("connect(X, Y)"), s.trace).goals == ()


def test_replay_rejects_inapplicable_steps():
    with pytest.raises(ValueError, match="does not apply"):
        replay(load_fixture("connect"), q("connect(node1, Y)"), [("unif", "k3", 0)])


_cfg = GeneratorConfig()


@settings(max_examples=60, deadline=None)
@given(st.randoms(use_true_random=False))
def test_answers_are_instances_of_the_query(rng):
    p = random_program(rng, _cfg)
    goal = random_query(rng, p, _cfg)
    limits = SearchLimits(max_steps=12, max_solutions=20, max_nodes=2000)
    for o in successes(lp_unif_solve(p, [goal], limits, "bfs")):
        inst = apply(o.answer, goal)
        assert apply(o.state, goal) == inst
        # each step's state extends the previous one
        for a, b in zip(o.trace, o.trace[1:]):
            assert apply(b.state_after, apply(a.state_after, goal)) == apply(b.state_after, goal)


@settings(max_examples=60, deadline=None)
@given(st.randoms(use_true_random=False))
def test_tm_steps_only_match(rng):
    p = random_program(rng, _cfg)
    goal = random_query(rng, p, _cfg)
    gs = GoalState.initial([goal])
    for _ in range(6):
        i = tm_reducible_index(p, gs)
        if i is None:
            break
        succ = lp_tm_step(p, gs, i)[0]
        assert not set(succ.step.unifier) & {v for v in succ.step.unifier if v.index == 0}
        gs = succ.state
