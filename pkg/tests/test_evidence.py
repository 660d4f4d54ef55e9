from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hornlp import load_fixture
from hornlp.evidence import (
    FuelExhausted,
    TypedJudgement,
    alpha_equivalent,
    beta_normalize,
    build_evidence,
    build_evidence_all,
    check_outcome,
    evidence_size,
    ground_evidence,
    infer_conclusion,
    is_first_order,
    raw_evidence,
    represent_evidence,
    substitute,
    type_check,
)
from hornlp.generate import GeneratorConfig, random_program, random_query
from hornlp.resolution import BoundExceeded, SearchLimits, Stuck, Success, lp_unif_solve, partial_lp_unif_solve
from hornlp.syntax import App, Const, EVar, Lam, Var, apply_evidence, format_evidence, horn_formula, parse_atom, parse_query


def k(label, *args):
    return apply_evidence(Const(label), args)


def first(outcomes, cls=Success):
    return next(o for o in outcomes if isinstance(o, cls))


def test_normalises_nested_redex():
    e = Lam("a", k("k3", App(Lam("b", k("k2", k("k1", EVar("b")))), EVar("a"))))
    want = Lam("a", k("k3", k("k2", k("k1", EVar("a")))))
    assert beta_normalize(e) == want


def test_substitution_avoids_capture():
    e = Lam("y", App(EVar("x"), EVar("y")))
    out = substitute(e, "x", EVar("y"))
    assert isinstance(out, Lam) and out.param != "y"
    assert alpha_equivalent(out, Lam("z", App(EVar("y"), EVar("z"))))


def test_fuel_runs_out_on_omega():
    w = Lam("x", App(EVar("x"), EVar("x")))
    with pytest.raises(FuelExhausted):
        beta_normalize(App(w, w), fuel=50)


def test_connect_evidence():
    p = load_fixture("connect")
    g = parse_query("connect(X, Y)")
    s = first(lp_unif_solve(p, g, SearchLimits(max_steps=3)))
    j = build_evidence(p, s, g[0])
    assert str(j) == "k1 k2 k3 : => connect(node1, node3)"
    assert type_check(j)
    assert str(represent_evidence(j.evidence)) == "k_k1(k_k2, k_k3)"
    assert alpha_equivalent(beta_normalize(raw_evidence(p, s)), j.evidence)


def test_stuck_evidence_abstracts_the_residual():
    p = load_fixture("stuck")
    g = parse_query("p1(X)")
    o = first(lp_unif_solve(p, g), Stuck)
    j = build_evidence(p, o, g[0])
    assert str(j) == r"\h1. k1 (k2 h1) : p2(k) => p1(k)"
    assert type_check(j)


def test_partial_evidence_per_query_atom():
    p = load_fixture("nthfrom")
    g = parse_query("nth(s(z), Y, Z^), from(s(z), Y)")
    o = first(partial_lp_unif_solve(p, g))
    js = build_evidence_all(p, o, g)
    assert len(js) == 2
    assert all(check_outcome(p, o, g))


def test_bound_exceeded_has_no_evidence():
    p = load_fixture("stream")
    o = lp_unif_solve(p, parse_query("stream(X)"), SearchLimits(max_steps=2))[0]
    assert isinstance(o, BoundExceeded)
    with pytest.raises(ValueError):
        build_evidence(p, o, parse_query("stream(X)")[0])


def test_type_check_rejects_wrong_formulas():
    p = load_fixture("connect")
    e = k("k1", Const("k2"), Const("k3"))
    assert type_check(TypedJudgement(p, e, parse_atom("connect(node1, node3)")))
    bad = type_check(TypedJudgement(p, e, parse_atom("connect(node1, node2)")))
    assert not bad and bad.reason
    assert not type_check(TypedJudgement(p, k("k9"), parse_atom("connect(node1, node2)")))
    assert not type_check(TypedJudgement(p, k("k1", Const("k2")), parse_atom("connect(node1, node3)")))


def test_formula_variables_are_rigid():
    p = load_fixture("overlap")
    # p(k) holds, but not p(X) for an arbitrary X
    assert type_check(TypedJudgement(p, Const("k1"), parse_atom("p(k)")))
    assert not type_check(TypedJudgement(p, Const("k1"), parse_atom("p(X)")))


def test_assumptions_act_as_hypotheses():
    p = load_fixture("stuck")
    p = type(p)(p.clauses, (("h", horn_formula([], parse_atom("p2(k)"))),))
    assert type_check(TypedJudgement(p, k("k1", k("k2", EVar("h"))), parse_atom("p1(k)")))


def test_infer_conclusion():
    p = load_fixture("connect")
    assert infer_conclusion(p, k("k1", Const("k2"), Const("k3"))) == parse_atom("connect(node1, node3)")
    assert infer_conclusion(p, k("k1", Const("k3"), Const("k2"))) is None


def test_ground_evidence_counts():
    trees = ground_evidence(["a", "b"], 3)
    # 2 leaves, 4 applications of size 2, 16 of size 3
    assert len(trees) == 2 + 4 + 16
    assert all(is_first_order(e) for e in trees)
    assert max(evidence_size(e) for e in trees) == 3


def test_representation_needs_first_order_normal_form():
    with pytest.raises(ValueError):
        represent_evidence(Lam("x", EVar("x")))
    assert str(represent_evidence(EVar("h"), env={"h": Var("U")})) == "U"


def test_printing():
    assert format_evidence(Lam("a", k("k3", App(Lam("b", k("k2", k("k1", EVar("b")))), EVar("a"))))) == (
        r"\a. k3 ((\b. k2 (k1 b)) a)"
    )


_cfg = GeneratorConfig()


@settings(max_examples=80, deadline=None)
@given(st.randoms(use_true_random=False))
def test_built_evidence_always_checks(rng):
    p = random_program(rng, _cfg)
    goal = random_query(rng, p, _cfg)
    limits = SearchLimits(max_steps=8, max_solutions=5, max_nodes=500, max_failures=5)
    for o in lp_unif_solve(p, [goal], limits, "bfs"):
        if isinstance(o, BoundExceeded):
            continue
        j = build_evidence(p, o, goal)
        assert type_check(j), (str(j), type_check(j).reason)
        assert alpha_equivalent(beta_normalize(raw_evidence(p, o)), j.evidence)
