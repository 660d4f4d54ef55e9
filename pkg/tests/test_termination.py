from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hornlp import fixture_names, load_fixture
from hornlp.generate import GeneratorConfig, random_program, random_query
from hornlp.resolution import GoalState, lp_tm_normalize
from hornlp.substitution import match
from hornlp.syntax import parse_program, parse_term
from hornlp.termination import (
    Nonterminating,
    Terminating,
    Unknown,
    analyze_termination,
    chain_prefix,
    clause_pairs,
    dependency_graph,
    dependency_pairs,
    is_subterm,
    simulate_witness,
)
from hornlp.transform import functionalise, realizability_transform


@pytest.mark.parametrize(
    "name, verdict",
    [
        ("listp", Nonterminating),
        ("stream", Terminating),
        ("phi1", Nonterminating),
        ("phi2", Terminating),
        ("phi3", Terminating),
        ("constk", Nonterminating),
        ("connect", Nonterminating),
        ("listp_measured", Terminating),
    ],
)
def test_fixture_verdicts(name, verdict):
    assert isinstance(analyze_termination(load_fixture(name)), verdict)


def test_list_witness_is_the_self_pair():
    v = analyze_termination(load_fixture("listp"))
    (pair,) = v.witness.pairs
    assert str(pair) == "p(list(X)) -> p(list(X))"
    assert pair.source_label == "k2"
    rounds = simulate_witness(load_fixture("listp"), v.witness, rounds=3)
    assert all(r.pred == "p" for r in rounds)
    assert chain_prefix(v.witness, 3) is not None


def test_every_transformed_fixture_terminates():
    for name in fixture_names():
        assert isinstance(analyze_termination(realizability_transform(load_fixture(name))), Terminating), name


def test_subterm_relation():
    t = parse_term("f(g(X, a))")
    assert is_subterm(parse_term("X"), t, strict=True)
    assert is_subterm(t, t, strict=False)
    assert not is_subterm(t, t, strict=True)


def test_pairs_from_rules_and_clauses_agree():
    p = load_fixture("stream")
    assert dependency_pairs(functionalise(p)) == clause_pairs(p)


def test_graph_edges_follow_unification():
    p = parse_program("k1: p(f(X)) :- q(X). k2: q(a) :- p(b).")
    pairs = clause_pairs(p)
    g = dependency_graph(pairs)
    assert g.has_edge(0, 1)
    assert not g.has_edge(1, 0)


def test_mutual_recursion_needs_one_measure_for_both():
    p = parse_program("k1: even(s(X)) :- odd(X). k2: odd(s(X)) :- even(X).")
    v = analyze_termination(p)
    assert isinstance(v, Terminating)


def test_undecided_program():
    # swaps arguments: neither a subterm step nor a short loop
    p = parse_program("k1: p(f(X), Y) :- p(Y, X).")
    assert isinstance(analyze_termination(p), Unknown)


def test_existential_loop_is_not_reported_without_a_real_cycle():
    # the pair unifies with itself only by binding the body-only variable
    p = parse_program("k1: p(a) :- p(Y).")
    assert not isinstance(analyze_termination(p), Nonterminating)


_cfg = GeneratorConfig()


@settings(max_examples=150, deadline=None)
@given(st.randoms(use_true_random=False))
def test_verdicts_are_sound_on_random_programs(rng):
    p = random_program(rng, _cfg)
    goal = random_query(rng, p, _cfg)
    v = analyze_termination(p)
    if isinstance(v, Terminating):
        _, done = lp_tm_normalize(p, GoalState.initial([goal]), 5000)
        assert done
    elif isinstance(v, Nonterminating):
        # following the witness clauses keeps returning to an instance of the start
        for end in simulate_witness(p, v.witness, rounds=5):
            assert match(v.witness.start, end) is not None
