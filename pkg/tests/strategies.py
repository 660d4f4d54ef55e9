"""Hypothesis strategies for terms and atoms."""
from __future__ import annotations

from hypothesis import strategies as st

from hornlp.syntax import Atom, Fn, Var

CONSTS = ("a", "b", "c")
UNARY = ("f", "h")
BINARY = ("g",)


def variables(names=("X", "Y", "Z", "W"), labelled=st.just(False)):
    return st.builds(lambda n, lab: Var(n, 0, lab), st.sampled_from(names), labelled)


def terms(max_leaves: int = 12, names=("X", "Y", "Z", "W"), labelled=st.just(False)):
    leaves = st.one_of(variables(names, labelled), st.sampled_from(CONSTS).map(Fn))

    def extend(children):
        return st.one_of(
            st.builds(lambda f, a: Fn(f, (a,)), st.sampled_from(UNARY), children),
            st.builds(lambda f, a, b: Fn(f, (a, b)), st.sampled_from(BINARY), children, children),
        )

    return st.recursive(leaves, extend, max_leaves=max_leaves)


def atoms(pred: str = "p", arity: int = 2, **kw):
    return st.lists(terms(**kw), min_size=arity, max_size=arity).map(lambda xs: Atom(pred, tuple(xs)))
