"""Substitutions, unification (plain and labelled) and one-way matching.

Substitution keys are label-sensitive: ``x`` and ``x^`` are distinct keys.
Bindings keep insertion order so printed states list the newest bindings
first, the way derivation states are usually displayed.
"""
from __future__ import annotations

from collections.abc import Mapping
from typing import Iterable, Optional

from .syntax import Atom, Fn, Var, free_vars


class Substitution(Mapping):
    """Finite map from variables to terms; identity bindings are dropped."""

    __slots__ = ("_map",)

    def __init__(self, bindings=()):
        items = bindings.items() if isinstance(bindings, Mapping) else bindings
        self._map = {k: v for k, v in items if k != v}

    def __getitem__(self, key):
        return self._map[key]

    def __iter__(self):
        return iter(self._map)

    def __len__(self):
        return len(self._map)

    def __hash__(self):
        return hash(frozenset(self._map.items()))

    def __repr__(self):
        return f"Substitution({self._map!r})"

    def __str__(self):
        return "[" + ", ".join(f"{v}/{k}" for k, v in self._map.items()) + "]"

    def apply(self, x):
        return apply(self, x)

    def restrict(self, keys: Iterable[Var]) -> Substitution:
        keys = set(keys)
        return Substitution((k, v) for k, v in self._map.items() if k in keys)

    def codomain_vars(self) -> set:
        return free_vars(list(self._map.values()))

    def is_idempotent(self) -> bool:
        return not (set(self._map) & self.codomain_vars())


EMPTY = Substitution()


def apply(s: Mapping, x):
    """Simultaneous replacement of bound variables in a term, atom or list of atoms."""
    if not s:
        return x
    m = s._map if isinstance(s, Substitution) else s
    return _apply(m, x)


def _apply(m: dict, x, memo=None):
    # unchanged subterms are returned as the same object, and ``memo`` maps
    # compound terms already rebuilt in this call to their images; states
    # share subterms heavily, so both keep composition from copying chains
    t = type(x)
    if t is Var:
        return m.get(x, x)
    if t is Fn:
        if not x.args or m.keys().isdisjoint(x.vars):
            return x
        if memo is None:
            memo = {}
        else:
            hit = memo.get(x)
            if hit is not None:
                return hit
        args = tuple([_apply(m, a, memo) for a in x.args])
        y = x if _same(args, x.args) else Fn(x.functor, args)
        memo[x] = y
        return y
    if t is Atom:
        if m.keys().isdisjoint(x.vars):
            return x
        if memo is None:
            memo = {}
        args = tuple([_apply(m, a, memo) for a in x.args])
        return x if _same(args, x.args) else Atom(x.pred, args)
    if t is tuple or t is list:
        if memo is None:
            memo = {}
        out = [_apply(m, a, memo) for a in x]
        return tuple(out) if t is tuple else out
    raise TypeError(f"cannot apply a substitution to {t.__name__}")


def _same(xs: tuple, ys: tuple) -> bool:
    for a, b in zip(xs, ys):
        if a is not b:
            return False
    return True


def compose(new: Mapping, old: Mapping) -> Substitution:
    """The substitution ``r`` with ``r(t) == new(old(t))`` for every ``t``."""
    nm = new._map if isinstance(new, Substitution) else dict(new)
    om = old._map if isinstance(old, Substitution) else dict(old)
    # new bindings first, then the old ones with ``new`` applied
    out = {k: v for k, v in nm.items() if k not in om}
    memo: dict = {}
    keys = nm.keys()
    for k, v in om.items():
        if type(v) is Var:
            out[k] = nm.get(v, v)
        elif keys.isdisjoint(v.vars):
            out[k] = v
        else:
            out[k] = _apply(nm, v, memo)
    return Substitution(out)


# Unification


def _pick(a: Var, b: Var, labelled_mode: bool) -> tuple[Var, Var]:
    """Choose which of two distinct variables gets bound: (bound, kept).

    A labelled variable is eliminated in favour of an unlabelled one.
    User (index 0) variables are kept over renamed ones; between two
    renamed variables the older (smaller index) one is bound.
    """
    if labelled_mode and a.labelled != b.labelled:
        return (a, b) if a.labelled else (b, a)
    if (a.index == 0) != (b.index == 0):
        return (b, a) if a.index == 0 else (a, b)
    if a.index != b.index:
        return (a, b) if a.index < b.index else (b, a)
    if a.name != b.name:
        return (a, b) if a.name > b.name else (b, a)
    return (a, b) if a.labelled else (b, a)


def _occurs(v: Var, t, erased: bool) -> bool:
    if isinstance(t, Var):
        return t.erased == v.erased if erased else t == v
    if not erased:
        return v in t.vars
    return v.erased in {x.erased for x in t.vars}


def _relabel(x, names: set):
    """Label every variable of ``x`` whose erased form is in ``names``."""
    if isinstance(x, Var):
        return x.labelled_version if x.erased in names else x
    if isinstance(x, Fn):
        return Fn(x.functor, tuple(_relabel(a, names) for a in x.args)) if x.args else x
    if isinstance(x, Atom):
        return Atom(x.pred, tuple(_relabel(a, names) for a in x.args))
    return type(x)(_relabel(a, names) for a in x)


def _all_labelled(t):
    return _relabel(t, {v.erased for v in free_vars(t)})


def _solve(eqs: list, labelled_mode: bool) -> Optional[Substitution]:
    """Run the rule system leftmost-equation-first to a solved form or failure."""
    eqs = list(eqs)
    solved: dict = {}
    while eqs:
        s, t = eqs.pop(0)
        if s == t:
            continue
        if isinstance(s, Fn) and isinstance(t, Fn):
            if s.functor != t.functor or len(s.args) != len(t.args):
                return None
            eqs[:0] = list(zip(s.args, t.args))
            continue
        if isinstance(s, Fn):
            s, t = t, s
        if isinstance(t, Var):
            if labelled_mode and s.erased == t.erased:
                # x^ = x: the binding is trivial, only the label spreads
                names = {s.erased}
                eqs = [(_relabel(a, names), _relabel(b, names)) for a, b in eqs]
                solved = {k: _relabel(v, names) for k, v in solved.items()}
                continue
            s, t = _pick(s, t, labelled_mode)
        elif _occurs(s, t, erased=labelled_mode):
            return None
        if labelled_mode and s.labelled:
            names = {v.erased for v in free_vars(t)}
            t = _all_labelled(t)
            eqs = [(_relabel(a, names), _relabel(b, names)) for a, b in eqs]
            solved = {k: _relabel(v, names) for k, v in solved.items()}
        sub = {s: t}
        eqs = [(apply(sub, a), apply(sub, b)) for a, b in eqs]
        solved = {k: apply(sub, v) for k, v in solved.items()}
        solved[s] = t
    return Substitution(solved)


def _equations(t1, t2) -> Optional[list]:
    if isinstance(t1, Atom) or isinstance(t2, Atom):
        if not (isinstance(t1, Atom) and isinstance(t2, Atom)):
            return None
        if t1.pred != t2.pred or t1.arity != t2.arity:
            return None
        return list(zip(t1.args, t2.args))
    return [(t1, t2)]


def unify(t1, t2) -> Optional[Substitution]:
    """Most general unifier of two terms or atoms, or None."""
    eqs = _equations(t1, t2)
    return None if eqs is None else _solve(eqs, labelled_mode=False)


def labelled_unify(t1, t2) -> Optional[Substitution]:
    """Unifier that propagates labels: binding ``x^`` to ``t`` records ``t^``.

    A variable labelled at one occurrence is treated as labelled at all of
    them, so ``x`` and ``x^`` can never receive different bindings.
    """
    names = {v.erased for v in free_vars([t1, t2]) if v.labelled}
    if names:
        t1, t2 = _relabel(t1, names), _relabel(t2, names)
    eqs = _equations(t1, t2)
    return None if eqs is None else _solve(eqs, labelled_mode=True)


def match(pattern, target) -> Optional[Substitution]:
    """``s`` with ``apply(s, pattern) == target``; ``target`` is never instantiated."""
    eqs = _equations(pattern, target)
    if eqs is None:
        return None
    out: dict = {}
    while eqs:
        p, t = eqs.pop()
        if isinstance(p, Var):
            bound = out.get(p)
            if bound is None:
                out[p] = t
            elif bound != t:
                return None
        elif isinstance(t, Fn) and p.functor == t.functor and len(p.args) == len(t.args):
            eqs.extend(zip(p.args, t.args))
        else:
            return None
    return Substitution(out)


# Labels


def erase_labels(x):
    """Clear every label in a term, atom, list of atoms or substitution."""
    if isinstance(x, Var):
        return x.erased
    if isinstance(x, Fn):
        return Fn(x.functor, tuple(erase_labels(a) for a in x.args)) if x.args else x
    if isinstance(x, Atom):
        return Atom(x.pred, tuple(erase_labels(a) for a in x.args))
    if isinstance(x, Substitution):
        return Substitution((k.erased, erase_labels(v)) for k, v in x.items())
    if isinstance(x, tuple):
        return tuple(erase_labels(a) for a in x)
    if isinstance(x, list):
        return [erase_labels(a) for a in x]
    raise TypeError(f"cannot erase labels of {type(x).__name__}")


def label_by_term(t, e):
    """Label the variables of ``e`` that occur (labelled or not) in ``t``."""
    names = {v.erased for v in free_vars(t)}
    if isinstance(e, list) and e and isinstance(e[0], tuple):
        return [(_relabel(a, names), _relabel(b, names)) for a, b in e]
    return _relabel(e, names)


def label_by_subst(g: Substitution, a):
    """Label the variables of ``a`` that occur labelled in the codomain of ``g``."""
    names = {v.erased for v in g.codomain_vars() if v.labelled}
    return _relabel(a, names) if names else a


def labelled_vars(x) -> set:
    """Labelled variables of an atom/term, or of the codomain of a substitution."""
    if isinstance(x, Substitution):
        return {v for v in x.codomain_vars() if v.labelled}
    return {v for v in free_vars(x) if v.labelled}
