"""Seeded random programs and queries for the property suites."""
from __future__ import annotations

import random
from dataclasses import dataclass

from .syntax import Atom, Fn, HornClause, Program, Var, free_vars


@dataclass(frozen=True)
class GeneratorConfig:
    max_clauses: int = 4
    max_preds: int = 3
    max_depth: int = 3
    max_body: int = 2
    max_arity: int = 2
    functors: tuple = (("a", 0), ("b", 0), ("f", 1), ("g", 2))
    var_names: tuple = ("X", "Y", "Z")
    # allow variables that occur only in a clause body
    existential: bool = True
    # chance that a term position is a variable rather than a function symbol
    var_rate: float = 0.35


def random_term(rng: random.Random, cfg: GeneratorConfig, depth: int, var_rate: float | None = None):
    rate = cfg.var_rate if var_rate is None else var_rate
    if rng.random() < rate:
        return Var(rng.choice(cfg.var_names))
    pool = cfg.functors if depth > 0 else [f for f in cfg.functors if f[1] == 0]
    name, n = rng.choice(pool)
    return Fn(name, tuple(random_term(rng, cfg, depth - 1, rate) for _ in range(n)))


def _signature(rng: random.Random, cfg: GeneratorConfig) -> list[tuple[str, int]]:
    names = ["p", "q", "r", "s", "t"][: cfg.max_preds]
    k = rng.randint(1, len(names))
    return [(name, rng.randint(1, cfg.max_arity)) for name in names[:k]]


def _atom(rng, cfg, sig, depth, var_rate=None) -> Atom:
    name, n = rng.choice(sig)
    return Atom(name, tuple(random_term(rng, cfg, depth, var_rate) for _ in range(n)))


def _ground_out(t, allowed: set, rng, cfg):
    """Replace variables outside ``allowed`` by allowed ones or constants."""
    if isinstance(t, Var):
        if t in allowed:
            return t
        if allowed and rng.random() < 0.7:
            return rng.choice(sorted(allowed))
        return Fn(rng.choice([f for f, n in cfg.functors if n == 0]))
    if isinstance(t, Fn):
        return Fn(t.functor, tuple(_ground_out(a, allowed, rng, cfg) for a in t.args))
    return Atom(t.pred, tuple(_ground_out(a, allowed, rng, cfg) for a in t.args))


def random_program(rng: random.Random, cfg: GeneratorConfig = GeneratorConfig()) -> Program:
    sig = _signature(rng, cfg)
    clauses = []
    for i in range(1, rng.randint(1, cfg.max_clauses) + 1):
        head = _atom(rng, cfg, sig, cfg.max_depth)
        body = [_atom(rng, cfg, sig, cfg.max_depth) for _ in range(rng.randint(0, cfg.max_body))]
        if not cfg.existential:
            hv = free_vars(head)
            body = [_ground_out(a, hv, rng, cfg) for a in body]
        clauses.append(HornClause(f"k{i}", head, tuple(body)))
    return Program(tuple(clauses))


def random_query(rng: random.Random, p: Program, cfg: GeneratorConfig = GeneratorConfig(),
                 depth: int = 2, var_rate: float | None = None) -> Atom:
    """One atom over a predicate the program mentions."""
    sig = sorted({(a.pred, a.arity) for c in p for a in (c.head, *c.body)})
    return _atom(rng, cfg, sig, depth, var_rate)


def corpus(seed: int, n: int, cfg: GeneratorConfig = GeneratorConfig(), **query_kw) -> list[tuple[Program, Atom]]:
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        p = random_program(rng, cfg)
        out.append((p, random_query(rng, p, cfg, **query_kw)))
    return out
