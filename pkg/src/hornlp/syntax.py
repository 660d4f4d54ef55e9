"""Terms, atoms, Horn clauses, proof evidence and the `.hc` surface syntax.

Variables carry a base name, a renaming index (0 for variables written by
the user, ``i`` after renaming at derivation step ``i``) and a label flag.
Constants are 0-ary compounds.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union


@dataclass(frozen=True, order=True)
class Var:
    name: str
    index: int = 0
    labelled: bool = False

    def __post_init__(self):
        # terms are hashed constantly during search; compute once
        object.__setattr__(self, "_hash", hash((self.name, self.index, self.labelled)))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if type(other) is not Var:
            return NotImplemented
        return self.index == other.index and self.labelled == other.labelled and self.name == other.name

    @property
    def erased(self) -> Var:
        return Var(self.name, self.index) if self.labelled else self

    @property
    def labelled_version(self) -> Var:
        return self if self.labelled else Var(self.name, self.index, True)

    def __str__(self) -> str:
        s = self.name if not self.index else f"{self.name}_{self.index}"
        return s + "^" if self.labelled else s


@dataclass(frozen=True)
class Fn:
    functor: str
    args: tuple = ()

    def __post_init__(self):
        if not self.functor:
            raise ValueError("functor names must be nonempty")
        object.__setattr__(self, "_hash", hash((self.functor, self.args)))
        object.__setattr__(self, "vars", _arg_vars(self.args))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if type(other) is not Fn:
            return NotImplemented
        return self._hash == other._hash and _same_shape(self, other)

    def __str__(self) -> str:
        if not self.args:
            return self.functor
        return f"{self.functor}({', '.join(map(str, self.args))})"


Term = Union[Var, Fn]


def _same_shape(a, b) -> bool:
    """Structural equality that visits each pair of shared subterms once.

    Answers can be exponentially large trees stored as small graphs, so a
    plain recursive comparison is not an option.
    """
    seen = set()
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        if x is y:
            continue
        tx = type(x)
        if tx is not type(y) or x._hash != y._hash:
            return False
        if tx is Var:
            if x != y:
                return False
            continue
        key = (id(x), id(y))
        if key in seen:
            continue
        seen.add(key)
        if (x.functor if tx is Fn else x.pred) != (y.functor if tx is Fn else y.pred) or len(x.args) != len(y.args):
            return False
        stack.extend(zip(x.args, y.args))
    return True

_NO_VARS: frozenset = frozenset()


def _arg_vars(args: tuple) -> frozenset:
    """Variables of a compound's arguments, shared with a child where possible."""
    out = _NO_VARS
    for a in args:
        vs = (a,) if type(a) is Var else a.vars
        if not vs or vs is out:
            continue
        if not out:
            out = vs if type(vs) is frozenset else frozenset(vs)
        elif not out.issuperset(vs):
            out = out.union(vs)
    return out


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((self.pred, self.args)))
        object.__setattr__(self, "vars", _arg_vars(self.args))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if type(other) is not Atom:
            return NotImplemented
        return self._hash == other._hash and _same_shape(self, other)

    def __str__(self) -> str:
        if not self.args:
            return self.pred
        return f"{self.pred}({', '.join(map(str, self.args))})"

    @property
    def arity(self) -> int:
        return len(self.args)


# Formulas: an Atom is an atomic formula.
@dataclass(frozen=True)
class Implies:
    antecedent: "Formula"
    consequent: "Formula"

    def __str__(self) -> str:
        return f"({self.antecedent} => {self.consequent})"


@dataclass(frozen=True)
class Forall:
    var: Var
    body: "Formula"

    def __str__(self) -> str:
        return f"forall {self.var}. {self.body}"


Formula = Union[Atom, Implies, Forall]


def horn_formula(body: Iterable[Atom], head: Atom, quantify: bool = False) -> Formula:
    """Build ``A1 => ... => An => B``, optionally closed by a forall prefix."""
    f: Formula = head
    for a in reversed(list(body)):
        f = Implies(a, f)
    if quantify:
        for v in sorted(free_vars(f), reverse=True):
            f = Forall(v, f)
    return f


def split_horn(f: Formula) -> tuple[list[Var], list[Atom], Atom]:
    """Inverse of `horn_formula`: quantifier prefix, antecedents, head."""
    qs = []
    while isinstance(f, Forall):
        qs.append(f.var)
        f = f.body
    body = []
    while isinstance(f, Implies):
        if not isinstance(f.antecedent, Atom):
            raise ValueError(f"not a Horn formula: antecedent {f.antecedent}")
        body.append(f.antecedent)
        f = f.consequent
    if not isinstance(f, Atom):
        raise ValueError(f"not a Horn formula: {f}")
    return qs, body, f


@dataclass(frozen=True)
class HornClause:
    label: str
    head: Atom
    body: tuple = ()

    @property
    def variables(self) -> set:
        return free_vars([self.head, *self.body])

    @property
    def existential_vars(self) -> set:
        return free_vars(list(self.body)) - free_vars(self.head)

    @property
    def has_existential_vars(self) -> bool:
        return bool(self.existential_vars)

    def formula(self) -> Formula:
        return horn_formula(self.body, self.head, quantify=True)

    def __str__(self) -> str:
        return format_clause(self)


@dataclass(frozen=True)
class Program:
    clauses: tuple = ()
    # (evidence variable, Formula) pairs usable by the Var typing rule
    assumptions: tuple = ()

    def __post_init__(self):
        labels = [c.label for c in self.clauses]
        dup = {l for l in labels if labels.count(l) > 1}
        if dup:
            raise ValueError(f"duplicate clause labels: {sorted(dup)}")

    def __iter__(self) -> Iterator[HornClause]:
        return iter(self.clauses)

    def __len__(self) -> int:
        return len(self.clauses)

    def clause(self, label: str) -> HornClause:
        for c in self.clauses:
            if c.label == label:
                return c
        raise KeyError(label)

    def labels(self) -> list[str]:
        return [c.label for c in self.clauses]

    def functors(self) -> set[str]:
        out: set[str] = set()
        for c in self.clauses:
            for a in (c.head, *c.body):
                for t in a.args:
                    _collect_functors(t, out)
        return out

    def __str__(self) -> str:
        return format_program(self)


def _collect_functors(t: Term, out: set) -> None:
    if isinstance(t, Fn):
        out.add(t.functor)
        for a in t.args:
            _collect_functors(a, out)


# Proof evidence
@dataclass(frozen=True)
class Const:
    label: str

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True)
class EVar:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class App:
    fn: "Evidence"
    arg: "Evidence"

    def __str__(self) -> str:
        return format_evidence(self)


@dataclass(frozen=True)
class Lam:
    param: str
    body: "Evidence"

    def __str__(self) -> str:
        return format_evidence(self)


Evidence = Union[Const, EVar, App, Lam]


def apply_evidence(head: Evidence, args: Iterable[Evidence]) -> Evidence:
    for a in args:
        head = App(head, a)
    return head


def format_evidence(e: Evidence) -> str:
    if isinstance(e, (Const, EVar)):
        return str(e)
    if isinstance(e, Lam):
        return f"\\{e.param}. {format_evidence(e.body)}"
    fn = format_evidence(e.fn)
    if isinstance(e.fn, Lam):
        fn = f"({fn})"
    arg = format_evidence(e.arg)
    if isinstance(e.arg, (App, Lam)):
        arg = f"({arg})"
    return f"{fn} {arg}"


# Free variables
def free_vars(x) -> set:
    """Free term variables of a term, atom, formula, clause or iterable of these."""
    out: set = set()
    _fv(x, out)
    return out


def _fv(x, out: set) -> None:
    if isinstance(x, Var):
        out.add(x)
    elif isinstance(x, (Fn, Atom)):
        out |= x.vars
    elif isinstance(x, Implies):
        _fv(x.antecedent, out)
        _fv(x.consequent, out)
    elif isinstance(x, Forall):
        inner = free_vars(x.body)
        inner.discard(x.var)
        out |= inner
    elif isinstance(x, HornClause):
        _fv(x.head, out)
        for a in x.body:
            _fv(a, out)
    else:
        for y in x:
            _fv(y, out)


def term_vars_in_order(x) -> list:
    """Variables in left-to-right first-occurrence order."""
    seen: dict = {}
    done: set = set()

    def go(t):
        if isinstance(t, Var):
            seen.setdefault(t, None)
        elif isinstance(t, (Fn, Atom)):
            # shared subterms are walked once
            if not t.vars or id(t) in done:
                return
            done.add(id(t))
            for a in t.args:
                go(a)
        else:
            for y in t:
                go(y)

    go(x)
    return list(seen)


def term_size(t) -> int:
    if isinstance(t, Var):
        return 1
    return 1 + sum(term_size(a) for a in t.args)


def term_depth(t) -> int:
    if isinstance(t, Var) or not t.args:
        return 0
    return 1 + max(term_depth(a) for a in t.args)


# Renaming
def _rename_term(t, index: int):
    if isinstance(t, Var):
        return Var(t.name, index, t.labelled)
    if isinstance(t, Fn):
        return Fn(t.functor, tuple(_rename_term(a, index) for a in t.args)) if t.args else t
    return Atom(t.pred, tuple(_rename_term(a, index) for a in t.args))


def rename_clause(c: HornClause, step_index: int) -> HornClause:
    """Give every variable of ``c`` the renaming index ``step_index``."""
    if step_index <= 0:
        raise ValueError("step_index must be positive")
    return HornClause(
        c.label,
        _rename_term(c.head, step_index),
        tuple(_rename_term(a, step_index) for a in c.body),
    )


# Surface syntax
class ParseError(ValueError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {msg}")
        self.line = line
        self.col = col


_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|%[^\n]*)
  | (?P<neck>:-)
  | (?P<query>\?-)
  | (?P<lower>[a-z0-9][A-Za-z0-9_]*)
  | (?P<upper>[A-Z_][A-Za-z0-9_]*)
  | (?P<punct>[(),.:^])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        s = m.group()
        if kind != "ws":
            toks.append(_Tok(s if kind == "punct" else kind, s, line, pos - line_start + 1))
        nl = s.count("\n")
        if nl:
            line += nl
            line_start = pos + s.rindex("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


@dataclass
class _Parser:
    toks: list
    allow_labels: bool
    pos: int = 0
    warnings: list = field(default_factory=list)

    def peek(self, k: int = 0) -> _Tok:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def take(self, kind: str) -> _Tok:
        t = self.peek()
        if t.kind != kind:
            want = {"lower": "identifier", "upper": "variable", "eof": "end of input"}.get(kind, repr(kind))
            got = t.text or "end of input"
            raise ParseError(f"expected {want}, got {got!r}", t.line, t.col)
        self.pos += 1
        return t

    def at(self, kind: str) -> bool:
        return self.peek().kind == kind

    def term(self) -> Term:
        t = self.peek()
        if t.kind == "upper":
            self.pos += 1
            labelled = False
            if self.at("^"):
                if not self.allow_labels:
                    c = self.peek()
                    raise ParseError("labelled variables are only allowed in queries", c.line, c.col)
                self.pos += 1
                labelled = True
            return Var(t.text, 0, labelled)
        name = self.take("lower").text
        return Fn(name, self.args())

    def args(self) -> tuple:
        if not self.at("("):
            return ()
        self.take("(")
        out = [self.term()]
        while self.at(","):
            self.take(",")
            out.append(self.term())
        self.take(")")
        return tuple(out)

    def atom(self) -> Atom:
        name = self.take("lower").text
        return Atom(name, self.args())

    def atoms(self) -> list[Atom]:
        out = [self.atom()]
        while self.at(","):
            self.take(",")
            out.append(self.atom())
        return out


class _Signature:
    """Tracks predicate and functor arities, raising on the first clash."""

    def __init__(self):
        self.preds: dict[str, int] = {}
        self.functors: dict[str, int] = {}

    def check_atom(self, a: Atom, tok: _Tok) -> None:
        self._check(self.preds, a.pred, a.arity, "predicate", tok)
        for t in a.args:
            self.check_term(t, tok)

    def check_term(self, t: Term, tok: _Tok) -> None:
        if isinstance(t, Fn):
            self._check(self.functors, t.functor, len(t.args), "functor", tok)
            for a in t.args:
                self.check_term(a, tok)

    @staticmethod
    def _check(table, name, arity, what, tok):
        old = table.setdefault(name, arity)
        if old != arity:
            raise ParseError(f"{what} {name} used with arity {arity}, earlier {old}", tok.line, tok.col)


def parse_program(text: str) -> Program:
    """Parse `.hc` source. Unlabelled clauses are named ``c<position>``."""
    p = _Parser(_tokenize(text), allow_labels=False)
    sig = _Signature()
    raw = []
    while not p.at("eof"):
        start = p.peek()
        label = None
        if start.kind == "lower" and p.peek(1).kind == ":":
            label = start.text
            p.pos += 2
        head = p.atom()
        body: list[Atom] = []
        if p.at("neck"):
            p.take("neck")
            body = p.atoms()
        p.take(".")
        for a in (head, *body):
            sig.check_atom(a, start)
        raw.append((label, head, body, start))
    used = {r[0] for r in raw if r[0]}
    clauses, seen = [], set()
    for i, (label, head, body, tok) in enumerate(raw, 1):
        if label is None:
            label = f"c{i}"
            while label in used:
                label += "_"
        if label in seen:
            raise ParseError(f"duplicate clause label {label}", tok.line, tok.col)
        seen.add(label)
        clauses.append(HornClause(label, head, tuple(body)))
    return Program(tuple(clauses))


def parse_query(text: str, program: Program | None = None) -> list[Atom]:
    """Parse ``?- A1, ..., An.`` (the ``?-`` and final dot are optional).

    A variable written ``X^`` anywhere in the query is labelled at all of its
    occurrences.  Arity clashes with ``program`` are returned as warnings via
    `query_warnings`, never raised.
    """
    p = _Parser(_tokenize(text), allow_labels=True)
    if p.at("query"):
        p.take("query")
    goals = p.atoms()
    if p.at("."):
        p.take(".")
    p.take("eof")
    labelled = {v.erased for v in free_vars(goals) if v.labelled}
    if labelled:
        goals = [_label_vars(a, labelled) for a in goals]
    return goals


def query_warnings(goals: Iterable[Atom], program: Program) -> list[str]:
    arities = {}
    for c in program:
        for a in (c.head, *c.body):
            arities.setdefault(a.pred, a.arity)
    out = []
    for a in goals:
        if a.pred in arities and arities[a.pred] != a.arity:
            out.append(f"predicate {a.pred} has arity {arities[a.pred]} in the program, {a.arity} in the query")
    return out


def _label_vars(t, names: set):
    if isinstance(t, Var):
        return t.labelled_version if t.erased in names else t
    if isinstance(t, Fn):
        return Fn(t.functor, tuple(_label_vars(a, names) for a in t.args)) if t.args else t
    return Atom(t.pred, tuple(_label_vars(a, names) for a in t.args))


def parse_term(text: str) -> Term:
    p = _Parser(_tokenize(text), allow_labels=True)
    t = p.term()
    p.take("eof")
    return t


def parse_atom(text: str) -> Atom:
    p = _Parser(_tokenize(text), allow_labels=True)
    a = p.atom()
    p.take("eof")
    return a


def parse_clause(text: str) -> HornClause:
    prog = parse_program(text)
    if len(prog) != 1:
        raise ValueError(f"expected exactly one clause, got {len(prog)}")
    return prog.clauses[0]


def format_clause(c: HornClause) -> str:
    s = f"{c.label}: {c.head}"
    if c.body:
        s += " :- " + ", ".join(map(str, c.body))
    return s + "."


def format_program(p: Program) -> str:
    return "".join(format_clause(c) + "\n" for c in p.clauses)


def format_goals(goals: Iterable[Atom]) -> str:
    return "{" + ", ".join(map(str, goals)) + "}"
