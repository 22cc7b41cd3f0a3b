"""Formula syntax trees.

Terms are variable names (``str``) or epsilon terms (:class:`Eps`). Plain
first-order formulas simply never contain :class:`Eps`.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from typing import FrozenSet, Tuple, Union


class Node:
    __slots__ = ()

    def _key(self):
        raise NotImplementedError

    def __eq__(self, other):
        if self is other:
            return True
        return type(self) is type(other) and hash(self) == hash(other) and self._key() == other._key()

    def __hash__(self):
        h = self.__dict__.get("_h")
        if h is None:
            h = hash((type(self).__name__, self._key()))
            self.__dict__["_h"] = h
        return h

    def __str__(self):
        from .printer import to_text
        return to_text(self)

    @functools.cached_property
    def free_vars(self) -> FrozenSet[str]:
        return _free_vars(self)

    @functools.cached_property
    def relations(self) -> FrozenSet[str]:
        return _relations(self)

    @functools.cached_property
    def has_eps(self) -> bool:
        return _has_eps(self)


@dataclass(frozen=True, eq=False)
class Eps(Node):
    """``eps var. body``: the chosen witness of ``body`` in ``var``."""
    var: str
    body: "Formula"

    def _key(self):
        return (self.var, self.body)


Term = Union[str, Eps]


@dataclass(frozen=True, eq=False)
class Const(Node):
    value: bool

    def _key(self):
        return self.value


@dataclass(frozen=True, eq=False)
class Atom(Node):
    rel: str
    args: Tuple[Term, ...]

    def _key(self):
        return (self.rel, self.args)


@dataclass(frozen=True, eq=False)
class Eq(Node):
    left: Term
    right: Term

    def _key(self):
        return (self.left, self.right)


@dataclass(frozen=True, eq=False)
class Not(Node):
    arg: "Formula"

    def _key(self):
        return self.arg


@dataclass(frozen=True, eq=False)
class And(Node):
    args: Tuple["Formula", ...]

    def _key(self):
        return self.args


@dataclass(frozen=True, eq=False)
class Or(Node):
    args: Tuple["Formula", ...]

    def _key(self):
        return self.args


@dataclass(frozen=True, eq=False)
class Implies(Node):
    left: "Formula"
    right: "Formula"

    def _key(self):
        return (self.left, self.right)


@dataclass(frozen=True, eq=False)
class Exists(Node):
    var: str
    body: "Formula"

    def _key(self):
        return (self.var, self.body)


@dataclass(frozen=True, eq=False)
class Forall(Node):
    var: str
    body: "Formula"

    def _key(self):
        return (self.var, self.body)


Formula = Union[Const, Atom, Eq, Not, And, Or, Implies, Exists, Forall]
Quantifier = (Exists, Forall)

TRUE = Const(True)
FALSE = Const(False)


# -- smart constructors ------------------------------------------------------

def conj(*fs) -> Formula:
    out = []
    for f in _flat(fs):
        if isinstance(f, And):
            out.extend(f.args)
        elif f == TRUE:
            continue
        elif f == FALSE:
            return FALSE
        else:
            out.append(f)
    if not out:
        return TRUE
    return out[0] if len(out) == 1 else And(tuple(out))


def disj(*fs) -> Formula:
    out = []
    for f in _flat(fs):
        if isinstance(f, Or):
            out.extend(f.args)
        elif f == FALSE:
            continue
        elif f == TRUE:
            return TRUE
        else:
            out.append(f)
    if not out:
        return FALSE
    return out[0] if len(out) == 1 else Or(tuple(out))


def neg(f: Formula) -> Formula:
    if isinstance(f, Const):
        return Const(not f.value)
    if isinstance(f, Not):
        return f.arg
    return Not(f)


def implies(a: Formula, b: Formula) -> Formula:
    if a == TRUE:
        return b
    if a == FALSE or b == TRUE:
        return TRUE
    return Implies(a, b)


def iff(a: Formula, b: Formula) -> Formula:
    return conj(implies(a, b), implies(b, a))


def exists(vs, body: Formula) -> Formula:
    for v in reversed(_vars(vs)):
        body = Exists(v, body)
    return body


def forall(vs, body: Formula) -> Formula:
    for v in reversed(_vars(vs)):
        body = Forall(v, body)
    return body


def atom(rel: str, *args: Term) -> Atom:
    return Atom(rel, tuple(args))


def eq(a: Term, b: Term) -> Eq:
    return Eq(a, b)


def neq(a: Term, b: Term) -> Formula:
    return Not(Eq(a, b))


def distinct(vs) -> Formula:
    return conj(*(neq(a, b) for a, b in itertools.combinations(vs, 2)))


def _vars(vs):
    return [vs] if isinstance(vs, str) else list(vs)


def _flat(fs):
    for f in fs:
        if isinstance(f, (list, tuple)) or hasattr(f, "__next__"):
            yield from _flat(f)
        else:
            yield f


# -- traversal ---------------------------------------------------------------

def children(f: Formula) -> Tuple[Formula, ...]:
    if isinstance(f, (And, Or)):
        return f.args
    if isinstance(f, Not):
        return (f.arg,)
    if isinstance(f, Implies):
        return (f.left, f.right)
    if isinstance(f, (Exists, Forall)):
        return (f.body,)
    return ()


def terms(f: Formula) -> Tuple[Term, ...]:
    if isinstance(f, Atom):
        return f.args
    if isinstance(f, Eq):
        return (f.left, f.right)
    return ()


def _term_free(t: Term) -> FrozenSet[str]:
    if isinstance(t, str):
        return frozenset((t,))
    return t.body.free_vars - {t.var}


def _free_vars(f) -> FrozenSet[str]:
    if isinstance(f, Eps):
        return _term_free(f)
    if isinstance(f, (Atom, Eq)):
        return frozenset().union(*(_term_free(t) for t in terms(f)))
    if isinstance(f, (Exists, Forall)):
        return f.body.free_vars - {f.var}
    return frozenset().union(*(c.free_vars for c in children(f)))


def _relations(f) -> FrozenSet[str]:
    if isinstance(f, Eps):
        return f.body.relations
    out = frozenset((f.rel,)) if isinstance(f, Atom) else frozenset()
    for t in terms(f):
        if isinstance(t, Eps):
            out |= t.body.relations
    for c in children(f):
        out |= c.relations
    return out


def _has_eps(f) -> bool:
    if isinstance(f, Eps):
        return True
    return any(isinstance(t, Eps) for t in terms(f)) or any(c.has_eps for c in children(f))


def eps_terms(f) -> Tuple[Eps, ...]:
    """Outermost epsilon terms of ``f`` in left-to-right order (deduplicated)."""
    out = []

    def walk(g):
        for t in terms(g):
            if isinstance(t, Eps) and t not in out:
                out.append(t)
        for c in children(g):
            walk(c)

    walk(f)
    return tuple(out)


def rebuild(f: Formula, kids) -> Formula:
    kids = tuple(kids)
    if isinstance(f, And):
        return And(kids)
    if isinstance(f, Or):
        return Or(kids)
    if isinstance(f, Not):
        return Not(kids[0])
    if isinstance(f, Implies):
        return Implies(kids[0], kids[1])
    if isinstance(f, Exists):
        return Exists(f.var, kids[0])
    if isinstance(f, Forall):
        return Forall(f.var, kids[0])
    return f


def all_vars(f) -> FrozenSet[str]:
    """Every variable name occurring anywhere, bound or free."""
    out = set()

    def walk_term(t):
        if isinstance(t, str):
            out.add(t)
        else:
            out.add(t.var)
            walk(t.body)

    def walk(g):
        if isinstance(g, (Exists, Forall)):
            out.add(g.var)
        for t in terms(g):
            walk_term(t)
        for c in children(g):
            walk(c)

    walk(f)
    return frozenset(out)


def size(f) -> int:
    n = 1
    for t in terms(f):
        if isinstance(t, Eps):
            n += size(t.body)
    return n + sum(size(c) for c in children(f))


class FreshNames:
    """Deterministic fresh-name supply avoiding a given set of names."""

    def __init__(self, avoid=(), prefix="v"):
        self.used = set(avoid)
        self.prefix = prefix
        self.counter = 0

    def __call__(self, hint=None) -> str:
        base = hint or self.prefix
        while True:
            self.counter += 1
            name = f"{base}_{self.counter}"
            if name not in self.used:
                self.used.add(name)
                return name


def substitute(f, mapping) -> Formula:
    """Capture-avoiding substitution of variables by variables (or terms)."""
    if not mapping:
        return f
    return _subst(f, dict(mapping), FreshNames(all_vars(f) | {v for t in mapping.values() for v in _term_names(t)}))


def _term_names(t):
    if isinstance(t, str):
        return {t}
    return set(all_vars(t.body)) | {t.var}


def _subst_term(t, mapping, fresh):
    if isinstance(t, str):
        return mapping.get(t, t)
    var, body = _bind(t.var, t.body, mapping, fresh)
    return Eps(var, body)


def _bind(var, body, mapping, fresh):
    inner = {k: v for k, v in mapping.items() if k != var}
    inner = {k: v for k, v in inner.items() if k in body.free_vars}
    if not inner:
        return var, body
    captured = any(var in _term_free_any(v) for v in inner.values())
    if captured:
        new = fresh(var.split("_")[0])
        inner[var] = new
        var = new
    return var, _subst(body, inner, fresh)


def _term_free_any(t):
    return {t} if isinstance(t, str) else t.free_vars


def _subst(f, mapping, fresh):
    if isinstance(f, Atom):
        return Atom(f.rel, tuple(_subst_term(t, mapping, fresh) for t in f.args))
    if isinstance(f, Eq):
        return Eq(_subst_term(f.left, mapping, fresh), _subst_term(f.right, mapping, fresh))
    if isinstance(f, (Exists, Forall)):
        var, body = _bind(f.var, f.body, mapping, fresh)
        return type(f)(var, body)
    if isinstance(f, Const):
        return f
    return rebuild(f, (_subst(c, mapping, fresh) for c in children(f)))


def rename_relations(f, mapping) -> Formula:
    """Rename relation symbols (also inside epsilon bodies)."""
    if not mapping or not (f.relations & set(mapping)):
        return f
    if isinstance(f, Atom):
        return Atom(mapping.get(f.rel, f.rel), tuple(_rename_term(t, mapping) for t in f.args))
    if isinstance(f, Eq):
        return Eq(_rename_term(f.left, mapping), _rename_term(f.right, mapping))
    return rebuild(f, [rename_relations(c, mapping) for c in children(f)])


def _rename_term(t, mapping):
    return Eps(t.var, rename_relations(t.body, mapping)) if isinstance(t, Eps) else t
