"""Normal forms and syntactic transformations."""

from __future__ import annotations

import functools
from typing import List, Sequence, Tuple

from .ast import (TRUE, And, Atom, Const, Eq, Exists, Forall, FreshNames, Implies, Not, Or, all_vars, children,
                  conj, disj, forall, implies, neg, rebuild, substitute)

DEFAULT_CNF_CAP = 100_000


class CNFTooLarge(RuntimeError):
    pass


def quantifier_rank(f) -> int:
    if isinstance(f, (Exists, Forall)):
        return 1 + quantifier_rank(f.body)
    return max((quantifier_rank(c) for c in children(f)), default=0)


def eliminate_implications(f):
    if isinstance(f, Implies):
        return Or((Not(eliminate_implications(f.left)), eliminate_implications(f.right)))
    if not children(f):
        return f
    return rebuild(f, (eliminate_implications(c) for c in children(f)))


def nnf(f):
    """Negation normal form; implications are eliminated."""
    return _nnf(f, True)


def _nnf(f, pos):
    if isinstance(f, Not):
        return _nnf(f.arg, not pos)
    if isinstance(f, Implies):
        if pos:
            return Or((_nnf(f.left, False), _nnf(f.right, True)))
        return And((_nnf(f.left, True), _nnf(f.right, False)))
    if isinstance(f, And):
        args = tuple(_nnf(c, pos) for c in f.args)
        return And(args) if pos else Or(args)
    if isinstance(f, Or):
        args = tuple(_nnf(c, pos) for c in f.args)
        return Or(args) if pos else And(args)
    if isinstance(f, Exists):
        body = _nnf(f.body, pos)
        return Exists(f.var, body) if pos else Forall(f.var, body)
    if isinstance(f, Forall):
        body = _nnf(f.body, pos)
        return Forall(f.var, body) if pos else Exists(f.var, body)
    if isinstance(f, Const):
        return f if pos else Const(not f.value)
    return f if pos else Not(f)


def rename_apart(f, avoid=()):
    """Rename bound variables so that every binder binds a distinct name that
    is also distinct from every free variable. Names are kept when possible;
    clashes get ``name_k`` from a counter advancing in traversal order."""
    used = set(f.free_vars) | set(avoid)
    fresh = FreshNames(all_vars(f) | used)

    def walk(g):
        if isinstance(g, (Exists, Forall)):
            var = g.var
            body = g.body
            if var in used:
                new = fresh(var.split("_")[0])
                body = substitute(body, {var: new})
                var = new
            used.add(var)
            return type(g)(var, walk(body))
        if isinstance(g, (Atom, Eq)):
            return g
        if not children(g):
            return g
        return rebuild(g, [walk(c) for c in children(g)])

    return walk(f)


def prenex(f) -> Tuple[List[Tuple[type, str]], object]:
    """Split ``f`` into ``(prefix, matrix)`` with the matrix in NNF.

    Equivalence holds on non-empty structures; epsilon terms are opaque.
    """
    g = rename_apart(nnf(f))

    def pull(h):
        if isinstance(h, (Exists, Forall)):
            pre, mat = pull(h.body)
            return [(type(h), h.var)] + pre, mat
        if isinstance(h, (And, Or)):
            pre = []
            mats = []
            for c in h.args:
                p, m = pull(c)
                pre += p
                mats.append(m)
            return pre, type(h)(tuple(mats))
        return [], h

    return pull(g)


def attach_prefix(prefix, matrix):
    for q, v in reversed(prefix):
        matrix = q(v, matrix)
    return matrix


def prenex_form(f):
    return attach_prefix(*prenex(f))


def _is_complement(a, b):
    return (isinstance(a, Not) and a.arg == b) or (isinstance(b, Not) and b.arg == a)


def cnf_clauses(matrix, cap: int = DEFAULT_CNF_CAP) -> List[Tuple]:
    """Distributive CNF of a quantifier-free NNF matrix as a list of clauses
    (tuples of literals). Raises :class:`CNFTooLarge` past ``cap`` literals."""

    def go(h):
        if isinstance(h, Const):
            return [] if h.value else [()]
        if isinstance(h, And):
            out = []
            for c in h.args:
                out.extend(go(c))
            return _dedupe(out)
        if isinstance(h, Or):
            acc = [()]
            for c in h.args:
                cs = go(c)
                new = []
                for a in acc:
                    for b in cs:
                        clause = _merge(a, b)
                        if clause is not None:
                            new.append(clause)
                if sum(len(c) for c in new) > cap:
                    raise CNFTooLarge(f"CNF exceeds {cap} literals")
                acc = _dedupe(new)
            return acc
        if isinstance(h, (Exists, Forall)):
            raise ValueError("matrix must be quantifier-free")
        return [(h,)]

    clauses = go(matrix)
    if sum(len(c) for c in clauses) > cap:
        raise CNFTooLarge(f"CNF exceeds {cap} literals")
    return clauses


def _merge(a, b):
    out = list(a)
    for lit in b:
        if lit in out:
            continue
        if any(_is_complement(lit, x) for x in out):
            return None
        out.append(lit)
    return tuple(out)


def _dedupe(clauses):
    seen = set()
    out = []
    for c in clauses:
        key = frozenset(c)
        if key not in seen:
            seen.add(key)
            out.append(c)
    return out


def clauses_to_formula(clauses):
    return conj(*(disj(*c) for c in clauses)) if clauses else TRUE


def prenex_cnf(f, cap: int = DEFAULT_CNF_CAP):
    """Quantifier prefix over a CNF matrix of literals."""
    prefix, matrix = prenex(f)
    return attach_prefix(prefix, clauses_to_formula(cnf_clauses(matrix, cap)))


def is_prenex_cnf(f) -> bool:
    while isinstance(f, (Exists, Forall)):
        f = f.body
    clauses = f.args if isinstance(f, And) else (f,)
    for c in clauses:
        lits = c.args if isinstance(c, Or) else (c,)
        for lit in lits:
            inner = lit.arg if isinstance(lit, Not) else lit
            if not isinstance(inner, (Atom, Eq, Const)):
                return False
    return True


def miniscope(f):
    """Push quantifiers inward as far as equivalence allows (on every finite
    structure, the empty one included). Used to speed up evaluation of
    prenex formulas."""
    cache = f.__dict__.get("_miniscoped")
    if cache is not None:
        return cache
    out = _miniscope(eliminate_implications(f))
    f.__dict__["_miniscoped"] = out
    return out


def _miniscope(f):
    if isinstance(f, (Exists, Forall)):
        # a block of like quantifiers commutes; push the most local variable first
        q = type(f)
        block = []
        while isinstance(f, q):
            block.append(f.var)
            f = f.body
        body = _miniscope(f)
        pending = list(dict.fromkeys(reversed(block)))
        while pending:
            var = min(pending, key=lambda v: (_spread(body, v), pending.index(v)))
            pending.remove(var)
            body = _push(q, var, body)
        return body
    if isinstance(f, (Atom, Eq, Const)):
        return f
    return rebuild(f, [_miniscope(c) for c in children(f)])


def _spread(body, var):
    if isinstance(body, (And, Or)):
        return sum(1 for c in body.args if var in c.free_vars)
    return 1 if var in body.free_vars else 0


def _push(q, var, body):
    if var not in body.free_vars:
        return q(var, body)
    if isinstance(body, (And, Or)):
        distributes = (q is Forall) == isinstance(body, And)
        if distributes:
            # independent children keep the quantifier: it matters on the empty structure
            return type(body)(tuple(_push(q, var, c) for c in body.args))
        dep = [c for c in body.args if var in c.free_vars]
        indep = [c for c in body.args if var not in c.free_vars]
        if indep:
            inner = dep[0] if len(dep) == 1 else type(body)(tuple(dep))
            return type(body)((_push(q, var, inner),) + tuple(indep))
    if isinstance(body, Not):
        dual = Forall if q is Exists else Exists
        return Not(_push(dual, var, body.arg))
    return q(var, body)


def substitute_relation(theta, rel: str, definition, params: Sequence[str], slots: Sequence[str],
                        guard=TRUE, arity=None, cap: int = DEFAULT_CNF_CAP):
    """Replace ``rel`` in ``theta`` by a definition with parameters.

    ``definition`` has free variables among ``params`` and ``slots``; each
    literal ``rel(z...)`` in the prenex CNF of ``theta`` becomes
    ``definition[slots := z]`` (negated for negative literals). The result is
    ``forall params. guard -> theta''``.
    """
    slots = list(slots)
    params = list(params)
    if arity is not None and len(slots) != arity:
        raise ValueError(f"{rel} has arity {arity} but {len(slots)} slot variables were given")
    if len(set(slots)) != len(slots):
        raise ValueError("slot variables must be distinct")
    stray = definition.free_vars - set(params) - set(slots)
    if stray:
        raise ValueError(f"definition has free variables {sorted(stray)} outside params/slots")
    if guard.free_vars - set(params):
        raise ValueError("guard may only mention the parameters")
    # parameters must not collide with the variables of theta
    fresh = FreshNames(all_vars(theta) | all_vars(definition) | all_vars(guard) | set(params) | set(slots))
    clash = all_vars(theta)
    renaming = {p: (fresh(p) if p in clash else p) for p in params}
    definition = substitute(definition, {p: q for p, q in renaming.items() if p != q})
    guard = substitute(guard, {p: q for p, q in renaming.items() if p != q})
    new_params = [renaming[p] for p in params]

    prefix, matrix = prenex(theta)
    clauses = cnf_clauses(matrix, cap)

    @functools.lru_cache(maxsize=None)
    def replace(lit):
        negative = isinstance(lit, Not)
        inner = lit.arg if negative else lit
        if isinstance(inner, Atom) and inner.rel == rel:
            if len(inner.args) != len(slots):
                raise ValueError(f"{rel} used with {len(inner.args)} arguments, {len(slots)} slots given")
            body = substitute(definition, dict(zip(slots, inner.args)))
            return neg(body) if negative else body
        return lit

    new_matrix = conj(*(disj(*(replace(l) for l in c)) for c in clauses)) if clauses else TRUE
    inner = attach_prefix(prefix, new_matrix)
    return forall(new_params, implies(guard, inner))


def substitute_relation_direct(theta, rel, definition, params, slots, guard=TRUE):
    """Same contract as :func:`substitute_relation` but substitutes in place
    without the prenex/CNF pass (smaller output, same semantics)."""
    fresh = FreshNames(all_vars(theta) | all_vars(definition) | all_vars(guard) | set(params) | set(slots))
    clash = all_vars(theta)
    renaming = {p: (fresh(p) if p in clash else p) for p in params}
    definition = substitute(definition, {p: q for p, q in renaming.items() if p != q})
    guard = substitute(guard, {p: q for p, q in renaming.items() if p != q})

    def walk(g):
        if isinstance(g, Atom) and g.rel == rel:
            return substitute(definition, dict(zip(slots, g.args)))
        if not children(g):
            return g
        return rebuild(g, [walk(c) for c in children(g)])

    return forall([renaming[p] for p in params], implies(guard, walk(theta)))
