"""Synthesizers for named formulas: Gaifman adjacency, balls and spheres,
local-order axioms, neighborhood-type and Hanf-threshold sentences, the
ball orderings induced by a local order, successor translations and the
even-atoms query on Boolean algebras.

Every builder takes the variable names to use for its free variables and
picks bound names that avoid them, so results can be plugged into one
another without capture.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .logic.ast import (TRUE, Formula, Not, atom, conj, disj, distinct, eq, exists, forall, iff, implies, neg,
                        neq)
from .logic.normal import substitute_relation
from .structures import (HanfSignature, NeighborhoodType, PointedStructure, Structure, Vocabulary,
                         canonical_structure, bfs_distances)

LE = "LE"   # binary linear order symbol
LO = "LO"   # ternary local order symbol
SUB = "Sub"  # Boolean algebra order


class TypeEnumerationCap(RuntimeError):
    pass


@dataclass(frozen=True)
class SynthesisContext:
    vocab: Vocabulary
    degree: Optional[int] = None
    radius: Optional[int] = None
    threshold: Optional[int] = None

    def __post_init__(self):
        for name in ("degree", "radius", "threshold"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValueError(f"{name} must be non-negative")


def fresh(avoid: Iterable[str], count: int, base: str = "u") -> List[str]:
    avoid = set(avoid)
    out = []
    i = 0
    while len(out) < count:
        i += 1
        name = f"{base}{i}"
        if name not in avoid:
            out.append(name)
    return out


# -- Gaifman adjacency, balls, spheres ---------------------------------------

def eta(vocab: Vocabulary, x: str = "x", y: str = "y") -> Formula:
    """Reflexive Gaifman adjacency: ``x = y`` or some tuple contains both."""
    cases = [eq(x, y)]
    for name, arity in vocab.relations:
        extra = fresh({x, y}, max(arity - 2, 0), "g")
        for i, j in itertools.permutations(range(arity), 2):
            args = []
            it = iter(extra)
            for p in range(arity):
                args.append(x if p == i else y if p == j else next(it))
            cases.append(exists(extra, atom(name, *args)))
    return disj(*cases)


def adjacent(vocab: Vocabulary, x: str, y: str) -> Formula:
    """Irreflexive Gaifman adjacency."""
    return conj(neq(x, y), eta(vocab, x, y))


def beta(vocab: Vocabulary, r: int, x: str = "x", y: str = "y") -> Formula:
    """``y`` lies within Gaifman distance ``r`` of ``x``."""
    if r < 0:
        raise ValueError("radius must be non-negative")
    cases = [eq(x, y)]
    for length in range(1, r + 1):
        mids = fresh({x, y}, length - 1, "p")
        chain = [x] + mids + [y]
        steps = [eta(vocab, a, b) for a, b in zip(chain, chain[1:])]
        cases.append(exists(mids, conj(*steps)))
    return disj(*cases)


def sphere(vocab: Vocabulary, r: int, x: str = "x", y: str = "y") -> Formula:
    """``y`` lies at distance exactly ``r`` from ``x``."""
    if r == 0:
        return eq(x, y)
    return conj(beta(vocab, r, x, y), neg(beta(vocab, r - 1, x, y)))


def beta_and_sphere(vocab: Vocabulary, r: int, x: str = "x", y: str = "y"):
    return beta(vocab, r, x, y), sphere(vocab, r, x, y)


# -- orders ------------------------------------------------------------------

RelationBuilder = Callable[[str, str], Formula]


def _binary(rel: Union[str, RelationBuilder]) -> RelationBuilder:
    if callable(rel):
        return rel
    return lambda a, b: atom(rel, a, b)


def linear_order_guard(psi: Formula, var: str, rel: Union[str, RelationBuilder],
                       vocab: Optional[Vocabulary] = None) -> Formula:
    """``rel`` is a reflexive linear order on ``{var : psi}``.

    ``rel`` is a binary relation name or a builder ``(a, b) -> Formula``;
    the free variables of the result are those of ``psi`` other than ``var``.
    """
    if isinstance(rel, str) and vocab is not None and rel in vocab and vocab.arity(rel) != 2:
        raise ValueError(f"{rel} is not binary")
    R = _binary(rel)
    outer = psi.free_vars - {var}
    a, b, c = fresh(outer | {var}, 3, "o")
    from .logic.ast import substitute
    ps = [substitute(psi, {var: v}) for v in (a, b, c)]
    body = conj(
        R(a, a),
        implies(conj(R(a, b), R(b, a)), eq(a, b)),
        disj(R(a, b), R(b, a)),
        implies(conj(R(a, b), R(b, c)), R(a, c)),
    )
    return forall([a, b, c], implies(conj(*ps), body))


def local_order_axiom(vocab: Vocabulary, lo: str = LO) -> Formula:
    """Sentence over ``vocab`` plus ternary ``lo`` whose models are exactly
    the local-order expansions."""
    x, y, z = "x", "y", "z"
    support = forall([x, y, z], implies(disj(neg(sphere(vocab, 1, x, y)), neg(sphere(vocab, 1, x, z))),
                                        neg(atom(lo, x, y, z))))
    ordered = forall(x, linear_order_guard(sphere(vocab, 1, x, "w"), "w", lambda a, b: atom(lo, x, a, b)))
    return conj(support, ordered)


def linear_order_axiom(le: str = LE) -> Formula:
    return linear_order_guard(TRUE, "w", le)


def local_from_linear(vocab: Vocabulary, le: str = LE, x: str = "x", y: str = "y", z: str = "z") -> Formula:
    """Local order read off a linear order: neighbors of ``x`` in ``le`` order."""
    return conj(sphere(vocab, 1, x, y), sphere(vocab, 1, x, z), atom(le, y, z))


def lambda_chain(vocab: Vocabulary, r: int, lo: str = LO, x: str = "x", y: str = "y", z: str = "z") -> Formula:
    """Linear order of ``B_r(x)`` built from a local order: ``x`` first, then
    each sphere in turn, grouped by least inner neighbor."""
    if r < 1:
        raise ValueError("lambda chain needs r >= 1")
    if r == 1:
        return disj(conj(eq(x, y), beta(vocab, 1, x, z)), atom(lo, x, y, z))
    s = r - 1
    first = conj(beta(vocab, s, x, y), beta(vocab, s, x, z), lambda_chain(vocab, s, lo, x, y, z))
    second = conj(beta(vocab, s, x, y), sphere(vocab, r, x, z))
    pre_yz = _lambda_pre(vocab, r, lo, x, y, z)
    pre_zy = _lambda_pre(vocab, r, lo, x, z, y)
    third = conj(sphere(vocab, r, x, y), sphere(vocab, r, x, z), pre_yz,
                 disj(neg(pre_zy), conj(pre_zy, _lambda_tie(vocab, r, lo, x, y, z))))
    return disj(first, second, third)


def _lambda_pre(vocab, r, lo, x, y, z):
    # least inner neighbor of y is at or below every inner neighbor of z
    s = r - 1
    b1, b2 = fresh({x, y, z}, 2, "q")
    return exists(b1, forall(b2, conj(
        beta(vocab, s, x, b1), eta(vocab, b1, y),
        implies(conj(beta(vocab, s, x, b2), eta(vocab, b2, z)), lambda_chain(vocab, s, lo, x, b1, b2)))))


def _lambda_tie(vocab, r, lo, x, y, z):
    # y, z share their least inner neighbor b; compare them in b's local order
    s = r - 1
    b1, b2 = fresh({x, y, z}, 2, "q")
    return exists(b1, forall(b2, conj(
        beta(vocab, s, x, b1), eta(vocab, b1, y), eta(vocab, b1, z),
        implies(conj(beta(vocab, s, x, b2), eta(vocab, b2, y), eta(vocab, b2, z)),
                lambda_chain(vocab, s, lo, x, b1, b2)),
        lambda_chain(vocab, 1, lo, b1, y, z))))


# -- neighborhood types and Hanf sentences -----------------------------------

def ball_size_bound(d: int, r: int) -> int:
    """Largest possible r-ball in a structure of Gaifman degree at most d."""
    return 1 + d * sum((d - 1) ** i for i in range(r))


def enumerate_types(vocab: Vocabulary, d: int, r: int, cap: int = 200_000,
                    simple_graph: bool = False) -> List[NeighborhoodType]:
    """All r-neighborhood types realizable with Gaifman degree at most d,
    sorted by canonical code.

    Built by canonical augmentation: each type is grown from the type of a
    BFS prefix of its ball. ``simple_graph`` restricts binary relations to
    symmetric, irreflexive interpretations (unary ones stay free).
    """
    if simple_graph and any(a > 2 for _, a in vocab.relations):
        raise ValueError("simple_graph allows only unary and binary relations")
    limit = ball_size_bound(d, r)
    seen: Dict[tuple, NeighborhoodType] = {}

    def admit(s: Structure, point: int):
        dist = bfs_distances(s, point)
        if len(dist) != s.size or max(dist.values()) > r:
            return None
        if max((len(a) for a in s.adjacency), default=0) > d:
            return None
        canon, cp, code = canonical_structure(s, point)
        if code in seen:
            return None
        tp = NeighborhoodType(r, code, PointedStructure(canon, cp))
        seen[code] = tp
        if len(seen) > cap:
            raise TypeEnumerationCap(f"more than {cap} neighborhood types")
        return tp

    frontier = []
    for tuples in _new_tuple_choices(vocab, 0, simple_graph):
        tp = admit(Structure.build(vocab, 1, tuples), 0)
        if tp is not None:
            frontier.append(tp)
    while frontier:
        nxt = []
        for tp in frontier:
            base = tp.canonical.base
            if base.size >= limit:
                continue
            for extra in _new_tuple_choices(vocab, base.size, simple_graph):
                interp = {name: set(base[name]) | set(extra.get(name, ())) for name in vocab.names}
                grown = admit(Structure.build(vocab, base.size + 1, interp), tp.canonical.point)
                if grown is not None:
                    nxt.append(grown)
        frontier = nxt
    return sorted(seen.values(), key=lambda t: t.code)


def realized_types(corpus: Iterable[Structure], r: int) -> List[NeighborhoodType]:
    """Radius-``r`` types occurring in ``corpus``, sorted by canonical code."""
    from .structures import neighborhood_type
    seen = {}
    for s in corpus:
        for a in range(s.size):
            tp = neighborhood_type(s, a, r)
            seen.setdefault(tp.code, tp)
    return [seen[c] for c in sorted(seen)]


def _new_tuple_choices(vocab, k, simple_graph):
    """Every way to add tuples that mention the new element ``k``."""
    per_rel = []
    for name, arity in vocab.relations:
        if simple_graph and arity == 2:
            cands = [((k, j), (j, k)) for j in range(k)]
        else:
            cands = [(t,) for t in itertools.product(range(k + 1), repeat=arity) if k in t]
        per_rel.append((name, cands))
    options = [cands for _, cands in per_rel]
    flat = [(i, c) for i, cands in enumerate(options) for c in cands]
    for mask in range(1 << len(flat)):
        chosen: Dict[str, list] = {}
        for bit, (i, group) in enumerate(flat):
            if mask >> bit & 1:
                chosen.setdefault(per_rel[i][0], []).extend(group)
        yield chosen


@functools.lru_cache(maxsize=None)
def type_formula(tp: NeighborhoodType, vocab: Vocabulary, x: str = "x") -> Formula:
    """``x`` has r-neighborhood type ``tp``."""
    s = tp.canonical.base
    point = tp.canonical.point
    others = fresh({x}, s.size - 1, "e")
    names = {}
    it = iter(others)
    for i in range(s.size):
        names[i] = x if i == point else next(it)
    lits = []
    for name, arity in vocab.relations:
        rel = s[name]
        for t in itertools.product(range(s.size), repeat=arity):
            a = atom(name, *(names[i] for i in t))
            lits.append(a if t in rel else Not(a))
    w = fresh(set(names.values()), 1, "w")[0]
    closed = forall(w, implies(beta(vocab, tp.radius, x, w), disj(*(eq(w, v) for v in names.values()))))
    inside = [beta(vocab, tp.radius, x, v) for v in others]
    return exists(others, conj(distinct(list(names.values())), *lits, *inside, closed))


@functools.lru_cache(maxsize=None)
def count_formula(tp: NeighborhoodType, vocab: Vocabulary, i: int, t: int) -> Formula:
    """Exactly ``i`` elements of type ``tp`` (at least ``t`` when ``i == t``)."""
    if not 0 <= i <= t:
        raise ValueError("need 0 <= i <= t")
    us = [f"c{j}" for j in range(1, i + 1)]
    has = [_type_at(tp, vocab, u) for u in us]
    if i == t:
        return exists(us, conj(distinct(us), *has))
    v = "c0"
    closed = forall(v, implies(_type_at(tp, vocab, v), disj(*(eq(v, u) for u in us))))
    return exists(us, conj(distinct(us), *has, closed))


def _type_at(tp, vocab, v):
    from .logic.ast import substitute
    f = type_formula(tp, vocab, "x")
    return f if v == "x" else substitute(f, {"x": v})


def type_and_count_formulas(tp: NeighborhoodType, vocab: Vocabulary, i: int, t: int):
    return type_formula(tp, vocab, "x"), count_formula(tp, vocab, i, t)


def signature_vector(sig: HanfSignature, types: Sequence[NeighborhoodType]) -> Tuple[int, ...]:
    index = {tp: k for k, tp in enumerate(types)}
    vec = [0] * len(types)
    for tp, c in sig.counts:
        if tp not in index:
            raise KeyError("signature mentions a type outside the enumeration")
        vec[index[tp]] = c
    return tuple(vec)


def hanf_sentence(signatures, types: Sequence[NeighborhoodType], vocab: Vocabulary, t: int) -> Formula:
    """Disjunction over the given count vectors of the conjunction, per type,
    of the matching count formula. ``signatures`` holds
    :class:`HanfSignature` values or count vectors indexed like ``types``."""
    disjuncts = []
    for sig in signatures:
        vec = signature_vector(sig, types) if isinstance(sig, HanfSignature) else tuple(sig)
        if len(vec) != len(types):
            raise KeyError("count vector length does not match the type list")
        if any(not 0 <= c <= t for c in vec):
            raise ValueError("counts must lie in 0..t")
        disjuncts.append(conj(*(count_formula(tp, vocab, c, t) for tp, c in zip(types, vec))))
    return disj(*disjuncts)


# -- successor translations --------------------------------------------------

def successor_library(k: int = 1, s1: str = "S", s_lin: str = "S", perm: str = "S") -> Dict[str, Formula]:
    """Named translations between successor-style schemes.

    ``phi1``: linear successor from a circular one, parameter ``a``.
    ``phi2_guard`` / ``phi2``: circular successor from a linear one,
    parameters ``a`` (least) and ``a2`` (greatest).
    ``identity_perm``: the identity permutation.
    ``phi_i'`` and ``phi_guard`` / ``phi_insertion``: a fixed-point-free
    permutation built from one with at most ``k`` orbits, parameters
    ``a1..ak`` and ``b``.
    """
    lib = {
        "phi1": conj(neq("y", "a"), atom(s1, "x", "y")),
        "phi2_guard": forall("x", conj(neg(atom(s_lin, "x", "a")), neg(atom(s_lin, "a2", "x")))),
        "phi2": disj(conj(eq("x", "a2"), eq("y", "a")), atom(s_lin, "x", "y")),
        "identity_perm": eq("x", "y"),
    }
    a = [f"a{m}" for m in range(1, k + 1)]
    for i in range(0, k + 1):
        lib[f"phi_{i}'"] = _fixed_layout(a, i)
    lib["phi_guard"] = _insertion_guard(a, perm)
    lib["phi_insertion"] = _insertion(a, perm)
    return lib


def _fixed_layout(a, i):
    # a_1..a_i pairwise distinct, a_i..a_k all equal
    k = len(a)
    first = [neq(a[m], a[n]) for m in range(i) for n in range(m + 1, i)]
    tail = [eq(a[m], a[n]) for m in range(max(i - 1, 0), k) for n in range(m + 1, k)]
    return conj(*first, *tail)


def _fixed_count_is(a, i, S):
    # exactly the listed a_1..a_i are the fixed points
    base = conj(_fixed_layout(a, i), *(atom(S, a[m], a[m]) for m in range(i)))
    if i == 0:
        return conj(base, forall("x", neg(atom(S, "x", "x"))))
    return base


def _insertion_guard(a, S):
    covered = forall("x", implies(atom(S, "x", "x"), disj(*(eq(m, "x") for m in a))))
    layout = disj(*(_fixed_count_is(a, i, S) for i in range(len(a) + 1)))
    moving = implies(exists("x", neg(atom(S, "x", "x"))), neg(atom(S, "b", "b")))
    return conj(covered, layout, moving)


def _insertion(a, S):
    k = len(a)
    x, y = "x", "y"
    has_moving = exists("w", neg(atom(S, "w", "w")))
    keep = conj(disj(_fixed_count_is(a, 0, S), conj(neq(x, "b"), neg(atom(S, "b", y)), neq(x, y))),
                atom(S, x, y))
    spliced = []
    for i in range(1, k + 1):
        chain = [conj(eq(x, a[m]), eq(y, a[m + 1])) for m in range(i - 1)]
        with_b = disj(conj(eq(x, "b"), eq(y, a[0])), conj(eq(x, a[i - 1]), atom(S, "b", y)), *chain)
        all_fixed = disj(conj(eq(x, a[i - 1]), eq(y, a[0])), *chain)
        spliced.append(conj(_fixed_count_is(a, i, S),
                            disj(conj(has_moving, with_b), conj(neg(has_moving), all_fixed))))
    return disj(keep, *spliced)


# -- Boolean algebras and the even-atoms query -------------------------------

def ba_atom(x: str, sub: str = SUB) -> Formula:
    """``x`` has exactly one element strictly below it."""
    b, c = fresh({x}, 2, "t")
    below = lambda v: conj(atom(sub, v, x), neq(v, x))
    return conj(exists(b, below(b)), forall([b, c], implies(conj(below(b), below(c)), eq(b, c))))


def ba_join(x: str, y: str, j: str, sub: str = SUB) -> Formula:
    w = fresh({x, y, j}, 1, "t")[0]
    return conj(atom(sub, x, j), atom(sub, y, j),
                forall(w, implies(conj(atom(sub, x, w), atom(sub, y, w)), atom(sub, j, w))))


def boolean_algebra_axiom(sub: str = SUB) -> Formula:
    """Finite Boolean algebras: non-empty partial orders with a least element
    and binary joins, where every element is determined by the atoms below it
    and atoms are join-prime."""
    R = lambda a, b: atom(sub, a, b)
    order = conj(
        forall("x", R("x", "x")),
        forall(["x", "y"], implies(conj(R("x", "y"), R("y", "x")), eq("x", "y"))),
        forall(["x", "y", "z"], implies(conj(R("x", "y"), R("y", "z")), R("x", "z"))),
    )
    bottom = exists("x", forall("y", R("x", "y")))
    joins = forall(["x", "y"], exists("j", ba_join("x", "y", "j", sub)))
    atomistic = forall(["x", "y"], implies(neg(R("x", "y")),
                                           exists("a", conj(ba_atom("a", sub), R("a", "x"), neg(R("a", "y"))))))
    prime = forall(["a", "x", "y", "j"], implies(conj(ba_atom("a", sub), ba_join("x", "y", "j", sub), R("a", "j")),
                                                 disj(R("a", "x"), R("a", "y"))))
    return conj(exists("x", eq("x", "x")), order, bottom, joins, atomistic, prime)


def even_atoms_linear(sub: str = SUB, le: str = LE) -> Formula:
    """Even number of atoms, read along a linear order: some element ``w``
    contains the first atom, omits the last, and consecutive atoms alternate
    between inside and outside ``w``."""
    A = lambda v: ba_atom(v, sub)
    L = lambda p, q: atom(le, p, q)
    S = lambda p, q: atom(sub, p, q)
    no_atoms = neg(exists("a", A("a")))
    first = exists("a", conj(A("a"), forall("c", implies(A("c"), L("a", "c"))), S("a", "w")))
    last = exists("a", conj(A("a"), forall("c", implies(A("c"), L("c", "a"))), neg(S("a", "w"))))
    between = exists("c", conj(A("c"), L("a", "c"), L("c", "b"), neq("c", "a"), neq("c", "b")))
    consecutive = conj(A("a"), A("b"), L("a", "b"), neq("a", "b"), neg(between))
    alternate = forall(["a", "b"], implies(consecutive, iff(S("a", "w"), neg(S("b", "w")))))
    return disj(no_atoms, exists("w", conj(first, last, alternate)))


def gurevich_even_atoms(sub: str = SUB, le: str = LE, lo: str = LO, prenex: bool = False):
    """``(phi_BA, even_local, even_linear)``.

    ``even_local`` replaces the linear order by the radius-2 ball order of a
    local order (Boolean algebras have diameter at most 2), guarded by that
    order being linear.
    """
    vocab = Vocabulary.of((sub, 2))
    even_le = even_atoms_linear(sub, le)
    even_lo = order_to_local(even_le, vocab, 2, le=le, lo=lo, prenex=prenex)
    return boolean_algebra_axiom(sub), even_lo, even_le


def order_to_local(theta: Formula, vocab: Vocabulary, radius: int, le: str = LE, lo: str = LO,
                   prenex: bool = False) -> Formula:
    """Translate a sentence using a linear order into one using a local
    order, via the radius-``radius`` ball order around a parameter."""
    p = "x0"
    order = lambda_chain(vocab, radius, lo, p, "y0", "z0")
    guard = linear_order_guard(TRUE, "w0", lambda u, v: lambda_chain(vocab, radius, lo, p, u, v))
    if prenex:
        return substitute_relation(theta, le, order, [p], ["y0", "z0"], guard, arity=2)
    from .logic.normal import substitute_relation_direct
    return substitute_relation_direct(theta, le, order, [p], ["y0", "z0"], guard)
