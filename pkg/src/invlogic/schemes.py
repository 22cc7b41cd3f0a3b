"""Presentation schemes: families of expansions of a structure by new
relations, with membership tests, optional defining axioms, seeded samplers,
invariance checking, joins and flattening into a single relation."""

from __future__ import annotations

import functools
import itertools
import math
import random
import re
from dataclasses import dataclass
from typing import Callable, Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple

from .logic.ast import (Formula, atom, conj, disj, eq, exists, forall, iff, implies, neg, rename_relations)
from .logic.evaluator import Evaluator
from .logic.normal import substitute_relation_direct
from .structures import Structure, Vocabulary, ball, restrict
from . import synth

DEFAULT_CAP = 10 ** 7

Added = Tuple[FrozenSet[tuple], ...]


class NotAPresentation(ValueError):
    """The scheme has no expansion of the given structure."""


class ExpansionCap(RuntimeError):
    pass


class InvarianceViolation(ValueError):
    def __init__(self, message, counterexample=None):
        super().__init__(message)
        self.counterexample = counterexample


class FlattenError(ValueError):
    pass


@dataclass(frozen=True)
class Expansion:
    base: Structure
    symbols: Tuple[Tuple[str, int], ...]
    added: Added

    def __post_init__(self):
        for (name, arity), tuples in zip(self.symbols, self.added):
            for t in tuples:
                if len(t) != arity or any(not 0 <= x < self.base.size for x in t):
                    raise ValueError(f"bad tuple {t} for {name}/{arity}")

    @functools.cached_property
    def structure(self) -> Structure:
        return self.base.expand({n: (a, ts) for (n, a), ts in zip(self.symbols, self.added)})

    def __getitem__(self, name):
        for (n, _), ts in zip(self.symbols, self.added):
            if n == name:
                return ts
        raise KeyError(name)

    def to_json(self):
        return {n: sorted(list(t) for t in ts) for (n, _), ts in zip(self.symbols, self.added)}


@dataclass(eq=False)
class PresentationScheme:
    """A family of expansions by ``symbols``.

    ``generate(S)`` yields the added interpretations of every member
    expansion once, in a fixed order; ``is_member(S, added)`` decides
    membership directly. ``axiom_builder(vocab)`` returns a defining sentence
    for elementary schemes. ``may_be_empty`` marks single-symbol schemes whose
    relation can be empty but is never full on a non-empty domain.
    """

    name: str
    symbols: Tuple[Tuple[str, int], ...]
    generate: Callable[[Structure], Iterator[Added]]
    is_member: Callable[[Structure, Added], bool]
    axiom_builder: Optional[Callable[[Vocabulary], Formula]] = None
    sampler: Optional[Callable[[Structure, random.Random], Optional[Added]]] = None
    counter: Optional[Callable[[Structure], int]] = None
    may_be_empty: bool = True
    components: Tuple["PresentationScheme", ...] = ()

    @property
    def symbol_names(self):
        return tuple(n for n, _ in self.symbols)

    @property
    def elementary(self) -> bool:
        return self.axiom_builder is not None

    def axiom(self, vocab: Vocabulary) -> Optional[Formula]:
        return None if self.axiom_builder is None else self.axiom_builder(vocab)

    def expansions(self, s: Structure, cap: int = DEFAULT_CAP) -> Iterator[Expansion]:
        return enumerate_expansions(self, s, cap)

    def member(self, exp: Expansion) -> bool:
        return self.is_member(exp.base, exp.added)

    def count(self, s: Structure, cap: int = DEFAULT_CAP) -> int:
        if self.counter is not None:
            return self.counter(s)
        c = 0
        for _ in self.generate(s):
            c += 1
            if c > cap:
                raise ExpansionCap(f"more than {cap} expansions")
        return c

    def sample(self, s: Structure, rng: random.Random) -> Optional[Added]:
        if self.sampler is not None:
            return self.sampler(s, rng)
        pool = list(itertools.islice(self.generate(s), 100_000))
        return rng.choice(pool) if pool else None

    def expansion(self, s: Structure, added) -> Expansion:
        return Expansion(s, self.symbols, tuple(frozenset(map(tuple, a)) for a in added))

    def renamed(self, mapping: Dict[str, str]) -> "PresentationScheme":
        symbols = tuple((mapping.get(n, n), a) for n, a in self.symbols)
        ax = self.axiom_builder
        return PresentationScheme(
            f"{self.name}[{','.join(f'{k}->{v}' for k, v in mapping.items())}]", symbols, self.generate,
            self.is_member, None if ax is None else (lambda v: rename_relations(ax(v), mapping)),
            self.sampler, self.counter, self.may_be_empty, self.components)


# -- helpers -----------------------------------------------------------------

def _neighbors(s: Structure):
    return [sorted(x) for x in s.adjacency]


def _order_pairs(seq):
    return frozenset((seq[i], seq[j]) for i in range(len(seq)) for j in range(i, len(seq)))


def _is_linear_order(rel, elems) -> bool:
    elems = list(elems)
    es = set(elems)
    if any(a not in es or b not in es for a, b in rel):
        return False
    for a in elems:
        if (a, a) not in rel:
            return False
    for a, b in itertools.combinations(elems, 2):
        if ((a, b) in rel) == ((b, a) in rel):
            return False
    for a, b, c in itertools.permutations(elems, 3):
        if (a, b) in rel and (b, c) in rel and (a, c) not in rel:
            return False
    return True


def _function_of(rel, n) -> Optional[List[int]]:
    f = [None] * n
    for a, b in rel:
        if f[a] is not None:
            return None
        f[a] = b
    return f


def _perm_of(rel, n) -> Optional[List[int]]:
    f = _function_of(rel, n)
    if f is None or None in f or sorted(f) != list(range(n)):
        return None
    return f


def orbits(perm: Sequence[int]) -> List[List[int]]:
    seen = set()
    out = []
    for s in range(len(perm)):
        if s in seen:
            continue
        cyc = []
        x = s
        while x not in seen:
            seen.add(x)
            cyc.append(x)
            x = perm[x]
        out.append(cyc)
    return out


def _graph(perm):
    return frozenset((i, p) for i, p in enumerate(perm))


def _cycle_pairs(cyc):
    m = len(cyc)
    return [(cyc[i], cyc[(i + 1) % m]) for i in range(m)]


def _single_orbit_cycles(elems):
    """Cyclic arrangements of ``elems`` starting at the first element."""
    elems = list(elems)
    if not elems:
        yield []
        return
    for rest in itertools.permutations(elems[1:]):
        yield [elems[0], *rest]


def _stirling_first(n, k):
    # unsigned Stirling numbers of the first kind: permutations of n with k cycles
    table = [[0] * (n + 1) for _ in range(n + 1)]
    table[0][0] = 1
    for i in range(1, n + 1):
        for j in range(1, i + 1):
            table[i][j] = table[i - 1][j - 1] + (i - 1) * table[i - 1][j]
    return table[n][k] if k <= n else 0


def _derangements(n):
    d = [1, 0]
    for i in range(2, n + 1):
        d.append((i - 1) * (d[-1] + d[-2]))
    return d[n]


# -- builtin schemes ---------------------------------------------------------

def linear_order_scheme(le: str = synth.LE) -> PresentationScheme:
    def gen(s):
        for perm in itertools.permutations(range(s.size)):
            yield (_order_pairs(perm),)

    def member(s, added):
        return _is_linear_order(added[0], range(s.size))

    def sample(s, rng):
        perm = list(range(s.size))
        rng.shuffle(perm)
        return (_order_pairs(perm),)

    return PresentationScheme("linear-order", ((le, 2),), gen, member,
                              lambda v: synth.linear_order_axiom(le), sample,
                              lambda s: math.factorial(s.size), may_be_empty=False)


def local_order_scheme(lo: str = synth.LO) -> PresentationScheme:
    def build(nbrs, choice):
        return frozenset((x, a, b) for x, seq in zip(range(len(nbrs)), choice) for a, b in _order_pairs(seq))

    def gen(s):
        nbrs = _neighbors(s)
        for choice in itertools.product(*(itertools.permutations(ns) for ns in nbrs)):
            yield (build(nbrs, choice),)

    def member(s, added):
        nbrs = _neighbors(s)
        per = [set() for _ in range(s.size)]
        for x, a, b in added[0]:
            per[x].add((a, b))
        return all(_is_linear_order(per[x], nbrs[x]) for x in range(s.size))

    def sample(s, rng):
        nbrs = _neighbors(s)
        choice = []
        for ns in nbrs:
            ns = list(ns)
            rng.shuffle(ns)
            choice.append(ns)
        return (build(nbrs, choice),)

    return PresentationScheme("local-order", ((lo, 3),), gen, member,
                              lambda v: synth.local_order_axiom(v, lo), sample,
                              lambda s: math.prod(math.factorial(len(ns)) for ns in s.adjacency))


def circular_successor_scheme(sym: str = "S") -> PresentationScheme:
    def gen(s):
        for cyc in _single_orbit_cycles(range(s.size)):
            yield (frozenset(_cycle_pairs(cyc)),)

    def member(s, added):
        p = _perm_of(added[0], s.size)
        return p is not None and len(orbits(p)) <= 1

    def sample(s, rng):
        rest = list(range(1, s.size))
        rng.shuffle(rest)
        return (frozenset(_cycle_pairs([0, *rest] if s.size else [])),)

    return PresentationScheme("circ-succ", ((sym, 2),), gen, member, None, sample,
                              lambda s: math.factorial(max(s.size - 1, 0)), may_be_empty=False)


def linear_successor_scheme(sym: str = "S") -> PresentationScheme:
    def succ(perm):
        return frozenset(zip(perm, perm[1:]))

    def gen(s):
        for perm in itertools.permutations(range(s.size)):
            yield (succ(perm),)

    def member(s, added):
        rel = added[0]
        n = s.size
        if n == 0:
            return not rel
        f = _function_of(rel, n)
        if f is None or len(set(b for _, b in rel)) != len(rel) or len(rel) != n - 1:
            return False
        starts = set(range(n)) - {b for _, b in rel}
        if len(starts) != 1:
            return False
        x, seen = starts.pop(), 1
        while f[x] is not None:
            x = f[x]
            seen += 1
            if seen > n:
                return False
        return seen == n

    def sample(s, rng):
        perm = list(range(s.size))
        rng.shuffle(perm)
        return (succ(perm),)

    return PresentationScheme("lin-succ", ((sym, 2),), gen, member, None, sample,
                              lambda s: math.factorial(s.size))


def _permutation_axiom(sym):
    one_out = forall("x", exists("y", conj(atom(sym, "x", "y"),
                                           forall("z", implies(atom(sym, "x", "z"), eq("z", "y"))))))
    one_in = forall("y", exists("x", conj(atom(sym, "x", "y"),
                                          forall("z", implies(atom(sym, "z", "y"), eq("z", "x"))))))
    return conj(one_out, one_in)


def permutation_scheme(sym: str = "S", max_orbits: Optional[int] = None,
                       fixed_point_free: bool = False) -> PresentationScheme:
    def ok(perm):
        if fixed_point_free and any(p == i for i, p in enumerate(perm)):
            return False
        return max_orbits is None or len(orbits(perm)) <= max_orbits

    def gen(s):
        for perm in itertools.permutations(range(s.size)):
            if ok(perm):
                yield (_graph(perm),)

    def member(s, added):
        p = _perm_of(added[0], s.size)
        return p is not None and ok(p)

    def sample(s, rng):
        if s.size and count(s) == 0:
            return None
        perm = list(range(s.size))
        while True:
            rng.shuffle(perm)
            if ok(perm):
                return (_graph(perm),)

    def count(s):
        n = s.size
        if fixed_point_free:
            return _derangements(n) if max_orbits is None else sum(1 for _ in gen(s))
        if max_orbits is None:
            return math.factorial(n)
        return 1 if n == 0 else sum(_stirling_first(n, j) for j in range(1, max_orbits + 1))

    if fixed_point_free:
        name, axiom = "derangement", lambda v: conj(_permutation_axiom(sym), forall("x", neg(atom(sym, "x", "x"))))
    elif max_orbits is not None:
        name, axiom = f"perm-k={max_orbits}", None
    else:
        name, axiom = "perm", lambda v: _permutation_axiom(sym)
    return PresentationScheme(name, ((sym, 2),), gen, member, axiom, sample, count, may_be_empty=False)


def local_circular_scheme(sym: str = "C", max_degree: int = 4) -> PresentationScheme:
    """Per-vertex single-orbit permutation of the neighbors. The axiom bounds
    orbit length by ``max_degree`` and is exact on structures of that
    Gaifman degree or less."""

    def build(choice):
        return frozenset((x, a, b) for x, cyc in enumerate(choice) for a, b in (_cycle_pairs(cyc) if cyc else []))

    def gen(s):
        nbrs = _neighbors(s)
        for choice in itertools.product(*(list(_single_orbit_cycles(ns)) for ns in nbrs)):
            yield (build(choice),)

    def member(s, added):
        nbrs = _neighbors(s)
        per = [dict() for _ in range(s.size)]
        for x, a, b in added[0]:
            if a in per[x]:
                return False
            per[x][a] = b
        for x in range(s.size):
            ns = nbrs[x]
            f = per[x]
            if set(f) != set(ns) or sorted(f.values()) != ns:
                return False
            if ns:
                y, steps = f[ns[0]], 1
                while y != ns[0]:
                    y, steps = f[y], steps + 1
                if steps != len(ns):
                    return False
        return True

    def sample(s, rng):
        choice = []
        for ns in _neighbors(s):
            rest = ns[1:]
            rng.shuffle(rest)
            choice.append(ns[:1] + rest)
        return (build(choice),)

    def axiom(vocab):
        nb = lambda x, y: synth.sphere(vocab, 1, x, y)
        C = lambda y, z: atom(sym, "x", y, z)
        support = forall(["y", "z"], implies(C("y", "z"), conj(nb("x", "y"), nb("x", "z"))))
        out = forall("y", implies(nb("x", "y"), exists("z", conj(C("y", "z"),
                                                                   forall("w", implies(C("y", "w"), eq("w", "z")))))))
        inn = forall("z", implies(nb("x", "z"), exists("y", conj(C("y", "z"),
                                                                  forall("w", implies(C("w", "z"), eq("w", "y")))))))
        steps = []
        for length in range(0, max(max_degree - 1, 0) + 1):
            mids = synth.fresh({"x", "y", "z"}, max(length - 1, 0), "m")
            if length == 0:
                steps.append(eq("y", "z"))
            else:
                chain = ["y", *mids, "z"]
                steps.append(exists(mids, conj(*(C(a, b) for a, b in zip(chain, chain[1:])))))
        single = forall(["y", "z"], implies(conj(nb("x", "y"), nb("x", "z")), disj(*steps)))
        return forall("x", conj(support, out, inn, single))

    return PresentationScheme("local-circ", ((sym, 3),), gen, member, axiom, sample,
                              lambda s: math.prod(math.factorial(max(len(ns) - 1, 0)) for ns in s.adjacency))


def neighbor_selector_scheme(sym: str = "N") -> PresentationScheme:
    def gen(s):
        for choice in itertools.product(*_neighbors(s)):
            yield (frozenset(enumerate(choice)),)

    def member(s, added):
        f = _function_of(added[0], s.size)
        return f is not None and all(y is not None and y in s.adjacency[x] for x, y in enumerate(f))

    def sample(s, rng):
        nbrs = _neighbors(s)
        if any(not ns for ns in nbrs):
            return None
        return (frozenset((x, rng.choice(ns)) for x, ns in enumerate(nbrs)),)

    def axiom(vocab):
        return conj(forall("x", exists("y", atom(sym, "x", "y"))),
                    forall(["x", "y", "z"], implies(conj(atom(sym, "x", "y"), atom(sym, "x", "z")), eq("y", "z"))),
                    forall(["x", "y"], implies(atom(sym, "x", "y"), synth.sphere(vocab, 1, "x", "y"))))

    return PresentationScheme("neighbor-sel", ((sym, 2),), gen, member, axiom, sample,
                              lambda s: math.prod(len(ns) for ns in s.adjacency), may_be_empty=False)


def selector_scheme(k: int, r: int, phi: Formula, sym: str = "Z") -> PresentationScheme:
    """For every ``k``-tuple, a unique selected element outside the radius-``r``
    balls of the tuple that satisfies the one-variable formula ``phi``."""
    if k < 0 or r < 0:
        raise ValueError("k and r must be non-negative")
    if len(phi.free_vars) > 1:
        raise ValueError("selector formula must have at most one free variable")
    var = next(iter(phi.free_vars), "y")

    def candidates(s):
        ev = Evaluator(s)
        good = [a for a in range(s.size) if ev.holds(phi, {var: a})]
        balls = [ball(s, a, r) for a in range(s.size)]
        out = []
        for tup in itertools.product(range(s.size), repeat=k):
            blocked = set().union(*(balls[a] for a in tup)) if tup else set()
            out.append((tup, [y for y in good if y not in blocked]))
        return out

    def gen(s):
        cands = candidates(s)
        for choice in itertools.product(*(c for _, c in cands)):
            yield (frozenset(tup + (y,) for (tup, _), y in zip(cands, choice)),)

    def member(s, added):
        cands = candidates(s)
        chosen: Dict[tuple, list] = {}
        for t in added[0]:
            chosen.setdefault(t[:-1], []).append(t[-1])
        return len(chosen) == len(cands) and all(
            len(chosen.get(tup, [])) == 1 and chosen[tup][0] in c for tup, c in cands)

    def sample(s, rng):
        cands = candidates(s)
        if any(not c for _, c in cands):
            return None
        return (frozenset(tup + (rng.choice(c),) for tup, c in cands),)

    def count(s):
        return math.prod(len(c) for _, c in candidates(s))

    def axiom(vocab):
        xs = [f"x{i}" for i in range(1, k + 1)]
        from .logic.ast import substitute
        unique = forall(xs, exists("y", conj(atom(sym, *xs, "y"),
                                             forall("w", implies(atom(sym, *xs, "w"), eq("w", "y"))))))
        side = forall(xs + ["y"], implies(atom(sym, *xs, "y"), conj(
            *(neg(synth.beta(vocab, r, x, "y")) for x in xs), substitute(phi, {var: "y"}) if var != "y" else phi)))
        return conj(unique, side)

    return PresentationScheme(f"z-sel({k},{r})", ((sym, k + 1),), gen, member, axiom, sample, count,
                              may_be_empty=False)


# -- join and flatten --------------------------------------------------------

def join(schemes: Sequence[PresentationScheme]) -> PresentationScheme:
    schemes = list(schemes)
    if not schemes:
        raise ValueError("join needs at least one scheme")
    if len(schemes) == 1:
        return schemes[0]
    names = [n for sc in schemes for n in sc.symbol_names]
    if len(set(names)) != len(names):
        raise ValueError(f"symbol clash in join: {names}")
    widths = [len(sc.symbols) for sc in schemes]

    def split(added):
        out, i = [], 0
        for w in widths:
            out.append(tuple(added[i:i + w]))
            i += w
        return out

    def gen(s):
        lists = [list(sc.generate(s)) for sc in schemes]
        for combo in itertools.product(*lists):
            yield tuple(x for part in combo for x in part)

    def member(s, added):
        return len(added) == sum(widths) and all(sc.is_member(s, a) for sc, a in zip(schemes, split(added)))

    def sample(s, rng):
        parts = [sc.sample(s, rng) for sc in schemes]
        return None if any(p is None for p in parts) else tuple(x for p in parts for x in p)

    axiom = None
    if all(sc.elementary for sc in schemes):
        axiom = lambda v: conj(*(sc.axiom(v) for sc in schemes))
    counter = None
    if all(sc.counter is not None for sc in schemes):
        counter = lambda s: math.prod(sc.counter(s) for sc in schemes)
    symbols = tuple(sym for sc in schemes for sym in sc.symbols)
    return PresentationScheme("join(" + ",".join(sc.name for sc in schemes) + ")", symbols, gen, member, axiom,
                              sample, counter, components=tuple(schemes))


@dataclass
class Flattening:
    """A single-relation scheme coding a multi-relation one.

    ``encode`` defines the flat relation from the components (free variables
    ``flat_vars``); ``decode[name]`` recovers a component from the flat
    relation (free variables ``slots[name]``).
    """

    scheme: PresentationScheme
    source: PresentationScheme
    flat: str
    flat_vars: Tuple[str, ...]
    encode: Formula
    decode: Dict[str, Formula]
    slots: Dict[str, Tuple[str, ...]]
    markers: Tuple[bool, ...]

    def encode_added(self, n: int, added: Added) -> FrozenSet[tuple]:
        parts = []
        for (name, arity), rel, marked in zip(self.source.symbols, added, self.markers):
            if n and marked and len(rel) == n ** arity:
                raise FlattenError(f"{name} is full; it cannot be told apart from the empty marker")
            if n and not rel:
                if not marked:
                    raise FlattenError(f"{name} is empty and has no empty marker")
                rel = itertools.product(range(n), repeat=arity)
            parts.append(sorted(rel))
        return frozenset(sum(combo, ()) for combo in itertools.product(*parts))

    def to_flat(self, theta: Formula) -> Formula:
        """Rewrite ``theta`` over the components into a sentence over ``flat``."""
        for name, _ in self.source.symbols:
            theta = substitute_relation_direct(theta, name, self.decode[name], [], self.slots[name])
        return theta

    def from_flat(self, theta: Formula) -> Formula:
        """Rewrite ``theta`` over ``flat`` into a sentence over the components."""
        return substitute_relation_direct(theta, self.flat, self.encode, [], self.flat_vars)

    def decode_added(self, n: int, flat_rel) -> Added:
        out = []
        offset = 0
        for (name, arity), marked in zip(self.source.symbols, self.markers):
            proj = frozenset(t[offset:offset + arity] for t in flat_rel)
            if marked and n and len(proj) == n ** arity:
                proj = frozenset()
            out.append(proj)
            offset += arity
        return tuple(out)


def flatten(scheme: PresentationScheme, flat: str = "R") -> Flattening:
    """Code the relations of ``scheme`` as blocks of one relation ``flat``.

    The flat relation is the product of the components, so each component is
    recovered by existential projection onto its block. A component that
    may be empty is replaced by the full relation of its arity when empty,
    and decoded as empty when its projection is full.
    """
    symbols = scheme.symbols
    if not symbols:
        raise ValueError("flatten needs at least one symbol")
    if flat in scheme.symbol_names:
        raise ValueError(f"flat symbol {flat} clashes with a component")
    single = len(symbols) == 1
    comps = scheme.components if len(scheme.components) == len(symbols) else None
    markers = tuple(False if single else (comps[i].may_be_empty if comps else True) for i in range(len(symbols)))
    total = sum(a for _, a in symbols)
    xs = tuple(f"x{i}" for i in range(1, total + 1))
    blocks, slots = [], {}
    i = 0
    for name, a in symbols:
        blocks.append(xs[i:i + a])
        slots[name] = xs[i:i + a]
        i += a

    enc_parts = []
    for (name, a), block, marked in zip(symbols, blocks, markers):
        lit = atom(name, *block)
        if marked:
            us = tuple(f"v{j}" for j in range(1, a + 1))
            lit = disj(lit, neg(exists(us, atom(name, *us))))
        enc_parts.append(lit)
    encode = conj(*enc_parts)

    decode = {}
    for (name, a), block, marked in zip(symbols, blocks, markers):
        others = [v for v in xs if v not in block]
        proj = exists(others, atom(flat, *xs))
        if marked:
            primed = tuple(f"w{j}" for j in range(1, a + 1))
            full = forall(primed, exists(others, atom(flat, *_replace_block(xs, block, primed))))
            proj = conj(proj, neg(full))
        decode[name] = proj

    result = Flattening(None, scheme, flat, xs, encode, decode, slots, markers)

    def gen(s):
        for added in scheme.generate(s):
            yield (result.encode_added(s.size, added),)

    def member(s, added):
        rel = added[0]
        parts = result.decode_added(s.size, rel)
        if not scheme.is_member(s, parts):
            return False
        try:
            return result.encode_added(s.size, parts) == rel
        except FlattenError:
            return False

    def sample(s, rng):
        added = scheme.sample(s, rng)
        return None if added is None else (result.encode_added(s.size, added),)

    def flat_axiom(vocab):
        decoded = scheme.axiom(vocab)
        re_encoded = encode
        for name, a in symbols:
            decoded = substitute_relation_direct(decoded, name, decode[name], [], slots[name])
            re_encoded = substitute_relation_direct(re_encoded, name, decode[name], [], slots[name])
        return conj(decoded, forall(list(xs), iff(atom(flat, *xs), re_encoded)))

    axiom = flat_axiom if scheme.elementary else None

    result.scheme = PresentationScheme(f"flat({scheme.name})", ((flat, total),), gen, member, axiom, sample,
                                       scheme.counter, may_be_empty=False)
    return result


def _replace_block(xs, block, new):
    m = dict(zip(block, new))
    return tuple(m.get(v, v) for v in xs)


# -- registry ----------------------------------------------------------------

SCHEME_NAMES = ("linear-order", "local-order", "circ-succ", "lin-succ", "perm", "perm-k=K", "derangement",
                "local-circ", "neighbor-sel", "z-sel(k,r,phi)", "join(a,b,...)", "flat(a)")


def builtin_scheme(name: str, **params) -> PresentationScheme:
    """Look up a scheme by its command-line name.

    ``perm-k=K`` takes ``K`` from the name or ``k=``; ``z-sel`` needs
    ``k``, ``r`` and ``phi``; ``join(a,b)`` and ``flat(a)`` nest names.
    """
    name = name.strip()
    m = re.fullmatch(r"(join|flat)\((.*)\)", name)
    if m:
        parts = _split_args(m.group(2))
        if m.group(1) == "flat":
            if len(parts) != 1:
                raise ValueError("flat takes one scheme")
            return flatten(builtin_scheme(parts[0], **params)).scheme
        return join([builtin_scheme(p, **params) for p in parts])
    m = re.fullmatch(r"perm-k=(\d+)", name)
    if m or name == "perm-k":
        k = int(m.group(1)) if m else params.get("k")
        if k is None:
            raise ValueError("perm-k needs k")
        return permutation_scheme(params.get("sym", "S"), max_orbits=int(k))
    if name.startswith("z-sel"):
        for p in ("k", "r", "phi"):
            if p not in params:
                raise ValueError(f"z-sel needs parameter {p}")
        return selector_scheme(int(params["k"]), int(params["r"]), params["phi"])
    table = {
        "linear-order": lambda: linear_order_scheme(),
        "local-order": lambda: local_order_scheme(),
        "circ-succ": lambda: circular_successor_scheme(),
        "lin-succ": lambda: linear_successor_scheme(),
        "perm": lambda: permutation_scheme(),
        "derangement": lambda: permutation_scheme("D", fixed_point_free=True),
        "local-circ": lambda: local_circular_scheme(max_degree=params.get("max_degree", 4)),
        "neighbor-sel": lambda: neighbor_selector_scheme(),
    }
    if name not in table:
        raise ValueError(f"unknown scheme {name!r}")
    return table[name]()


def _split_args(text):
    out, depth, cur = [], 0, ""
    for ch in text:
        if ch == "," and depth == 0:
            out.append(cur.strip())
            cur = ""
            continue
        depth += ch == "("
        depth -= ch == ")"
        cur += ch
    if cur.strip():
        out.append(cur.strip())
    return out


# -- enumeration and invariance ----------------------------------------------

def enumerate_expansions(scheme: PresentationScheme, s: Structure, cap: int = DEFAULT_CAP) -> Iterator[Expansion]:
    if scheme.counter is not None and scheme.counter(s) > cap:
        raise ExpansionCap(f"{scheme.name} has {scheme.counter(s)} expansions, cap is {cap}")
    count = 0
    for added in scheme.generate(s):
        count += 1
        if count > cap:
            raise ExpansionCap(f"more than {cap} expansions")
        yield Expansion(s, scheme.symbols, added)


@dataclass
class InvarianceResult:
    invariant: bool
    value: Optional[bool]
    expansions: int
    counterexample: Optional[Tuple[Expansion, Expansion]] = None
    mode: str = "exhaustive"
    seed: Optional[int] = None

    def __bool__(self):
        return self.invariant

    def to_json(self):
        out = {"invariant": self.invariant, "value": self.value, "expansions": self.expansions, "mode": self.mode}
        if self.seed is not None:
            out["seed"] = self.seed
        if self.counterexample is not None:
            out["counterexample"] = [e.to_json() for e in self.counterexample]
        return out


class ExpansionEvaluator:
    """Evaluates sentences over many expansions of one base structure,
    sharing the work on base-only subformulas."""

    def __init__(self, base: Structure, max_cells: Optional[int] = None):
        kw = {} if max_cells is None else {"max_cells": max_cells}
        self.base = base
        self.base_eval = Evaluator(base, **kw)
        self.kw = kw

    def evaluator(self, exp: Expansion) -> Evaluator:
        return Evaluator(exp.structure, parent=self.base_eval, **self.kw)

    def holds(self, theta: Formula, exp: Expansion, env=None) -> bool:
        return self.evaluator(exp).holds(theta, env)


def _check_sentence(theta, scheme, s):
    if theta.free_vars:
        raise ValueError(f"not a sentence: free variables {sorted(theta.free_vars)}")
    allowed = set(s.vocab.names) | set(scheme.symbol_names)
    stray = theta.relations - allowed
    if stray:
        raise ValueError(f"relations {sorted(stray)} are neither in the structure nor the scheme")


def is_invariant(theta: Formula, scheme: PresentationScheme, s: Structure, mode: str = "exhaustive",
                 samples: int = 100, seed: int = 0, cap: int = DEFAULT_CAP, jobs: int = 1) -> InvarianceResult:
    """Do all expansions (or ``samples`` seeded random ones) agree on ``theta``?

    With ``jobs > 1`` the expansions are split into contiguous chunks that
    worker processes evaluate; the verdict and counterexample are the same
    as the sequential ones.
    """
    _check_sentence(theta, scheme, s)
    ev = ExpansionEvaluator(s)
    first = None
    count = 0
    if mode == "exhaustive":
        stream = enumerate_expansions(scheme, s, cap)
    elif mode == "sampled":
        stream = _sampled(scheme, s, samples, seed)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if jobs > 1:
        exps = list(stream)
        stream = zip(exps, _parallel_values(theta, s, [e.added for e in exps], scheme.symbols, jobs))
    else:
        stream = ((e, None) for e in stream)
    for exp, v in stream:
        count += 1
        if v is None:
            v = ev.holds(theta, exp)
        if first is None:
            first = (exp, v)
        elif v != first[1]:
            return InvarianceResult(False, None, count, (first[0], exp), mode, seed if mode == "sampled" else None)
    if first is None:
        raise NotAPresentation(f"{scheme.name} has no expansion of this structure")
    return InvarianceResult(True, first[1], count, None, mode, seed if mode == "sampled" else None)


def _chunk_values(theta, s, symbols, chunk):
    ev = ExpansionEvaluator(s)
    return [ev.holds(theta, Expansion(s, symbols, added)) for added in chunk]


def _parallel_values(theta, s, addeds, symbols, jobs):
    from concurrent.futures import ProcessPoolExecutor
    size = max(1, -(-len(addeds) // jobs))
    chunks = [addeds[i:i + size] for i in range(0, len(addeds), size)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        parts = pool.map(_chunk_values, *zip(*[(theta, s, symbols, c) for c in chunks]))
        return [v for part in parts for v in part]


def _sampled(scheme, s, samples, seed):
    rng = random.Random(seed)
    for _ in range(samples):
        added = scheme.sample(s, rng)
        if added is None:
            return
        yield Expansion(s, scheme.symbols, added)


def invariant_eval(theta: Formula, scheme: PresentationScheme, s: Structure, check: bool = True,
                   cap: int = DEFAULT_CAP) -> bool:
    """Value of an invariant sentence. With ``check``, every expansion is
    evaluated and disagreement raises :class:`InvarianceViolation`;
    otherwise the first expansion decides."""
    if check:
        res = is_invariant(theta, scheme, s, cap=cap)
        if not res.invariant:
            raise InvarianceViolation("expansions disagree", res.counterexample)
        return res.value
    _check_sentence(theta, scheme, s)
    for exp in enumerate_expansions(scheme, s, cap):
        return ExpansionEvaluator(s).holds(theta, exp)
    raise NotAPresentation(f"{scheme.name} has no expansion of this structure")


# -- structural properties ---------------------------------------------------

def restrict_expansion(exp: Expansion, subset) -> Tuple[Structure, Added]:
    sub, remap = restrict(exp.base, subset)
    added = tuple(frozenset(tuple(remap[x] for x in t) for t in rel if all(x in remap for x in t))
                  for rel in exp.added)
    return sub, added


def check_scheme_properties(scheme: PresentationScheme, s: Structure, b, c, r: int,
                            cap: int = DEFAULT_CAP) -> Dict[str, bool]:
    b, c = frozenset(b), frozenset(c)
    if b & c:
        raise ValueError("B and C must be disjoint")
    exps = list(enumerate_expansions(scheme, s, cap))
    sb, _ = restrict(s, b)
    sc, _ = restrict(s, c)
    localization = True
    pairs = set()
    for e in exps:
        rb, ab = restrict_expansion(e, b)
        rc, ac = restrict_expansion(e, c)
        if not (scheme.is_member(rb, ab) and scheme.is_member(rc, ac)):
            localization = False
        pairs.add((ab, ac))
    members_b = list(scheme.generate(sb))
    members_c = list(scheme.generate(sc))
    amalgamation = all((x, y) in pairs for x in members_b for y in members_c)
    bounded = True
    base_balls = [ball(s, a, r) for a in range(s.size)]
    for e in exps:
        st = e.structure
        for a in range(s.size):
            if not ball(st, a, 1) <= base_balls[a]:
                bounded = False
                break
        if not bounded:
            break
    return {"localization": localization, "amalgamation": amalgamation, "neighborhood_bounded": bounded}
