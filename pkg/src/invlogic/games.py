"""Ehrenfeucht-Fraisse games and the ordered-unary-structure pipeline."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Tuple

from . import synth
from .logic import ast
from .structures import Structure, hanf_equivalent
from .schemes import Expansion, _order_pairs

DEFAULT_NODE_CAP = 5_000_000


class GameCapExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class GamePosition:
    left: Structure
    right: Structure
    pairs: Tuple[Tuple[int, int], ...]
    rounds: int

    def __post_init__(self):
        if self.left.vocab != self.right.vocab:
            raise ValueError("game needs structures over the same vocabulary")


@dataclass
class GameResult:
    duplicator_wins: bool
    rounds: int
    nodes_explored: int

    def to_json(self):
        return {"duplicator_wins": self.duplicator_wins, "rounds": self.rounds,
                "nodes_explored": self.nodes_explored}


class _Solver:
    def __init__(self, s1: Structure, s2: Structure, cap: int):
        self.s1, self.s2 = s1, s2
        self.rels = [(s1[name], s2[name], arity) for name, arity in s1.vocab.relations]
        self.memo: Dict[Tuple[FrozenSet, int], bool] = {}
        self.nodes = 0
        self.cap = cap

    def extends(self, pairs, a, b) -> bool:
        """Whether adding (a, b) to the partial isomorphism ``pairs`` keeps it one."""
        dom = [p[0] for p in pairs] + [a]
        cod = [p[1] for p in pairs] + [b]
        last = len(dom) - 1
        for x, y in pairs:
            if (x == a) != (y == b):
                return False
        for r1, r2, arity in self.rels:
            for idx in itertools.product(range(len(dom)), repeat=arity):
                if last not in idx:
                    continue
                if (tuple(dom[i] for i in idx) in r1) != (tuple(cod[i] for i in idx) in r2):
                    return False
        return True

    def wins(self, pairs: FrozenSet, rounds: int) -> bool:
        if rounds == 0:
            return True
        key = (pairs, rounds)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        self.nodes += 1
        if self.nodes > self.cap:
            raise GameCapExceeded(f"more than {self.cap} game positions")
        plist = sorted(pairs)
        used1 = {p[0] for p in pairs}
        used2 = {p[1] for p in pairs}
        result = True
        # spoiler tries every fresh element on either side
        for side in (0, 1):
            mine, other = (self.s1, self.s2) if side == 0 else (self.s2, self.s1)
            used = used1 if side == 0 else used2
            for a in range(mine.size):
                if a in used:
                    continue
                answered = False
                for b in range(other.size):
                    pa, pb = (a, b) if side == 0 else (b, a)
                    if self.extends(plist, pa, pb) and self.wins(pairs | {(pa, pb)}, rounds - 1):
                        answered = True
                        break
                if not answered:
                    result = False
                    break
            if not result:
                break
        self.memo[key] = result
        return result


def ef_game(s1: Structure, s2: Structure, k: int, cap: int = DEFAULT_NODE_CAP) -> GameResult:
    if s1.vocab != s2.vocab:
        raise ValueError("game needs structures over the same vocabulary")
    if k < 0:
        raise ValueError("rounds must be non-negative")
    solver = _Solver(s1, s2, cap)
    won = solver.wins(frozenset(), k)
    return GameResult(won, k, solver.nodes)


def ef_duplicator_wins(s1: Structure, s2: Structure, k: int, cap: int = DEFAULT_NODE_CAP) -> bool:
    """Exact k-round game value by memoized minimax.

    Positions are keyed by the set of pairs played (order and repeats do not
    matter for the outcome) and the remaining rounds. Spoiler moves onto an
    already-played element are skipped: duplicator always answers them with
    the matching element at no cost.
    """
    return ef_game(s1, s2, k, cap).duplicator_wins


# -- rank-k characteristic sentences (independent oracle) ---------------------

def characteristic_sentence(s: Structure, k: int) -> ast.Formula:
    """The rank-k Hintikka sentence of ``s``.

    A structure satisfies it exactly when it agrees with ``s`` on every
    sentence of quantifier rank at most k, and every such sentence is a
    disjunction of these. So it serves as a sentence-level check of game
    results that shares nothing with the game search.
    """
    names = [f"x{i + 1}" for i in range(k)]
    cache: Dict[Tuple[Tuple[int, ...], int], ast.Formula] = {}

    def atomic(tup):
        xs = names[:len(tup)]
        lits = []
        for i, j in itertools.combinations(range(len(tup)), 2):
            e = ast.eq(xs[i], xs[j])
            lits.append(e if tup[i] == tup[j] else ast.neg(e))
        for name, arity in s.vocab.relations:
            rel = s[name]
            for idx in itertools.product(range(len(tup)), repeat=arity):
                a = ast.atom(name, *(xs[i] for i in idx))
                lits.append(a if tuple(tup[i] for i in idx) in rel else ast.neg(a))
        return ast.conj(*lits)

    def build(tup, m):
        key = (tup, m)
        if key in cache:
            return cache[key]
        base = atomic(tup)
        if m == 0:
            out = base
        else:
            v = names[len(tup)]
            succ = {}
            for b in range(s.size):
                f = build(tup + (b,), m - 1)
                succ.setdefault(str(f), f)
            opts = [succ[key] for key in sorted(succ)]
            out = ast.conj(base, *(ast.exists(v, f) for f in opts), ast.forall(v, ast.disj(*opts)))
        cache[key] = out
        return out

    return build((), k)


# -- unary structures ----------------------------------------------------------

def _check_unary(s: Structure):
    bad = [name for name, arity in s.vocab.relations if arity != 1]
    if bad:
        raise ValueError(f"non-unary relations {bad}")


def unary_block_order(s: Structure, le: str = synth.LE) -> Expansion:
    """Order elements by their set of unary labels, then by index.

    Label sets are ranked as bitmasks with the first relation as the high
    bit, larger masks first; for P, Q this gives {P,Q}, {P}, {Q}, {}.
    """
    _check_unary(s)
    names = s.vocab.names
    width = len(names)

    def mask(a):
        return sum(1 << (width - 1 - i) for i, nm in enumerate(names) if (a,) in s[nm])

    order = sorted(s.universe, key=lambda a: (-mask(a), a))
    return Expansion(s, ((le, 2),), (_order_pairs(order),))


@dataclass
class UnaryEvidence:
    threshold_equivalent: bool
    duplicator_wins: bool
    rounds: int
    nodes_explored: int = 0
    prediction: Optional[bool] = field(default=None)

    @property
    def consistent(self) -> bool:
        return not self.threshold_equivalent or self.duplicator_wins

    def to_json(self):
        return {"threshold_equivalent": self.threshold_equivalent,
                "duplicator_wins": self.duplicator_wins, "rounds": self.rounds,
                "prediction": self.prediction, "consistent": self.consistent,
                "nodes_explored": self.nodes_explored}


def unary_invariance_evidence(s1: Structure, s2: Structure, k: int) -> UnaryEvidence:
    """Compare count-threshold equivalence at 2**k with the k-round game on
    the block-ordered expansions. Threshold equivalence predicts a duplicator
    win; no prediction is made otherwise."""
    _check_unary(s1)
    _check_unary(s2)
    te = hanf_equivalent(s1, s2, 1, 2 ** k)
    g = ef_game(unary_block_order(s1).structure, unary_block_order(s2).structure, k)
    return UnaryEvidence(te, g.duplicator_wins, k, g.nodes_explored, True if te else None)


def linear_order(n: int, le: str = synth.LE) -> Structure:
    """The pure linear order on n elements (reflexive)."""
    from .structures import Vocabulary
    return Structure.build(Vocabulary.of(f"{le}/2"), n, {le: _order_pairs(list(range(n)))})


def unary_structures(names: List[str], max_size: int) -> List[Structure]:
    """All unary structures over ``names`` with at most ``max_size`` elements,
    one per vector of label-set counts."""
    from .corpus import unary
    labels = [tuple(nm for i, nm in enumerate(names) if m >> (len(names) - 1 - i) & 1)
              for m in range(1 << len(names))]
    out = []
    for size in range(1, max_size + 1):
        for cut in itertools.combinations(range(size + len(labels) - 1), len(labels) - 1):
            bounds = (-1,) + cut + (size + len(labels) - 1,)
            counts = [bounds[i + 1] - bounds[i] - 1 for i in range(len(labels))]
            out.append(unary(dict(zip(labels, counts)), names))
    return out
