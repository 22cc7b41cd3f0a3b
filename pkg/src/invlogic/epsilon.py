"""First-order logic with epsilon terms.

An epsilon term ``eps y. phi`` denotes the element a choice function picks
from ``{a : phi(a)}``. This module evaluates such formulas under explicit
choice oracles, decides invariance under the choice (by exhaustive
enumeration or by branching only on the sets a formula actually queries),
eliminates epsilon terms in favour of definable witness formulas, and
builds the neighbor-selector and local-circular-successor definitions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

from .logic.ast import (TRUE, And, Atom, Eps, Eq, Exists, Forall, FreshNames, Implies, Not, Or, all_vars, atom,
                        children, conj, disj, distinct, eq, eps_terms, exists, forall, implies, neg, neq, rebuild,
                        substitute, terms)
from .logic.evaluator import EvaluationError, Evaluator
from .logic.normal import attach_prefix, prenex, quantifier_rank
from .structures import Structure, Vocabulary, neighborhood_type
from . import synth

DEFAULT_ORACLE_CAP = 3
DEFAULT_BRANCH_CAP = 1_000_000


class BranchCap(RuntimeError):
    pass


class MissingWitnessFormula(ValueError):
    pass


# -- oracles -----------------------------------------------------------------

@dataclass(frozen=True)
class ChoiceOracle:
    """Explicit choice function: ``table`` maps non-empty sets to a member,
    ``empty`` is the value on the empty set."""

    table: Mapping[FrozenSet[int], int]
    empty: int

    def __call__(self, witnesses: FrozenSet[int]) -> int:
        if not witnesses:
            return self.empty
        return self.table[witnesses]

    def to_json(self):
        rows = sorted((sorted(k), v) for k, v in self.table.items())
        return {"empty": self.empty, "table": [{"set": k, "choice": v} for k, v in rows]}


class MinOracle:
    """Picks the least element; the empty set maps to ``empty``."""

    def __init__(self, empty: int = 0):
        self.empty = empty

    def __call__(self, witnesses):
        return min(witnesses) if witnesses else self.empty


class _Undecided(Exception):
    def __init__(self, witnesses):
        self.witnesses = witnesses


@dataclass
class DecisionLog:
    """Partial choice function built up during backtracking. Asking about a
    set with no recorded decision interrupts evaluation."""

    decisions: Dict[FrozenSet[int], int] = field(default_factory=dict)

    def __call__(self, witnesses):
        key = frozenset(witnesses)
        if key not in self.decisions:
            raise _Undecided(key)
        return self.decisions[key]

    def to_json(self):
        return [{"set": sorted(k), "choice": v} for k, v in sorted(self.decisions.items(), key=lambda kv: sorted(kv[0]))]


class RecordingOracle:
    """Wraps an oracle and records every set it is asked about."""

    def __init__(self, inner):
        self.inner = inner
        self.queried = set()

    def __call__(self, witnesses):
        self.queried.add(frozenset(witnesses))
        return self.inner(witnesses)


def count_choice_functions(n: int) -> int:
    """Number of oracles on an ``n``-element domain (tables times empty-set values)."""
    tables = 1
    for size in range(1, n + 1):
        tables *= size ** _binom(n, size)
    return tables * max(n, 1)


def _binom(n, k):
    from math import comb
    return comb(n, k)


def enumerate_choice_functions(n: int, cap: int = DEFAULT_ORACLE_CAP):
    """Every choice function on ``{0..n-1}``, each with every empty-set value."""
    if n > cap:
        raise BranchCap(f"domain size {n} exceeds the oracle enumeration cap {cap}")
    sets = [frozenset(c) for k in range(1, n + 1) for c in itertools.combinations(range(n), k)]
    for picks in itertools.product(*(sorted(s) for s in sets)):
        table = dict(zip(sets, picks))
        for empty in range(n) if n else [0]:
            yield ChoiceOracle(table, empty)


# -- evaluation --------------------------------------------------------------

class EpsilonEvaluator:
    def __init__(self, structure: Structure, oracle, base: Optional[Evaluator] = None):
        self.s = structure
        self.n = structure.size
        self.oracle = oracle
        self.base = base or Evaluator(structure)
        self.memo: Dict[tuple, int] = {}

    def holds(self, f, env) -> bool:
        if not f.has_eps:
            return self.base.holds(f, {v: env[v] for v in f.free_vars})
        if isinstance(f, Atom):
            vals = tuple(self.term(t, env) for t in f.args)
            return vals in self.s[f.rel]
        if isinstance(f, Eq):
            return self.term(f.left, env) == self.term(f.right, env)
        if isinstance(f, Not):
            return not self.holds(f.arg, env)
        if isinstance(f, And):
            return all(self.holds(c, env) for c in f.args)
        if isinstance(f, Or):
            return any(self.holds(c, env) for c in f.args)
        if isinstance(f, Implies):
            return (not self.holds(f.left, env)) or self.holds(f.right, env)
        if isinstance(f, (Exists, Forall)):
            want = isinstance(f, Exists)
            for a in range(self.n):
                if self.holds(f.body, {**env, f.var: a}) == want:
                    return want
            return not want
        raise TypeError(f"cannot evaluate {f!r}")

    def witnesses(self, t: Eps, env) -> FrozenSet[int]:
        return frozenset(a for a in range(self.n) if self.holds(t.body, {**env, t.var: a}))

    def term(self, t, env) -> int:
        if isinstance(t, str):
            return env[t]
        key = (t, tuple(sorted((v, env[v]) for v in t.free_vars)))
        hit = self.memo.get(key)
        if hit is None:
            hit = self.oracle(self.witnesses(t, env))
            self.memo[key] = hit
        return hit


def evaluate_epsilon(structure: Structure, f, oracle, assignment: Optional[Mapping[str, int]] = None,
                     base: Optional[Evaluator] = None) -> bool:
    env = dict(assignment or {})
    missing = f.free_vars - set(env)
    if missing:
        raise EvaluationError(f"unbound free variables {sorted(missing)}")
    return EpsilonEvaluator(structure, oracle, base).holds(f, env)


def epsilon_rank(f) -> Tuple[int, int]:
    """``(max body quantifier rank, max parameter count)`` over all epsilon
    terms, nested ones included."""
    best = [0, 0]

    def visit_term(t):
        if isinstance(t, Eps):
            best[0] = max(best[0], quantifier_rank(t.body))
            best[1] = max(best[1], len(t.free_vars))
            visit(t.body)

    def visit(g):
        for t in terms(g):
            visit_term(t)
        for c in children(g):
            visit(c)

    visit(f)
    return best[0], best[1]


# -- invariance --------------------------------------------------------------

@dataclass
class Branch:
    decisions: Dict[FrozenSet[int], int]
    result: object


def explore(n: int, compute: Callable[[Callable], object], cap: int = DEFAULT_BRANCH_CAP) -> List[Branch]:
    """Run ``compute(oracle)`` under every way of answering the choice
    queries it makes. Each distinct queried set branches over its members
    (over the whole domain when empty)."""
    leaves = []
    stack = [{}]
    runs = 0
    while stack:
        decisions = stack.pop()
        runs += 1
        if runs > cap:
            raise BranchCap(f"more than {cap} branches")
        try:
            result = compute(DecisionLog(decisions))
        except _Undecided as u:
            options = sorted(u.witnesses) if u.witnesses else list(range(n))
            for a in reversed(options):
                stack.append({**decisions, u.witnesses: a})
            continue
        leaves.append(Branch(decisions, result))
    return leaves


@dataclass
class EpsilonInvariance:
    invariant: bool
    value: Optional[bool]
    explored: int
    counterexample: Optional[tuple] = None
    mode: str = "backtracking"

    def __bool__(self):
        return self.invariant

    def to_json(self):
        out = {"invariant": self.invariant, "value": self.value, "explored": self.explored, "mode": self.mode}
        if self.counterexample is not None:
            out["counterexample"] = [o.to_json() for o in self.counterexample]
        return out


def is_epsilon_invariant(structure: Structure, theta, mode: str = "backtracking",
                         cap: int = DEFAULT_BRANCH_CAP, oracle_cap: int = DEFAULT_ORACLE_CAP) -> EpsilonInvariance:
    if theta.free_vars:
        raise ValueError(f"not a sentence: free variables {sorted(theta.free_vars)}")
    base = Evaluator(structure)
    if mode == "full":
        first = None
        count = 0
        for oracle in enumerate_choice_functions(structure.size, oracle_cap):
            count += 1
            v = evaluate_epsilon(structure, theta, oracle, base=base)
            if first is None:
                first = (oracle, v)
            elif v != first[1]:
                return EpsilonInvariance(False, None, count, (first[0], oracle), mode)
        return EpsilonInvariance(True, first[1] if first else None, count, None, mode)
    if mode != "backtracking":
        raise ValueError(f"unknown mode {mode!r}")
    leaves = explore(structure.size, lambda o: evaluate_epsilon(structure, theta, o, base=base), cap)
    values = {b.result for b in leaves}
    if len(values) > 1:
        a = next(b for b in leaves if b.result)
        c = next(b for b in leaves if not b.result)
        return EpsilonInvariance(False, None, len(leaves), (DecisionLog(a.decisions), DecisionLog(c.decisions)), mode)
    return EpsilonInvariance(True, values.pop(), len(leaves), None, mode)


def defined_relation(structure: Structure, f, variables: Sequence[str], oracle,
                     base: Optional[Evaluator] = None) -> FrozenSet[tuple]:
    ev = EpsilonEvaluator(structure, oracle, base)
    return frozenset(t for t in itertools.product(range(structure.size), repeat=len(variables))
                     if ev.holds(f, dict(zip(variables, t))))


# -- elimination -------------------------------------------------------------

WitnessProvider = Callable[[object, str, Tuple[str, ...], str], Optional[object]]


def least_witness_provider(le: str = synth.LE) -> WitnessProvider:
    """``w`` is the ``le``-least witness, or the ``le``-least element when
    there is no witness."""

    def provide(body, y, params, w):
        u = _fresh_for(body, params, w, y, base="lw")
        at = lambda v: substitute(body, {y: v})
        some = exists(y, body)
        least = conj(at(w), forall(u, implies(at(u), atom(le, w, u))))
        return disj(conj(some, least), conj(neg(some), forall(u, atom(le, w, u))))

    return provide


def _fresh_for(body, params, w, y, base):
    taken = set(all_vars(body)) | set(params) | {w, y}
    return FreshNames(taken, "")(base)


def replace_terms(f, mapping: Mapping[Eps, str]):
    """Replace the given epsilon terms (as atom arguments) by variables."""
    if not f.has_eps:
        return f
    if isinstance(f, Atom):
        return Atom(f.rel, tuple(mapping.get(t, t) if isinstance(t, Eps) else t for t in f.args))
    if isinstance(f, Eq):
        return Eq(mapping.get(f.left, f.left) if isinstance(f.left, Eps) else f.left,
                  mapping.get(f.right, f.right) if isinstance(f.right, Eps) else f.right)
    return rebuild(f, [replace_terms(c, mapping) for c in children(f)])


class _Eliminator:
    def __init__(self, provider, taken):
        self.provider = provider
        self.fresh = FreshNames(taken, "")

    def witness(self, t: Eps, order: Sequence[str] = ()):
        body = self.inner(t.body)
        params = tuple(sorted(t.free_vars, key=lambda v: (order.index(v) if v in order else len(order), v)))
        w = self.fresh("xe")
        phi = self.provider(body, t.var, params, w)
        if phi is None:
            raise MissingWitnessFormula(f"no witness formula for eps {t.var}")
        return w, phi

    def inner(self, f):
        """Eliminate epsilon terms atom by atom."""
        if not f.has_eps:
            return f
        if isinstance(f, (Atom, Eq)):
            ts = [t for t in terms(f) if isinstance(t, Eps)]
            mapping, guards = {}, []
            for t in dict.fromkeys(ts):
                w, phi = self.witness(t)
                mapping[t] = w
                guards.append(phi)
            return forall(list(mapping.values()), implies(conj(*guards), replace_terms(f, mapping)))
        return rebuild(f, [self.inner(c) for c in children(f)])


def eliminate_epsilon(theta, provider: WitnessProvider = None, psi=TRUE, zvars: Sequence[str] = (),
                      guard_blocks: Sequence[Tuple[Sequence[str], object]] = ()):
    """Replace every epsilon term of the sentence ``theta`` by a fresh
    variable pinned down by the provider's witness formula.

    The result is ``forall zvars. Q xs. forall ws. (psi & Phi_1 & ... -> M)``
    where ``Q xs`` is the prenex prefix of ``theta`` and ``M`` its matrix with
    the outermost terms replaced. Terms nested in epsilon bodies are handled
    first, inside the body. ``guard_blocks`` adds further parameter blocks
    ``forall vs. (g -> ...)`` outside everything else.
    """
    provider = provider or least_witness_provider()
    if theta.free_vars - set(zvars) - {v for vs, _ in guard_blocks for v in vs}:
        raise ValueError("theta must be a sentence (apart from the parameters)")
    taken = set(all_vars(theta)) | set(zvars) | set(psi.free_vars)
    for vs, g in guard_blocks:
        taken |= set(vs) | set(all_vars(g))
    prefix, matrix = prenex(theta)
    order = [v for _, v in prefix]
    elim = _Eliminator(provider, taken | set(order))
    mapping, phis = {}, []
    for t in eps_terms(matrix):
        w, phi = elim.witness(t, order)
        mapping[t] = w
        phis.append(phi)
    body = replace_terms(matrix, mapping)
    core = attach_prefix(prefix, forall(list(mapping.values()), implies(conj(psi, *phis), body)))
    out = forall(list(zvars), core)
    for vs, g in reversed(list(guard_blocks)):
        out = forall(list(vs), implies(g, out))
    return out


# -- translation into local orders -------------------------------------------

@dataclass
class LocalTranslation:
    sentence: object
    types: List
    per_type: int
    zblocks: List[Tuple[str, ...]]


def epsilon_to_local_order(theta, d: int, r: int, vocab: Vocabulary, lo: str = synth.LO,
                           types=None, simple_graph: bool = False) -> LocalTranslation:
    """Translate an epsilon sentence into a sentence over ``vocab`` plus a
    local order, for structures of Gaifman degree at most ``d`` on which
    every epsilon body is ``r``-local once its parameters are fixed.

    Witnesses inside the parameters' ``r``-balls are taken least in the
    ball-union order (balls in parameter order, each ordered by the local
    order's radius-``r`` chain). Witnesses outside are read off universally
    quantified parameters: for each neighborhood type, ``M`` elements of that
    type that are pairwise distinct or exhaust the type, which by pigeonhole
    puts one outside any ``k`` balls.
    """
    if d < 1 or r < 0:
        raise ValueError("need d >= 1 and r >= 0")
    if types is None:
        types = synth.enumerate_types(vocab, d, r, simple_graph=simple_graph)
    _, kp = epsilon_rank(theta)
    per_type = kp * synth.ball_size_bound(d, r) + 1
    taken = set(all_vars(theta))
    fresh = FreshNames(taken, "")
    blocks = [tuple(fresh(f"z{j}_") for _ in range(per_type)) for j in range(len(types))]
    guards = []
    for j, (tp, zs) in enumerate(zip(types, blocks)):
        guards.append((zs, _type_block_guard(tp, vocab, zs, blocks[j - 1] if j else None, fresh)))
    zlist = [z for zs in blocks for z in zs]
    provider = _local_provider(vocab, r, lo, zlist)
    sentence = eliminate_epsilon(theta, provider, guard_blocks=guards)
    return LocalTranslation(sentence, list(types), per_type, blocks)


def _type_block_guard(tp, vocab, zs, prev, fresh):
    u = fresh("zu")
    has = lambda v: synth._type_at(tp, vocab, v)
    realized = exists(u, has(u))
    cover = forall(u, implies(has(u), disj(*(eq(u, z) for z in zs))))
    good = conj(*(has(z) for z in zs), disj(distinct(list(zs)), cover))
    if prev is None:
        idle = conj(*(eq(zs[0], z) for z in zs[1:]))
    else:
        idle = conj(*(eq(z, p) for z, p in zip(zs, prev)))
    return disj(conj(realized, good), conj(neg(realized), idle))


def _local_provider(vocab, r, lo, zlist):
    def chain(p, y, z):
        return eq(y, z) if r == 0 else synth.lambda_chain(vocab, r, lo, p, y, z)

    def provide(body, y, params, w):
        fresh = FreshNames(set(all_vars(body)) | set(params) | {w, y} | set(zlist), "")
        u = fresh("lu")
        inball = lambda i, v: synth.beta(vocab, r, params[i], v)
        in_any = lambda v: disj(*(inball(i, v) for i in range(len(params))))

        def first(i, v):
            return conj(inball(i, v), *(neg(inball(j, v)) for j in range(i)))

        def before(a, b):
            cases = []
            for i in range(len(params)):
                later = disj(*(first(j, b) for j in range(i + 1, len(params))))
                cases.append(conj(first(i, a), disj(later, conj(first(i, b), chain(params[i], a, b)))))
            return disj(*cases)

        def select(phi):
            at = lambda v: substitute(phi, {y: v}) if y != v else phi
            inside = exists(u, conj(at(u), in_any(u)))
            least = conj(at(w), in_any(w), forall(u, implies(conj(at(u), in_any(u)), before(w, u))))
            good = lambda z: conj(neg(in_any(z)), at(z))
            picks = [conj(eq(w, z), good(z), *(neg(good(zp)) for zp in zlist[:q])) for q, z in enumerate(zlist)]
            return disj(conj(inside, least), conj(neg(inside), disj(*picks)))

        some = exists(y, body)
        return disj(conj(some, select(body)), conj(neg(some), select(TRUE)))

    return provide


# -- neighbor selectors and local circular successors ------------------------

@dataclass
class CNConstructions:
    neighbor: object       # phi_N(x, y)
    circular: object       # phi_C(x, y, z)
    local_order: object    # over sigma + {C, N}: LO(x, y, z)
    picks: List[Eps]


def cn_constructions(vocab: Vocabulary, d: int, c_sym: str = "C", n_sym: str = "N") -> CNConstructions:
    """Epsilon definitions of a neighbor selector and a local circular
    successor, and a plain definition of a local order from both."""
    if d < 1:
        raise ValueError("d must be at least 1")
    nb = lambda x, v: synth.sphere(vocab, 1, x, v)
    picks: List[Eps] = []
    for i in range(d):
        body = conj(nb("x", "u"), *(neq("u", p) for p in picks))
        picks.append(Eps("u", body))
    neighbor = eq("y", picks[0])

    def count_is(i):
        vs = [f"n{j}" for j in range(1, i + 1)]
        some = exists(vs, conj(distinct(vs), *(nb("x", v) for v in vs)))
        more = [f"n{j}" for j in range(1, i + 2)]
        too_many = exists(more, conj(distinct(more), *(nb("x", v) for v in more)))
        return conj(some, neg(too_many))

    cases = []
    for i in range(1, d + 1):
        steps = [conj(eq("y", picks[m]), eq("z", picks[m + 1])) for m in range(i - 1)]
        steps.append(conj(eq("y", picks[i - 1]), eq("z", picks[0])))
        cases.append(conj(count_is(i), disj(*steps)))
    circular = disj(*cases)

    def position(i, v):
        us = [f"k{j}" for j in range(1, i + 1)]
        walk = [atom(n_sym, "x", us[0])] + [atom(c_sym, "x", a, b) for a, b in zip(us, us[1:])]
        return exists(us, conj(*walk, distinct(us), eq(us[-1], v)))

    local = disj(*(conj(position(i, "y"), position(j, "z")) for i in range(1, d + 1) for j in range(i, d + 1)))
    return CNConstructions(neighbor, circular, local, picks)


# -- Gaifman locality --------------------------------------------------------

@dataclass
class LocalityReport:
    local: bool
    counterexample: Optional[Tuple[int, int, int]] = None

    def __bool__(self):
        return self.local


def is_gaifman_local(phi, corpus: Sequence[Structure], r: int) -> LocalityReport:
    """Do elements with the same radius-``r`` type agree on ``phi`` in every
    corpus structure? A counterexample is ``(structure index, a, b)``."""
    if len(phi.free_vars) != 1:
        raise ValueError("phi must have exactly one free variable")
    (var,) = phi.free_vars
    for idx, s in enumerate(corpus):
        ev = Evaluator(s)
        seen = {}
        for a in range(s.size):
            tp = neighborhood_type(s, a, r)
            v = ev.holds(phi, {var: a})
            if tp in seen and seen[tp][1] != v:
                return LocalityReport(False, (idx, seen[tp][0], a))
            seen.setdefault(tp, (a, v))
    return LocalityReport(True)
