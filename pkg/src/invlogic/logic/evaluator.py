"""Model checking of first-order formulas over finite structures.

Subformulas whose free variables span few enough cells are evaluated once as
boolean tensors (one axis per free variable, axes in sorted variable order)
and cached; wider subformulas fall back to assignment-driven recursion with
short-circuiting. An evaluator for an expansion can delegate everything that
only mentions base relations to the evaluator of the base structure, so the
base-only work is shared across all expansions.
"""

from __future__ import annotations

import functools
import string
from typing import Dict, Mapping, Optional

import numpy as np

from .normal import miniscope
from .ast import And, Atom, Const, Eps, Eq, Exists, Forall, Implies, Node, Not, Or, children

DEFAULT_MAX_CELLS = 1 << 18


class EvaluationError(ValueError):
    pass


def _width(f) -> int:
    w = f.__dict__.get("_width")
    if w is None:
        w = max([len(f.free_vars)] + [_width(c) for c in children(f)])
        f.__dict__["_width"] = w
    return w


def relation_array(n: int, arity: int, tuples) -> np.ndarray:
    arr = np.zeros((n,) * arity, dtype=bool)
    if tuples:
        arr[tuple(np.array(list(tuples)).T)] = True
    return arr


class Evaluator:
    """Evaluate formulas over one structure.

    ``parent`` is an evaluator for a reduct; formulas using only the
    parent's relations are answered (and cached) there.
    """

    def __init__(self, structure, parent: Optional["Evaluator"] = None,
                 max_cells: int = DEFAULT_MAX_CELLS, arrays: Optional[Mapping[str, np.ndarray]] = None):
        self.structure = structure
        self.n = structure.size
        self.parent = parent
        self.max_cells = max_cells
        self.cache: Dict[Node, tuple] = {}
        self.arrays: Dict[str, np.ndarray] = dict(arrays or {})
        for (name, arity), tuples in zip(structure.vocab.relations, structure.rels):
            if parent is not None and name in parent.names:
                continue
            if name not in self.arrays:
                self.arrays[name] = relation_array(self.n, arity, tuples)
        self.names = frozenset(structure.vocab.names)
        self.arities = dict(structure.vocab.relations)
        self._max_width = 0
        while self.n ** (self._max_width + 1) <= max_cells and self._max_width < 64:
            self._max_width += 1
            if self.n <= 1:
                self._max_width = 64
                break

    # -- public ----------------------------------------------------------

    def holds(self, f, env: Optional[Mapping[str, int]] = None) -> bool:
        env = dict(env or {})
        missing = f.free_vars - set(env)
        if missing:
            raise EvaluationError(f"unbound free variables {sorted(missing)}")
        self._check_relations(f)
        return self._holds(miniscope(f), env)

    def satisfying(self, f, variables):
        """Boolean array over ``variables`` (in the given order)."""
        variables = list(variables)
        self._check_relations(f)
        if set(variables) < f.free_vars:
            raise EvaluationError("variables must cover the free variables")
        vs, arr = self.tensor(f)
        shape = [self.n if v in vs else 1 for v in sorted(set(variables))]
        arr = arr.reshape(shape)
        arr = np.broadcast_to(arr, (self.n,) * len(shape))
        order = sorted(set(variables))
        return np.transpose(arr, [order.index(v) for v in variables]) if variables else arr

    # -- internals -------------------------------------------------------

    def _check_relations(self, f):
        for r in f.relations:
            if r not in self.names:
                raise EvaluationError(f"relation {r} not in structure vocabulary")
        if f.has_eps:
            raise EvaluationError("epsilon terms need the epsilon evaluator")

    def _owner(self, f) -> "Evaluator":
        ev = self
        while ev.parent is not None and f.relations <= ev.parent.names:
            ev = ev.parent
        return ev

    def _holds(self, f, env) -> bool:
        if _width(f) <= self._max_width:
            vs, arr = self.tensor(f)
            return bool(arr[tuple(env[v] for v in vs)])
        if isinstance(f, And):
            return all(self._holds(c, env) for c in f.args)
        if isinstance(f, Or):
            return any(self._holds(c, env) for c in f.args)
        if isinstance(f, Not):
            return not self._holds(f.arg, env)
        if isinstance(f, Implies):
            return (not self._holds(f.left, env)) or self._holds(f.right, env)
        if isinstance(f, (Exists, Forall)):
            want = isinstance(f, Exists)
            saved = env.get(f.var)
            try:
                for a in range(self.n):
                    env[f.var] = a
                    if self._holds(f.body, env) == want:
                        return want
                return not want
            finally:
                if saved is None:
                    env.pop(f.var, None)
                else:
                    env[f.var] = saved
        # atoms are always narrow enough for tensors
        vs, arr = self.tensor(f)
        return bool(arr[tuple(env[v] for v in vs)])

    def tensor(self, f):
        owner = self._owner(f)
        if owner is not self:
            return owner.tensor(f)
        hit = self.cache.get(f)
        if hit is None:
            hit = self._compute(f)
            self.cache[f] = hit
        return hit

    def _align(self, vs, arr, target):
        return arr.reshape([self.n if v in vs else 1 for v in target])

    def _compute(self, f):
        n = self.n
        if isinstance(f, Const):
            return (), np.array(f.value)
        if isinstance(f, Atom):
            args = f.args
            if any(isinstance(a, Eps) for a in args):
                raise EvaluationError("epsilon term in atom")
            arr = self.arrays[f.rel] if f.rel in self.arrays else self._owner_array(f.rel)
            if arr.ndim != len(args):
                raise EvaluationError(f"arity mismatch for {f.rel}")
            uniq = sorted(set(args))
            letters = {v: string.ascii_letters[i] for i, v in enumerate(uniq)}
            spec = "".join(letters[a] for a in args) + "->" + "".join(letters[v] for v in uniq)
            return tuple(uniq), np.einsum(spec, arr)
        if isinstance(f, Eq):
            if isinstance(f.left, Eps) or isinstance(f.right, Eps):
                raise EvaluationError("epsilon term in equality")
            if f.left == f.right:
                return (f.left,), np.ones(n, dtype=bool)
            return tuple(sorted((f.left, f.right))), np.eye(n, dtype=bool)
        if isinstance(f, Not):
            vs, arr = self.tensor(f.arg)
            return vs, ~arr
        if isinstance(f, (And, Or, Implies)):
            parts = [self.tensor(c) for c in children(f)]
            target = tuple(sorted(set().union(*(vs for vs, _ in parts))))
            aligned = [self._align(vs, arr, target) for vs, arr in parts]
            if isinstance(f, Implies):
                out = np.logical_or(~aligned[0], aligned[1])
            elif isinstance(f, And):
                out = functools.reduce(np.logical_and, aligned, np.ones((1,) * len(target), dtype=bool))
            else:
                out = functools.reduce(np.logical_or, aligned, np.zeros((1,) * len(target), dtype=bool))
            return target, np.broadcast_to(out, (n,) * len(target))
        if isinstance(f, (Exists, Forall)):
            vs, arr = self.tensor(f.body)
            want = isinstance(f, Exists)
            if f.var in vs:
                i = vs.index(f.var)
                red = arr.any(axis=i) if want else arr.all(axis=i)
                return vs[:i] + vs[i + 1:], red
            if n == 0:
                return vs, np.full(arr.shape, not want)
            return vs, arr
        raise TypeError(f"cannot evaluate {f!r}")

    def _owner_array(self, name):
        ev = self.parent
        while ev is not None:
            if name in ev.arrays:
                return ev.arrays[name]
            ev = ev.parent
        raise EvaluationError(f"unknown relation {name}")


def evaluate(structure, formula, assignment: Optional[Mapping[str, int]] = None) -> bool:
    """Tarskian truth of ``formula`` in ``structure`` under ``assignment``."""
    return Evaluator(structure).holds(formula, assignment)


def evaluate_naive(structure, formula, assignment=None) -> bool:
    """Direct recursive evaluator with no caching (a test oracle)."""
    env = dict(assignment or {})
    rels = {name: set(t) for name, t in structure.items()}
    n = structure.size

    def go(f, env):
        if isinstance(f, Const):
            return f.value
        if isinstance(f, Atom):
            return tuple(env[a] for a in f.args) in rels[f.rel]
        if isinstance(f, Eq):
            return env[f.left] == env[f.right]
        if isinstance(f, Not):
            return not go(f.arg, env)
        if isinstance(f, And):
            return all(go(c, env) for c in f.args)
        if isinstance(f, Or):
            return any(go(c, env) for c in f.args)
        if isinstance(f, Implies):
            return (not go(f.left, env)) or go(f.right, env)
        if isinstance(f, Exists):
            return any(go(f.body, {**env, f.var: a}) for a in range(n))
        if isinstance(f, Forall):
            return all(go(f.body, {**env, f.var: a}) for a in range(n))
        raise TypeError(f)

    missing = formula.free_vars - set(env)
    if missing:
        raise EvaluationError(f"unbound free variables {sorted(missing)}")
    return go(formula, env)
