"""Deterministic generators for the structure families used in experiments.

Random graphs use xorshift32 (Marsaglia, shifts 13/17/5) seeded with
``seed`` (zero is replaced by a fixed non-zero constant). Candidate edges
are visited in lexicographic order ``(i, j)``, ``i < j``; each draws one
32-bit word and is kept when the word is below ``p * 2**32`` and both
endpoints still have spare degree. Any implementation following these
rules reproduces the same graphs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence

from .structures import Structure, Vocabulary, canonical_form, disjoint_union as _union

GRAPH = Vocabulary.of("E/2")
BA = Vocabulary.of("Sub/2")
MAX_BA_ATOMS = 4


class GeneratorError(ValueError):
    pass


class XorShift32:
    def __init__(self, seed: int):
        self.state = (seed & 0xFFFFFFFF) or 0x9E3779B9

    def next(self) -> int:
        x = self.state
        x ^= (x << 13) & 0xFFFFFFFF
        x ^= x >> 17
        x ^= (x << 5) & 0xFFFFFFFF
        self.state = x
        return x


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    params: Mapping = field(default_factory=dict)


def _undirected(n, edges):
    tuples = set()
    for a, b in edges:
        tuples.add((a, b))
        tuples.add((b, a))
    return Structure.build(GRAPH, n, {"E": tuples})


def cycle(n: int) -> Structure:
    if n < 1:
        raise GeneratorError("cycle needs n >= 1")
    return _undirected(n, [(i, (i + 1) % n) for i in range(n)])


def path(n: int) -> Structure:
    if n < 1:
        raise GeneratorError("path needs n >= 1")
    return _undirected(n, [(i, i + 1) for i in range(n - 1)])


def boolean_algebra(atoms: int) -> Structure:
    """Subsets of an ``atoms``-set as bitmasks, ordered by inclusion."""
    if not 0 <= atoms <= MAX_BA_ATOMS:
        raise GeneratorError(f"boolean_algebra needs 0 <= atoms <= {MAX_BA_ATOMS}")
    n = 1 << atoms
    return Structure.build(BA, n, {"Sub": [(a, b) for a in range(n) for b in range(n) if a & ~b == 0]})


def unary(counts: Mapping, names: Optional[Sequence[str]] = None) -> Structure:
    """Unary structure from per-label counts.

    Keys are collections of relation names (or a single name); the empty
    collection is the element with no label. Elements are laid out in key
    order as given.
    """
    labels = []
    for key, c in counts.items():
        if c < 0:
            raise GeneratorError("counts must be non-negative")
        key = (key,) if isinstance(key, str) else tuple(key)
        labels.append((frozenset(k for k in key if k), c))
    if names is None:
        names = sorted(set().union(*(l for l, _ in labels))) if labels else []
    vocab = Vocabulary(tuple((nm, 1) for nm in names))
    interp: Dict[str, list] = {nm: [] for nm in names}
    i = 0
    for label, c in labels:
        unknown = label - set(names)
        if unknown:
            raise GeneratorError(f"labels {sorted(unknown)} not in vocabulary")
        for _ in range(c):
            for nm in label:
                interp[nm].append((i,))
            i += 1
    return Structure.build(vocab, i, interp)


def random_bounded_degree(n: int, d: int, seed: int, p: float = 0.5) -> Structure:
    if n < 0 or d < 0 or not 0 <= p <= 1:
        raise GeneratorError("need n >= 0, d >= 0, 0 <= p <= 1")
    rng = XorShift32(seed)
    bound = int(p * (1 << 32))
    deg = [0] * n
    edges = []
    for i, j in itertools.combinations(range(n), 2):
        draw = rng.next()
        if draw < bound and deg[i] < d and deg[j] < d:
            edges.append((i, j))
            deg[i] += 1
            deg[j] += 1
    return _undirected(n, edges)


def disjoint_union(parts: Sequence[Structure]) -> Structure:
    if not parts:
        raise GeneratorError("disjoint_union needs at least one part")
    return _union(parts)


_KINDS = {
    "cycle": lambda p: cycle(p["n"]),
    "path": lambda p: path(p["n"]),
    "boolean_algebra": lambda p: boolean_algebra(p["atoms"]),
    "unary": lambda p: unary(p["counts"], p.get("names")),
    "disjoint_union": lambda p: disjoint_union([generate(s) for s in p["parts"]]),
    "random_bounded_degree": lambda p: random_bounded_degree(p["n"], p["d"], p["seed"], p.get("p", 0.5)),
}


def generate(spec: GeneratorSpec) -> Structure:
    try:
        build = _KINDS[spec.kind]
    except KeyError:
        raise GeneratorError(f"unknown generator kind {spec.kind!r}") from None
    try:
        return build(dict(spec.params))
    except KeyError as e:
        raise GeneratorError(f"{spec.kind} is missing parameter {e.args[0]}") from None


def generate_family(spec: GeneratorSpec, param: str, values: Iterable) -> List[Structure]:
    """One structure per value of ``param``, in the given order."""
    return [generate(GeneratorSpec(spec.kind, {**spec.params, param: v})) for v in values]


def all_graphs(n: int, max_degree: Optional[int] = None) -> List[Structure]:
    """Simple undirected graphs on ``n`` vertices up to isomorphism, grown by
    adding one vertex at a time and deduplicating canonical forms."""
    level = {canonical_form(_undirected(0, []))[0]: _undirected(0, [])}
    for k in range(n):
        nxt = {}
        for g in level.values():
            base = [(a, b) for a, b in g["E"] if a < b]
            deg = [len(x) for x in g.adjacency]
            for mask in range(1 << k):
                nbrs = [i for i in range(k) if mask >> i & 1]
                if max_degree is not None and (len(nbrs) > max_degree
                                               or any(deg[i] >= max_degree for i in nbrs)):
                    continue
                h = _undirected(k + 1, base + [(i, k) for i in nbrs])
                nxt.setdefault(canonical_form(h)[0], h)
        level = nxt
    return [level[c] for c in sorted(level)]


def graphs_up_to(n: int, max_degree: Optional[int] = None, min_size: int = 1) -> List[Structure]:
    return [g for k in range(min_size, n + 1) for g in all_graphs(k, max_degree)]


def all_structures(vocab: Vocabulary, n: int) -> List[Structure]:
    """Every structure over ``vocab`` on ``{0..n-1}`` (labeled, no dedup)."""
    slots = [(name, list(itertools.product(range(n), repeat=a))) for name, a in vocab.relations]
    total = sum(len(t) for _, t in slots)
    out = []
    for mask in range(1 << total):
        interp = {}
        bit = 0
        for name, tuples in slots:
            interp[name] = [t for i, t in enumerate(tuples) if mask >> (bit + i) & 1]
            bit += len(tuples)
        out.append(Structure.build(vocab, n, interp))
    return out


def structures_up_to_iso(vocab: Vocabulary, n: int) -> List[Structure]:
    seen = {}
    for s in all_structures(vocab, n):
        seen.setdefault(canonical_form(s)[0], s)
    return [seen[c] for c in sorted(seen)]


def with_unary_labels(graphs: Sequence[Structure], name: str = "P") -> List[Structure]:
    """Every labeling of each graph by one extra unary relation, up to isomorphism."""
    out = {}
    for g in graphs:
        for mask in range(1 << g.size):
            s = g.expand({name: (1, [(i,) for i in range(g.size) if mask >> i & 1])})
            out.setdefault(canonical_form(s)[0], s)
    return [out[c] for c in sorted(out)]
