"""Finite relational structures, Gaifman topology, neighborhood types and
Hanf threshold signatures.

The universe of a structure is always ``range(n)``.
"""

from __future__ import annotations

import functools
import itertools
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

Tup = Tuple[int, ...]


class StructureError(ValueError):
    """Malformed structure text or an invalid structure operation."""

    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@functools.total_ordering
class _Infinite:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITE"

    def __eq__(self, other):
        return other is self

    def __lt__(self, other):
        return False

    def __gt__(self, other):
        return other is not self

    def __hash__(self):
        return hash("INFINITE")


#: distance between elements in different Gaifman components
INFINITE = _Infinite()


@dataclass(frozen=True)
class Vocabulary:
    relations: Tuple[Tuple[str, int], ...] = ()

    def __post_init__(self):
        rels = tuple((str(n), int(a)) for n, a in self.relations)
        object.__setattr__(self, "relations", rels)
        names = [n for n, _ in rels]
        if len(set(names)) != len(names):
            raise StructureError(f"duplicate relation names in {names}")
        for n, a in rels:
            if a < 1:
                raise StructureError(f"relation {n} has arity {a} < 1")

    @classmethod
    def of(cls, *specs) -> "Vocabulary":
        """``Vocabulary.of("E/2", ("P", 1))``"""
        rels = []
        for s in specs:
            if isinstance(s, str):
                name, _, arity = s.partition("/")
                rels.append((name, int(arity)))
            else:
                rels.append(tuple(s))
        return cls(tuple(rels))

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(n for n, _ in self.relations)

    def arity(self, name: str) -> int:
        for n, a in self.relations:
            if n == name:
                return a
        raise KeyError(name)

    @property
    def max_arity(self) -> int:
        return max((a for _, a in self.relations), default=0)

    def __contains__(self, name) -> bool:
        return name in self.names

    def __len__(self):
        return len(self.relations)

    def extend(self, extra: Iterable[Tuple[str, int]]) -> "Vocabulary":
        return Vocabulary(self.relations + tuple(extra))

    def __str__(self):
        return " ".join(f"{n}/{a}" for n, a in self.relations)


@dataclass(frozen=True)
class Structure:
    vocab: Vocabulary
    size: int
    rels: Tuple[FrozenSet[Tup], ...] = ()

    def __post_init__(self):
        if self.size < 0:
            raise StructureError("negative domain size")
        rels = tuple(frozenset(tuple(int(x) for x in t) for t in r) for r in self.rels)
        if not rels:
            rels = tuple(frozenset() for _ in self.vocab.relations)
        if len(rels) != len(self.vocab.relations):
            raise StructureError("interpretation count does not match vocabulary")
        for (name, arity), tuples in zip(self.vocab.relations, rels):
            for t in tuples:
                if len(t) != arity:
                    raise StructureError(f"tuple {t} has wrong arity for {name}/{arity}")
                for x in t:
                    if not 0 <= x < self.size:
                        raise StructureError(f"element {x} out of range in {name}{t}")
        object.__setattr__(self, "rels", rels)

    @classmethod
    def build(cls, vocab: Vocabulary, size: int,
              interp: Optional[Mapping[str, Iterable[Sequence[int]]]] = None) -> "Structure":
        interp = dict(interp or {})
        unknown = set(interp) - set(vocab.names)
        if unknown:
            raise StructureError(f"unknown relations {sorted(unknown)}")
        rels = tuple(frozenset(tuple(t) for t in interp.get(n, ())) for n in vocab.names)
        return cls(vocab, size, rels)

    def __getitem__(self, name: str) -> FrozenSet[Tup]:
        return self.rels[self.vocab.names.index(name)]

    @property
    def universe(self) -> range:
        return range(self.size)

    def items(self):
        return zip(self.vocab.names, self.rels)

    def expand(self, extra: Mapping[str, Tuple[int, Iterable[Sequence[int]]]]) -> "Structure":
        """Add relations given as ``{name: (arity, tuples)}``."""
        vocab = self.vocab.extend((n, a) for n, (a, _) in extra.items())
        rels = self.rels + tuple(frozenset(tuple(t) for t in ts) for _, ts in extra.values())
        return Structure(vocab, self.size, rels)

    def reduct(self, vocab: Vocabulary) -> "Structure":
        return Structure(vocab, self.size, tuple(self[n] for n in vocab.names))

    @functools.cached_property
    def adjacency(self) -> Tuple[FrozenSet[int], ...]:
        return gaifman_adjacency(self)

    def __str__(self):
        return serialize_structure(self)


@dataclass(frozen=True)
class PointedStructure:
    base: Structure
    point: int

    def __post_init__(self):
        if not 0 <= self.point < self.base.size:
            raise StructureError(f"point {self.point} out of range")


@dataclass(frozen=True)
class NeighborhoodType:
    """Isomorphism type of an r-neighborhood; compares by canonical code."""

    radius: int
    code: tuple
    canonical: PointedStructure = field(compare=False, hash=False, repr=False)

    @property
    def size(self) -> int:
        return self.canonical.base.size


@dataclass(frozen=True)
class HanfSignature:
    radius: int
    threshold: int
    counts: Tuple[Tuple[NeighborhoodType, int], ...]

    def as_dict(self) -> Dict[NeighborhoodType, int]:
        return dict(self.counts)

    def __eq__(self, other):
        if not isinstance(other, HanfSignature):
            return NotImplemented
        return (self.radius, self.threshold) == (other.radius, other.threshold) and \
            self.as_dict() == other.as_dict()

    def __hash__(self):
        return hash((self.radius, self.threshold, frozenset(self.counts)))


# -- text format -------------------------------------------------------------

def parse_structure(text: str) -> Structure:
    vocab = None
    size = None
    interp: Dict[str, List[Tup]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        if head == "vocab":
            if vocab is not None:
                raise StructureError("duplicate vocab line", lineno)
            try:
                vocab = Vocabulary.of(*rest.split()) if rest else Vocabulary()
            except (ValueError, StructureError) as e:
                raise StructureError(f"bad vocabulary: {e}", lineno) from None
        elif head == "domain":
            if vocab is None:
                raise StructureError("domain before vocab", lineno)
            try:
                size = int(rest)
            except ValueError:
                raise StructureError(f"bad domain size {rest!r}", lineno) from None
            if size < 0:
                raise StructureError("negative domain size", lineno)
        elif head == "rel":
            if vocab is None or size is None:
                raise StructureError("rel before vocab/domain", lineno)
            name, colon, body = rest.partition(":")
            name = name.strip()
            if not colon:
                raise StructureError("expected ':' after relation name", lineno)
            if name not in vocab:
                raise StructureError(f"unknown relation {name}", lineno)
            arity = vocab.arity(name)
            for chunk in body.split(","):
                chunk = chunk.strip()
                if not chunk:
                    continue
                try:
                    t = tuple(int(x) for x in chunk.split())
                except ValueError:
                    raise StructureError(f"bad tuple {chunk!r}", lineno) from None
                if len(t) != arity:
                    raise StructureError(f"arity mismatch: {name} expects {arity}, got {chunk!r}", lineno)
                for x in t:
                    if not 0 <= x < size:
                        raise StructureError(f"element {x} out of range", lineno)
                interp.setdefault(name, []).append(t)
        else:
            raise StructureError(f"unknown directive {head!r}", lineno)
    if vocab is None or size is None:
        raise StructureError("missing vocab or domain line")
    return Structure.build(vocab, size, interp)


def serialize_structure(s: Structure) -> str:
    lines = [f"vocab {s.vocab}".rstrip(), f"domain {s.size}"]
    for name, tuples in s.items():
        if tuples:
            body = ", ".join(" ".join(map(str, t)) for t in sorted(tuples))
            lines.append(f"rel {name}: {body}")
    return "\n".join(lines) + "\n"


# -- Gaifman topology --------------------------------------------------------

def gaifman_adjacency(s: Structure) -> Tuple[FrozenSet[int], ...]:
    adj = [set() for _ in range(s.size)]
    for tuples in s.rels:
        for t in tuples:
            for a in t:
                for b in t:
                    if a != b:
                        adj[a].add(b)
    return tuple(frozenset(x) for x in adj)


def _check(s: Structure, *elems):
    for a in elems:
        if not 0 <= a < s.size:
            raise StructureError(f"element {a} out of range for domain of size {s.size}")


def bfs_distances(s: Structure, a: int, limit: Optional[int] = None) -> Dict[int, int]:
    _check(s, a)
    adj = s.adjacency
    dist = {a: 0}
    queue = deque([a])
    while queue:
        u = queue.popleft()
        if limit is not None and dist[u] >= limit:
            continue
        for v in adj[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def distance(s: Structure, a: int, b: int):
    _check(s, a, b)
    return bfs_distances(s, a).get(b, INFINITE)


def ball(s: Structure, a: int, r: int) -> FrozenSet[int]:
    return frozenset(bfs_distances(s, a, r))


def ball_and_sphere(s: Structure, a: int, r: int) -> Tuple[FrozenSet[int], FrozenSet[int]]:
    if r < 0:
        raise ValueError("radius must be non-negative")
    dist = bfs_distances(s, a, r)
    b = frozenset(dist)
    if r == 0:
        return b, frozenset([a])
    return b, frozenset(x for x, d in dist.items() if d == r)


def diameter_and_degree(s: Structure):
    """Largest Gaifman distance (INFINITE when disconnected) and max degree."""
    degree = max((len(x) for x in s.adjacency), default=0)
    diam = 0
    for a in range(s.size):
        dist = bfs_distances(s, a)
        if len(dist) < s.size:
            return INFINITE, degree
        diam = max(diam, max(dist.values()))
    return diam, degree


def components(s: Structure) -> List[FrozenSet[int]]:
    seen = set()
    out = []
    for a in range(s.size):
        if a not in seen:
            comp = frozenset(bfs_distances(s, a))
            seen |= comp
            out.append(comp)
    return out


def restrict(s: Structure, subset: Iterable[int]) -> Tuple[Structure, Dict[int, int]]:
    """Induced substructure on ``subset`` plus the old->new index table."""
    elems = sorted(set(subset))
    _check(s, *elems)
    remap = {old: new for new, old in enumerate(elems)}
    rels = tuple(
        frozenset(tuple(remap[x] for x in t) for t in tuples if all(x in remap for x in t))
        for tuples in s.rels
    )
    return Structure(s.vocab, len(elems), rels), remap


def relabel(s: Structure, perm: Sequence[int]) -> Structure:
    """Image of ``s`` under the bijection ``i -> perm[i]``."""
    rels = tuple(frozenset(tuple(perm[x] for x in t) for t in tuples) for tuples in s.rels)
    return Structure(s.vocab, s.size, rels)


def disjoint_union(parts: Sequence[Structure]) -> Structure:
    if not parts:
        raise StructureError("disjoint union of nothing")
    vocab = parts[0].vocab
    rels = [set() for _ in vocab.relations]
    offset = 0
    for p in parts:
        if p.vocab != vocab:
            raise StructureError("vocabulary mismatch")
        for i, tuples in enumerate(p.rels):
            rels[i].update(tuple(x + offset for x in t) for t in tuples)
        offset += p.size
    return Structure(vocab, offset, tuple(frozenset(r) for r in rels))


# -- canonical forms ---------------------------------------------------------

def _refine(s: Structure, colors: List[int]) -> List[int]:
    """Color refinement to a stable, isomorphism-invariant partition."""
    n = s.size
    incidences = [[] for _ in range(n)]
    for ri, tuples in enumerate(s.rels):
        for t in tuples:
            for pos, x in enumerate(t):
                incidences[x].append((ri, pos, t))
    while True:
        sigs = []
        for v in range(n):
            inc = sorted((ri, pos, tuple(colors[y] for y in t)) for ri, pos, t in incidences[v])
            sigs.append((colors[v], tuple(inc)))
        ranks = {sig: i for i, sig in enumerate(sorted(set(sigs)))}
        new = [ranks[sig] for sig in sigs]
        if len(ranks) == len(set(colors)):
            return new
        colors = new


def _encode(s: Structure, order: Sequence[int], point: Optional[int]) -> tuple:
    pos = {v: i for i, v in enumerate(order)}
    rels = tuple(tuple(sorted(tuple(pos[x] for x in t) for t in tuples)) for tuples in s.rels)
    return (s.size, None if point is None else pos[point], rels)


def canonical_form(s: Structure, point: Optional[int] = None) -> Tuple[tuple, List[int]]:
    """Return ``(code, order)``: equal codes iff isomorphic (respecting the
    point). ``order[i]`` is the element placed at canonical position ``i``."""
    colors = [0] * s.size
    if point is not None:
        _check(s, point)
        colors[point] = 1
    colors = _refine(s, colors)
    best: List = [None, None]

    def search(cols):
        cells = Counter(cols)
        target = min((c for c, k in cells.items() if k > 1), default=None)
        if target is None:
            order = sorted(range(s.size), key=lambda v: cols[v])
            code = _encode(s, order, point)
            if best[0] is None or code < best[0]:
                best[0], best[1] = code, order
            return
        for v in [v for v in range(s.size) if cols[v] == target]:
            # split v off just below the rest of its cell
            split = [2 * c + (1 if (c > target or (c == target and u != v)) else 0)
                     for u, c in enumerate(cols)]
            search(_refine(s, split))

    search(colors)
    return best[0], best[1]


def canonical_structure(s: Structure, point: Optional[int] = None):
    code, order = canonical_form(s, point)
    inv = [0] * s.size
    for i, v in enumerate(order):
        inv[v] = i
    return relabel(s, inv), (None if point is None else inv[point]), code


def is_isomorphic(s1: Structure, s2: Structure, with_witness: bool = False):
    """Isomorphism test; with ``with_witness`` returns ``(bool, mapping)``."""
    if s1.vocab != s2.vocab:
        raise StructureError("vocabulary mismatch")
    if s1.size != s2.size or [len(r) for r in s1.rels] != [len(r) for r in s2.rels]:
        return (False, None) if with_witness else False
    c1, o1 = canonical_form(s1)
    c2, o2 = canonical_form(s2)
    if c1 != c2:
        return (False, None) if with_witness else False
    if not with_witness:
        return True
    return True, {a: b for a, b in zip(o1, o2)}


def automorphisms(s: Structure) -> List[Tuple[int, ...]]:
    """All automorphisms as image tuples, by backtracking over partial maps."""
    n = s.size
    rels = [(s[name], arity) for name, arity in s.vocab.relations]
    out = []
    image = [-1] * n
    used = [False] * n

    def consistent(k):
        # every tuple over 0..k that mentions k must map correctly
        for rel, arity in rels:
            for t in itertools.product(range(k + 1), repeat=arity):
                if k in t and (t in rel) != (tuple(image[i] for i in t) in rel):
                    return False
        return True

    def go(k):
        if k == n:
            out.append(tuple(image))
            return
        for v in range(n):
            if not used[v]:
                image[k], used[v] = v, True
                if consistent(k):
                    go(k + 1)
                image[k], used[v] = -1, False

    go(0)
    return out


def neighborhood_type(s: Structure, a: int, r: int) -> NeighborhoodType:
    b = ball(s, a, r)
    sub, remap = restrict(s, b)
    canon, cpoint, code = canonical_structure(sub, remap[a])
    return NeighborhoodType(r, code, PointedStructure(canon, cpoint))


def neighborhood_types(s: Structure, r: int) -> List[NeighborhoodType]:
    return [neighborhood_type(s, a, r) for a in range(s.size)]


def hanf_signature(s: Structure, r: int, t: int) -> HanfSignature:
    if t < 1:
        raise ValueError("threshold must be at least 1")
    counts = Counter(neighborhood_types(s, r))
    items = tuple(sorted(((tp, min(c, t)) for tp, c in counts.items()), key=lambda x: x[0].code))
    return HanfSignature(r, t, items)


def hanf_equivalent(s1: Structure, s2: Structure, r: int, t: int) -> bool:
    if s1.vocab != s2.vocab:
        raise StructureError("vocabulary mismatch")
    return hanf_signature(s1, r, t) == hanf_signature(s2, r, t)


def brute_force_pointed_isomorphic(s1: Structure, p1: Optional[int], s2: Structure, p2: Optional[int]) -> bool:
    """Exhaustive permutation search; a test oracle for small structures."""
    if s1.size != s2.size or s1.vocab != s2.vocab:
        return False
    for perm in itertools.permutations(range(s2.size)):
        if p1 is not None and perm[p1] != p2:
            continue
        if relabel(s1, perm).rels == s2.rels:
            return True
    return False
