"""End-to-end experiments behind the acceptance suite and the CLI."""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Dict, List

from . import synth
from .corpus import GRAPH, boolean_algebra, graphs_up_to
from .logic import Evaluator, parse_formula
from .logic.ast import Forall, Implies
from .schemes import (_order_pairs, enumerate_expansions, is_invariant, linear_order_scheme,
                      local_order_scheme)
from .structures import Structure, Vocabulary, automorphisms, bfs_distances, diameter_and_degree, components


@dataclass
class ExperimentReport:
    name: str
    passed: bool
    details: Dict = field(default_factory=dict)
    elapsed: float = 0.0

    def to_json(self):
        return {"experiment": self.name, "passed": self.passed,
                "elapsed_s": round(self.elapsed, 3), **self.details}


# -- even number of atoms ----------------------------------------------------

def gurevich(atoms: int, mode: str = "exhaustive", samples: int = 200, seed: int = 0) -> Dict:
    """Invariance of the even-atoms sentence over linear orders of a
    Boolean algebra, and whether its value is the atom parity."""
    s = boolean_algebra(atoms)
    _, _, even_le = synth.gurevich_even_atoms()
    res = is_invariant(even_le, linear_order_scheme(), s, mode, samples=samples, seed=seed)
    even = atoms % 2 == 0
    out = {"atoms": atoms, "parity": "even" if even else "odd", **res.to_json()}
    out["matches_parity"] = res.invariant and res.value == even
    return out


def _split_guarded(sentence):
    """``forall p. guard -> body`` into ``(p, guard, body)``."""
    if not (isinstance(sentence, Forall) and isinstance(sentence.body, Implies)):
        raise ValueError("expected a guarded universal sentence")
    return sentence.var, sentence.body.left, sentence.body.right


def local_order_table(s: Structure, sentence, lo: str = synth.LO, symmetric: bool = False) -> Dict:
    """Evaluate a guarded ``forall p. guard -> body`` local-order sentence one
    parameter value at a time, over every local order *that can matter*.

    For a structure of diameter at most 2, the ball order around ``p`` reads
    only the local order at ``p`` and, at each neighbor ``b`` of ``p``, the
    relative order of ``b``'s neighbors at distance 2 from ``p``. Those choices
    are enumerated exhaustively; all other local orders are fixed to sorted
    order. Keys are ``(p, own order, per-neighbor orders)`` and values are
    ``(guard, body)``. The sentence holds in an expansion iff every entry
    selected by it has a false guard or a true body.

    With ``symmetric`` only one key per orbit of the automorphism group is
    evaluated (the sentence cannot tell automorphic images apart).
    """
    p, guard, body = _split_guarded(sentence)
    base = Evaluator(s)
    adj = [sorted(a) for a in s.adjacency]
    autos = automorphisms(s) if symmetric else [tuple(range(s.size))]
    roots = sorted({min(g[x] for g in autos) for x in range(s.size)})
    table = {}
    for x0 in roots:
        stab = [g for g in autos if g[x0] == x0 and list(g) != list(range(s.size))]
        far = {v for v, d in bfs_distances(s, x0).items() if d == 2}
        inner = [(b, [u for u in adj[b] if u in far]) for b in adj[x0]]
        pos = {b: i for i, b in enumerate(adj[x0])}

        def image(g, own, combo):
            moved = [None] * len(combo)
            for b, seq in zip(adj[x0], combo):
                moved[pos[g[b]]] = tuple(g[u] for u in seq)
            return tuple(g[v] for v in own), tuple(moved)

        for own in itertools.permutations(adj[x0]):
            for combo in itertools.product(*(itertools.permutations(ns) for _, ns in inner)):
                if any(image(g, own, combo) < (own, combo) for g in stab):
                    continue
                orders = {v: list(adj[v]) for v in range(s.size)}
                orders[x0] = list(own)
                for (b, ns), seq in zip(inner, combo):
                    orders[b] = list(seq) + [u for u in adj[b] if u not in ns]
                rel = frozenset((v, a, c) for v, seq in orders.items() for a, c in _order_pairs(seq))
                ev = Evaluator(s.expand({lo: (3, rel)}), parent=base)
                table[(x0, own, combo)] = (ev.holds(guard, {p: x0}), ev.holds(body, {p: x0}))
    return table


def local_order_key(s: Structure, x0: int, lo_rel) -> tuple:
    """The table key that a full local order ``lo_rel`` selects at ``x0``."""
    adj = [sorted(a) for a in s.adjacency]

    def order_at(v, among):
        among = set(among)
        below = {u: sum(1 for w in among if (v, w, u) in lo_rel) for u in among}
        return tuple(sorted(among, key=lambda u: below[u]))

    far = {v for v, d in bfs_distances(s, x0).items() if d == 2}
    combo = tuple(order_at(b, [u for u in adj[b] if u in far]) for b in adj[x0])
    return (x0, order_at(x0, adj[x0]), combo)


def gurevich_local(atoms: int, radius: int = 2, samples: int = 0, seed: int = 0,
                   symmetric: bool = True) -> Dict:
    """The local-order variant via :func:`local_order_table`.

    The sentence equals the parity on every local order exactly when every
    table entry has a true guard and a body equal to the parity (the guard
    says the ball order is linear, which must hold everywhere). ``samples``
    adds seeded whole-expansion evaluations as a cross-check.
    """
    s = boolean_algebra(atoms)
    vocab = s.vocab
    _, _, even_le = synth.gurevich_even_atoms()
    sentence = synth.order_to_local(even_le, vocab, radius)
    even = atoms % 2 == 0
    table = local_order_table(s, sentence, symmetric=symmetric)
    bad_guard = [k for k, (g, _) in table.items() if not g]
    bad_body = [k for k, (_, v) in table.items() if v != even]
    out = {"atoms": atoms, "parity": "even" if even else "odd", "radius": radius,
           "local_choices": len(table), "guard_failures": len(bad_guard), "value_failures": len(bad_body)}
    if samples:
        res = is_invariant(sentence, local_order_scheme(), s, "sampled", samples=samples, seed=seed)
        out["sampled"] = res.to_json()
    out["invariant"] = not bad_guard and not bad_body and (not samples or out["sampled"]["invariant"])
    out["value"] = even if out["invariant"] else None
    out["matches_parity"] = out["invariant"]
    return out


def gurevich_local_exhaustive(atoms: int, radius: int = 2, cap: int = 10 ** 5) -> Dict:
    s = boolean_algebra(atoms)
    _, _, even_le = synth.gurevich_even_atoms()
    sentence = synth.order_to_local(even_le, s.vocab, radius)
    res = is_invariant(sentence, local_order_scheme(), s, cap=cap)
    even = atoms % 2 == 0
    return {"atoms": atoms, "parity": "even" if even else "odd", **res.to_json(),
            "matches_parity": res.invariant and res.value == even}


def thm4_9(max_atoms: int = 3, sampled_atoms: int = 4, samples: int = 200, seed: int = 0) -> ExperimentReport:
    t0 = time.time()
    rows = [gurevich(a) for a in range(1, max_atoms + 1)]
    if sampled_atoms:
        rows.append(gurevich(sampled_atoms, "sampled", samples, seed))
    local = []
    for a in range(1, max_atoms + 1):
        local.append(gurevich_local_exhaustive(a) if a <= 2 else gurevich_local(a, samples=10, seed=seed))
    passed = all(r["matches_parity"] for r in rows + local)
    return ExperimentReport("thm4_9", passed, {"linear": rows, "local": local}, time.time() - t0)


# -- pinned sentence corpora -------------------------------------------------

GRAPH_SENTENCES = [
    "exists x. E(x, x)",
    "forall x. exists y. E(x, y)",
    "exists x. forall y. !E(x, y)",
    "exists x. forall y. !E(y, x)",
    "exists x, y. x != y",
    "forall x, y. x = y",
    "exists x, y. E(x, y) & x != y",
    "forall x, y. E(x, y) -> E(y, x)",
    "forall x. exists y. E(x, y) & x != y",
    "exists x. forall y. E(x, y) | x = y",
    "forall x. exists y. x != y & !E(x, y)",
    "exists x. exists y. x != y & !E(x, y) & !E(y, x)",
    "forall x. forall y. E(x, y) | E(y, x) | x = y",
    "exists x. (exists y. E(x, y)) & (forall y. E(x, y) -> E(y, x))",
    "forall x. (exists y. E(x, y)) -> (exists y. E(y, x))",
    "exists x. !E(x, x) & (forall y. x = y | E(x, y))",
    "forall x. !E(x, x)",
    "exists x. (forall y. !E(x, y)) & (forall y. !E(y, x))",
    "(exists x. forall y. !E(x, y)) & (exists x. exists y. E(x, y))",
    "forall x. (forall y. !E(x, y)) | (exists y. E(x, y) & x != y)",
    "exists x. (exists y. E(x, y) & x != y) & (exists y. !E(x, y) & x != y)",
    "forall x, y. x != y -> E(x, y)",
    "exists x, y. E(x, y) & E(y, x) & x != y",
    "forall x. exists y. !E(x, y)",
    "exists x. forall y. E(y, x) -> x = y",
    "!(exists x, y. E(x, y))",
    "(forall x. exists y. E(x, y)) | (exists x. forall y. E(y, x))",
    "exists x. exists y. x != y & E(x, y) & !E(y, x)",
    "forall x. (exists y. x != y & E(x, y)) -> (exists y. x != y & !E(x, y))",
    "exists x. (forall y. E(x, y) -> x = y) & (exists y. E(y, x) & x != y)",
]

EPS_SENTENCES = [
    "P(eps y. (P(y)))",
    "P(eps y. (y = y))",
    "exists x. E(x, eps y. (E(x, y)))",
    "forall x. E(x, eps y. (E(x, y)))",
    "exists x. P(eps y. (E(x, y)))",
    "exists x. P(eps y. (E(x, y) & P(y)))",
    "forall x. P(x) -> P(eps y. (E(x, y) & P(y)))",
    "eps y. (P(y)) = eps y. (P(y))",
    "eps y. (P(y)) = eps z. (P(z))",
    "E(eps y. (P(y)), eps y. (P(y)))",
    "exists x. x = eps y. (E(x, y))",
    "forall x. x != eps y. (E(x, y) & x != y)",
    "exists x. (exists y. E(x, y)) & P(eps y. (E(x, y)))",
    "forall x. P(eps y. (P(y) | !P(y)))",
    "exists x. P(x) & x = eps y. (P(y))",
    "E(eps y. (P(y)), eps y. (!P(y)))",
    "forall x. E(x, eps y. (E(x, y))) | !(exists y. E(x, y))",
    "P(eps y. (exists z. E(y, z) & P(z)))",
    "exists x. P(eps y. (E(x, y) & P(eps z. (E(y, z)))))",
    "P(eps y. (P(eps z. (E(y, z)))))",
]

FLAT_SENTENCES = {
    "linear+local": [
        "exists x. forall y. LE(x, y)",
        "forall x, y, z. LO(x, y, z) -> E(x, y) & E(x, z)",
        "exists x. forall y. LE(x, y) & (exists z. E(x, z))",
        "exists x, y, z. LE(x, y) & LO(x, y, z) & x != y",
    ],
    "circ+neighbor": [
        "forall x. exists y. N(x, y)",
        "forall x, y. N(x, y) -> E(x, y)",
        "exists x, y. N(x, y) & N(y, x)",
        "exists x, y, z. C(x, y, z) & N(x, y)",
    ],
}


def cycle_unions(max_size: int = 12, min_cycle: int = 3) -> List[Structure]:
    """Disjoint unions of cycles with at most ``max_size`` vertices."""
    from .corpus import cycle, disjoint_union

    def parts(total, least):
        if total == 0:
            yield []
        for c in range(least, total + 1):
            for rest in parts(total - c, c):
                yield [c] + rest

    return [disjoint_union([cycle(c) for c in p]) for n in range(min_cycle, max_size + 1)
            for p in parts(n, min_cycle)]


def graph_sentences() -> List:
    return [parse_formula(t, GRAPH) for t in GRAPH_SENTENCES]


EPS_VOCAB = Vocabulary.of("E/2", "P/1")


def eps_sentences() -> List:
    return [parse_formula(t, EPS_VOCAB) for t in EPS_SENTENCES]


# -- locality checks ---------------------------------------------------------

def hanf_locality(sentences, structures, r: int, t: int) -> Dict:
    """Within each class of equal Hanf signatures every sentence must take a
    single value."""
    from .structures import hanf_signature
    classes: Dict = {}
    for s in structures:
        classes.setdefault(hanf_signature(s, r, t), []).append(s)
    violations = []
    for k, f in enumerate(sentences):
        for members in classes.values():
            vals = {Evaluator(s).holds(f) for s in members}
            if len(vals) > 1:
                violations.append(k)
                break
    shared = sum(1 for m in classes.values() if len(m) > 1)
    return {"structures": len(structures), "classes": len(classes), "shared_classes": shared,
            "sentences": len(sentences), "violations": violations}


def signature_queries(seed: int = 1) -> List[Dict]:
    """Ten pinned signature-set queries: (vocabulary, degree, radius, threshold,
    chosen count vectors, structures)."""
    from .corpus import XorShift32, all_graphs, unary
    from .structures import hanf_signature
    unary_structs = [unary({"P": a, "": b}, ["P"]) for n in range(1, 6) for a in range(n + 1) for b in [n - a]]
    graphs = [g for n in range(1, 6) for g in all_graphs(n, 2)]
    setups = [("P", 2, 0, 1), ("P", 2, 0, 3), ("P", 2, 1, 2), ("P", 2, 1, 3),
              ("E", 2, 0, 3), ("E", 2, 1, 1), ("E", 2, 1, 2), ("E", 2, 1, 3), ("E", 1, 1, 2), ("E", 2, 1, 3)]
    rng = XorShift32(seed)
    out = []
    for name, d, r, t in setups:
        structs = unary_structs if name == "P" else [g for g in graphs if max(map(len, g.adjacency)) <= d]
        vocab = structs[0].vocab
        types = synth.enumerate_types(vocab, d, r, simple_graph=(name == "E"))
        seen = sorted({synth.signature_vector(hanf_signature(s, r, t), types) for s in structs})
        chosen = [v for v in seen if rng.next() & 1]
        # one count vector that never occurs, to exercise the negative side
        chosen.append(tuple([t] * len(types)))
        out.append({"vocab": vocab, "d": d, "r": r, "t": t, "types": types,
                    "vectors": sorted(set(chosen)), "structures": structs})
    return out


def theta_reconstruction(queries=None) -> Dict:
    from .structures import hanf_signature
    queries = queries if queries is not None else signature_queries()
    mismatches = []
    checked = 0
    for qi, q in enumerate(queries):
        sentence = synth.hanf_sentence(q["vectors"], q["types"], q["vocab"], q["t"])
        want = set(q["vectors"])
        for s in q["structures"]:
            member = synth.signature_vector(hanf_signature(s, q["r"], q["t"]), q["types"]) in want
            checked += 1
            if Evaluator(s).holds(sentence) != member:
                mismatches.append((qi, str(s)))
    return {"queries": len(queries), "checks": checked, "mismatches": mismatches}


def distance_formulas(structures, max_r: int = 4) -> Dict:
    """``beta_r`` against BFS distance and ``phi_r`` against sphere membership."""
    bad = []
    for s in structures:
        ev = Evaluator(s)
        for r in range(0, max_r + 1):
            beta = synth.beta(s.vocab, r, "x", "y")
            sph = synth.sphere(s.vocab, r, "x", "y")
            b_arr = ev.satisfying(beta, ["x", "y"])
            s_arr = ev.satisfying(sph, ["x", "y"])
            for a in range(s.size):
                dist = bfs_distances(s, a)
                for c in range(s.size):
                    d = dist.get(c)
                    if bool(b_arr[a, c]) != (d is not None and d <= r) or bool(s_arr[a, c]) != (d == r):
                        bad.append((str(s), r, a, c))
    return {"structures": len(structures), "mismatches": bad}


# -- lambda chains -----------------------------------------------------------

def _is_linear_on(pairs, elems) -> bool:
    elems = set(elems)
    if any(a not in elems or b not in elems for a, b in pairs):
        return False
    for a in elems:
        if (a, a) not in pairs:
            return False
        for b in elems:
            if a != b and ((a, b) in pairs) == ((b, a) in pairs):
                return False
    return all((a, c) in pairs for a, b in pairs for b2, c in pairs if b == b2)


def lambda_linearity(structures, radius: int = 3, exhaustive_limit: int = 10 ** 4,
                     samples: int = 100, seed: int = 0) -> Dict:
    """On each connected structure, for every (or a seeded sample of) local
    order, the radius-``radius`` ball order at every ``x`` must be a linear
    order of the component of ``x``."""
    import random
    scheme = local_order_scheme()
    failures = []
    expansions = 0
    for s in structures:
        lam = synth.lambda_chain(s.vocab, radius, synth.LO, "x", "y", "z")
        comp = {a: c for c in components(s) for a in c}
        total = scheme.count(s)
        if total <= exhaustive_limit:
            stream = (added for added in scheme.generate(s))
        else:
            rng = random.Random(seed)
            stream = (scheme.sample(s, rng) for _ in range(samples))
        base = Evaluator(s)
        for added in stream:
            expansions += 1
            ev = Evaluator(s.expand({synth.LO: (3, added[0])}), parent=base)
            arr = ev.satisfying(lam, ["x", "y", "z"])
            for a in range(s.size):
                pairs = {(b, c) for b in range(s.size) for c in range(s.size) if arr[a, b, c]}
                if not _is_linear_on(pairs, comp[a]):
                    failures.append((str(s), a, sorted(added[0])))
                    break
    return {"structures": len(structures), "expansions": expansions, "failures": failures[:5],
            "failure_count": len(failures)}


def connected_corpus(max_size: int = 6, max_degree: int = 3, max_diameter: int = 3) -> List[Structure]:
    out = []
    for g in graphs_up_to(max_size, max_degree):
        if len(components(g)) == 1 and diameter_and_degree(g)[0] <= max_diameter:
            out.append(g)
    return out


# -- epsilon -----------------------------------------------------------------

def epsilon_oracle_agreement(sentences, structures) -> Dict:
    from .epsilon import is_epsilon_invariant
    mismatches = []
    oracles = 0
    for s in structures:
        for k, f in enumerate(sentences):
            bt = is_epsilon_invariant(s, f)
            full = is_epsilon_invariant(s, f, "full")
            oracles += full.explored
            if (bt.invariant, bt.value) != (full.invariant, full.value):
                mismatches.append((k, str(s)))
    return {"structures": len(structures), "sentences": len(sentences),
            "oracles_evaluated": oracles, "mismatches": mismatches}


def epsilon_translations(sentences, structures, d: int = 2, r: int = 1) -> Dict:
    """For each sentence that is epsilon-invariant on every structure, compare
    its value with the invariant values of its least-witness elimination
    (over linear orders) and its local-order translation.

    The local-order sentence is built once per set of realized radius-``r``
    types, i.e. for the subclass of structures realizing exactly those.
    """
    from .epsilon import epsilon_rank, epsilon_to_local_order, eliminate_epsilon, is_epsilon_invariant, \
        least_witness_provider
    lin, loc = linear_order_scheme(), local_order_scheme()
    vocab = structures[0].vocab
    groups: Dict = {}
    for s in structures:
        key = tuple(tp.code for tp in synth.realized_types([s], r))
        groups.setdefault(key, []).append(s)
    rows = []
    for k, f in enumerate(sentences):
        if max(epsilon_rank(f)) > 1:
            continue
        values = [is_epsilon_invariant(s, f) for s in structures]
        if not all(v.invariant for v in values):
            continue
        want = {id(s): v.value for s, v in zip(structures, values)}
        eliminated = eliminate_epsilon(f, least_witness_provider())
        bad_lin, bad_loc = [], []
        for s in structures:
            res = is_invariant(eliminated, lin, s)
            if not res.invariant or res.value != want[id(s)]:
                bad_lin.append(str(s))
        for members in groups.values():
            types = synth.realized_types(members[:1], r)
            tr = epsilon_to_local_order(f, d, r, vocab, types=types)
            for s in members:
                res = is_invariant(tr.sentence, loc, s)
                if not res.invariant or res.value != want[id(s)]:
                    bad_loc.append(str(s))
        rows.append({"sentence": k, "linear_failures": bad_lin, "local_failures": bad_loc})
    return {"structures": len(structures), "type_groups": len(groups), "checked": rows}


# -- flattening, CN constructions, scheme properties -------------------------

def flatten_roundtrip(scheme, sentences, structures) -> Dict:
    """Codes round-trip on every expansion, the flat scheme enumerates exactly
    the coded expansions, and invariant evaluation is preserved in both
    directions (translated sentences through ``decode`` and back through
    ``encode``)."""
    from .schemes import flatten
    fl = flatten(scheme)
    flat_sentences = [fl.to_flat(f) for f in sentences]
    back_sentences = [fl.from_flat(g) for g in flat_sentences]
    bad_codes, bad_values = [], []
    expansions = 0
    for s in structures:
        base = Evaluator(s)
        exps = [e.added for e in enumerate_expansions(scheme, s)]
        coded = [fl.encode_added(s.size, a) for a in exps]
        if any(fl.decode_added(s.size, c) != a for c, a in zip(coded, exps)):
            bad_codes.append(str(s))
        if sorted(map(sorted, (c[0] for c in fl.scheme.generate(s)))) != sorted(map(sorted, coded)) \
                or not all(fl.scheme.is_member(s, (c,)) for c in coded):
            bad_codes.append(str(s))
        seen = [[set(), set(), set()] for _ in sentences]
        for added, code in zip(exps, coded):
            expansions += 1
            ev = Evaluator(s.expand({n: (a, t) for (n, a), t in zip(scheme.symbols, added)}), parent=base)
            flat_ev = Evaluator(s.expand({fl.flat: (len(fl.flat_vars), code)}), parent=base)
            for k in range(len(sentences)):
                seen[k][0].add(ev.holds(sentences[k]))
                seen[k][1].add(flat_ev.holds(flat_sentences[k]))
                seen[k][2].add(ev.holds(back_sentences[k]))
        for k, (orig, flat, back) in enumerate(seen):
            if not orig == flat == back:
                bad_values.append((k, str(s)))
    return {"scheme": scheme.name, "structures": len(structures), "expansions": expansions,
            "code_failures": bad_codes, "value_failures": bad_values}


def cn_checks(structures, d: int = 2) -> Dict:
    """The epsilon-defined neighbor selector and circular successor meet their
    scheme axioms on every choice branch, and the local order defined from
    them is a local order on every expansion of the joined scheme."""
    from .epsilon import cn_constructions, defined_relation, explore
    from .schemes import join, local_circular_scheme, neighbor_selector_scheme
    nsel, circ, lo = neighbor_selector_scheme("N"), local_circular_scheme("C", max_degree=d), local_order_scheme()
    both = join([circ, nsel])
    failures = []
    branches = expansions = 0
    for s in structures:
        cn = cn_constructions(s.vocab, d, "C", "N")
        base = Evaluator(s)

        def compute(oracle):
            n_rel = defined_relation(s, cn.neighbor, ["x", "y"], oracle, base)
            c_rel = defined_relation(s, cn.circular, ["x", "y", "z"], oracle, base)
            return n_rel, c_rel

        for leaf in explore(s.size, compute):
            branches += 1
            n_rel, c_rel = leaf.result
            if not nsel.is_member(s, (n_rel,)):
                failures.append(("neighbor", str(s), sorted(n_rel)))
            if not circ.is_member(s, (c_rel,)):
                failures.append(("circular", str(s), sorted(c_rel)))
        for e in enumerate_expansions(both, s):
            expansions += 1
            ev = Evaluator(e.structure, parent=base)
            arr = ev.satisfying(cn.local_order, ["x", "y", "z"])
            rel = frozenset(tuple(int(i) for i in t) for t in zip(*arr.nonzero()))
            if not lo.is_member(s, (rel,)):
                failures.append(("local-order", str(s), e.to_json()))
    return {"structures": len(structures), "branches": branches, "expansions": expansions,
            "failures": failures[:5], "failure_count": len(failures)}


def order_scheme_checks(structures, r: int = 2) -> Dict:
    """Axiom models against the enumeration, plus localization,
    amalgamation and neighborhood-boundedness for every disjoint pair of
    subsets."""
    from .schemes import check_scheme_properties
    scheme = local_order_scheme()
    model_failures, prop_failures = [], []
    pairs = 0
    for s in structures:
        if axiom_models(scheme, s) != {e.added[0] for e in enumerate_expansions(scheme, s)}:
            model_failures.append(str(s))
        elems = list(range(s.size))
        for labels in itertools.product((0, 1, 2), repeat=s.size):
            b = [a for a in elems if labels[a] == 1]
            c = [a for a in elems if labels[a] == 2]
            pairs += 1
            props = check_scheme_properties(scheme, s, b, c, r)
            if not all(props.values()):
                prop_failures.append((str(s), b, c, props))
    return {"structures": len(structures), "subset_pairs": pairs, "model_failures": model_failures,
            "property_failures": prop_failures[:5]}


def axiom_models(scheme, s: Structure, full_below: int = 4) -> set:
    """Models of the local-order axiom on ``s``.

    The axiom is a conjunction over the first coordinate, so relations are
    searched one first coordinate ``x`` at a time with the other slices held
    at a fixed member; slices that pass combine freely. Below ``full_below``
    elements a slice ranges over every subset of all ``n * n`` triples at
    ``x``. Otherwise it ranges over every subset of the neighbor triples,
    and each remaining triple is tried on its own on top of the fixed member.
    """
    axiom = scheme.axiom(s.vocab)
    sym = scheme.symbols[0][0]
    base = Evaluator(s)
    fixed = next(iter(scheme.generate(s)), None)
    if fixed is None:
        # some element has no admissible slice; check that the axiom agrees
        return set() if not Evaluator(s.expand({sym: (3, [])}), parent=base).holds(axiom) else {frozenset()}
    fixed = fixed[0]

    def model(rel):
        return Evaluator(s.expand({sym: (3, rel)}), parent=base).holds(axiom)

    slices = []
    stray_models = []
    for x in range(s.size):
        every = [(x, a, b) for a in range(s.size) for b in range(s.size)]
        nbrs = s.adjacency[x]
        inner = every if s.size < full_below else [t for t in every if t[1] in nbrs and t[2] in nbrs]
        others = frozenset(t for t in fixed if t[0] != x)
        good = []
        for mask in range(2 ** len(inner)):
            rel = frozenset(inner[i] for i in range(len(inner)) if mask >> i & 1)
            if model(others | rel):
                good.append(rel)
        slices.append(good)
        for t in every:
            if t not in inner and model(fixed | {t}):
                stray_models.append(fixed | {t})
    out = {frozenset().union(*combo) for combo in itertools.product(*slices)}
    return out | set(stray_models)


# -- EF games ----------------------------------------------------------------

def linear_order_games(max_rounds: int = 3, max_size: int = 9) -> Dict:
    from .games import ef_game, linear_order
    wrong = []
    nodes = 0
    for k in range(1, max_rounds + 1):
        for m in range(2 ** k, max_size + 1):
            for m2 in range(2 ** k, max_size + 1):
                g = ef_game(linear_order(m), linear_order(m2), k)
                nodes += g.nodes_explored
                if not g.duplicator_wins:
                    wrong.append((m, m2, k))
    small = ef_game(linear_order(2), linear_order(3), 2).duplicator_wins
    return {"wrong": wrong, "l2_l3_k2": small, "nodes_explored": nodes}


def unary_prediction(max_size: int = 8, max_rounds: int = 2, vocabularies=(("P",), ("P", "Q"))) -> Dict:
    """Threshold equivalence at 2**k must imply a duplicator win on the
    block-ordered expansions. Pairs are grouped by signature first, so only
    predicted pairs are played."""
    from .games import unary_invariance_evidence, unary_structures
    from .structures import hanf_signature
    played = 0
    failures = []
    for names in vocabularies:
        structs = unary_structures(list(names), max_size)
        for k in range(1, max_rounds + 1):
            groups: Dict = {}
            for s in structs:
                groups.setdefault(hanf_signature(s, 1, 2 ** k), []).append(s)
            for members in groups.values():
                for a, b in itertools.product(members, repeat=2):
                    ev = unary_invariance_evidence(a, b, k)
                    played += 1
                    if not ev.consistent:
                        failures.append((str(a), str(b), k))
    return {"pairs_played": played, "failures": failures}


def remark4_12(max_size: int = 8, max_rounds: int = 2) -> ExperimentReport:
    t0 = time.time()
    lin = linear_order_games()
    uni = unary_prediction(max_size, max_rounds)
    passed = not lin["wrong"] and lin["l2_l3_k2"] is False and not uni["failures"]
    return ExperimentReport("remark4_12", passed, {"linear_orders": lin, "unary": uni}, time.time() - t0)


def prop5_11(max_size: int = 5, max_degree: int = 2) -> ExperimentReport:
    t0 = time.time()
    structs = [g for g in graphs_up_to(max_size, max_degree) if all(g.adjacency)]
    res = cn_checks(structs, max_degree)
    return ExperimentReport("prop5_11", res["failure_count"] == 0, res, time.time() - t0)


def thm3_5(max_size: int = 6, max_degree: int = 3) -> ExperimentReport:
    """Hanf-locality evidence, signature-set sentence reconstruction and the
    structural properties of local orders."""
    t0 = time.time()
    hanf = hanf_locality(graph_sentences(), graphs_up_to(max_size, max_degree), 2, 6)
    hanf_cycles = hanf_locality(graph_sentences(), cycle_unions(14), 2, 6)
    theta = theta_reconstruction()
    props = order_scheme_checks(graphs_up_to(min(max_size, 4)))
    passed = (not hanf["violations"] and not hanf_cycles["violations"] and not theta["mismatches"]
              and not props["model_failures"] and not props["property_failures"])
    return ExperimentReport("thm3_5", passed, {"hanf": hanf, "hanf_cycle_unions": hanf_cycles,
                                               "signature_queries": theta, "local_order_scheme": props},
                            time.time() - t0)


EXPERIMENTS = {"thm3_5": thm3_5, "thm4_9": thm4_9, "remark4_12": remark4_12, "prop5_11": prop5_11}
