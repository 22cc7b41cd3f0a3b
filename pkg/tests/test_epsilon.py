import itertools

import pytest

from invlogic import synth
from invlogic.corpus import cycle, graphs_up_to, path, structures_up_to_iso, with_unary_labels
from invlogic.epsilon import (BranchCap, MinOracle, RecordingOracle, count_choice_functions,
                              cn_constructions, defined_relation, eliminate_epsilon, enumerate_choice_functions,
                              epsilon_rank, epsilon_to_local_order, evaluate_epsilon, explore,
                              is_epsilon_invariant, is_gaifman_local, least_witness_provider)
from invlogic.logic import EvaluationError, Evaluator, evaluate, parse_formula, to_text
from invlogic.schemes import (is_invariant, join, linear_order_scheme, local_circular_scheme,
                              local_order_scheme, neighbor_selector_scheme)
from invlogic.structures import Structure, Vocabulary

P = Vocabulary.of("P/1")
EP = Vocabulary.of("E/2", "P/1")


def p_structure(n, members):
    return Structure.build(P, n, {"P": [(a,) for a in members]})


# -- evaluation ---------------------------------------------------------------

def test_singleton_witness_forced():
    s = p_structure(2, [1])
    f = parse_formula("x = eps y. (P(y))")
    for oracle in enumerate_choice_functions(2):
        assert evaluate_epsilon(s, f, oracle, {"x": 1})
        assert not evaluate_epsilon(s, f, oracle, {"x": 0})


def test_min_oracle():
    s = p_structure(2, [1])
    assert evaluate_epsilon(s, parse_formula("x = eps y. (y = y)"), MinOracle(), {"x": 0})


def test_p_of_its_own_witness():
    s = p_structure(2, [1])
    f = parse_formula("P(eps y. (P(y)))")
    assert all(evaluate_epsilon(s, f, o) for o in enumerate_choice_functions(2))


def test_unbound_variable():
    with pytest.raises(EvaluationError):
        evaluate_epsilon(p_structure(2, [1]), parse_formula("P(x)"), MinOracle())


def test_recording_oracle_sees_queries():
    s = p_structure(3, [0, 2])
    rec = RecordingOracle(MinOracle())
    evaluate_epsilon(s, parse_formula("P(eps y. (P(y)))"), rec)
    assert rec.queried == {frozenset({0, 2})}


def test_oracles_agreeing_on_queries_agree():
    # truth only depends on the sets the evaluation actually asks about
    f = parse_formula("exists x. E(x, eps y. (E(x,y) & P(y)))")
    corpus = [s for n in (1, 2) for s in structures_up_to_iso(EP, n)] + structures_up_to_iso(EP, 3)[::40]
    for s in corpus:
        oracles = list(enumerate_choice_functions(s.size))
        for o in oracles[::7]:
            rec = RecordingOracle(o)
            v = evaluate_epsilon(s, f, rec)
            for o2 in oracles:
                if all(o(q) == o2(q) for q in rec.queried):
                    assert evaluate_epsilon(s, f, o2) == v


# -- rank -------------------------------------------------------------------

def test_epsilon_rank_examples():
    assert epsilon_rank(parse_formula("P(eps y. (P(y)))")) == (0, 0)
    assert epsilon_rank(parse_formula("P(eps y. (E(x,y)))")) == (0, 1)
    assert epsilon_rank(parse_formula("P(eps y. (exists z. E(z,y)))")) == (1, 0)
    assert epsilon_rank(parse_formula("exists x. P(x)")) == (0, 0)


# -- choice functions ---------------------------------------------------------

def test_choice_function_counts():
    assert len(list(enumerate_choice_functions(1))) == 1
    assert len(list(enumerate_choice_functions(2))) == 2 * 2
    tables = {tuple(sorted(o.table.items(), key=lambda kv: sorted(kv[0]))) for o in enumerate_choice_functions(3)}
    assert len(tables) == 24
    assert count_choice_functions(3) == 72 == len(list(enumerate_choice_functions(3)))


def test_choice_function_members():
    for o in enumerate_choice_functions(3):
        assert all(v in k for k, v in o.table.items())
        assert 0 <= o.empty < 3


def test_choice_function_cap():
    with pytest.raises(BranchCap):
        list(enumerate_choice_functions(4))


# -- invariance ---------------------------------------------------------------

def test_choice_dependent_sentence():
    s = p_structure(2, [1])
    theta = parse_formula("P(eps y. (y = y))")
    for mode in ("backtracking", "full"):
        res = is_epsilon_invariant(s, theta, mode)
        assert not res.invariant
        a, b = res.counterexample
        assert evaluate_epsilon(s, theta, a) != evaluate_epsilon(s, theta, b)


def test_witness_of_nonempty_set_is_invariant():
    theta = parse_formula("(exists x. P(x)) & P(eps y. (P(y)))")
    for n in range(1, 5):
        for s in structures_up_to_iso(P, n):
            res = is_epsilon_invariant(s, theta)
            assert res.invariant
            assert res.value == bool(s["P"])


def test_epsilon_free_is_invariant():
    res = is_epsilon_invariant(path(3), parse_formula("exists x, y. E(x,y)"))
    assert res.invariant and res.value and res.explored == 1


def test_backtracking_matches_full_small():
    sentences = ["P(eps y. (y = y))", "exists x. E(x, eps y. (E(x,y)))",
                 "forall x. P(x) -> P(eps y. (P(y) & E(x,y)))", "E(eps y. (P(y)), eps z. (!P(z)))"]
    for text in sentences:
        theta = parse_formula(text)
        for n in (1, 2):
            for s in structures_up_to_iso(EP, n):
                a = is_epsilon_invariant(s, theta, "backtracking")
                b = is_epsilon_invariant(s, theta, "full")
                assert (a.invariant, a.value) == (b.invariant, b.value)


def test_explore_branches_over_empty_set():
    leaves = explore(3, lambda o: o(frozenset()))
    assert sorted(b.result for b in leaves) == [0, 1, 2]


def test_explore_cap():
    with pytest.raises(BranchCap):
        explore(3, lambda o: (o(frozenset({0, 1, 2})), o(frozenset({0, 1}))), cap=2)


def test_defined_relation():
    s = p_structure(3, [1, 2])
    rel = defined_relation(s, parse_formula("x = eps y. (P(y))"), ["x"], MinOracle())
    assert rel == frozenset({(1,)})


# -- elimination --------------------------------------------------------------

def test_eliminate_least_witness():
    theta = parse_formula("P(eps y. (P(y)))")
    out = eliminate_epsilon(theta, least_witness_provider())
    assert "eps" not in to_text(out)
    for n in range(1, 5):
        for s in structures_up_to_iso(P, n):
            if not s["P"]:
                continue
            res = is_invariant(out, linear_order_scheme(), s)
            assert res.invariant and res.value


def test_eliminate_epsilon_free():
    theta = parse_formula("exists x. P(x) & forall y. P(y) -> x = y")
    out = eliminate_epsilon(theta)
    for n in range(0, 4):
        for s in structures_up_to_iso(P, n):
            if s.size == 0:
                continue
            assert evaluate(s.expand({"LE": (2, [(a, b) for a in range(n) for b in range(a, n)])}), out) == \
                evaluate(s, theta)


def test_eliminate_nested():
    theta = parse_formula("P(eps y. (E(eps z. (P(z)), y)))")
    out = eliminate_epsilon(theta)
    checked = 0
    for n in range(1, 4):
        for s in structures_up_to_iso(EP, n):
            res = is_epsilon_invariant(s, theta, "full")
            if not res.invariant:
                continue
            lin = is_invariant(out, linear_order_scheme(), s)
            assert lin.invariant and lin.value == res.value
            checked += 1
    assert checked > 10


def test_eliminate_agrees_with_least_oracle():
    # for each order, the eliminated sentence is the epsilon sentence under the order's least-choice oracle
    theta = parse_formula("exists x. P(eps y. (E(x,y) | x = y)) & E(x, eps y. (P(y)))")
    out = eliminate_epsilon(theta)
    for s in structures_up_to_iso(EP, 3):
        for exp in linear_order_scheme().expansions(s):
            rank = {a: sum((b, a) in exp["LE"] for b in range(s.size)) for a in range(s.size)}
            oracle = lambda ws, rank=rank: min(ws, key=rank.get) if ws else min(range(s.size), key=rank.get)
            assert evaluate(exp.structure, out) == evaluate_epsilon(s, theta, oracle)


# -- translation into local orders --------------------------------------------

def _degree2_labelled(max_size):
    return with_unary_labels(graphs_up_to(max_size, max_degree=2))


def _check_translation(theta, structures, d, r):
    # one translation per set of realized types keeps the parameter blocks small
    groups = {}
    for s in structures:
        groups.setdefault(tuple(tp.code for tp in synth.realized_types([s], r)), []).append(s)
    checked = 0
    for members in groups.values():
        tr = epsilon_to_local_order(theta, d, r, EP, types=synth.realized_types(members[:1], r))
        for s in members:
            res = is_epsilon_invariant(s, theta)
            if not res.invariant:
                continue
            loc = is_invariant(tr.sentence, local_order_scheme(), s)
            assert loc.invariant and loc.value == res.value, s
            checked += 1
    return checked


def test_local_translation_own_witness():
    theta = parse_formula("P(eps y. (P(y)))")
    structures = [s for s in _degree2_labelled(4) if s["P"]]
    assert _check_translation(theta, structures, 2, 0) == len(structures)


def test_local_translation_epsilon_free():
    theta = parse_formula("exists x, y. E(x,y) & P(x)")
    structures = _degree2_labelled(3)
    assert _check_translation(theta, structures, 2, 0) == len(structures)


def test_local_translation_neighbor_witness_on_cycles():
    theta = parse_formula("exists x. P(eps y. (E(x,y)))")
    structures = [s for n in range(3, 6) for s in with_unary_labels([cycle(n)])]
    assert _check_translation(theta, structures, 2, 1) > 0


def test_local_translation_rejects_bad_parameters():
    with pytest.raises(ValueError):
        epsilon_to_local_order(parse_formula("P(eps y. (P(y)))"), 0, 1, EP)


# -- neighbor selector and local circular successor ---------------------------

def test_neighbor_choice_defines_selector():
    cn = cn_constructions(Vocabulary.of("E/2"), 2)
    sc = neighbor_selector_scheme()
    s = cycle(4)
    leaves = explore(s.size, lambda o: defined_relation(s, cn.neighbor, ["x", "y"], o))
    assert leaves
    for b in leaves:
        assert sc.is_member(s, (b.result,))


def test_circular_choice_defines_local_circular():
    cn = cn_constructions(Vocabulary.of("E/2"), 2)
    sc = local_circular_scheme()
    s = cycle(4)
    leaves = explore(s.size, lambda o: defined_relation(s, cn.circular, ["x", "y", "z"], o))
    for b in leaves:
        assert sc.is_member(s, (b.result,))


def test_local_order_from_circular_and_selector():
    cn = cn_constructions(Vocabulary.of("E/2"), 2)
    s = path(3)
    ax = synth.local_order_axiom(s.vocab)
    cn_scheme = join([local_circular_scheme(), neighbor_selector_scheme()])
    exps = list(cn_scheme.expansions(s))
    assert len(exps) == 2
    for exp in exps:
        ev = Evaluator(exp.structure)
        rel = {t for t in itertools.product(range(3), repeat=3) if ev.holds(cn.local_order, dict(zip("xyz", t)))}
        assert evaluate(s.expand({"LO": (3, rel)}), ax)


def test_cn_needs_positive_degree():
    with pytest.raises(ValueError):
        cn_constructions(Vocabulary.of("E/2"), 0)


# -- Gaifman locality ---------------------------------------------------------

def test_atomic_formula_is_local_at_zero():
    corpus = [s for n in range(1, 4) for s in structures_up_to_iso(EP, n)]
    assert is_gaifman_local(parse_formula("P(x)"), corpus, 0)


def test_neighbor_formula_local_at_one():
    corpus = _degree2_labelled(5)
    phi = parse_formula("exists y. E(x,y) & P(y)")
    assert is_gaifman_local(phi, corpus, 1)
    assert not is_gaifman_local(phi, corpus, 0)


def test_global_formula_per_corpus():
    phi = parse_formula("exists y. y != x & P(y)")
    s = p_structure(3, [0])
    # elements 1 and 2 share their type and agree; 0 has a different type
    assert is_gaifman_local(phi, [s], 0)
    t = p_structure(2, [])
    u = Structure.build(P, 3, {"P": [(0,), (1,)]})
    rep = is_gaifman_local(phi, [t, u], 0)
    assert rep.local
    w = Structure.build(P, 2, {"P": [(0,), (1,)]})
    assert is_gaifman_local(phi, [w], 0)


def test_locality_needs_one_free_variable():
    with pytest.raises(ValueError):
        is_gaifman_local(parse_formula("E(x,y)"), [path(2)], 1)
