"""End-to-end acceptance checks, one test per criterion.

Each test prints a single PASS/FAIL line (visible with ``pytest -v``) before
asserting. Run just this file with ``pytest tests/test_acceptance.py -v``.
"""

import time

import pytest

from invlogic import experiments as X
from invlogic.corpus import graphs_up_to, structures_up_to_iso, with_unary_labels
from invlogic.epsilon import is_epsilon_invariant
from invlogic.logic import parse_formula, quantifier_rank
from invlogic.schemes import join, linear_order_scheme, local_circular_scheme, local_order_scheme, \
    neighbor_selector_scheme


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail=""):
        with capsys.disabled():
            print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'} {detail}".rstrip())
    return emit


def test_criterion_01_gurevich(report):
    t0 = time.time()
    res = X.thm4_9(max_atoms=3, sampled_atoms=4, samples=200, seed=0)
    elapsed = time.time() - t0
    exhaustive = [r for r in res.details["linear"] if r["mode"] == "exhaustive"]
    ok = res.passed and len(exhaustive) == 3 and elapsed < 120
    rows = ", ".join(f"{r['atoms']}:{r['value']}" for r in res.details["linear"])
    report(1, ok, f"(linear {rows}; local ok={all(r['matches_parity'] for r in res.details['local'])}; "
                  f"{elapsed:.0f}s)")
    assert res.passed
    assert elapsed < 120


def test_criterion_02_hanf_locality(report):
    t0 = time.time()
    sentences = X.graph_sentences()
    assert len(sentences) == 30 and max(map(quantifier_rank, sentences)) <= 2
    res = X.hanf_locality(sentences, graphs_up_to(6, 3), 2, 6)
    # larger structures where distinct isomorphism types do share signatures
    extra = X.hanf_locality(sentences, X.cycle_unions(14), 2, 6)
    elapsed = time.time() - t0
    ok = not res["violations"] and not extra["violations"] and elapsed < 300
    report(2, ok, f"({res['structures']} structures, {res['shared_classes']} shared classes; "
                  f"cycle unions {extra['structures']}, {extra['shared_classes']} shared; {elapsed:.0f}s)")
    assert res["violations"] == [] and extra["violations"] == []
    assert elapsed < 300


def test_criterion_03_theta_reconstruction(report):
    res = X.theta_reconstruction()
    ok = res["queries"] == 10 and not res["mismatches"]
    report(3, ok, f"({res['checks']} checks)")
    assert res["queries"] == 10
    assert res["mismatches"] == []


def test_criterion_04_lambda_chain(report):
    corpus = X.connected_corpus(6, 3, 3)
    lin = X.lambda_linearity(corpus, radius=3)
    # even-atoms sentence moved to local orders by substitution, BAs of size <= 8
    trips = [X.gurevich_local(a, radius=3) for a in range(0, 4)]
    ok = lin["failure_count"] == 0 and all(t["matches_parity"] for t in trips)
    report(4, ok, f"({lin['structures']} structures, {lin['expansions']} expansions; "
                  f"round trips {[t['value'] for t in trips]})")
    assert lin["failure_count"] == 0, lin["failures"]
    assert all(t["matches_parity"] for t in trips)


def test_criterion_05_distance_formulas(report):
    res = X.distance_formulas(graphs_up_to(6), 4)
    ok = not res["mismatches"]
    report(5, ok, f"({res['structures']} structures)")
    assert res["mismatches"] == []


def test_criterion_06_epsilon_oracles(report):
    sentences = X.eps_sentences()
    structures = [s for n in (1, 2, 3) for s in structures_up_to_iso(X.EPS_VOCAB, n)]
    three = [s for s in structures if s.size == 3]
    full_counts = {is_epsilon_invariant(three[0], f, "full").explored for f in sentences}
    res = X.epsilon_oracle_agreement(sentences, structures)
    ok = len(sentences) == 20 and not res["mismatches"] and full_counts == {72}
    report(6, ok, f"({res['structures']} structures, {res['oracles_evaluated']} oracle runs)")
    assert len(sentences) == 20
    assert full_counts == {72}
    assert res["mismatches"] == []


def test_criterion_07_epsilon_translations(report):
    structures = with_unary_labels(graphs_up_to(4, 2))
    res = X.epsilon_translations(X.eps_sentences(), structures, d=2, r=1)
    bad = [r for r in res["checked"] if r["linear_failures"] or r["local_failures"]]
    ok = bool(res["checked"]) and not bad
    report(7, ok, f"({len(res['checked'])} sentences, {res['structures']} structures, "
                  f"{res['type_groups']} type groups)")
    assert res["checked"]
    assert bad == []


def test_criterion_08_flattening(report):
    structures = graphs_up_to(4)
    ll = join([linear_order_scheme(), local_order_scheme()])
    cn = join([local_circular_scheme(), neighbor_selector_scheme()])
    results = []
    for scheme, key in ((ll, "linear+local"), (cn, "circ+neighbor")):
        sentences = [parse_formula(t) for t in X.FLAT_SENTENCES[key]]
        results.append(X.flatten_roundtrip(scheme, sentences, structures))
    ok = all(not r["code_failures"] and not r["value_failures"] for r in results)
    report(8, ok, "(" + "; ".join(f"{r['scheme']} {r['expansions']} expansions" for r in results) + ")")
    for r in results:
        assert r["code_failures"] == [] and r["value_failures"] == []


def test_criterion_09_ef_baseline(report):
    t0 = time.time()
    res = X.remark4_12(max_size=8, max_rounds=2)
    elapsed = time.time() - t0
    lin, uni = res.details["linear_orders"], res.details["unary"]
    report(9, res.passed and elapsed < 120, f"({uni['pairs_played']} unary pairs; {elapsed:.0f}s)")
    assert lin["wrong"] == [] and lin["l2_l3_k2"] is False
    assert uni["failures"] == []
    assert elapsed < 120


def test_criterion_10_cn_constructions(report):
    res = X.prop5_11(max_size=5, max_degree=2)
    report(10, res.passed, f"({res.details['branches']} branches, {res.details['expansions']} expansions)")
    assert res.details["failure_count"] == 0, res.details["failures"]


def test_criterion_11_scheme_properties(report):
    res = X.order_scheme_checks(graphs_up_to(4), r=2)
    ok = not res["model_failures"] and not res["property_failures"]
    report(11, ok, f"({res['structures']} structures, {res['subset_pairs']} subset pairs)")
    assert res["model_failures"] == []
    assert res["property_failures"] == []
