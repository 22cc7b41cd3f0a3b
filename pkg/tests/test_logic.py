import itertools
import warnings

import pytest
from hypothesis import given, settings, strategies as st

from conftest import small_structures
from invlogic.corpus import all_structures, path, structures_up_to_iso
from invlogic.logic import (And, EvaluationError, Exists, Forall, FormulaSyntaxError, Implies, Not,
                            ShadowWarning, atom, conj, disj, eq, evaluate, evaluate_naive, exists, forall, is_prenex_cnf,
                            neg, parse_formula, prenex_cnf, quantifier_rank, substitute_relation,
                            substitute_relation_direct, to_text)
from invlogic.logic.normal import prenex
from invlogic.schemes import (ExpansionEvaluator, circular_successor_scheme, is_invariant,
                              linear_successor_scheme, permutation_scheme)
from invlogic.structures import Structure, Vocabulary, relabel
from invlogic import synth

EP = Vocabulary.of("E/2", "P/1")
VARS = ("x", "y", "z")


def formulas(depth=3):
    """Random formulas over {E/2, P/1} with variables x, y, z."""
    var = st.sampled_from(VARS)
    leaf = st.one_of(
        st.builds(lambda a, b: atom("E", a, b), var, var),
        st.builds(lambda a: atom("P", a), var),
        st.builds(eq, var, var),
        st.sampled_from([parse_formula("true"), parse_formula("false")]),
    )

    def extend(inner):
        return st.one_of(
            st.builds(neg, inner),
            st.builds(lambda a, b: conj(a, b), inner, inner),
            st.builds(lambda a, b: disj(a, b), inner, inner),
            st.builds(lambda a, b: Implies(a, b), inner, inner),
            st.builds(lambda v, b: exists(v, b), var, inner),
            st.builds(lambda v, b: forall(v, b), var, inner),
        )
    return st.recursive(leaf, extend, max_leaves=6)


def sentences():
    # close every free variable existentially or universally
    @st.composite
    def build(draw):
        f = draw(formulas())
        for v in sorted(f.free_vars):
            f = exists(v, f) if draw(st.booleans()) else forall(v, f)
        return f
    return build()


def directed_path():
    return Structure.build(Vocabulary.of("E/2"), 4, {"E": [(0, 1), (1, 2), (2, 3)]})


# -- parsing ------------------------------------------------------------------

def test_parse_exists():
    f = parse_formula("exists x. P(x)", Vocabulary.of("P/1"))
    assert f == Exists("x", atom("P", "x"))


def test_parse_forall_implication():
    f = parse_formula("forall x. E(x,x) -> false", Vocabulary.of("E/2"))
    assert isinstance(f, Forall)
    assert isinstance(f.body, Implies)
    assert f.body.left == atom("E", "x", "x")


def test_parse_arity_error():
    with pytest.raises(FormulaSyntaxError):
        parse_formula("P(x,y)", Vocabulary.of("P/1"))


def test_parse_unknown_relation():
    with pytest.raises(FormulaSyntaxError):
        parse_formula("Q(x)", Vocabulary.of("P/1"))


def test_parse_syntax_error():
    with pytest.raises(FormulaSyntaxError):
        parse_formula("exists x P(x)")


def test_precedence():
    f = parse_formula("P(x) | P(y) & P(z) -> P(x) -> P(y)")
    # -> is loosest and right-associative; & binds tighter than |
    assert isinstance(f, Implies)
    assert isinstance(f.right, Implies)
    assert to_text(f.left) == "P(x) | P(y) & P(z)"


def test_shadowing_warns():
    with pytest.warns(ShadowWarning):
        parse_formula("exists x. forall x. P(x)")


def test_neq_sugar():
    assert parse_formula("x != y") == neg(eq("x", "y"))


@settings(max_examples=150, deadline=None)
@given(formulas())
def test_print_parse_round_trip(f):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ShadowWarning)
        assert parse_formula(to_text(f)) == f


# -- evaluation ---------------------------------------------------------------

def test_directed_path_no_out_edge():
    assert not evaluate(directed_path(), parse_formula("forall x. exists y. E(x,y)"))


def test_directed_path_source():
    assert evaluate(directed_path(), parse_formula("exists x. forall y. !E(y,x)"))


def test_empty_structure_vacuous():
    empty = Structure.build(Vocabulary.of("E/2"), 0, {"E": []})
    assert evaluate(empty, parse_formula("forall x. false"))
    assert not evaluate(empty, parse_formula("exists x. true"))


def test_free_variables_need_assignment():
    with pytest.raises(EvaluationError):
        evaluate(path(3), parse_formula("E(x,y)"))
    assert evaluate(path(3), parse_formula("E(x,y)"), {"x": 0, "y": 1})


@settings(max_examples=200, deadline=None)
@given(small_structures(EP, 3), formulas())
def test_evaluator_matches_naive(s, f):
    env = {v: 0 for v in f.free_vars} if s.size else {}
    if f.free_vars and not s.size:
        return
    assert evaluate(s, f, env) == evaluate_naive(s, f, env)


@settings(max_examples=60, deadline=None)
@given(small_structures(EP, 4), sentences(), st.randoms(use_true_random=False))
def test_isomorphism_invariance(s, f, rnd):
    perm = list(range(s.size))
    rnd.shuffle(perm)
    assert evaluate(s, f) == evaluate(relabel(s, perm), f)


# -- quantifier rank ----------------------------------------------------------

def test_rank_examples():
    assert quantifier_rank(parse_formula("E(x,y)")) == 0
    assert quantifier_rank(parse_formula("exists x. E(x,x) & forall y. E(x,y)")) == 2
    assert quantifier_rank(parse_formula("(exists x. E(x,x)) | (forall y. E(y,y))")) == 1


# -- prenex CNF ---------------------------------------------------------------

SMALL_EP = [s for n in range(1, 4) for s in structures_up_to_iso(Vocabulary.of("P/1", "Q/1"), n)]


def test_prenex_fixpoint():
    f = parse_formula("exists x. P(x)")
    assert prenex_cnf(f) == f


def test_prenex_duality():
    assert prenex_cnf(parse_formula("!forall x. P(x)")) == Exists("x", Not(atom("P", "x")))


def test_prenex_renames_apart():
    f = parse_formula("(exists x. P(x)) & (exists x. Q(x))")
    g = prenex_cnf(f)
    pre, matrix = prenex(g)
    assert [q for q, _ in pre] == [Exists, Exists]
    assert len({v for _, v in pre}) == 2
    assert isinstance(matrix, And)
    for s in SMALL_EP:
        assert evaluate(s, f) == evaluate(s, g)


def test_prenex_is_deterministic():
    f = parse_formula("(exists x. P(x)) & (forall x. exists y. Q(y) | P(x))")
    assert to_text(prenex_cnf(f)) == to_text(prenex_cnf(f))
    assert is_prenex_cnf(prenex_cnf(f))


@settings(max_examples=120, deadline=None)
@given(small_structures(EP, 4).filter(lambda s: s.size > 0), sentences())
def test_prenex_cnf_equivalent(s, f):
    g = prenex_cnf(f)
    assert is_prenex_cnf(g)
    assert evaluate(s, f) == evaluate(s, g)


@settings(max_examples=120, deadline=None)
@given(sentences())
def test_prenex_rank_counts_prefix(f):
    g = prenex_cnf(f)
    pre, _ = prenex(g)
    assert quantifier_rank(g) == len(pre)


# -- relation substitution ----------------------------------------------------

def test_identity_substitution():
    theta = parse_formula("forall x. R(x,x)")
    out = substitute_relation(theta, "R", eq("x", "y"), [], ["x", "y"])
    assert out.relations == frozenset()
    for s in all_structures(Vocabulary.of("E/2"), 2):
        assert evaluate(s, out)


def test_substitution_arity_mismatch():
    with pytest.raises(ValueError):
        substitute_relation(parse_formula("forall x. R(x,x)"), "R", eq("x", "y"), [], ["x"], arity=2)


def test_direct_matches_prenex_substitution():
    theta = parse_formula("exists x. forall y. R(x,y) -> P(y)")
    phi = conj(atom("E", "x", "y"), neg(eq("x", "a")))
    a = substitute_relation(theta, "R", phi, ["a"], ["x", "y"])
    b = substitute_relation_direct(theta, "R", phi, ["a"], ["x", "y"])
    for n in range(1, 4):
        for s in all_structures(EP, n):
            assert evaluate(s, a) == evaluate(s, b)


LIN_SENTENCES = [
    "exists x. P(x) & forall y. !L(y,x)",
    "exists x. forall y. !L(x,y)",
    "exists x, y. L(x,y) & P(x) & !P(y)",
    "forall x. P(x) -> exists y. L(x,y) & P(y)",
    "exists x. (forall y. !L(y,x)) & exists z. L(x,z) & P(z)",
]


def _p_structures(max_size):
    return [s for n in range(1, max_size + 1) for s in all_structures(Vocabulary.of("P/1"), n)]


@pytest.mark.parametrize("text", LIN_SENTENCES)
def test_circular_to_linear_pointwise(text):
    # the guarded body in the source expansion equals theta in the defined one
    theta = parse_formula(text)
    lib = synth.successor_library(1, s1="C")
    phi = lib["phi1"]
    out = substitute_relation(theta, "L", phi, ["a"], ["x", "y"])
    assert isinstance(out, Forall) and out.var == "a"
    body = out.body
    circ = circular_successor_scheme("C")
    for s in _p_structures(4):
        ev = ExpansionEvaluator(s)
        for exp in circ.expansions(s):
            cs = exp.structure
            for a in range(s.size):
                lin = {(u, v) for (u, v) in exp["C"] if v != a}
                target = cs.expand({"L": (2, lin)})
                assert ev.holds(body, exp, {"a": a}) == evaluate(target, theta)


def test_circular_to_linear_pipeline():
    lib = synth.successor_library(1, s1="C")
    circ = circular_successor_scheme("C")
    lin = linear_successor_scheme("L")
    checked = 0
    for text in LIN_SENTENCES:
        theta = parse_formula(text)
        out = substitute_relation(theta, "L", lib["phi1"], ["a"], ["x", "y"])
        for s in _p_structures(5):
            src = is_invariant(theta, lin, s)
            if not src.invariant:
                continue
            res = is_invariant(out, circ, s)
            assert res.invariant
            assert res.value == src.value
            checked += 1
    assert checked > 50


DER_SENTENCES = [
    "forall x. exists y. D(x,y) & x != y",
    "exists x, y. P(x) & !P(y) & D(x,y)",
    "exists x, y. D(x,y) & D(y,x)",
    "forall x. P(x) -> exists y. D(x,y) & !P(y)",
    "exists x. P(x)",
]


def test_insertion_pipeline_k2():
    k = 2
    lib = synth.successor_library(k, perm="S")
    params = [f"a{m}" for m in range(1, k + 1)] + ["b"]
    sk = permutation_scheme("S", max_orbits=k)
    der = permutation_scheme("D", fixed_point_free=True)
    agreed = 0
    for text in DER_SENTENCES:
        theta = parse_formula(text)
        out = substitute_relation(theta, "D", lib["phi_insertion"], params, ["x", "y"], guard=lib["phi_guard"])
        for s in _p_structures(4):
            if s.size < 2:
                continue
            src = is_invariant(theta, der, s)
            if not src.invariant:
                continue
            res = is_invariant(out, sk, s)
            assert res.invariant
            assert res.value == src.value
            agreed += 1
    assert agreed > 10


def test_insertion_pointwise_k2():
    k = 2
    lib = synth.successor_library(k, perm="S")
    params = [f"a{m}" for m in range(1, k + 1)] + ["b"]
    sk = permutation_scheme("S", max_orbits=k)
    theta = parse_formula("exists x, y. P(x) & !P(y) & D(x,y)")
    out = substitute_relation(theta, "D", lib["phi_insertion"], params, ["x", "y"], guard=lib["phi_guard"])
    body = out
    while isinstance(body, Forall) and body.var in params:
        body = body.body
    body = body.right
    guarded = 0
    for s in _p_structures(4):
        if s.size < 2:
            continue
        ev = ExpansionEvaluator(s)
        for exp in sk.expansions(s):
            e = ev.evaluator(exp)
            for vals in itertools.product(range(s.size), repeat=len(params)):
                env = dict(zip(params, vals))
                if not e.holds(lib["phi_guard"], env):
                    continue
                guarded += 1
                d = {(u, v) for u in range(s.size) for v in range(s.size)
                     if e.holds(lib["phi_insertion"], {**env, "x": u, "y": v})}
                succ = dict(d)
                assert len(succ) == len(d) == s.size
                assert sorted(succ.values()) == list(range(s.size))
                assert all(u != v for u, v in d)
                target = exp.structure.expand({"D": (2, d)})
                assert e.holds(body, env) == evaluate(target, theta)
    assert guarded > 100
