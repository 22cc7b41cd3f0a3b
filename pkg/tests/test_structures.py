import itertools

import pytest
from hypothesis import given, settings, strategies as st

from invlogic.corpus import boolean_algebra, cycle, disjoint_union, path
from invlogic.structures import (INFINITE, Structure, StructureError, Vocabulary, automorphisms, ball,
                                 ball_and_sphere, brute_force_pointed_isomorphic, canonical_form, components,
                                 diameter_and_degree, distance, gaifman_adjacency, hanf_equivalent,
                                 hanf_signature, is_isomorphic, neighborhood_type, parse_structure, relabel,
                                 restrict, serialize_structure)

from conftest import simple_graphs, small_structures

GRAPH = Vocabulary.of("E/2")


def test_parse_path():
    s = parse_structure("vocab E/2\ndomain 3\nrel E: 0 1, 1 2")
    assert s.size == 3 and s["E"] == {(0, 1), (1, 2)}


def test_parse_unary_and_comments():
    s = parse_structure("# two points\nvocab P/1\ndomain 2\nrel P: 1\n")
    assert s["P"] == {(1,)} and s.size == 2


@pytest.mark.parametrize("text, needle", [
    ("vocab E/2\ndomain 2\nrel E: 0 5", "out of range"),
    ("vocab E/2\ndomain 2\nrel E: 0 1 1", "arity"),
    ("vocab E/2\nrel E: 0 1", "before"),
    ("vocab E/2\ndomain 2\nbogus", "unknown directive"),
])
def test_parse_errors(text, needle):
    with pytest.raises(StructureError) as err:
        parse_structure(text)
    assert needle in str(err.value)


def test_parse_error_reports_line():
    with pytest.raises(StructureError) as err:
        parse_structure("vocab E/2\ndomain 2\nrel E: 0 5")
    assert err.value.line == 3


@given(small_structures(Vocabulary.of("E/2", "P/1", "R/3"), 3))
@settings(max_examples=60)
def test_serialize_roundtrip(s):
    assert parse_structure(serialize_structure(s)) == s


def test_serializer_orders_tuples():
    s = Structure.build(GRAPH, 3, {"E": [(2, 1), (0, 2), (0, 1)]})
    assert serialize_structure(s) == "vocab E/2\ndomain 3\nrel E: 0 1, 0 2, 2 1\n"


def test_gaifman_ternary_and_directed():
    r = Structure.build(Vocabulary.of("R/3"), 3, {"R": [(0, 1, 2)]})
    assert gaifman_adjacency(r) == (frozenset({1, 2}), frozenset({0, 2}), frozenset({0, 1}))
    e = Structure.build(GRAPH, 2, {"E": [(0, 1)]})
    assert gaifman_adjacency(e) == (frozenset({1}), frozenset({0}))
    assert gaifman_adjacency(Structure.build(GRAPH, 2, {})) == (frozenset(), frozenset())


def test_gaifman_ignores_loops():
    s = Structure.build(GRAPH, 1, {"E": [(0, 0)]})
    assert gaifman_adjacency(s) == (frozenset(),)


def test_distance_examples(p4):
    assert distance(p4, 0, 3) == 3
    assert distance(p4, 2, 2) == 0
    two_edges = disjoint_union([path(2), path(2)])
    assert distance(two_edges, 0, 3) is INFINITE
    with pytest.raises(Exception):
        distance(p4, 0, 9)


def test_infinite_is_not_an_integer():
    assert INFINITE > 10 ** 9 and not isinstance(INFINITE, int)


def test_ball_and_sphere(p4):
    assert ball_and_sphere(p4, 1, 1) == ({0, 1, 2}, {0, 2})
    assert ball_and_sphere(p4, 2, 0) == ({2}, {2})
    assert ball_and_sphere(cycle(6), 0, 3) == (set(range(6)), {3})


@given(simple_graphs(6), st.integers(0, 5), st.integers(1, 4))
def test_sphere_is_ball_difference(g, a, r):
    a %= g.size
    b, sph = ball_and_sphere(g, a, r)
    assert sph == b - ball(g, a, r - 1)
    assert ball(g, a, 0) == {a}


@given(simple_graphs(6))
def test_distance_metric(g):
    for a, b, c in itertools.product(range(g.size), repeat=3):
        dab, dbc, dac = distance(g, a, b), distance(g, b, c), distance(g, a, c)
        assert dab == distance(g, b, a)
        if INFINITE not in (dab, dbc, dac):
            assert dac <= dab + dbc


def test_neighborhood_types():
    c6 = cycle(6)
    assert len({neighborhood_type(c6, a, 1) for a in range(6)}) == 1
    assert neighborhood_type(cycle(3), 0, 1) != neighborhood_type(c6, 0, 1)
    s = Structure.build(Vocabulary.of("P/1", "Q/1"), 4, {"P": [(0,), (1,)], "Q": [(1,), (2,)]})
    assert len({neighborhood_type(s, a, 0) for a in range(4)}) == 4
    t = Structure.build(Vocabulary.of("P/1"), 3, {"P": [(0,), (2,)]})
    assert neighborhood_type(t, 0, 0) == neighborhood_type(t, 2, 0) != neighborhood_type(t, 1, 0)


@given(simple_graphs(6), st.data())
@settings(max_examples=40)
def test_types_invariant_under_relabeling(g, data):
    perm = data.draw(st.permutations(range(g.size)))
    h = relabel(g, perm)
    for a in range(g.size):
        for r in (0, 1, 2):
            assert neighborhood_type(g, a, r) == neighborhood_type(h, perm[a], r)


@given(simple_graphs(5), st.integers(0, 4), st.integers(0, 4), st.integers(0, 2))
@settings(max_examples=80)
def test_type_equality_matches_brute_force(g, a, b, r):
    a, b = a % g.size, b % g.size
    (ra, ma), (rb, mb) = restrict(g, ball(g, a, r)), restrict(g, ball(g, b, r))
    same = brute_force_pointed_isomorphic(ra, ma[a], rb, mb[b])
    assert (neighborhood_type(g, a, r) == neighborhood_type(g, b, r)) == same


def test_hanf_signature_caps():
    sig3 = hanf_signature(cycle(6), 1, 3)
    assert [c for _, c in sig3.counts] == [3]
    assert [c for _, c in hanf_signature(cycle(6), 1, 10).counts] == [6]
    assert hanf_signature(Structure.build(GRAPH, 0, {}), 1, 2).counts == ()
    with pytest.raises(ValueError):
        hanf_signature(cycle(3), 1, 0)


def test_hanf_equivalence_examples():
    assert hanf_equivalent(cycle(6), cycle(7), 1, 6)
    assert not hanf_equivalent(cycle(6), cycle(7), 1, 7)
    assert hanf_equivalent(path(5), path(5), 2, 1)
    with pytest.raises(StructureError):
        hanf_equivalent(cycle(3), Structure.build(Vocabulary.of("P/1"), 1, {}), 1, 1)


@given(st.lists(simple_graphs(5), min_size=3, max_size=3), st.integers(0, 2), st.integers(1, 3))
@settings(max_examples=40)
def test_hanf_equivalence_relation_and_refinement(gs, r, t):
    a, b, c = gs
    if hanf_equivalent(a, b, r, t) and hanf_equivalent(b, c, r, t):
        assert hanf_equivalent(a, c, r, t)
    if hanf_equivalent(a, b, r + 1, t + 1):
        assert hanf_equivalent(a, b, r, t)


def test_isomorphism_examples():
    c6 = cycle(6)
    ok, m = is_isomorphic(c6, relabel(c6, [3, 5, 1, 0, 2, 4]), with_witness=True)
    assert ok and relabel(c6, [m[i] for i in range(6)]) == relabel(c6, [3, 5, 1, 0, 2, 4])
    assert not is_isomorphic(c6, disjoint_union([cycle(3), cycle(3)]))
    empty = Structure.build(GRAPH, 0, {})
    assert is_isomorphic(empty, empty)


@given(small_structures(Vocabulary.of("E/2", "P/1"), 4), st.data())
@settings(max_examples=50)
def test_canonical_form_relabel_invariant(s, data):
    perm = data.draw(st.permutations(range(s.size)))
    assert canonical_form(s)[0] == canonical_form(relabel(s, perm))[0]


def test_diameter_and_degree():
    assert diameter_and_degree(boolean_algebra(2))[0] == 2
    assert diameter_and_degree(path(4)) == (3, 2)
    assert diameter_and_degree(Structure.build(GRAPH, 1, {})) == (0, 0)
    assert diameter_and_degree(disjoint_union([path(1), path(1)]))[0] is INFINITE


def test_restrict(p4):
    sub, remap = restrict(p4, {0, 1})
    assert sub.size == 2 and sub["E"] == {(0, 1), (1, 0)} and remap == {0: 0, 1: 1}
    assert is_isomorphic(restrict(p4, range(4))[0], p4)
    assert restrict(p4, set())[0].size == 0
    with pytest.raises(Exception):
        restrict(p4, {7})


def test_components_and_automorphisms():
    g = disjoint_union([cycle(3), path(2)])
    assert sorted(map(sorted, components(g))) == [[0, 1, 2], [3, 4]]
    assert len(automorphisms(cycle(5))) == 10
    assert len(automorphisms(boolean_algebra(3))) == 6
