import itertools

import pytest
from hypothesis import strategies as st

from invlogic.structures import Structure, Vocabulary


def small_structures(vocab, max_size=4):
    """Hypothesis strategy: structures over ``vocab`` with at most ``max_size`` elements."""
    @st.composite
    def build(draw):
        n = draw(st.integers(0, max_size))
        interp = {}
        for name, arity in vocab.relations:
            cells = list(itertools.product(range(n), repeat=arity))
            interp[name] = [t for t in cells if draw(st.booleans())] if cells else []
        return Structure.build(vocab, n, interp)
    return build()


def simple_graphs(max_size=5):
    @st.composite
    def build(draw):
        n = draw(st.integers(1, max_size))
        edges = [(a, b) for a, b in itertools.combinations(range(n), 2) if draw(st.booleans())]
        return Structure.build(Vocabulary.of("E/2"), n, {"E": edges + [(b, a) for a, b in edges]})
    return build()


@pytest.fixture
def p4():
    from invlogic.corpus import path
    return path(4)
