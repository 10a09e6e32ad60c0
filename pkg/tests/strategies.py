"""Shared hypothesis strategies for small hypergraphs."""

import itertools

from hypothesis import strategies as st

from kpmatch.core import Bipartition, Hypergraph


@st.composite
def hypergraphs(draw, k=st.sampled_from([2, 3]), n=st.integers(1, 4), equal=True):
    k = draw(k) if not isinstance(k, int) else k
    if equal:
        m = draw(n) if not isinstance(n, int) else n
        sizes = (m,) * k
    else:
        sizes = tuple(draw(st.integers(1, 4)) for _ in range(k))
    cells = list(itertools.product(*(range(s) for s in sizes)))
    mask = draw(st.lists(st.booleans(), min_size=len(cells), max_size=len(cells)))
    return Hypergraph(sizes, [c for c, b in zip(cells, mask) if b])


@st.composite
def bipartitions(draw, sizes):
    return Bipartition(sizes, [[x for x in range(s) if draw(st.booleans())] for s in sizes])
