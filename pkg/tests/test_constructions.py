import itertools
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from kpmatch.constructions import (
    BarrierSpec,
    complete,
    edgeless,
    location_subgraph,
    non_edges,
    parity_family,
    perturb,
    random_instance,
    space_barrier,
)
from kpmatch.core import Bipartition, codegrees
from kpmatch.errors import BudgetExceeded, MalformedInput
from kpmatch.solvers import has_perfect_matching, matching_number

from strategies import bipartitions


@pytest.mark.parametrize("k,sizes,count", [(3, [2, 2, 2], 8), (3, [1, 1, 1], 1), (4, [2, 2, 2, 2], 16)])
def test_complete_counts(k, sizes, count):
    assert len(complete(k, sizes)) == count


def test_complete_unequal_and_errors():
    assert len(complete(3, (1, 2, 3))) == 6
    with pytest.raises(MalformedInput):
        complete(3, (1, 2))


def test_space_barrier_examples():
    assert matching_number(space_barrier(3, 5, (1, 1, 1))) == 3
    assert len(space_barrier(3, 3, (0, 0, 0))) == 0
    H = space_barrier(3, 4, (2, 1, 0))
    assert matching_number(H) == 3 and codegrees(H)[0] == 2


def test_space_barrier_rejects_bad_sizes():
    with pytest.raises(MalformedInput):
        space_barrier(3, 3, (4, 0, 0))


def test_parity_family_examples():
    odd = Bipartition.prefix((2,) * 3, (1, 1, 1))
    assert not has_perfect_matching(parity_family(3, 2, odd, "even"))[0]
    empty = Bipartition.prefix((3,) * 3, (0, 0, 0))
    assert parity_family(3, 3, empty, "even") == complete(3, 3)
    assert len(parity_family(3, 3, empty, "odd")) == 0
    with pytest.raises(MalformedInput):
        parity_family(3, 3, empty, "neither")


def test_location_subgraphs():
    bip = Bipartition.prefix((3,) * 3, (1, 2, 1))
    K = complete(3, 3)
    H = parity_family(3, 3, bip, "even")
    for v in itertools.product((0, 1), repeat=3):
        sizes = tuple(len(bip.side(j, v[j])) for j in range(3))
        assert location_subgraph(K, bip, v) == complete(3, sizes)
        sub = location_subgraph(H, bip, v)
        assert len(sub) == (sub.sizes[0] * sub.sizes[1] * sub.sizes[2] if sum(v) % 2 == 0 else 0)


def test_random_instance_extremes_and_determinism():
    assert random_instance(3, 3, Fraction(1), 1) == complete(3, 3)
    assert len(random_instance(3, 3, Fraction(0), 1)) == 0
    assert random_instance(3, 4, Fraction(1, 2), 7) == random_instance(3, 4, Fraction(1, 2), 7)


def test_perturb_examples():
    H = space_barrier(3, 4, (1, 1, 1))
    assert perturb(H, 0, 0, 3) == H
    assert len(perturb(complete(3, 2), 0, 8, 1)) == 0
    G = perturb(H, 2, 0, 11)
    assert len(G) == len(H) + 2 and H.edges <= G.edges
    with pytest.raises(BudgetExceeded):
        perturb(complete(3, 2), 1, 0, 0)


@given(st.integers(0, 2**64 - 1), st.integers(0, 5), st.integers(0, 5))
def test_perturb_cardinality(seed, add, remove):
    H = space_barrier(3, 3, (1, 0, 1))
    G = perturb(H, add, remove, seed)
    assert len(G) == len(H) + add - remove
    assert len(G.edges - H.edges) == add and len(H.edges - G.edges) == remove


@given(bipartitions((3, 3, 3)))
def test_even_and_odd_partition(bip):
    even = parity_family(3, 3, bip, "even")
    odd = parity_family(3, 3, bip, "odd")
    assert even.edges | odd.edges == complete(3, 3).edges and not even.edges & odd.edges
    assert set(non_edges(even)) == odd.edges


def test_barrier_spec():
    spec = BarrierSpec("divisibility", 3, 6, (3, 3, 1))
    assert spec.build() == parity_family(3, 6, spec.bipartition(), "even")
    assert not spec.classic_constraints()["near_half"]
    space = BarrierSpec("space", 3, 4, (1, 1, 1))
    assert space.build() == space_barrier(3, 4, (1, 1, 1))
    assert space.classic_constraints() == {"sum_at_most_n_minus_1": True}
    with pytest.raises(MalformedInput):
        BarrierSpec("other", 3, 4, (1, 1, 1))


def test_edgeless():
    assert len(edgeless(4, 2)) == 0 and edgeless(4, 2).sizes == (2, 2, 2, 2)
