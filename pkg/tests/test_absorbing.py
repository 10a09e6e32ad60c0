import itertools
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from kpmatch.absorbing import (
    absorb_step,
    absorbing_matching_I,
    absorbing_or_extremal,
    closed_partition,
    count_absorbing,
    find_absorbable_set,
    is_absorbing_edge,
    is_perfect_absorbing,
    lattice_merge,
    perfect_absorbing_family,
    perfect_matching_within,
    reach_count,
    reachable_neighborhood,
    select_family,
)
from kpmatch.constructions import complete, edgeless, parity_family, random_instance, space_barrier
from kpmatch.core import Bipartition, Hypergraph, Matching, Params, RefinedPartition, Vertex
from kpmatch.errors import (
    DegreeTooLow,
    InvalidCertificate,
    MalformedInput,
    PipelineFailed,
    PreconditionViolated,
    SamePartViolation,
    SelectionFailed,
)
from kpmatch.oracles import naive_has_perfect_matching, naive_is_absorbing, naive_is_perfect_absorbing


def vs(*pairs):
    return [Vertex(p, x) for p, x in pairs]


S6 = vs((0, 0), (0, 1), (1, 0), (1, 1), (2, 0), (2, 1))


def test_absorbing_edge_complete():
    H = complete(3, 4)
    ok, cert = is_absorbing_edge(H, S6, (2, 3, 2))
    assert ok
    cert.check(S6, (2, 3, 2), H)


def test_absorbing_edge_edgeless_inside():
    H = Hypergraph((4, 4, 4), [(2, 2, 2)])
    assert is_absorbing_edge(H, S6, (2, 2, 2)) == (False, None)


def test_absorbing_edge_rejects_bad_input():
    H = complete(3, 4)
    with pytest.raises(MalformedInput):
        is_absorbing_edge(H, S6[:5], (2, 2, 2))
    with pytest.raises(MalformedInput):
        is_absorbing_edge(H, S6, (0, 2, 2))


@given(st.integers(0, 2**64 - 1), st.sampled_from([Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)]))
def test_absorbing_edge_matches_brute_force(seed, p):
    H = random_instance(3, 4, p, seed)
    for e in sorted(H.edges):
        if all(x >= 2 for x in e):
            assert is_absorbing_edge(H, S6, e)[0] == naive_is_absorbing(H, S6, e)


def test_absorb_step_grows_matching():
    H = complete(3, 3)
    M = Matching(((0, 0, 0),))
    S = vs((0, 1), (0, 2), (1, 1), (1, 2), (2, 1), (2, 2))
    ok, cert = is_absorbing_edge(H, S, (0, 0, 0))
    out = absorb_step(M, S, (0, 0, 0), cert, H)
    assert ok and len(out) == 2 and out.is_valid(H)


def test_absorb_step_rejects_bad_certificates():
    H = complete(3, 3)
    M = Matching(((0, 0, 0),))
    S = vs((0, 1), (0, 2), (1, 1), (1, 2), (2, 1), (2, 2))
    _, cert = is_absorbing_edge(H, S, (0, 0, 0))
    with pytest.raises(InvalidCertificate):
        absorb_step(M, S, (1, 1, 1), cert, H)
    with pytest.raises(InvalidCertificate):
        absorb_step(Matching(((0, 0, 0), (1, 1, 1))), S, (0, 0, 0), cert, H)


def test_count_absorbing_skips_edges_meeting_s():
    H = complete(3, 4)
    assert count_absorbing(H, S6, [(0, 2, 2), (2, 2, 2), (3, 3, 3)]) == 2


def test_find_absorbable_set():
    H = complete(3, 4)
    S = find_absorbable_set(H, (0, 0, 0))
    assert S is not None and is_absorbing_edge(H, S, (0, 0, 0))[0]
    assert find_absorbable_set(Hypergraph((4, 4, 4), [(0, 0, 0)]), (0, 0, 0)) is None


def test_perfect_absorbing_examples():
    K = complete(3, 4)
    assert is_perfect_absorbing(K, vs((0, 0), (1, 0), (2, 0)), vs((0, 1), (1, 2), (2, 3)))
    H = Hypergraph((3, 3, 3), [(0, 0, 0)])
    assert is_perfect_absorbing(H, vs((0, 0), (1, 0), (2, 0)), [])
    assert not is_perfect_absorbing(H, vs((0, 1), (1, 0), (2, 0)), [])
    bip = Bipartition.prefix((4,) * 3, (1, 1, 1))
    E = parity_family(3, 4, bip, "even")
    odd_S = vs((0, 0), (1, 2), (2, 2))
    for T in itertools.combinations(range(1, 4), 2):
        Tset = vs((0, T[0]), (0, T[1]), (1, 0), (1, 1), (2, 0), (2, 1))
        assert not is_perfect_absorbing(E, odd_S, Tset)


@given(st.integers(0, 2**64 - 1), st.sampled_from([Fraction(1, 2), Fraction(3, 4)]))
def test_perfect_absorbing_matches_brute_force(seed, p):
    H = random_instance(3, 4, p, seed)
    S = vs((0, 0), (1, 0), (2, 0))
    T = vs((0, 1), (0, 2), (1, 2), (1, 3), (2, 1), (2, 3))
    assert is_perfect_absorbing(H, S, T) == naive_is_perfect_absorbing(H, S, T)


@given(st.integers(0, 2**64 - 1))
def test_perfect_matching_within_matches_oracle(seed):
    H = random_instance(3, 3, Fraction(1, 2), seed)
    allv = list(H.vertices())
    pm = perfect_matching_within(H, allv)
    assert (pm is not None) == naive_has_perfect_matching(H, allv)
    if pm is not None:
        assert Matching(tuple(pm)).is_valid(H) and len(pm) == 3


def test_reach_count_examples():
    assert reach_count(complete(3, 3), (0, 0), (0, 1), 1).count == 9
    assert reach_count(edgeless(3, 3), (1, 0), (1, 2), 1).count == 0
    bip = Bipartition.prefix((2,) * 3, (1, 1, 1))
    E = parity_family(3, 2, bip, "even")
    assert reach_count(E, (0, 0), (0, 1), 1).count == 0
    with pytest.raises(SamePartViolation):
        reach_count(E, (0, 0), (1, 0), 1)


def test_reachable_neighborhood_examples():
    K = complete(3, 3)
    assert reachable_neighborhood(K, (1, 1), 1, 1) == {Vertex(1, 0), Vertex(1, 2)}
    assert reachable_neighborhood(edgeless(3, 3), (0, 0), Fraction(1, 100), 1) == frozenset()
    bip = Bipartition.prefix((4,) * 3, (2, 2, 2))
    E = parity_family(3, 4, bip, "even")
    assert reachable_neighborhood(E, (0, 0), Fraction(1, 100), 1) == {Vertex(0, 1)}


def test_closed_partition_examples():
    cp = closed_partition(complete(3, 4), 1, Fraction(1, 100))
    assert cp.classes == (frozenset(range(4)),) and not cp.residue
    bip = Bipartition.prefix((4,) * 3, (2, 2, 2))
    cp = closed_partition(parity_family(3, 4, bip, "even"), 0, Fraction(1, 100))
    assert set(cp.classes) == {frozenset({0, 1}), frozenset({2, 3})}
    cp = closed_partition(edgeless(3, 4), 0, Fraction(1, 100))
    assert cp.classes == () and cp.residue == frozenset(range(4))


def test_select_family_success_and_disjointness():
    K = complete(3, 6)
    target = [frozenset(Vertex(j, x) for j, x in enumerate(e)) for e in K.sorted_edges]
    # the hit bound grows like lambda^2 while hits stay below n, so a moderate lambda is the generous one
    rep = select_family([target], lam=Fraction(5), n=6, k=3, seed=1)
    assert rep.success and min(rep.hits) > 0
    used = [v for m in rep.members for v in m]
    assert len(used) == len(set(used))


def test_select_family_empty_target():
    with pytest.raises(PreconditionViolated):
        select_family([], lam=1, n=4, k=3)
    with pytest.raises(PreconditionViolated):
        select_family([[]], lam=1, n=4, k=3)


def test_select_family_failure_reports():
    K = complete(3, 4)
    target = [frozenset(Vertex(j, x) for j, x in enumerate(e)) for e in K.sorted_edges]
    with pytest.raises(SelectionFailed) as info:
        select_family([target], lam=Fraction(1, 10), n=4, k=3, seed=0, retries=3)
    rep = info.value.report
    assert rep.attempts == 3 and not rep.success


def _selection(fn):
    try:
        return fn()
    except SelectionFailed as err:
        return err.report


def test_absorbing_matching_members_absorb_outside_sets():
    K = complete(3, 6)
    rep = _selection(lambda: absorbing_matching_I(K, Params(alpha=Fraction(1), seed=0)).report)
    M = [tuple(v.index for v in m) for m in rep.members]
    assert M
    assert Matching(tuple(M)).is_valid(K)
    used = {(j, x) for e in M for j, x in enumerate(e)}
    free = [[x for x in range(6) if (j, x) not in used] for j in range(3)]
    for combo in itertools.product(*(itertools.combinations(f, 2) for f in free)):
        S = [Vertex(j, x) for j, c in enumerate(combo) for x in c]
        assert count_absorbing(K, S, M) == len(M)


def test_absorbing_matching_degree_precondition():
    H = space_barrier(3, 4, (2, 2, 0))
    with pytest.raises(DegreeTooLow):
        absorbing_matching_I(H)


def test_perfect_absorbing_family_members_are_matchable():
    K = complete(3, 4)
    rep = _selection(lambda: perfect_absorbing_family(K, 0, Params(alpha=Fraction(1))))
    used = [v for m in rep.members for v in m]
    assert len(used) == len(set(used))
    for m in rep.members:
        assert perfect_matching_within(K, m) is not None
        for S in itertools.product(*(range(4) for _ in range(3))):
            Sv = [Vertex(j, x) for j, x in enumerate(S)]
            if not set(Sv) & set(m):
                assert is_perfect_absorbing(K, Sv, m)


def test_perfect_absorbing_family_edgeless():
    with pytest.raises(DegreeTooLow):
        perfect_absorbing_family(edgeless(3, 4))


def test_lattice_merge_complete_merges_everything():
    bip = Bipartition.prefix((4,) * 3, (1, 2, 3))
    P, log = lattice_merge(complete(3, 4), RefinedPartition.from_bipartition(bip), Fraction(1, 100))
    assert P.d == 3 and not P.pairs and all(rec.merged for rec in log)


def test_lattice_merge_parity_obstruction():
    bip = Bipartition.prefix((4,) * 3, (2, 2, 2))
    E = parity_family(3, 4, bip, "even")
    P0 = RefinedPartition.from_bipartition(bip)
    P, log = lattice_merge(E, P0, Fraction(1, 100))
    assert P.d == P0.d and not any(rec.merged for rec in log) and len(log) == 3


def test_lattice_merge_identity_without_pairs():
    P0 = RefinedPartition.trivial((3, 3, 3))
    P, log = lattice_merge(complete(3, 3), P0, Fraction(1, 100))
    assert P.cells == P0.cells and log == []


def test_dichotomy_witness_branch():
    bip = Bipartition.prefix((4,) * 3, (2, 2, 0))
    out = absorbing_or_extremal(parity_family(3, 4, bip, "even"))
    assert out.kind == "witness" and out.defect == 0
    assert parity_family(3, 4, out.bipartition, out.side) == parity_family(3, 4, bip, "even")


def test_dichotomy_family_branch():
    # a_1 >= (1/2 + eps) n takes the shortcut; selection then fails at desk scale
    H = space_barrier(3, 5, (4, 1, 0))
    with pytest.raises(PipelineFailed) as info:
        absorbing_or_extremal(H)
    assert info.value.stage == "shortcut-family" and info.value.report is not None


def test_dichotomy_precondition():
    with pytest.raises(PreconditionViolated):
        absorbing_or_extremal(complete(3, 4))


@given(st.integers(0, 2**64 - 1), st.sampled_from([Fraction(1, 50), Fraction(1, 10), Fraction(1, 4)]))
def test_reachable_neighborhood_grows_as_beta_shrinks(seed, beta):
    H = random_instance(3, 3, Fraction(2, 3), seed)
    for v in H.vertices():
        wide = reachable_neighborhood(H, v, beta / 2, 1)
        assert reachable_neighborhood(H, v, beta, 1) <= wide
    cp = closed_partition(H, 0, beta)
    assert all(b >= 0 for b in cp.beta_prime)
