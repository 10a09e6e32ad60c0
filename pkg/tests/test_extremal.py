import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kpmatch.constructions import complete, parity_family, perturb, random_instance, space_barrier
from kpmatch.core import Bipartition, Matching, codegrees
from kpmatch.errors import PreconditionViolated, StageFailed, UnequalParts
from kpmatch.extremal import (
    DExtremalWitness,
    PipelineTranscript,
    SExtremalWitness,
    check_d_extremal,
    check_s_extremal,
    d_extremal_matching,
    even_extremal_matching,
    main_matching,
    s_extremal_matching,
)
from kpmatch.oracles import naive_max_matching
from kpmatch.solvers import matching_number

EPS = Fraction(1, 5)
GAMMA = Fraction(1, 100)


def goal(H):
    return min(H.n - 1, sum(codegrees(H)))


# ---------------------------------------------------------------------------
# classifiers


def test_s_witness_on_space_barrier():
    H = space_barrier(3, 5, (1, 1, 1))
    w = check_s_extremal(H, EPS)
    assert w is not None and w.verify(H)
    assert w.C == tuple(frozenset(range(1, 5)) for _ in range(3))


def test_no_s_witness_on_complete():
    assert check_s_extremal(complete(3, 3), Fraction(1, 2)) is None


def test_no_s_witness_when_degree_sum_large():
    bip = Bipartition.prefix((4,) * 3, (2, 2, 2))
    H = parity_family(3, 4, bip, "even")
    assert sum(codegrees(H)) == 6
    assert check_s_extremal(H, EPS) is None


def test_d_witness_on_parity_family():
    bip = Bipartition.prefix((4,) * 3, (2, 2, 0))
    H = parity_family(3, 4, bip, "even")
    w = check_d_extremal(H, EPS, bip)
    assert w is not None and w.defect == 0 and w.holds and w.verify(H)
    found = check_d_extremal(H, EPS)
    assert found is not None and found.defect == 0


@pytest.mark.parametrize("n", [2, 3])
def test_no_d_witness_on_complete(n):
    K = complete(3, n)
    assert check_d_extremal(K, Fraction(1, 10)) is None
    for sizes in itertools.product(range(n + 1), repeat=3):
        bip = Bipartition.prefix((n,) * 3, sizes)
        assert check_d_extremal(K, Fraction(1, 10), bip) is None


def test_no_d_witness_when_third_codegree_large():
    bip = Bipartition.prefix((4,) * 3, (2, 2, 2))
    H = parity_family(3, 4, bip, "even")
    assert codegrees(H)[2] > EPS * 4
    assert check_d_extremal(H, EPS) is None


def test_d_witness_fields_are_recomputed():
    bip = Bipartition.prefix((4,) * 3, (2, 2, 0))
    H = parity_family(3, 4, bip, "even")
    w = DExtremalWitness.build(H, bip, "even", EPS)
    G = H.with_edges(sorted(H.edges)[1:])
    assert w.verify(H) and not w.verify(G)


# ---------------------------------------------------------------------------
# space-barrier side


def padded_barrier():
    """H0(3,6,(2,2,1)) padded so that sum a_i = 6, with a few edges inside the B-sides."""
    n = 6
    H = space_barrier(3, n, (2, 2, 1))
    pad = {(x, y, 1) for x in range(n) for y in range(n)}
    inside = {(5, y, z) for y in (2, 3) for z in (3, 4)}
    return H.with_edges(sorted(H.edges | pad | inside))


def test_s_extremal_padded_barrier():
    H = padded_barrier()
    assert sum(codegrees(H)) >= H.n - H.k + 3
    w = check_s_extremal(H, EPS)
    tr = PipelineTranscript()
    M = s_extremal_matching(H, EPS, EPS, w, transcript=tr)
    assert isinstance(M, Matching) and M.is_valid(H)
    assert len(M) >= goal(H) and matching_number(H) >= len(M)
    assert tr.stages_disjoint()


@pytest.mark.parametrize("n,a", [(6, (3, 2, 1)), (7, (3, 3, 1)), (6, (2, 2, 2))])
def test_s_extremal_on_barriers(n, a):
    H = space_barrier(3, n, a)
    w = check_s_extremal(H, GAMMA)
    M = s_extremal_matching(H, EPS, GAMMA, w)
    assert M.is_valid(H) and len(M) == matching_number(H) == min(n, sum(a))


def test_s_extremal_parity_case():
    # both A-sides of parts 1 and 2 are half the part; the balancing step sees s0 < 0
    n = 6
    bip = Bipartition.prefix((n,) * 3, (3, 3, 1))
    H = parity_family(3, n, bip, "odd")
    gamma = Fraction(1, 5)
    w = check_s_extremal(H, gamma)
    tr = PipelineTranscript()
    out = s_extremal_matching(H, EPS, gamma, w, transcript=tr)
    assert isinstance(out, DExtremalWitness)
    assert out.side == "odd" and out.defect == 0 and out.verify(H)
    assert tr.quantities["s0"] < 0 and tr.stages == []


def test_s_extremal_parity_case_unreachable_at_default_gamma():
    n = 6
    bip = Bipartition.prefix((n,) * 3, (3, 3, 1))
    H = parity_family(3, n, bip, "odd")
    w = SExtremalWitness(tuple(frozenset(bip.B(j)) for j in range(3)), GAMMA, codegrees(H),
                         tuple(n - x - GAMMA * n for x in codegrees(H)), True)
    assert not w.verify(H, GAMMA)


def test_s_extremal_small_degree_sum_delegates():
    H = space_barrier(3, 6, (2, 1, 1))
    w = check_s_extremal(H, GAMMA)
    tr = PipelineTranscript()
    M = s_extremal_matching(H, EPS, GAMMA, w, transcript=tr)
    assert tr.route == ["greedy"] and len(M) >= 4


def test_s_extremal_preconditions():
    H = space_barrier(3, 6, (1, 3, 2))
    w = check_s_extremal(H, GAMMA)
    with pytest.raises(PreconditionViolated):
        s_extremal_matching(H, EPS, GAMMA, w)
    H = space_barrier(3, 6, (3, 2, 1))
    bogus = SExtremalWitness(tuple(frozenset(range(6)) for _ in range(3)), GAMMA, (3, 2, 1),
                             (Fraction(0),) * 3, True)
    with pytest.raises(PreconditionViolated):
        s_extremal_matching(H, EPS, GAMMA, bogus)


# ---------------------------------------------------------------------------
# parity side


def test_even_extremal_even_total():
    bip = Bipartition.prefix((4,) * 3, (2, 2, 2))
    H = parity_family(3, 4, bip, "even")
    M = even_extremal_matching(H, bip, eta=0)
    assert len(M) == 4 and M.is_valid(H)


def test_even_extremal_odd_total():
    bip = Bipartition.prefix((4,) * 3, (2, 2, 1))
    H = parity_family(3, 4, bip, "even")
    M = even_extremal_matching(H, bip, eta=0)
    assert len(M) == 3 and M.is_valid(H) and naive_max_matching(H) == 3


def test_even_extremal_preconditions():
    bip = Bipartition.prefix((4,) * 3, (1, 2, 2))
    with pytest.raises(PreconditionViolated):
        even_extremal_matching(parity_family(3, 4, bip, "even"), bip, eta=0)
    bip = Bipartition.prefix((4,) * 3, (2, 2, 2))
    H = parity_family(3, 4, bip, "even")
    G = H.with_edges(sorted(H.edges)[3:])
    with pytest.raises(PreconditionViolated):
        even_extremal_matching(G, bip, eta=0)


def test_even_extremal_tolerates_missing_edges():
    n = 6
    bip = Bipartition.prefix((n,) * 3, (3, 3, 2))
    H = parity_family(3, n, bip, "even")
    removed = {e for e in sorted(H.edges) if e[0] == 0 and e[1] in bip.A[1]}
    G = H.with_edges(sorted(H.edges - set(list(removed)[:1])))
    M = even_extremal_matching(G, bip, eta=Fraction(1, 10), exact_fallback=True)
    assert len(M) == n and M.is_valid(G)


@pytest.mark.parametrize("A", [(2, 2, 0), (2, 2, 1), (2, 2, 2), (2, 2, 3)])
@pytest.mark.parametrize("side", ["even", "odd"])
def test_d_extremal_on_parity_families(A, side):
    bip = Bipartition.prefix((4,) * 3, A)
    H = parity_family(3, 4, bip, side)
    w = DExtremalWitness.build(H, bip, side, EPS)
    tr = PipelineTranscript()
    M = d_extremal_matching(H, EPS, w, transcript=tr)
    assert M.is_valid(H) and len(M) >= 3
    assert len(M) == naive_max_matching(H)
    assert all(tr.invariants.values())


def test_d_extremal_perfect_when_defect_zero_and_even():
    bip = Bipartition.prefix((6,) * 3, (3, 3, 0))
    H = parity_family(3, 6, bip, "even")
    w = DExtremalWitness.build(H, bip, "even", EPS)
    assert w.defect == 0 and bip.a_total() % 2 == 0 and sum(codegrees(H)) >= 6
    assert len(d_extremal_matching(H, EPS, w)) == 6


# ---------------------------------------------------------------------------
# dispatcher


def test_main_complete():
    M, tr = main_matching(complete(3, 6))
    assert len(M) >= 5 and M.is_valid(complete(3, 6))


def test_main_space_barrier():
    H = space_barrier(3, 6, (2, 2, 1))
    M, tr = main_matching(H)
    assert len(M) == 5 and M.is_valid(H)


def test_main_parity_witness_route():
    bip = Bipartition.prefix((6,) * 3, (3, 3, 1))
    H = parity_family(3, 6, bip, "even")
    M, tr = main_matching(H)
    assert "d-extremal" in tr.route and len(M) == 5 == matching_number(H)


def test_main_rejects_unequal_parts():
    with pytest.raises(UnequalParts):
        main_matching(complete(3, (2, 3, 3)))


@settings(max_examples=15)
@given(st.integers(0, 2**64 - 1))
def test_main_dense_random(seed):
    H = random_instance(3, 6, Fraction(9, 10), seed)
    try:
        M, tr = main_matching(H)
    except StageFailed as err:
        assert err.stage
        return
    assert M.is_valid(H) and len(M) >= goal(H) and len(M) <= matching_number(H)
    assert tr.stages_disjoint()


@settings(max_examples=25)
@given(st.integers(0, 2**64 - 1), st.sampled_from([4, 5]), st.integers(0, 10), st.integers(0, 10))
def test_main_perturbed_barriers(seed, n, add, remove):
    H = perturb(space_barrier(3, n, (2, 1, n - 3)), add, remove, seed)
    try:
        M, _ = main_matching(H)
    except StageFailed as err:
        assert err.stage and err.transcript is not None
        return
    assert M.is_valid(H) and len(M) >= goal(H)


def test_stage_failures_name_their_stage():
    # with the exact fallbacks disabled every failure must still carry a stage identifier
    for seed in range(40):
        H = random_instance(3, 6, Fraction(9, 10), seed)
        try:
            main_matching(H, exact_fallback=False)
        except StageFailed as err:
            assert err.stage and "route" in err.diagnostics


def test_transcript_serializes():
    import json

    _, tr = main_matching(random_instance(3, 5, Fraction(4, 5), 3))
    json.dumps(tr.as_dict())
