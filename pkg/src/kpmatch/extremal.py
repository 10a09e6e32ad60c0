"""Extremality classifiers, the two extremal matching pipelines and the dispatcher.

Every pipeline runs over a read-only hypergraph, removes disjoint matchings
stage by stage and records each stage in a :class:`PipelineTranscript`.
Choices are lexicographic throughout, so a transcript is reproducible.  A
stage whose greedy choice breaks at small ``n`` raises :class:`StageFailed`
with a stage identifier; it never returns a short answer silently.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from .absorbing import (
    absorb_step,
    absorbing_matching_I,
    absorbing_or_extremal,
    is_absorbing_edge,
    is_perfect_absorbing,
    perfect_matching_within,
)
from .core import (
    Bipartition,
    Edge,
    Hypergraph,
    Matching,
    Params,
    Vertex,
    ceil_frac,
    codegrees,
    frac,
    induced,
    lift_edges,
    parity_defect,
    permute_parts,
    unpermute_edge,
)
from .errors import (
    BudgetExhausted,
    ConditionNotMet,
    FamilyConstructionFailed,
    KPMatchError,
    MalformedInput,
    NoPerfectMatching,
    PipelineFailed,
    PreconditionViolated,
    SelectionFailed,
    StageFailed,
    UnequalParts,
)
from .solvers import (
    SExtremalEvidence,
    almost_perfect_matching,
    dense_pm,
    even_matching,
    greedy_fact_matching,
    has_perfect_matching,
    max_matching,
)

HALF = Fraction(1, 2)


# ---------------------------------------------------------------------------
# Transcripts


@dataclass
class StageRecord:
    name: str
    edges: tuple[Edge, ...] = ()
    removed: tuple[Vertex, ...] = ()
    info: dict = field(default_factory=dict)


@dataclass
class PipelineTranscript:
    """Stage-by-stage record of a pipeline run.

    ``stages`` hold the removed matchings (and removed vertex sets such as
    ``S5``) in order; ``quantities`` hold named intermediate values (set
    sizes, ``t_i``, ``q``, ``m``, ``r``, ``s0``, ``m_v``, W-lists);
    ``invariants`` maps each checked inequality to its outcome and
    ``fallbacks`` lists every place the exact oracle stood in for a greedy step.
    Edges are stored in the labelling of the hypergraph the stage ran on.
    """

    route: list[str] = field(default_factory=list)
    stages: list[StageRecord] = field(default_factory=list)
    quantities: dict = field(default_factory=dict)
    invariants: dict = field(default_factory=dict)
    fallbacks: list[str] = field(default_factory=list)

    def add(self, name: str, edges: Iterable[Edge] = (), removed: Iterable[Vertex] = (), **info) -> StageRecord:
        rec = StageRecord(name, tuple(tuple(e) for e in edges), tuple(removed), info)
        self.stages.append(rec)
        return rec

    def edges(self) -> list[Edge]:
        return [e for s in self.stages for e in s.edges]

    def stages_disjoint(self) -> bool:
        seen: set = set()
        for s in self.stages:
            here = {(j, x) for e in s.edges for j, x in enumerate(e)} | {tuple(v) for v in s.removed}
            if here & seen:
                return False
            seen |= here
        return True

    def as_dict(self) -> dict:
        def plain(x):
            if isinstance(x, Fraction):
                return str(x)
            if isinstance(x, dict):
                return {str(k): plain(v) for k, v in x.items()}
            if isinstance(x, (list, tuple, set, frozenset)):
                items = sorted(x) if isinstance(x, (set, frozenset)) else x
                return [plain(v) for v in items]
            if isinstance(x, (np.integer,)):
                return int(x)
            return x

        return {
            "route": list(self.route),
            "stages": [
                {"name": s.name, "edges": [list(e) for e in s.edges],
                 "removed": [list(v) for v in s.removed], "info": plain(s.info)}
                for s in self.stages
            ],
            "quantities": plain(self.quantities),
            "invariants": plain(self.invariants),
            "fallbacks": list(self.fallbacks),
        }


# ---------------------------------------------------------------------------
# Edge picking


class _Picker:
    """Disjoint edge selection with a shared set of used vertices."""

    def __init__(self, H: Hypergraph):
        self.H = H
        self.T = H.tensor
        self.used: list[set[int]] = [set() for _ in range(H.k)]

    def free(self, part: int, pool: Iterable[int]) -> list[int]:
        return sorted(x for x in set(pool) if x not in self.used[part])

    def is_used(self, part: int, x: int) -> bool:
        return x in self.used[part]

    def take(self, e: Edge) -> None:
        for j, x in enumerate(e):
            if x in self.used[j]:
                raise RuntimeError("picked edge overlaps an earlier one")
            self.used[j].add(x)

    def mark(self, vs: Iterable) -> None:
        for j, x in vs:
            self.used[j].add(x)

    def find(self, pools: Sequence[Iterable[int]], pred: Optional[Callable[[Edge], bool]] = None) -> Optional[Edge]:
        """Lexicographically first unused edge with part j drawn from ``pools[j]``."""
        lists = [self.free(j, p) for j, p in enumerate(pools)]
        if any(not ls for ls in lists):
            return None
        sub = self.T[np.ix_(*[np.asarray(ls, dtype=np.intp) for ls in lists])]
        for row in np.argwhere(sub):
            e = tuple(lists[j][int(r)] for j, r in enumerate(row))
            if pred is None or pred(e):
                return e
        return None

    def free_vertices(self) -> list[tuple[int, int]]:
        return [(j, x) for j in range(self.H.k) for x in range(self.H.sizes[j]) if x not in self.used[j]]


def _pick_many(pk: _Picker, pools, count: int, stage: str, tr: PipelineTranscript,
               exact_fallback: bool, node_budget=None) -> list[Edge]:
    """``count`` disjoint edges inside ``pools``: greedy, then the exact oracle if allowed."""
    got: list[Edge] = []
    for _ in range(count):
        e = pk.find(pools)
        if e is None:
            break
        pk.take(e)
        got.append(e)
    if len(got) == count:
        return got
    for e in got:
        for j, x in enumerate(e):
            pk.used[j].discard(x)
    if exact_fallback:
        keep = [(j, x) for j, p in enumerate(pools) for x in pk.free(j, p)]
        sub, back = induced(pk.H, keep)
        if min(sub.sizes) >= count:
            try:
                rep = max_matching(sub, node_budget, target=count)
                best = rep.matching
            except BudgetExhausted as exc:
                best = exc.best
            if len(best) >= count:
                chosen = lift_edges(best.edges[:count], back)
                for e in chosen:
                    pk.take(e)
                tr.fallbacks.append(f"{stage}: greedy found {len(got)} of {count} edges, exact search completed")
                return chosen
    raise StageFailed(stage, f"found {len(got)} of {count} required disjoint edges", needed=count, found=len(got))


def _pm_stage(sub: Hypergraph, condition, stage: str, tr: PipelineTranscript, exact_fallback: bool,
              node_budget=None) -> Matching:
    """Perfect matching of a dense block; the exact oracle stands in when the condition fails."""
    log: list[str] = []
    try:
        M = dense_pm(sub, condition, log=log, node_budget=node_budget)
        tr.fallbacks.extend(f"{stage}: {m}" for m in log)
        return M
    except ConditionNotMet as exc:
        if not exact_fallback:
            raise StageFailed(stage, "dense degree condition fails", **exc.diagnostics) from exc
        info = exc.diagnostics
    except NoPerfectMatching as exc:
        raise StageFailed(stage, "block has no perfect matching", **exc.diagnostics) from exc
    except BudgetExhausted as exc:
        raise StageFailed(stage, "exact search budget exhausted", nodes=exc.nodes) from exc
    try:
        ok, cert = has_perfect_matching(sub, node_budget)
    except BudgetExhausted as exc:
        raise StageFailed(stage, "exact search budget exhausted", nodes=exc.nodes) from exc
    tr.fallbacks.append(f"{stage}: condition {info.get('condition')} fails at m={sub.n}, exact oracle used")
    if not ok:
        raise StageFailed(stage, "block has no perfect matching", m=sub.n)
    return cert


# ---------------------------------------------------------------------------
# Witnesses


@dataclass(frozen=True)
class SExtremalWitness:
    """Independent per-part sets ``C_i`` with ``|C_i| >= n - a_i - eps*n``.

    ``floors[i]`` is the exact bound ``n - a_i - eps*n``; ``heuristic`` is
    set when the set came from the greedy search rather than the full one.
    """

    C: tuple[frozenset[int], ...]
    eps: Fraction
    a: tuple[int, ...]
    floors: tuple[Fraction, ...]
    degree_sum_ok: bool
    heuristic: bool = False

    def sizes(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.C)

    def independent(self, H: Hypergraph) -> bool:
        return _independent(H, [sorted(c) for c in self.C])

    def verify(self, H: Hypergraph, eps=None) -> bool:
        eps = self.eps if eps is None else frac(eps)
        if len(self.C) != H.k:
            return False
        n = H.n
        a = codegrees(H)
        return (sum(a) <= (1 + eps) * n
                and all(len(c) >= n - ai - eps * n for c, ai in zip(self.C, a))
                and self.independent(H))

    def as_dict(self) -> dict:
        return {"C": [sorted(c) for c in self.C], "eps": str(self.eps), "a": list(self.a),
                "floors": [str(f) for f in self.floors], "sizes": list(self.sizes()),
                "degree_sum_ok": self.degree_sum_ok, "heuristic": self.heuristic}


@dataclass(frozen=True)
class DExtremalWitness:
    """Bipartition close to a parity family, with the exact defect and degree checks."""

    bipartition: Bipartition
    side: str
    defect: int
    eps: Fraction
    checks: dict
    holds: bool

    @classmethod
    def build(cls, H: Hypergraph, bip: Bipartition, side: str, eps) -> "DExtremalWitness":
        eps = frac(eps)
        n, k = H.n, H.k
        a = codegrees(H)
        lo, hi = (HALF - eps) * n, (HALF + eps) * n
        defect = parity_defect(H, bip, side)
        checks = {
            "a_top_two": all(lo <= x <= hi for x in a[:2]),
            "A_top_two": all(lo <= len(bip.A[j]) <= hi for j in range(2)),
            "a_rest_small": all(x <= eps * n for x in a[2:]),
            "defect_small": defect <= eps * n ** k,
        }
        return cls(bip, side, defect, eps, checks, all(checks.values()))

    def verify(self, H: Hypergraph) -> bool:
        """Recompute every recorded field exactly."""
        again = DExtremalWitness.build(H, self.bipartition, self.side, self.eps)
        return again.defect == self.defect and again.checks == self.checks

    def as_dict(self) -> dict:
        return {"A": [sorted(x) for x in self.bipartition.A], "side": self.side, "defect": self.defect,
                "eps": str(self.eps), "checks": dict(self.checks), "holds": self.holds}


def _independent(H: Hypergraph, C: Sequence[Sequence[int]]) -> bool:
    if any(len(c) == 0 for c in C):
        return True
    return not H.tensor[np.ix_(*[np.asarray(c, dtype=np.intp) for c in C])].any()


# ---------------------------------------------------------------------------
# Classifiers

EXHAUSTIVE_BITS = 24
S_SCAN_LIMIT = 500_000
D_SCAN_LIMIT = 50_000


def _extend_independent(H: Hypergraph, C: list[list[int]]) -> list[list[int]]:
    C = [sorted(c) for c in C]
    for j in range(H.k):
        for x in range(H.sizes[j]):
            if x in C[j]:
                continue
            trial = [c if i != j else sorted(c + [x]) for i, c in enumerate(C)]
            if _independent(H, trial):
                C = trial
    return C


def _greedy_independent(H: Hypergraph, floors: Sequence[int]) -> Optional[list[list[int]]]:
    T = H.tensor
    C = [list(range(s)) for s in H.sizes]
    while not _independent(H, C):
        sub = T[np.ix_(*[np.asarray(c, dtype=np.intp) for c in C])]
        best = None
        for j in range(H.k):
            if len(C[j]) <= floors[j]:
                continue
            deg = sub.sum(axis=tuple(i for i in range(H.k) if i != j))
            for pos, x in enumerate(C[j]):
                key = (-int(deg[pos]), j, x)
                if best is None or key < best[0]:
                    best = (key, j, x)
        if best is None:
            return None
        C[best[1]].remove(best[2])
    return C


def check_s_extremal(H: Hypergraph, eps) -> Optional[SExtremalWitness]:
    """Search for an independent set certifying eps-closeness to the space barrier."""
    eps = frac(eps)
    n, k = H.n, H.k
    a = codegrees(H)
    if sum(a) > (1 + eps) * n:
        return None
    floors = tuple(n - ai - eps * n for ai in a)
    need = [max(0, ceil_frac(f)) for f in floors]
    if any(r > n for r in need):
        return None
    count = math.prod(math.comb(n, r) for r in need)
    heuristic = not (k * n <= EXHAUSTIVE_BITS and count <= S_SCAN_LIMIT)
    found = None
    if not heuristic:
        for choice in itertools.product(*(itertools.combinations(range(n), r) for r in need)):
            if _independent(H, choice):
                found = [list(c) for c in choice]
                break
    else:
        found = _greedy_independent(H, need)
    if found is None:
        return None
    C = _extend_independent(H, found)
    return SExtremalWitness(tuple(frozenset(c) for c in C), eps, a, floors, True, heuristic)


def _subsets_by_size(n: int, sizes: Iterable[int]) -> list[tuple[int, ...]]:
    return [c for s in sizes for c in itertools.combinations(range(n), s)]


def _scan_bipartitions(H: Hypergraph, eps: Fraction) -> Optional[tuple[Bipartition, str]]:
    """Bipartition of least defect meeting the size and defect conditions.

    Ties go to the lexicographically first candidate in the scan order (A_1,
    A_2 by size then lexicographic, later parts likewise, even before odd).
    """
    n, k = H.n, H.k
    lo, hi = ceil_frac((HALF - eps) * n), math.floor((HALF + eps) * n)
    top = _subsets_by_size(n, range(max(lo, 0), min(hi, n) + 1))
    mid = _subsets_by_size(n, range(n + 1))
    last = _subsets_by_size(n, range(n + 1))
    L = np.zeros((len(last), n), dtype=np.int64)
    for r, c in enumerate(last):
        L[r, list(c)] = 1
    missing = (~H.tensor).astype(np.int64)
    thr = eps * n ** k
    grids = np.indices((n,) * (k - 1))
    axes = tuple(range(k - 1))
    best = None
    for choice in itertools.product(top, top, *([mid] * (k - 3))):
        par = np.zeros((n,) * (k - 1), dtype=np.int64)
        for j, c in enumerate(choice):
            ind = np.zeros(n, dtype=np.int64)
            ind[list(c)] = 1
            par += ind[grids[j]]
        even_prefix = (par % 2 == 0)[..., None]
        ce = (missing * even_prefix).sum(axis=axes)
        co = (missing * ~even_prefix).sum(axis=axes)
        for side, vals in (("even", int(ce.sum()) + L @ (co - ce)), ("odd", int(co.sum()) + L @ (ce - co))):
            r = int(np.argmin(vals))
            d = int(vals[r])
            if d <= thr and (best is None or d < best[0]):
                best = (d, choice, last[r], side)
        if best is not None and best[0] == 0:
            break
    if best is None:
        return None
    return Bipartition(H.sizes, list(best[1]) + [best[2]]), best[3]


def _d_scan_size(n: int, k: int, eps: Fraction) -> int:
    lo, hi = ceil_frac((HALF - eps) * n), math.floor((HALF + eps) * n)
    top = sum(math.comb(n, s) for s in range(max(lo, 0), min(hi, n) + 1))
    return top * top * 2 ** (n * (k - 3))


def check_d_extremal(
    H: Hypergraph, eps, candidate: Optional[Bipartition] = None, *, params: Optional[Params] = None
) -> Optional[DExtremalWitness]:
    """Verify a candidate bipartition, or search for one, for eps-closeness to a parity family."""
    eps = frac(eps)
    n, k = H.n, H.k
    if candidate is not None:
        if candidate.sizes != H.sizes:
            raise MalformedInput("candidate bipartition does not match the part sizes")
        found = [DExtremalWitness.build(H, candidate, s, eps) for s in ("even", "odd")]
        good = [w for w in found if w.holds]
        return good[0] if good else None
    a = codegrees(H)
    lo, hi = (HALF - eps) * n, (HALF + eps) * n
    if not (all(lo <= x <= hi for x in a[:2]) and all(x <= eps * n for x in a[2:])):
        return None
    if k >= 3 and _d_scan_size(n, k, eps) <= D_SCAN_LIMIT:
        hit = _scan_bipartitions(H, eps)
        if hit is None:
            return None
        return DExtremalWitness.build(H, hit[0], hit[1], eps)
    try:
        out = absorbing_or_extremal(H, (params or Params()).replace(epsilon=eps))
    except KPMatchError:
        return None
    if out.kind != "witness":
        return None
    return check_d_extremal(H, eps, out.bipartition)


# ---------------------------------------------------------------------------
# Space-barrier side


def _greedy_route(H: Hypergraph, tr: PipelineTranscript, name: str = "greedy") -> Matching:
    M = greedy_fact_matching(H)
    tr.add(name, M.edges)
    return M


def s_extremal_matching(
    H: Hypergraph,
    eps,
    gamma,
    witness: SExtremalWitness,
    *,
    transcript: Optional[PipelineTranscript] = None,
    exact_fallback: bool = True,
    node_budget: Optional[int] = None,
) -> Union[Matching, DExtremalWitness]:
    """Matching of size at least ``min{n-1, sum a}`` near the space barrier, or a parity witness.

    Parts are expected in decreasing order of codegree.  The third balancing
    case returns a :class:`DExtremalWitness` (side odd, at ``3*eps``) instead.
    """
    eps, gamma = frac(eps), frac(gamma)
    tr = transcript if transcript is not None else PipelineTranscript()
    n, k = H.n, H.k
    a = codegrees(H)
    if sum(a) <= n - k + 2:
        tr.route.append("greedy")
        return _greedy_route(H, tr)
    if list(a) != sorted(a, reverse=True):
        raise PreconditionViolated("parts must be ordered by decreasing codegree", a=a)
    if a[0] > (1 - eps) * n or a[1] < eps * n:
        raise PreconditionViolated("needs (1-eps)n >= a_1 and a_2 >= eps*n", a=a, n=n, eps=str(eps))
    if not witness.verify(H, gamma):
        raise PreconditionViolated("witness is not an independent set meeting the size floors")
    T = H.tensor
    C = [sorted(c) for c in witness.C]
    A: list[list[int]] = []
    B: list[list[int]] = []
    for i in range(k):
        others = tuple(j for j in range(k) if j != i)
        P = math.prod(len(C[j]) for j in others)
        rest = [x for x in range(n) if x not in witness.C[i]]
        if rest and P > 0:
            idx = [np.asarray(C[j] if j != i else rest, dtype=np.intp) for j in range(k)]
            deg = T[np.ix_(*idx)].sum(axis=others)
        else:
            deg = np.zeros(len(rest), dtype=np.int64)
        Ai = [x for x, d in zip(rest, deg) if (P - int(d)) ** 2 <= gamma * P * P]
        A.append(Ai)
        B.append([x for x in rest if x not in set(Ai)])
    tr.quantities.update({"n": n, "a": a, "C_sizes": [len(c) for c in C], "A_sizes": [len(x) for x in A],
                          "B_sizes": [len(x) for x in B]})
    pk = _Picker(H)
    first_stage = len(tr.stages)

    # Step 1: cover B.
    t = [max(0, a[i] - len(A[i])) for i in range(k)]
    tr.quantities["t"] = t
    M1: list[Edge] = []
    for i in range(k):
        for _ in range(t[i]):
            e = pk.find([C[j] if j != i else B[i] for j in range(k)])
            if e is None:
                raise StageFailed("s-extremal/step1-gap", f"no edge from C into B_{i}", part=i, needed=t[i])
            pk.take(e)
            M1.append(e)
    tr.add("M1", M1)
    M2: list[Edge] = []
    for i in range(k):
        for v in B[i]:
            if pk.is_used(i, v):
                continue
            target = 1 if i == 0 else 0
            pools = [[v] if j == i else (range(n) if j == target else C[j]) for j in range(k)]
            e = pk.find(pools)
            if e is None:
                raise StageFailed("s-extremal/step1-cover", f"cannot cover vertex {v} of B_{i}", part=i, vertex=v)
            pk.take(e)
            M2.append(e)
    tr.add("M2", M2)

    # Step 2: balance A' against C'.
    def free_A():
        return [pk.free(i, A[i]) for i in range(k)]

    n1 = n - len(M1) - len(M2)
    s0 = n1 - sum(len(x) for x in free_A())
    tr.quantities["s0"] = s0
    M3: list[Edge] = []
    s = s0
    if s0 < 0:
        case_three_parts = k >= 3 and a[2] ** 2 >= 4 * k * k * gamma * n * n
        case_big_first = len(A[0]) >= (HALF + eps) * n
        if case_three_parts:
            pools = [range(n), A[1], A[2]] + [C[j] for j in range(3, k)]
            case = "two-A-parts"
        elif case_big_first:
            pools = [A[0], A[1]] + [C[j] for j in range(2, k)]
            case = "large-A1"
        else:
            tr.quantities["claim_case"] = "parity"
            tr.route.append("s-extremal/parity-witness")
            bip = Bipartition(H.sizes, A)
            w = DExtremalWitness.build(H, bip, "odd", 3 * eps)
            abandoned = tr.stages[first_stage:]
            del tr.stages[first_stage:]
            tr.quantities["s_extremal_abandoned"] = {s.name: [list(e) for e in s.edges] for s in abandoned}
            tr.quantities["parity_witness"] = w.as_dict()
            return w
        tr.quantities["claim_case"] = case
        while s < 0:
            e = pk.find(pools)
            if e is None:
                raise StageFailed("s-extremal/step2-balance", "no balancing edge left", case=case, s=s)
            pk.take(e)
            M3.append(e)
            s = (n1 - len(M3)) - sum(len(x) for x in free_A())
    tr.add("M3", M3)
    r = s
    r_cap = max(1, n - sum(a))
    tr.quantities["r"] = r
    tr.invariants["0 <= r <= max(1, n - sum a)"] = 0 <= r <= r_cap
    if not 0 <= r <= r_cap:
        raise StageFailed("s-extremal/step2-balance", "r is outside [0, max(1, n - sum a)]", r=r, cap=r_cap)

    # Step 3: cover A_3..A_k into C, then two dense blocks.
    M4: list[Edge] = []
    for i in range(2, k):
        for v in pk.free(i, A[i]):
            e = pk.find([[v] if j == i else C[j] for j in range(k)])
            if e is None:
                raise StageFailed("s-extremal/step3-cover", f"vertex {v} of A_{i} has no free C-neighbourhood",
                                  part=i, vertex=v)
            pk.take(e)
            M4.append(e)
    tr.add("M4", M4)
    A0, A1 = pk.free(0, A[0]), pk.free(1, A[1])
    m1, m2 = len(A0), len(A1)
    Cr = [pk.free(j, C[j]) for j in range(k)]
    expect = [m2 + r, m1 + r] + [m1 + m2 + r] * (k - 2)
    tr.quantities.update({"m1": m1, "m2": m2, "C_remaining": [len(c) for c in Cr]})
    tr.invariants["remaining C sizes match"] = [len(c) for c in Cr] == expect
    if [len(c) for c in Cr] != expect:
        raise StageFailed("s-extremal/step3-sizes", "remaining C sizes do not match", got=[len(c) for c in Cr],
                          expected=expect)
    blocks = [
        (0, [A0, Cr[1][:m1]] + [Cr[j][:m1] for j in range(2, k)]),
        (1, [Cr[0][:m2], A1] + [Cr[j][m1:m1 + m2] for j in range(2, k)]),
    ]
    M5: list[Edge] = []
    for i, parts in blocks:
        if not parts[i]:
            continue
        sub, back = induced(H, [(j, x) for j, xs in enumerate(parts) for x in xs])
        pm = _pm_stage(sub, ("pikhurko", (i,)), f"s-extremal/step3-block{i + 1}", tr, exact_fallback, node_budget)
        got = lift_edges(pm.edges, back)
        for e in got:
            pk.take(e)
        M5 += got
    tr.add("M5", M5)
    M = Matching(tuple(M1 + M2 + M3 + M4 + M5)).validate(H)
    tr.invariants["size >= n - r"] = len(M) >= n - r
    if len(M) < n - r:
        raise StageFailed("s-extremal/final", "matching is shorter than n - r", size=len(M), r=r)
    return M


# ---------------------------------------------------------------------------
# Parity-barrier side


def _even_vectors(k: int) -> list[tuple[int, ...]]:
    return [v for v in itertools.product((0, 1), repeat=k) if sum(v) % 2 == 0]


def _small_class(m: int, n: int, k: int, eta, eta_sq) -> bool:
    """``m < eta^(1/(2k)) * n``, exactly."""
    if eta_sq is not None:
        return Fraction(m) ** (4 * k) < eta_sq * Fraction(n) ** (4 * k)
    return Fraction(m) ** (2 * k) < eta * Fraction(n) ** (2 * k)


def even_extremal_matching(
    H: Hypergraph,
    bip: Bipartition,
    eta=None,
    eps0=Fraction(1, 10),
    *,
    eta_squared=None,
    transcript: Optional[PipelineTranscript] = None,
    exact_fallback: bool = False,
    node_budget: Optional[int] = None,
) -> Matching:
    """Matching of size n (|A| even) or n - 1 (|A| odd) when every even location class is nearly complete.

    Give ``eta`` directly or through ``eta_squared`` (used when eta is a square root).
    """
    if (eta is None) == (eta_squared is None):
        raise MalformedInput("give exactly one of eta and eta_squared")
    eta = None if eta is None else frac(eta)
    eta_sq = None if eta_squared is None else frac(eta_squared)
    eps0 = frac(eps0)
    tr = transcript if transcript is not None else PipelineTranscript()
    n, k = H.n, H.k
    if n == 0:
        return Matching()
    if n % 2 or bip.sizes != H.sizes:
        raise PreconditionViolated("needs an even part size and a matching bipartition", n=n)
    sizes = bip.a_sizes()
    if sizes[0] != n // 2 or sizes[1] != n // 2:
        raise PreconditionViolated("needs |A_1| = |A_2| = n/2", a_sizes=sizes)
    for i in range(2, k):
        if sizes[i] and not (eps0 * n <= sizes[i] <= (1 - eps0) * n):
            raise PreconditionViolated(f"|A_{i + 1}| must be 0 or within [eps0*n, (1-eps0)*n]", a_sizes=sizes)
    T = H.tensor
    for v in _even_vectors(k):
        sides = [sorted(bip.side(j, v[j])) for j in range(k)]
        if any(not s for s in sides):
            continue
        sub = T[np.ix_(*[np.asarray(s, dtype=np.intp) for s in sides])]
        for p in range(k):
            P = math.prod(len(sides[j]) for j in range(k) if j != p)
            worst = P - int(sub.sum(axis=tuple(j for j in range(k) if j != p)).min())
            ok = (Fraction(worst) ** 2 <= eta_sq * Fraction(n) ** (2 * (k - 1)) if eta_sq is not None
                  else worst <= eta * n ** (k - 1))
            if not ok:
                raise PreconditionViolated("an even location class is not dense enough", vector=v, part=p,
                                           complement_degree=worst)
    template = even_matching(k, n, bip)
    counts: dict[tuple[int, ...], int] = {}
    for e in template:
        counts[bip.location(e)] = counts.get(bip.location(e), 0) + 1
    tr.quantities["m_v"] = {"".join(map(str, v)): c for v, c in sorted(counts.items())}
    pk = _Picker(H)
    covered = {(j, x) for e in template for j, x in enumerate(e)}
    pk.mark((j, x) for j in range(k) for x in range(n) if (j, x) not in covered)
    out: list[Edge] = []
    small = [v for v in sorted(counts) if _small_class(counts[v], n, k, eta, eta_sq)]
    tr.quantities["small_classes"] = ["".join(map(str, v)) for v in small]
    for v in small:
        pools = [bip.side(j, v[j]) for j in range(k)]
        got = _pick_many(pk, pools, counts[v], "even-extremal/small-class", tr, exact_fallback, node_budget)
        out += got
    for v in sorted(counts):
        if v in small:
            continue
        m = counts[v]
        block = [pk.free(j, bip.side(j, v[j]))[:m] for j in range(k)]
        if any(len(b) != m for b in block):
            raise StageFailed("even-extremal/blocks", "not enough free vertices for a block", vector=v, m=m)
        keep = [(j, x) for j, b in enumerate(block) for x in b]
        pk.mark(keep)
        sub, back = induced(H, keep)
        pm = _pm_stage(sub, "daykin_haggkvist", "even-extremal/blocks", tr, exact_fallback, node_budget)
        out += lift_edges(pm.edges, back)
    tr.add("even-extremal", out)
    M = Matching(tuple(out)).validate(H)
    if len(M) != len(template):
        raise StageFailed("even-extremal/final", "matching size differs from the template", size=len(M),
                          expected=len(template))
    return M


def d_extremal_matching(
    H: Hypergraph,
    eps,
    witness: DExtremalWitness,
    *,
    eps0=Fraction(1, 10),
    transcript: Optional[PipelineTranscript] = None,
    exact_fallback: bool = True,
    node_budget: Optional[int] = None,
) -> Matching:
    """Matching of size at least ``min{n-1, sum a}`` near a parity family.

    The witness has to recompute exactly (:meth:`DExtremalWitness.verify`);
    whether it meets the eps-conditions is recorded, not required.
    """
    eps, eps0 = frac(eps), frac(eps0)
    tr = transcript if transcript is not None else PipelineTranscript()
    n, k = H.n, H.k
    a = codegrees(H)
    if sum(a) <= n - k + 2:
        tr.route.append("greedy")
        return _greedy_route(H, tr)
    if k < 3:
        raise PreconditionViolated("needs k >= 3")
    if witness.bipartition.sizes != H.sizes or not witness.verify(H):
        raise PreconditionViolated("witness does not recompute on this hypergraph")
    tr.quantities["witness_holds"] = witness.holds
    A = [set(x) for x in witness.bipartition.A]

    def flip(j):
        A[j] = set(range(n)) - A[j]

    flips = []
    if witness.side == "odd":
        flip(0)
        flips.append(0)
    for i in range(2, k):
        if len(A[i]) > n - len(A[i]):
            flip(0)
            flip(i)
            flips += [0, i]
    tr.quantities["flips"] = flips
    order = list(range(k))
    Hw = H

    def classify(Hw, A):
        T = Hw.tensor
        W: set[tuple[int, int]] = set()
        for v in _even_vectors(k):
            sides = [sorted(A[j]) if v[j] else sorted(set(range(n)) - A[j]) for j in range(k)]
            if any(not s for s in sides):
                continue
            sub = T[np.ix_(*[np.asarray(s, dtype=np.intp) for s in sides])]
            for p in range(k):
                P = math.prod(len(sides[j]) for j in range(k) if j != p)
                deg = sub.sum(axis=tuple(j for j in range(k) if j != p))
                for x, d in zip(sides[p], deg):
                    c = P - int(d)
                    if 4 * c * c > eps * n ** (2 * (k - 1)):
                        W.add((p, x))
        inA = [np.array([x in A[j] for x in range(n)]) for j in range(k)]
        horiz = (inA[0][:, None] == inA[1][None, :]).reshape([n, n] + [1] * (k - 2))
        Th = T & horiz
        hcount = [Th.sum(axis=tuple(j for j in range(k) if j != p)) for p in range(k)]
        return W, hcount

    W, hcount = classify(Hw, A)
    for attempt in range(2):
        WA = [sorted(x for p, x in W if p == i and x in A[i] and hcount[i][x] < eps0 * n ** (k - 1))
              for i in range(2)]
        WB = [sorted(x for p, x in W if p == i and x not in A[i] and hcount[i][x] < eps0 * n ** (k - 1))
              for i in range(2)]
        A0 = [(A[i] - set(WA[i])) | set(WB[i]) if i < 2 else set(A[i]) for i in range(k)]
        q = (n - len(A0[1])) - (n - len(A0[0]))
        if q >= 0 or attempt == 1:
            break
        order = [1, 0] + list(range(2, k))
        Hw = permute_parts(H, order)
        A[0], A[1] = A[1], A[0]
        a = codegrees(Hw)
        W, hcount = classify(Hw, A)
    if q < 0:
        raise StageFailed("d-extremal/normalize", "relabelling did not make q non-negative", q=q)
    B0 = [set(range(n)) - A0[i] for i in range(k)]
    W0 = sorted(v for v in W if v[0] < 2)
    tr.quantities.update({"n": n, "a": a, "order": order, "A_sizes": [len(x) for x in A],
                          "W": sorted(W), "W0": W0, "W_A": WA, "W_B": WB,
                          "A0_sizes": [len(x) for x in A0], "q": q})
    pk = _Picker(Hw)
    sa = sum(a)

    def B_free(i):
        return len(pk.free(i, B0[i]))

    # Step 1: reduce the gap between B_1 and B_2.
    delta = q - n + sa
    tr.quantities["gap_target"] = delta
    M1: list[Edge] = []
    if delta > 0:
        need = delta if sa <= n else q
        keep = ([(0, x) for x in sorted(A0[0])] + [(1, x) for x in sorted(B0[1])]
                + [(j, x) for j in range(2, k) for x in range(n)])
        sub, back = induced(Hw, keep)
        if min(sub.sizes) < max(need, k - 2):
            raise StageFailed("d-extremal/step1-gap", "gap hypergraph too small", sizes=sub.sizes, needed=need)
        got = greedy_fact_matching(sub)
        if len(got) < need:
            raise StageFailed("d-extremal/step1-gap", "greedy matching shorter than the gap", size=len(got),
                              needed=need)
        M1 = lift_edges(got.edges[:need], back)
        for e in M1:
            pk.take(e)
    tr.add("M1", M1)

    # Step 2: clean parts 1 and 2 with horizontal edges.
    Wset = set(W)
    Wp0 = [v for v in W0 if v[1] in (WA[v[0]] + WB[v[0]]) and not pk.is_used(*v)]
    Wpp0 = [v for v in W0 if v not in set(Wp0) and not pk.is_used(*v)]

    def horizontal0(e):
        return (e[0] in A0[0]) == (e[1] in A0[1])

    def avoiding(u, extra=()):
        bad = (Wset | set(extra)) - {u}
        return lambda e: all((j, x) not in bad for j, x in enumerate(e))

    def cover(u, pred, stage, relax=True):
        pools = [[u[1]] if j == u[0] else range(n) for j in range(k)]
        e = pk.find(pools, lambda f: pred(f) and avoiding(u)(f))
        if e is None and relax:
            e = pk.find(pools, pred)
            if e is not None:
                tr.fallbacks.append(f"{stage}: vertex {u} covered by an edge meeting other atypical vertices")
        if e is None:
            raise StageFailed(stage, f"no admissible edge for vertex {u}", vertex=u)
        pk.take(e)
        return e

    M2: list[Edge] = []
    for u in Wpp0 + Wp0:
        if not pk.is_used(*u):
            M2.append(cover(u, horizontal0, "d-extremal/step2-clean"))
    tr.add("M2", M2)
    diff2 = B_free(1) - B_free(0)
    tr.quantities["B_gap_after_step2"] = diff2
    ok2 = diff2 == q - len(M1) and 0 <= diff2 <= max(0, n - sa) <= k - 3
    tr.invariants["0 <= |B2^2|-|B1^2| = q-|M1| <= max(0, n-sum a) <= k-3"] = ok2
    if not ok2:
        raise StageFailed("d-extremal/step2-balance", "gap after cleaning is out of range", gap=diff2,
                          q=q, m1=len(M1))

    # Step 3: clean the remaining parts.
    X = [(i, x) for i in range(2, k) if len(A[i]) <= 2 * eps0 * n for x in sorted(A[i])
         if (i, x) not in Wset and not pk.is_used(i, x)]
    Wrest = sorted(v for v in W if v[0] >= 2 and not pk.is_used(*v))
    Wp = [v for v in Wrest if hcount[v[0]][v[1]] >= 3 * k * k * eps0 * n ** (k - 1)]
    Wpp = [v for v in Wrest if v not in set(Wp)]
    banned = Wset | set(X)
    b_before = [B_free(0), B_free(1)]
    M3: list[Edge] = []
    for u in Wp:
        if pk.is_used(*u):
            continue
        pools = [[u[1]] if j == u[0] else range(n) for j in range(k)]
        bad = banned - {u}
        e = pk.find(pools, lambda f: horizontal0(f) and all((j, x) not in bad for j, x in enumerate(f)))
        if e is None:
            raise StageFailed("d-extremal/step3-horizontal", f"no horizontal edge for vertex {u}", vertex=u)
        pk.take(e)
        M3.append(e)
    rest = sorted(v for v in set(Wpp) | set(X) if not pk.is_used(*v))
    half = len(rest) // 2
    for pos, u in enumerate(rest):
        first = pos < half
        pools: list = []
        for j in range(k):
            if j == u[0]:
                pools.append([u[1]])
            elif j == 0:
                pools.append(B0[0] if first else A0[0])
            elif j == 1:
                pools.append(A0[1] if first else B0[1])
            elif u in X:
                pools.append(B0[j])
            else:
                pools.append(range(n))
        bad = banned - {u}
        e = pk.find(pools, lambda f: all((j, x) not in bad for j, x in enumerate(f)))
        if e is None:
            check = "x-location" if u in X else "diagonal"
            raise StageFailed("d-extremal/step3-availability", f"{check} edge unavailable for vertex {u}",
                              vertex=u, check=check, half=1 if first else 2)
        pk.take(e)
        M3.append(e)
    tr.add("M3", M3)
    tr.quantities.update({"X": X, "W_prime": Wp, "W_double_prime": Wpp})
    d3 = (b_before[0] - B_free(0)) - (b_before[1] - B_free(1))
    tr.invariants["-1 <= |B1^2 in M3| - |B2^2 in M3| <= 0"] = -1 <= d3 <= 0
    if not -1 <= d3 <= 0:
        raise StageFailed("d-extremal/step3-balance", "cleaning edges unbalanced the B sides", delta=d3)

    # Step 4: balance B_1 against A_2.
    m = B_free(0) - len(pk.free(1, A0[1]))
    tr.quantities["m"] = m
    if m >= 0:
        pools = [B0[j] for j in range(k)]
    else:
        pools = [A0[0], A0[1]] + [B0[j] for j in range(2, k)]
    M4 = _pick_many(pk, pools, abs(m), "d-extremal/step4-balance", tr, exact_fallback, node_budget)
    tr.add("M4", M4)
    tval = B_free(1) - B_free(0)
    ok4 = B_free(0) == len(pk.free(1, A0[1])) and -1 <= tval <= k - 3
    tr.invariants["-1 <= |B2^4|-|B1^4| <= k-3"] = ok4
    if not ok4:
        raise StageFailed("d-extremal/step4-balance", "balance after step 4 is out of range", t=tval)

    # Step 5: balanced removal fixing the parity of A.
    tr.quantities["t"] = tval
    S5: list[tuple[int, int]] = []
    if tval != 0:
        cnt = max(tval, 1)
        if tval > 0:
            heads = [pk.free(0, A0[0])[:cnt], pk.free(1, B0[1])[:cnt]]
        else:
            heads = [pk.free(0, B0[0])[:1], pk.free(1, A0[1])[:1]]
        if any(len(h) < cnt for h in heads):
            raise StageFailed("d-extremal/step5-removal", "not enough free vertices for S5", t=tval)
        S5 = [(0, x) for x in heads[0]] + [(1, x) for x in heads[1]]
        a_left = sum(len(pk.free(j, A0[j])) for j in range(k)) - (cnt if tval > 0 else 1)
        picks = []
        for j in range(2, k):
            fa, fb = pk.free(j, A0[j]), pk.free(j, B0[j])
            lo_a = max(0, cnt - len(fb))
            if lo_a > min(cnt, len(fa)):
                raise StageFailed("d-extremal/step5-removal", f"part {j + 1} has too few free vertices", t=tval)
            picks.append([j, fa, fb, lo_a, min(cnt, len(fa))])
        if (a_left - sum(p[3] for p in picks)) % 2:
            for p in picks:
                if p[3] + 1 <= p[4]:
                    p[3] += 1
                    break
            else:
                raise StageFailed("d-extremal/step5-parity", "no part can correct the parity of A", t=tval)
        for j, fa, fb, na, _ in picks:
            S5 += [(j, x) for x in fa[:na]] + [(j, x) for x in fb[:cnt - na]]
        pk.mark(S5)
    tr.add("S5", removed=[Vertex(j, x) for j, x in S5])

    # Final: the nearly complete even structure left over.
    keep = pk.free_vertices()
    sub, back = induced(Hw, keep)
    if len(set(sub.sizes)) != 1:
        raise StageFailed("d-extremal/final", "remaining parts are unequal", sizes=sub.sizes)
    fwd = [{x: i for i, x in enumerate(b)} for b in back]
    bip5 = Bipartition(sub.sizes, [[fwd[j][x] for x in A0[j] if x in fwd[j]] for j in range(k)])
    a5 = bip5.a_sizes()
    tr.quantities.update({"n_final": sub.n, "A5_sizes": a5})
    parity_ok = bip5.a_total() % 2 == 0
    if tval != 0:
        tr.invariants["|A^5| even"] = parity_ok
    need = sub.n if parity_ok else sub.n - 1
    inner = PipelineTranscript()
    try:
        final = even_extremal_matching(sub, bip5, eps0=eps0, eta_squared=eps, transcript=inner,
                                       exact_fallback=exact_fallback, node_budget=node_budget)
        tr.quantities["even_extremal"] = inner.quantities
        tr.fallbacks += [f"d-extremal/final: {f}" for f in inner.fallbacks]
    except (PreconditionViolated, StageFailed) as exc:
        if not exact_fallback:
            if isinstance(exc, StageFailed):
                raise
            raise StageFailed("d-extremal/final", str(exc), **exc.diagnostics) from exc
        try:
            rep = max_matching(sub, node_budget, target=need)
            best = rep.matching
        except BudgetExhausted as exc2:
            best = exc2.best
        tr.fallbacks.append(f"d-extremal/final: even-extremal step did not apply ({exc}); exact oracle used")
        if len(best) < need:
            raise StageFailed("d-extremal/final", "remaining structure has no matching of the required size",
                              size=len(best), needed=need)
        final = Matching(best.edges[:need])
    final_edges = lift_edges(final.edges, back)
    tr.add("final", final_edges)
    edges = [unpermute_edge(e, order) for e in M1 + M2 + M3 + M4 + final_edges]
    M = Matching(tuple(edges)).validate(H)
    goal = min(n - 1, sa)
    tr.invariants["size >= min{n-1, sum a}"] = len(M) >= goal
    if len(M) < goal:
        raise StageFailed("d-extremal/final", "matching is shorter than min{n-1, sum a}", size=len(M), goal=goal)
    return M


# ---------------------------------------------------------------------------
# Non-extremal route


def _almost(sub: Hypergraph, params: Params, tr: PipelineTranscript, stage: str) -> list[Edge]:
    if sub.n == 0:
        return []
    try:
        out = almost_perfect_matching(sub, params)
    except (PreconditionViolated, FamilyConstructionFailed) as exc:
        tr.fallbacks.append(f"{stage}: {exc}; maximum matching used instead")
        try:
            return list(max_matching(sub, params.node_budget).matching.edges)
        except BudgetExhausted as exc2:
            return list(exc2.best.edges)
    if isinstance(out, SExtremalEvidence):
        tr.fallbacks.append(f"{stage}: returned space-barrier evidence; its maximal matching is kept")
        return list(out.matching.edges)
    return list(out.edges)


def _leftovers(H: Hypergraph, M: Iterable[Edge]) -> list[list[int]]:
    used = {(j, x) for e in M for j, x in enumerate(e)}
    return [[x for x in range(H.sizes[j]) if (j, x) not in used] for j in range(H.k)]


def _absorb_edges(H: Hypergraph, M: list[Edge], pool: list[Edge], tr: PipelineTranscript) -> int:
    """Absorb leftover balanced 2k-sets into S-absorbing edges of ``pool``."""
    done = 0
    while True:
        left = _leftovers(H, M)
        if min(len(x) for x in left) < 2:
            return done
        hit = None
        for picks in itertools.product(*(itertools.combinations(x, 2) for x in left)):
            S = [Vertex(j, x) for j, p in enumerate(picks) for x in p]
            for e in pool:
                ok, cert = is_absorbing_edge(H, S, e)
                if ok:
                    hit = (S, e, cert)
                    break
            if hit:
                break
        if hit is None:
            tr.quantities["absorption_stuck_at"] = min(len(x) for x in left)
            return done
        S, e, cert = hit
        absorb_step(M, S, e, cert, H)
        pool.remove(e)
        done += 1


def _absorb_sets(H: Hypergraph, M: list[Edge], members: dict, tr: PipelineTranscript) -> int:
    """Absorb leftover crossing k-sets into unused perfect-absorbing sets."""
    done = 0
    while True:
        left = _leftovers(H, M)
        if min(len(x) for x in left) < 1:
            return done
        hit = None
        for picks in itertools.product(*left):
            S = [Vertex(j, x) for j, x in enumerate(picks)]
            for key in sorted(members):
                if is_perfect_absorbing(H, S, key):
                    hit = (S, key)
                    break
            if hit:
                break
        if hit is None:
            tr.quantities["absorption_stuck_at"] = min(len(x) for x in left)
            return done
        S, key = hit
        for e in members.pop(key):
            M.remove(e)
        M += perfect_matching_within(H, set(S) | set(key))
        done += 1


def _non_extremal(H: Hypergraph, params: Params, tr: PipelineTranscript, exact_fallback: bool) -> Matching:
    n, k = H.n, H.k
    a = codegrees(H)
    eps = params.epsilon
    if k >= 3 and a[2] >= eps * n:
        tr.route.append("absorbing-edges")
        try:
            am = absorbing_matching_I(H, params)
            pool = list(am.matching.edges)
            tr.quantities["absorber_report"] = am.report.as_dict()
        except SelectionFailed as exc:
            rep = exc.report
            pool = [tuple(v.index for v in sorted(m)) for m in (rep.members if rep else ())]
            tr.fallbacks.append("absorbing-edges: selection bounds unmet; last attempt kept uncertified")
            if rep is not None:
                tr.quantities["absorber_report"] = rep.as_dict()
        tr.add("absorbers", pool)
        used = {(j, x) for e in pool for j, x in enumerate(e)}
        keep = [(j, x) for j in range(k) for x in range(n) if (j, x) not in used]
        sub, back = induced(H, keep)
        body = lift_edges(_almost(sub, params, tr, "absorbing-edges/almost-perfect"), back)
        tr.add("almost-perfect", body)
        M = list(pool) + body
        tr.quantities["absorbed"] = _absorb_edges(H, M, list(pool), tr)
        return Matching(tuple(M)).validate(H)
    tr.route.append("dichotomy")
    try:
        out = absorbing_or_extremal(H, params)
    except PipelineFailed as exc:
        rep = getattr(exc, "report", None)
        if rep is None:
            raise
        tr.fallbacks.append(f"dichotomy: {exc}; last attempt kept uncertified")
        members = [frozenset(m) for m in rep.members]
    else:
        tr.quantities["dichotomy"] = out.transcript.get("route")
        if out.kind == "witness":
            tr.route.append("d-extremal")
            w = DExtremalWitness.build(H, out.bipartition, out.side, eps)
            return d_extremal_matching(H, eps, w, eps0=params.epsilon0, transcript=tr,
                                       exact_fallback=exact_fallback, node_budget=params.node_budget)
        members = out.family.member_sets()
    spans = {}
    for T in members:
        pm = perfect_matching_within(H, T)
        if pm is not None:
            spans[frozenset(T)] = list(pm)
    absorbers = [e for es in spans.values() for e in es]
    tr.add("absorbing-sets", absorbers)
    used = {(j, x) for e in absorbers for j, x in enumerate(e)}
    keep = [(j, x) for j in range(k) for x in range(n) if (j, x) not in used]
    sub, back = induced(H, keep)
    body = lift_edges(_almost(sub, params, tr, "dichotomy/almost-perfect"), back)
    tr.add("almost-perfect", body)
    M = absorbers + body
    tr.quantities["absorbed"] = _absorb_sets(H, M, spans, tr)
    return Matching(tuple(M)).validate(H)


# ---------------------------------------------------------------------------
# Dispatcher


def main_matching(
    H: Hypergraph, params: Params = Params(), *, exact_fallback: bool = True
) -> tuple[Matching, PipelineTranscript]:
    """Matching of size at least ``min{n-1, sum a}``, routed through the appropriate pipeline.

    Parts are reordered by decreasing codegree for the pipelines and mapped
    back on return.  A :class:`StageFailed` carries the route in its
    diagnostics; so does a result that would miss the size guarantee.
    """
    if not H.equal_parts:
        raise UnequalParts("the dispatcher needs equal part sizes", sizes=H.sizes)
    n, k = H.n, H.k
    a = codegrees(H)
    order = sorted(range(k), key=lambda i: (-a[i], i))
    Hs = H if order == list(range(k)) else permute_parts(H, order)
    a_s = tuple(a[o] for o in order)
    eps, gamma = params.epsilon, params.gamma
    tr = PipelineTranscript()
    tr.quantities.update({"order": order, "a_sorted": a_s, "n": n, "k": k})
    goal = min(n - 1, sum(a))
    fallback = exact_fallback
    budget = params.node_budget
    try:
        if sum(a) <= n - k + 2 or a_s[0] >= (1 - eps) * n:
            tr.route.append("greedy")
            M = _greedy_route(Hs, tr)
        elif a_s[1] <= eps * n:
            # Outside the a_2 > eps*n hypothesis; only the greedy bound applies.
            tr.route.append("outside-hypothesis/greedy")
            M = _greedy_route(Hs, tr)
        else:
            sw = check_s_extremal(Hs, gamma)
            dw = None
            if sw is not None:
                tr.route.append("s-extremal")
                tr.quantities["s_witness"] = sw.as_dict()
                res = s_extremal_matching(Hs, eps, gamma, sw, transcript=tr, exact_fallback=fallback,
                                          node_budget=budget)
                if isinstance(res, DExtremalWitness):
                    tr.route.append("d-extremal")
                    M = d_extremal_matching(Hs, 3 * eps, res, eps0=params.epsilon0, transcript=tr,
                                            exact_fallback=fallback, node_budget=budget)
                else:
                    M = res
            else:
                dw = check_d_extremal(Hs, eps, params=params)
                if dw is not None:
                    tr.route.append("d-extremal")
                    tr.quantities["d_witness"] = dw.as_dict()
                    M = d_extremal_matching(Hs, eps, dw, eps0=params.epsilon0, transcript=tr,
                                            exact_fallback=fallback, node_budget=budget)
                else:
                    tr.route.append("non-extremal")
                    M = _non_extremal(Hs, params, tr, fallback)
    except StageFailed as exc:
        exc.diagnostics["route"] = "/".join(tr.route)
        exc.transcript = tr
        raise
    except KPMatchError as exc:
        stage = "/".join(tr.route + ["precondition"])
        err = StageFailed(stage, str(exc), route="/".join(tr.route), **exc.diagnostics)
        err.transcript = tr
        raise err from exc
    edges = tuple(unpermute_edge(e, order) for e in M.edges)
    M = Matching(edges).validate(H)
    tr.quantities["size"] = len(M)
    tr.quantities["goal"] = goal
    tr.invariants["stages disjoint"] = tr.stages_disjoint()
    if len(M) < goal:
        err = StageFailed("/".join(tr.route + ["target"]), "matching is shorter than min{n-1, sum a}",
                          size=len(M), goal=goal, route="/".join(tr.route))
        err.transcript = tr
        raise err
    return M, tr
