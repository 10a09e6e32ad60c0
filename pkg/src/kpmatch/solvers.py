"""Matching solvers: an exact branch-and-bound oracle and the constructive matchers.

The constructive matchers follow short combinatorial arguments that hold at
every size (the greedy swap guarantee, the even-family induction) or are
checked against their preconditions at runtime (dense perfect matchings, the
almost-perfect matching step).
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import coo_matrix

from .core import (
    Bipartition,
    Edge,
    Hypergraph,
    Matching,
    Params,
    Vertex,
    at_least,
    codegrees,
    frac,
    induced,
    lift_edges,
    min_vertex_degree,
    partite_min_degree,
)
from .errors import (
    BudgetExhausted,
    ConditionNotMet,
    FamilyConstructionFailed,
    MalformedInput,
    NoPerfectMatching,
    PreconditionViolated,
    UnequalParts,
)


# ---------------------------------------------------------------------------
# Exact oracle


@dataclass(frozen=True)
class SolveReport:
    matching: Matching
    optimal: bool
    nodes_explored: int
    elapsed: float
    upper_bound: int

    @property
    def size(self) -> int:
        return len(self.matching)


class _Stop(Exception):
    pass


def _lp_bound(edge_ids: Sequence[int], edge_verts: Sequence[tuple[int, ...]]) -> int:
    """Floor of the fractional matching number of the given edges."""
    m = len(edge_ids)
    rows, cols = [], []
    index: dict[int, int] = {}
    for c, e in enumerate(edge_ids):
        for v in edge_verts[e]:
            rows.append(index.setdefault(v, len(index)))
            cols.append(c)
    A = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(index), m))
    res = linprog(-np.ones(m), A_ub=A, b_ub=np.ones(len(index)), bounds=(0, 1), method="highs")
    if res.status != 0:
        return m
    return int(math.floor(-res.fun + 1e-7))


def max_matching(
    H: Hypergraph,
    node_budget: Optional[int] = None,
    *,
    target: Optional[int] = None,
    use_lp: bool = True,
) -> SolveReport:
    """Maximum matching by branch and bound.

    Branches on the uncovered vertex of minimum remaining degree (ties by
    ``(part, index)``): each incident edge in sorted order, then a branch that
    leaves the vertex uncovered.  Nodes are pruned by ``size + min over parts
    of the coverable vertices``, by the LP fractional-matching bound, and by a
    table of upper bounds for already-explored edge sets.

    ``target`` stops the search as soon as a matching of that size is found.
    Raises :class:`BudgetExhausted` (carrying the best matching) when more than
    ``node_budget`` nodes are expanded.
    """
    start = time.perf_counter()
    edges = H.sorted_edges
    off = H.offsets
    verts = [tuple(off[j] + x for j, x in enumerate(e)) for e in edges]
    masks = [sum(1 << v for v in vs) for vs in verts]
    part_of = [j for j, s in enumerate(H.sizes) for _ in range(s)]
    k = H.k
    root_ub = min(H.sizes)

    best: list[int] = []
    state = {"nodes": 0}
    memo: dict[int, int] = {}
    lp_cache: dict[int, int] = {}

    def greedy(alive: list[int]) -> list[int]:
        used, out = 0, []
        for e in alive:
            if not masks[e] & used:
                used |= masks[e]
                out.append(e)
        return out

    def search(alive: list[int], key: int, chosen: list[int]):
        nonlocal best
        state["nodes"] += 1
        if node_budget is not None and state["nodes"] > node_budget:
            raise BudgetExhausted(
                "node budget exhausted",
                Matching(tuple(edges[e] for e in best)),
                state["nodes"] - 1,
            )
        depth = len(chosen)
        if depth > len(best):
            best = list(chosen)
            if target is not None and len(best) >= target:
                raise _Stop
        if not alive:
            return
        deg: dict[int, int] = {}
        for e in alive:
            for v in verts[e]:
                deg[v] = deg.get(v, 0) + 1
        per_part = [0] * k
        for v in deg:
            per_part[part_of[v]] += 1
        bound = depth + min(min(per_part), len(alive))
        if bound <= len(best):
            return
        if key in memo and depth + memo[key] <= len(best):
            return
        if use_lp and len(alive) > 4 and bound > len(best) + 0:
            lp = lp_cache.get(key)
            if lp is None:
                lp = _lp_bound(alive, verts)
                lp_cache[key] = lp
            if depth + lp <= len(best):
                memo[key] = len(best) - depth
                return
        v = min(deg, key=lambda u: (deg[u], u))
        bit = 1 << v
        for e in alive:
            if masks[e] & bit:
                me = masks[e]
                rest = [f for f in alive if not masks[f] & me]
                chosen.append(e)
                search(rest, _key(rest), chosen)
                chosen.pop()
        rest = [f for f in alive if not masks[f] & bit]
        search(rest, _key(rest), chosen)
        memo[key] = len(best) - depth

    def _key(alive: list[int]) -> int:
        return sum(1 << e for e in alive)

    all_ids = list(range(len(edges)))
    best = greedy(all_ids)
    exhausted = True
    if edges:
        if use_lp and len(edges) > 4:
            root_ub = min(root_ub, _lp_bound(all_ids, verts))
        if len(best) < root_ub and not (target is not None and len(best) >= target):
            try:
                search(all_ids, _key(all_ids), [])
            except _Stop:
                exhausted = False
    else:
        root_ub = 0
    matching = Matching(tuple(edges[e] for e in best))
    optimal = exhausted or len(best) >= root_ub
    return SolveReport(matching, optimal, state["nodes"], time.perf_counter() - start,
                       len(best) if optimal else root_ub)


def matching_number(H: Hypergraph, node_budget: Optional[int] = None) -> int:
    return max_matching(H, node_budget).size


def has_perfect_matching(H: Hypergraph, node_budget: Optional[int] = None) -> tuple[bool, Optional[Matching]]:
    """Decide whether ``H`` (equal parts) has a perfect matching; returns the certificate on success."""
    n = H.n
    if n == 0:
        return True, Matching()
    if any(d == 0 for d in (partite_min_degree(H, [p]) for p in range(H.k))):
        return False, None
    rep = max_matching(H, node_budget, target=n)
    if rep.size == n:
        return True, rep.matching.validate(H)
    return False, None


# ---------------------------------------------------------------------------
# Greedy swaps


def _maximalize(H: Hypergraph, M: list[Edge]) -> None:
    used = {(j, x) for e in M for j, x in enumerate(e)}
    for e in H.sorted_edges:
        if all((j, x) not in used for j, x in enumerate(e)):
            M.append(e)
            used.update(enumerate(e))


def _neighbours(H: Hypergraph, U: dict[int, int], i: int) -> set[int]:
    e = [U.get(j, 0) for j in range(H.k)]
    out = set()
    for x in range(H.sizes[i]):
        e[i] = x
        if tuple(e) in H.edges:
            out.add(x)
    return out


def fact_targets(H: Hypergraph) -> tuple[int, int]:
    """The two lower bounds ``min{n-k+2, sum a}`` and ``min{n-1, best pair sum}``."""
    n = min(H.sizes)
    a = codegrees(H)
    top = sorted(a, reverse=True)
    return min(n - H.k + 2, sum(a)), min(n - 1, top[0] + top[1])


def greedy_fact_matching(H: Hypergraph) -> Matching:
    """Greedy matching with the swap step, of size at least both :func:`fact_targets` bounds.

    Starting from a maximal matching, crossing (k-1)-sets ``U_i`` (missing part
    ``i``) are formed from unmatched vertices; their neighbours lie in matched
    vertices, so by pigeonhole some matching edge hosts neighbours of two of
    them, and that edge is traded for two edges.
    """
    k = H.k
    n = min(H.sizes)
    if n < k - 2:
        raise PreconditionViolated(f"needs minimum part size >= k - 2 = {k - 2}", n=n)
    a = codegrees(H)
    target1, target2 = fact_targets(H)
    pairs = sorted(itertools.combinations(range(k), 2), key=lambda p: (-(a[p[0]] + a[p[1]]), p))
    M: list[Edge] = []
    while True:
        _maximalize(H, M)
        size = len(M)
        if size < target1:
            parts = list(range(k))
        elif size < target2:
            parts = list(next(p for p in pairs if size < a[p[0]] + a[p[1]]))
        else:
            break
        used = {(j, x) for e in M for j, x in enumerate(e)}
        free = [[x for x in range(H.sizes[j]) if (j, x) not in used] for j in range(k)]
        Us: dict[int, dict[int, int]] = {}
        for i in parts:
            U = {}
            for j in range(k):
                if j == i:
                    continue
                slot = sum(1 for q in parts if q != j and q < i)
                U[j] = free[j][slot]
            Us[i] = U
        nbrs = {i: _neighbours(H, Us[i], i) for i in parts}
        swap = None
        for pos, e in enumerate(M):
            hits = [i for i in parts if e[i] in nbrs[i]]
            if len(hits) >= 2:
                swap = (pos, hits[0], hits[1])
                break
        if swap is None:
            raise RuntimeError("pigeonhole step found no edge; the input violates the swap invariant")
        pos, i, j = swap
        e = M.pop(pos)
        for q in (i, j):
            new = dict(Us[q])
            new[q] = e[q]
            M.append(tuple(new[p] for p in range(k)))
    return Matching(tuple(M)).validate(H)


# ---------------------------------------------------------------------------
# Even-family matchings


def even_matching(k: int, n: int, bip: Bipartition) -> Matching:
    """Matching of even crossing k-sets of size n (|A| even) or n - 1 (|A| odd).

    Requires equal even parts and |A_1| = |A_2| = n/2 (parts 0 and 1).
    """
    if k < 2 or n < 2 or n % 2:
        raise PreconditionViolated("needs k >= 2 and an even part size n >= 2", k=k, n=n)
    if bip.sizes != (n,) * k:
        raise PreconditionViolated("bipartition must have k parts of size n")
    if len(bip.A[0]) != n // 2 or len(bip.A[1]) != n // 2:
        raise PreconditionViolated("needs |A_1| = |A_2| = n/2", a_sizes=bip.a_sizes())
    if bip.a_total() % 2 == 0:
        return Matching(tuple(_even_perfect(k, n, bip)))
    moved = min((j, x) for j in range(2, k) for x in bip.A[j])
    A = [set(a) for a in bip.A]
    A[moved[0]].discard(moved[1])
    shifted = Bipartition(bip.sizes, A)
    edges = [e for e in _even_perfect(k, n, shifted) if e[moved[0]] != moved[1]]
    return Matching(tuple(edges))


def _even_perfect(k: int, n: int, bip: Bipartition) -> list[Edge]:
    A = [sorted(bip.A[j]) for j in range(k)]
    B = [sorted(bip.B(j)) for j in range(k)]
    out: list[Edge] = []
    remaining = n
    while remaining > 2:
        S, S2 = [0] * k, [0] * k
        par = 0
        for j in range(2, k):
            if len(A[j]) >= 2:
                S[j], S2[j] = A[j].pop(0), A[j].pop(0)
                par ^= 1
            else:
                S[j], S2[j] = B[j].pop(0), B[j].pop(0)
        a1, a2, b1, b2 = A[0].pop(0), A[1].pop(0), B[0].pop(0), B[1].pop(0)
        if par == 0:
            S[0], S[1], S2[0], S2[1] = a1, a2, b1, b2
        else:
            S[0], S[1], S2[0], S2[1] = a1, b2, b1, a2
        out += [tuple(S), tuple(S2)]
        remaining -= 2
    # base: split parts >= 1 into two (k-1)-sets, complete with part 0
    first = [None] * k
    second = [None] * k
    par = 0
    for j in range(1, k):
        pool = sorted([(x, 1) for x in A[j]] + [(x, 0) for x in B[j]])
        (x1, in_a), (x2, _) = pool
        first[j], second[j] = x1, x2
        par ^= in_a
    a0, b0 = A[0][0], B[0][0]
    if par:
        first[0], second[0] = a0, b0
    else:
        first[0], second[0] = b0, a0
    out += [tuple(first), tuple(second)]
    return out


# ---------------------------------------------------------------------------
# Dense perfect matchings


Condition = Union[str, tuple]


def check_condition(H: Hypergraph, condition: Condition) -> dict:
    """Evaluate a dense perfect-matching condition exactly; returns the quantities."""
    m = H.n
    k = H.k
    if condition == "daykin_haggkvist":
        d1 = min_vertex_degree(H)
        ok = k * d1 >= (k - 1) * (m ** (k - 1) - 1)
        return {"condition": "daykin_haggkvist", "delta1": d1, "holds": ok}
    if isinstance(condition, tuple) and len(condition) == 2 and condition[0] == "pikhurko":
        L = sorted(set(condition[1]))
        if not L or len(L) >= k or any(not 0 <= i < k for i in L):
            raise MalformedInput("pikhurko condition needs a nonempty proper subset L of the parts")
        R = [i for i in range(k) if i not in L]
        dL = partite_min_degree(H, L)
        dR = partite_min_degree(H, R)
        lhs = dL * m ** len(L) + dR * m ** len(R)
        return {"condition": "pikhurko", "L": tuple(L), "delta_L": dL, "delta_rest": dR,
                "holds": 2 * lhs >= 3 * m ** k}
    raise MalformedInput(f"unknown condition {condition!r}")


def _greedy_pm(H: Hypergraph) -> tuple[list[Edge], set[Vertex]]:
    """Repeatedly cover the uncovered vertex of minimum live degree."""
    covered: set[Vertex] = set()
    out: list[Edge] = []
    live = list(H.sorted_edges)
    while live:
        deg: dict[Vertex, int] = {}
        for e in live:
            for j, x in enumerate(e):
                deg[Vertex(j, x)] = deg.get(Vertex(j, x), 0) + 1
        uncovered = [v for v in H.vertices() if v not in covered]
        v = min(uncovered, key=lambda u: (deg.get(u, 0), u))
        if deg.get(v, 0) == 0:
            break
        e = next(f for f in live if f[v.part] == v.index)
        out.append(e)
        covered.update(Vertex(j, x) for j, x in enumerate(e))
        live = [f for f in live if all(Vertex(j, x) not in covered for j, x in enumerate(f))]
    return out, covered


def dense_pm(
    H: Hypergraph,
    condition: Condition = "daykin_haggkvist",
    *,
    check: bool = True,
    log: Optional[list] = None,
    node_budget: Optional[int] = None,
) -> Matching:
    """Perfect matching of a hypergraph satisfying a dense degree condition.

    The condition is checked exactly (``ConditionNotMet`` otherwise).  Greedy
    completion runs first; if it stalls, the exact oracle is run on the
    uncovered residue and then on the whole hypergraph.  Each fallback is
    appended to ``log`` when given.
    """
    n = H.n
    if check:
        info = check_condition(H, condition)
        if not info["holds"]:
            raise ConditionNotMet("degree condition fails", **info)
    if n == 0:
        return Matching()
    edges, covered = _greedy_pm(H)
    if len(edges) == n:
        return Matching(tuple(edges)).validate(H)
    rest = [v for v in H.vertices() if v not in covered]
    sub, back = induced(H, rest)
    ok, cert = has_perfect_matching(sub, node_budget)
    if ok:
        if log is not None:
            log.append("dense_pm: exact search completed the residue")
        return Matching(tuple(edges) + tuple(lift_edges(cert.edges, back))).validate(H)
    ok, cert = has_perfect_matching(H, node_budget)
    if ok:
        if log is not None:
            log.append("dense_pm: exact search on the whole hypergraph")
        return cert
    raise NoPerfectMatching("no perfect matching exists at this size", n=n, greedy=len(edges))


# ---------------------------------------------------------------------------
# Almost perfect matching


@dataclass(frozen=True)
class SExtremalEvidence:
    """Certificate that the uncovered part of a maximum matching forces a near-independent set.

    ``family`` holds the (k-1)-sets as ``{part: index}`` maps, set ``j`` missing
    part ``j % k``.  ``comparisons`` holds per-part tuples
    ``(|D_i|, a_i - gamma*n/k, |(V(M') - D) in V_i|, n - a_i - 2*gamma*n)``.
    """

    matching: Matching
    sub_matching: Matching
    family: tuple[dict, ...]
    D: tuple[frozenset, ...]
    t: int
    a: tuple[int, ...]
    comparisons: tuple[tuple, ...]
    heuristic_base: bool

    def independent_part(self) -> list[Vertex]:
        """V(M') minus D, which spans no edge of H."""
        D = {Vertex(j, x) for j, d in enumerate(self.D) for x in d}
        return sorted(v for v in self.sub_matching.vertices() if v not in D)

    def verify(self, H: Hypergraph) -> bool:
        D = {Vertex(j, x) for j, d in enumerate(self.D) for x in d}
        if any(sum(Vertex(j, x) in D for j, x in enumerate(e)) > 1 for e in self.sub_matching):
            return False
        keep = set(self.independent_part())
        return not any(all(Vertex(j, x) in keep for j, x in enumerate(e)) for e in H.edges)


def family_size(k: int, params: Params) -> int:
    if params.t is not None:
        return params.t
    if params.gamma == 0:
        raise PreconditionViolated("gamma must be positive when t is not given")
    from .core import ceil_frac
    return ceil_frac(Fraction(k * (k - 1)) / params.gamma)


def low_codegree_counts(H: Hypergraph, a: Sequence[int]) -> tuple[int, ...]:
    """Per part i, the number of crossing (k-1)-sets avoiding part i with codegree below a_i."""
    return tuple(int(np.count_nonzero(H.tensor.sum(axis=i) < a[i])) for i in range(H.k))


def _base_matching(H: Hypergraph, params: Params) -> tuple[list[Edge], bool]:
    if H.n <= params.exact_limit:
        try:
            return list(max_matching(H, params.node_budget).matching.edges), False
        except BudgetExhausted as exc:
            return list(exc.best.edges), True
    return list(greedy_fact_matching(H).edges), True


def almost_perfect_matching(
    H: Hypergraph, params: Params = Params(), a: Optional[Sequence[int]] = None
) -> Union[Matching, SExtremalEvidence]:
    """A matching leaving at most ``alpha*n`` vertices per part uncovered, or S-extremal evidence.

    ``a`` defaults to the partite minimum codegrees.  The base matching is the
    exact optimum when ``n <= params.exact_limit`` and a greedy one otherwise;
    in the greedy case every violated step of the argument is turned into an
    augmentation and the procedure restarts.
    """
    n, k = H.n, H.k
    a = tuple(codegrees(H) if a is None else a)
    low = low_codegree_counts(H, a)
    allowed = params.eta * n ** (k - 1)
    if any(c > allowed for c in low):
        raise PreconditionViolated("too many low-codegree (k-1)-sets", counts=low, allowed=str(allowed))
    t = family_size(k, params)
    M, heuristic = _base_matching(H, params)
    while True:
        _maximalize(H, M)
        if n - len(M) <= params.alpha * n:
            return Matching(tuple(M)).validate(H)
        used = {(j, x) for e in M for j, x in enumerate(e)}
        family = _build_family(H, used, a, t)
        nbr_count: dict[Vertex, list[int]] = {}
        for idx, A in enumerate(family):
            i = idx % k
            for x in _neighbours(H, A, i):
                nbr_count.setdefault(Vertex(i, x), []).append(idx)
        D = {v for v, js in nbr_count.items() if len(js) >= k and (v.part, v.index) in used}
        swapped = _repair_two_in_d(H, M, D, nbr_count, family)
        if swapped:
            continue
        Mp = [e for e in M if any(Vertex(j, x) in D for j, x in enumerate(e))]
        keep = {Vertex(j, x) for e in Mp for j, x in enumerate(e)} - D
        e0 = next((e for e in H.sorted_edges if all(Vertex(j, x) in keep for j, x in enumerate(e))), None)
        if e0 is not None:
            _repair_edge_outside_d(H, M, D, nbr_count, family, e0)
            continue
        Ds = tuple(frozenset(v.index for v in D if v.part == j) for j in range(k))
        comps = []
        for i in range(k):
            side = sum(len(Ds[j]) for j in range(k) if j != i)
            comps.append((len(Ds[i]), a[i] - params.gamma * n / k, side, n - a[i] - 2 * params.gamma * n))
        return SExtremalEvidence(Matching(tuple(M)), Matching(tuple(Mp)), tuple(family), Ds, t, a,
                                 tuple(comps), heuristic)


def _build_family(H: Hypergraph, used: set, a: Sequence[int], t: int) -> list[dict]:
    k = H.k
    taken = set(used)
    family: list[dict] = []
    for idx in range(k * t):
        i = idx % k
        parts = [j for j in range(k) if j != i]
        pools = [[x for x in range(H.sizes[j]) if (j, x) not in taken] for j in parts]
        found = None
        for combo in itertools.product(*pools):
            S = dict(zip(parts, combo))
            if len(_neighbours(H, S, i)) >= a[i]:
                found = S
                break
        if found is None:
            raise FamilyConstructionFailed(
                "not enough disjoint qualifying (k-1)-sets among uncovered vertices",
                needed=k * t, found=len(family), free_per_part=tuple(len(p) for p in pools),
            )
        family.append(found)
        taken.update(found.items())
    return family


def _swap_in(M: list[Edge], k: int, remove: list[Edge], add: list[dict]) -> None:
    for e in remove:
        M.remove(e)
    for S in add:
        M.append(tuple(S[j] for j in range(k)))


def _pick_sets(vs: list[Vertex], nbr_count: dict, family: list[dict]) -> Optional[list[dict]]:
    chosen: list[int] = []
    for v in vs:
        idx = next((j for j in nbr_count[v] if j not in chosen), None)
        if idx is None:
            return None
        chosen.append(idx)
    out = []
    for v, j in zip(vs, chosen):
        S = dict(family[j])
        S[v.part] = v.index
        out.append(S)
    return out


def _repair_two_in_d(H, M, D, nbr_count, family) -> bool:
    for e in list(M):
        hit = [Vertex(j, x) for j, x in enumerate(e) if Vertex(j, x) in D]
        if len(hit) >= 2:
            sets = _pick_sets(hit[:2], nbr_count, family)
            if sets is not None:
                _swap_in(M, H.k, [e], sets)
                return True
    return False


def _repair_edge_outside_d(H, M, D, nbr_count, family, e0) -> None:
    hit = []
    for f in M:
        if any(f[j] == e0[j] for j in range(H.k)):
            hit.append(f)
    vs = [next(Vertex(j, x) for j, x in enumerate(f) if Vertex(j, x) in D) for f in hit]
    sets = _pick_sets(vs, nbr_count, family)
    if sets is None:
        raise FamilyConstructionFailed("family too small to reroute the matched D-vertices")
    _swap_in(M, H.k, hit, sets)
    M.append(tuple(e0))
