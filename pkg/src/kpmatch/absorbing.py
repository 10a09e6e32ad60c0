"""Absorbing structures: absorbing edges, perfect-absorbing sets, reachability,
closed partitions, lattice merging and the seeded family selection.

All "at least beta * n^x" thresholds are integer comparisons against
``max(1, ceil(beta * n^x))``: a pair with no reachable set at all is never
called reachable, even at ``beta = 0``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import (
    Bipartition,
    Edge,
    Hypergraph,
    Matching,
    Params,
    RefinedPartition,
    Vertex,
    ceil_frac,
    codegrees,
    edge_vertices,
    frac,
    in_lattice,
    parity_defect,
    partite_min_codegree,
    robust_index_set,
)
from .errors import (
    DegreeTooLow,
    InvalidCertificate,
    MalformedInput,
    NotClosed,
    PipelineFailed,
    PreconditionViolated,
    SamePartViolation,
    SelectionFailed,
    TooManyClasses,
)
from .rng import SplitMix64, derive_seed


def _vset(S: Iterable) -> frozenset[Vertex]:
    return frozenset(Vertex(*v) for v in S)


def _per_part(H: Hypergraph, S: Iterable[Vertex]) -> list[list[int]]:
    out: list[list[int]] = [[] for _ in range(H.k)]
    for p, x in S:
        if not 0 <= p < H.k or not 0 <= x < H.sizes[p]:
            raise MalformedInput(f"vertex {(p, x)} out of bounds")
        out[p].append(x)
    return [sorted(o) for o in out]


def perfect_matching_within(H: Hypergraph, S: Iterable) -> Optional[list[Edge]]:
    """A perfect matching of H[S] (edges in sorted order of search), or None."""
    by_part = _per_part(H, S)
    if len({len(b) for b in by_part}) != 1:
        return None
    return _pm_rec(H, by_part)


def _pm_rec(H: Hypergraph, by_part: list[list[int]]) -> Optional[list[Edge]]:
    if not by_part[0]:
        return []
    x0 = by_part[0][0]
    sets = [set(b) for b in by_part]
    for e in H.incident[Vertex(0, x0)]:
        if all(e[j] in sets[j] for j in range(1, H.k)):
            rest = [[y for y in by_part[j] if y != e[j]] for j in range(H.k)]
            sub = _pm_rec(H, rest)
            if sub is not None:
                return [e] + sub
    return None


# ---------------------------------------------------------------------------
# Absorbing edges


@dataclass(frozen=True)
class AbsorbingCertificate:
    e1: Edge
    e2: Edge

    def check(self, S: Iterable, e: Edge, H: Optional[Hypergraph] = None) -> None:
        S = _vset(S)
        ev = set(edge_vertices(e))
        v1, v2 = set(edge_vertices(self.e1)), set(edge_vertices(self.e2))
        if H is not None and (self.e1 not in H.edges or self.e2 not in H.edges):
            raise InvalidCertificate("certificate edges are not edges of H")
        if v1 & v2:
            raise InvalidCertificate("certificate edges intersect")
        k = len(e)
        if not (v1 | v2) <= (S | ev):
            raise InvalidCertificate("certificate leaves S and e")
        if len(v1 & S) != k - 1 or len(v1 & ev) != 1 or len(v2 & S) != 2 or len(v2 & ev) != k - 2:
            raise InvalidCertificate("certificate has the wrong intersection pattern")


def _check_balanced(H: Hypergraph, S: Iterable, per: int) -> list[list[int]]:
    by_part = _per_part(H, S)
    if any(len(b) != per or len(set(b)) != per for b in by_part):
        raise MalformedInput(f"set must have exactly {per} distinct vertices in each part")
    return by_part


def _edge_certificates(H: Hypergraph, by_part: list[list[int]], e: Edge):
    """Yield every structured certificate for S (given per part) and e.

    e1 takes e's vertex in some part p and one S-vertex in every other part;
    e2 takes one S-vertex in part p, the other S-vertex in some part q != p,
    and e's vertices elsewhere.
    """
    k = H.k
    for p in range(k):
        others = [j for j in range(k) if j != p]
        for picks in itertools.product((0, 1), repeat=k - 1):
            e1 = [0] * k
            e1[p] = e[p]
            for j, b in zip(others, picks):
                e1[j] = by_part[j][b]
            e1t = tuple(e1)
            if e1t not in H.edges:
                continue
            for q in others:
                for bp in (0, 1):
                    e2 = list(e)
                    e2[p] = by_part[p][bp]
                    e2[q] = by_part[q][1 - picks[others.index(q)]]
                    e2t = tuple(e2)
                    if e2t in H.edges:
                        yield AbsorbingCertificate(e1t, e2t)


def is_absorbing_edge(H: Hypergraph, S: Iterable, e: Sequence[int]) -> tuple[bool, Optional[AbsorbingCertificate]]:
    """Whether edge ``e`` is S-absorbing for the balanced 2k-set ``S``; returns a certificate."""
    e = tuple(e)
    S = _vset(S)
    by_part = _check_balanced(H, S, 2)
    if e not in H.edges:
        raise MalformedInput(f"{e} is not an edge of H")
    if any(e[j] in by_part[j] for j in range(H.k)):
        raise MalformedInput("e must be disjoint from S")
    cert = next(_edge_certificates(H, by_part, e), None)
    return cert is not None, cert


def absorb_step(
    M: Matching, S: Iterable, e: Sequence[int], cert: AbsorbingCertificate, H: Optional[Hypergraph] = None
) -> Matching:
    """Replace ``e`` in ``M`` by the certificate's two edges."""
    e = tuple(e)
    S = _vset(S)
    if e not in M.edges:
        raise InvalidCertificate("e is not an edge of M")
    if S & M.vertices():
        raise InvalidCertificate("S meets V(M)")
    cert.check(S, e, H)
    edges = [cert.e1 if f == e else f for f in M.edges] + [cert.e2]
    out = Matching(tuple(edges))
    if not out.is_disjoint():
        raise InvalidCertificate("result is not a matching")
    return out


def count_absorbing(H: Hypergraph, S: Iterable, M: Iterable[Sequence[int]]) -> int:
    """Number of S-absorbing edges in ``M`` (edges meeting S do not count)."""
    S = _vset(S)
    by_part = _check_balanced(H, S, 2)
    total = 0
    for e in M:
        e = tuple(e)
        if any(e[j] in by_part[j] for j in range(H.k)):
            continue
        if next(_edge_certificates(H, by_part, e), None) is not None:
            total += 1
    return total


def find_absorbable_set(H: Hypergraph, e: Sequence[int]) -> Optional[frozenset[Vertex]]:
    """Some balanced 2k-set S for which ``e`` is S-absorbing, or None."""
    e = tuple(e)
    k = H.k
    if min(H.sizes) < 3:
        return None
    for p in range(k):
        for e1 in H.incident[Vertex(p, e[p])]:
            if any(e1[j] == e[j] for j in range(k) if j != p):
                continue
            for q in range(k):
                if q == p:
                    continue
                for y in range(H.sizes[p]):
                    if y == e[p]:
                        continue
                    for z in range(H.sizes[q]):
                        if z in (e[q], e1[q]):
                            continue
                        e2 = list(e)
                        e2[p], e2[q] = y, z
                        if tuple(e2) not in H.edges:
                            continue
                        S = {Vertex(j, e1[j]) for j in range(k) if j != p}
                        S |= {Vertex(p, y), Vertex(q, z)}
                        for j in range(k):
                            if j == q:
                                continue
                            have = {v.index for v in S if v.part == j}
                            spare = next(x for x in range(H.sizes[j]) if x not in have and x != e[j])
                            S.add(Vertex(j, spare))
                        return frozenset(S)
    return None


# ---------------------------------------------------------------------------
# Perfect-absorbing sets


def is_perfect_absorbing(H: Hypergraph, S: Iterable, T: Iterable) -> bool:
    """Both H[T] and H[S + T] have perfect matchings (T balanced, S a crossing k-set)."""
    S, T = _vset(S), _vset(T)
    _check_balanced(H, S, 1)
    by_t = _per_part(H, T)
    if len({len(b) for b in by_t}) != 1 or any(len(set(b)) != len(b) for b in by_t):
        raise MalformedInput("T must be balanced")
    if S & T:
        raise MalformedInput("S and T must be disjoint")
    return perfect_matching_within(H, T) is not None and perfect_matching_within(H, S | T) is not None


def count_perfect_absorbing(H: Hypergraph, S: Iterable, family: Iterable[Iterable]) -> int:
    S = _vset(S)
    return sum(1 for T in family if not (S & _vset(T)) and is_perfect_absorbing(H, S, T))


# ---------------------------------------------------------------------------
# Reachability


@dataclass(frozen=True)
class ReachRecord:
    u: Vertex
    v: Vertex
    i: int
    count: int
    threshold: Fraction
    total: int

    @property
    def required(self) -> int:
        return max(1, ceil_frac(self.threshold))

    @property
    def reachable(self) -> bool:
        return self.count >= self.required


_REACH_CACHE: dict = {}


def _reach_table(H: Hypergraph, p: int, i: int):
    """For every candidate W: the set of x in V_p with H[{x} + W] perfectly matchable.

    Returns a boolean matrix (rows: W, columns: x) and the per-row vertex masks
    of W inside part p.
    """
    key = (H, p, i)
    if key in _REACH_CACHE:
        return _REACH_CACHE[key]
    n_p = H.sizes[p]
    if i == 1:
        t = np.moveaxis(H.tensor, p, 0).reshape(n_p, -1)
        table = t.T.copy()
        inside = np.zeros((table.shape[0], n_p), dtype=bool)
    else:
        rows, inside_rows = [], []
        others = [j for j in range(H.k) if j != p]
        pools = [list(itertools.combinations(range(H.sizes[j]), i)) for j in others]
        for own in itertools.combinations(range(n_p), i - 1):
            for combo in itertools.product(*pools):
                W = [Vertex(p, x) for x in own]
                for j, xs in zip(others, combo):
                    W += [Vertex(j, x) for x in xs]
                row = np.zeros(n_p, dtype=bool)
                for x in range(n_p):
                    if x in own:
                        continue
                    row[x] = perfect_matching_within(H, W + [Vertex(p, x)]) is not None
                rows.append(row)
                mask = np.zeros(n_p, dtype=bool)
                mask[list(own)] = True
                inside_rows.append(mask)
        table = np.array(rows, dtype=bool).reshape(-1, n_p)
        inside = np.array(inside_rows, dtype=bool).reshape(-1, n_p)
    if len(_REACH_CACHE) > 64:
        _REACH_CACHE.clear()
    _REACH_CACHE[key] = (table, inside)
    return table, inside


def _reach_total(H: Hypergraph, p: int, i: int) -> int:
    n_p = H.sizes[p]
    return math.comb(n_p - 2, i - 1) * math.prod(math.comb(H.sizes[j], i) for j in range(H.k) if j != p)


def reach_count(H: Hypergraph, u, v, i: int = 1, beta=0) -> ReachRecord:
    """Exact number of (ik-1)-sets W with H[{u}+W] and H[{v}+W] both perfectly matchable."""
    u, v = Vertex(*u), Vertex(*v)
    if u.part != v.part or u == v:
        raise SamePartViolation("u and v must be distinct vertices of one part", u=u, v=v)
    n = H.n
    if i < 1 or (i > 1 and i > n - 1):
        raise MalformedInput(f"i={i} is infeasible for parts of size {n}")
    table, inside = _reach_table(H, u.part, i)
    ok = table[:, u.index] & table[:, v.index] & ~inside[:, u.index] & ~inside[:, v.index]
    threshold = frac(beta) * n ** (i * H.k - 1)
    return ReachRecord(u, v, i, int(np.count_nonzero(ok)), threshold, _reach_total(H, u.part, i))


def reachable_neighborhood(H: Hypergraph, v, beta, i: int = 1) -> frozenset[Vertex]:
    """All u in v's part (u != v) that are (beta, i)-reachable to v."""
    v = Vertex(*v)
    return frozenset(
        Vertex(v.part, x)
        for x in range(H.sizes[v.part])
        if x != v.index and reach_count(H, v, (v.part, x), i, beta).reachable
    )


def is_closed(H: Hypergraph, X: Iterable, beta, i: int = 1) -> bool:
    """Every pair of vertices in X is (beta, i)-reachable."""
    X = sorted(_vset(X))
    if len({x.part for x in X}) > 1:
        raise SamePartViolation("a closed set lives inside one part")
    return all(reach_count(H, a, b, i, beta).reachable for a, b in itertools.combinations(X, 2))


def is_closed_part(H: Hypergraph, part: int, beta, i: int = 1) -> bool:
    return is_closed(H, H.part(part), beta, i)


def neighbourhood_monotone(H: Hypergraph, v, beta, beta2, i: int = 1) -> bool:
    """Check N_{beta,i}(v) is contained in N_{beta2,i+1}(v) (a verification predicate)."""
    return reachable_neighborhood(H, v, beta, i) <= reachable_neighborhood(H, v, beta2, i + 1)


@dataclass(frozen=True)
class ClosedPartition:
    part: int
    classes: tuple[frozenset[int], ...]
    residue: frozenset[int]
    beta: Fraction
    beta_prime: tuple[Fraction, ...]
    closed_at_beta: tuple[bool, ...]
    i: int

    def cells(self) -> list[tuple[int, frozenset[int]]]:
        return [(self.part, c) for c in self.classes]


def closed_partition(H: Hypergraph, j: int, beta, i: int = 1, c: int = 2, floor: int = 1) -> ClosedPartition:
    """Split part ``j`` into reachability classes plus a residue.

    Vertices with fewer than ``floor`` reachable partners form the residue; the
    others are grouped into connected components of the reachability graph.
    Each class records the largest threshold ``beta'`` at which it is closed
    (the minimum pairwise count over n^(ik-1)) and whether ``beta' >= beta``.
    """
    if c < 1:
        raise MalformedInput("c must be at least 1")
    beta = frac(beta)
    n = H.n
    size = H.sizes[j]
    nbrs = {x: {u.index for u in reachable_neighborhood(H, (j, x), beta, i)} for x in range(size)}
    residue = frozenset(x for x in range(size) if len(nbrs[x]) < floor)
    live = [x for x in range(size) if x not in residue]
    seen: set[int] = set()
    classes: list[frozenset[int]] = []
    for x in live:
        if x in seen:
            continue
        comp, stack = set(), [x]
        while stack:
            y = stack.pop()
            if y in comp:
                continue
            comp.add(y)
            stack.extend(z for z in nbrs[y] if z not in residue and z not in comp)
        seen |= comp
        classes.append(frozenset(comp))
    if len(classes) > c:
        raise TooManyClasses(f"part {j} splits into {len(classes)} classes (limit {c})",
                             classes=[sorted(cl) for cl in classes])
    scale = n ** (i * H.k - 1)
    primes, closed = [], []
    for cl in classes:
        counts = [reach_count(H, (j, a), (j, b), i).count for a, b in itertools.combinations(sorted(cl), 2)]
        bp = Fraction(min(counts), scale) if counts else beta
        primes.append(bp)
        closed.append(is_closed(H, [(j, x) for x in cl], beta, i))
    return ClosedPartition(j, tuple(classes), residue, beta, tuple(primes), tuple(closed), i)


# ---------------------------------------------------------------------------
# Family selection


def sqrt_floor(x: Fraction, bits: int = 64) -> Fraction:
    """A rational lower approximation of sqrt(x) with ``bits`` fractional bits."""
    x = frac(x)
    return Fraction(math.isqrt(x.numerator * (1 << (2 * bits)) // x.denominator), 1 << bits)


@dataclass(frozen=True)
class FamilyReport:
    """Outcome of one seeded selection attempt and its bound checks.

    ``size_bound_sq`` is the square of the size bound ``lambda*n/(4*i0*k)``;
    ``hit_bound`` is ``lambda^2*n/(32*i0*k)``.  ``hits`` lists the hit count per
    target (or, for implicitly given targets, the counts that were evaluated).
    ``weak_target`` names a target that fell short, when one was found.
    """

    members: tuple[tuple[Vertex, ...], ...]
    hits: tuple[int, ...]
    attempts: int
    seed: int
    p: Fraction
    size_bound_sq: Fraction
    hit_bound: Fraction
    size_ok: bool
    hits_ok: bool
    weak_target: Optional[object] = None
    note: str = ""

    @property
    def success(self) -> bool:
        return self.size_ok and self.hits_ok

    def member_sets(self) -> list[frozenset[Vertex]]:
        return [frozenset(m) for m in self.members]

    def as_dict(self) -> dict:
        return {
            "members": [[list(v) for v in m] for m in self.members],
            "hits": list(self.hits),
            "min_hits": min(self.hits) if self.hits else None,
            "attempts": self.attempts,
            "seed": self.seed,
            "p": str(self.p),
            "size_bound_sq": str(self.size_bound_sq),
            "hit_bound": str(self.hit_bound),
            "size_ok": self.size_ok,
            "hits_ok": self.hits_ok,
            "success": self.success,
            "note": self.note,
        }


def _selection_constants(lam_sq: Fraction, i0: int, k: int, n: int):
    lam = sqrt_floor(lam_sq)
    p = min(Fraction(1), lam / (8 * i0 * k * n ** (i0 * k - 1)))
    size_bound_sq = lam_sq * n * n / (4 * i0 * k) ** 2
    hit_bound = lam_sq * n / (32 * i0 * k)
    return p, size_bound_sq, hit_bound


def _sample_disjoint(candidates: Sequence[frozenset], p: Fraction, rng: SplitMix64) -> list[frozenset]:
    """Keep each candidate with probability p, then drop later members meeting earlier kept ones."""
    sampled = [c for c in candidates if rng.bernoulli(p)]
    kept: list[frozenset] = []
    used: set = set()
    for c in sampled:
        if not (c & used):
            kept.append(c)
            used |= c
    return kept


def _sorted_member(c: frozenset) -> tuple[Vertex, ...]:
    return tuple(sorted(c))


def select_family(
    targets: Sequence[Iterable[Iterable]],
    lam=None,
    i0: int = 1,
    seed: int = 0,
    retries: int = 20,
    *,
    n: int,
    k: Optional[int] = None,
    lam_squared=None,
) -> FamilyReport:
    """Seeded selection of disjoint members hitting every target family often enough.

    Candidates are the members of the union of the targets, in sorted order;
    each is kept with probability ``p = lambda/(8*i0*k*n^(i0*k-1))``, one set of
    every intersecting pair is dropped and members in no target are removed.
    Success needs ``|F'| <= lambda*n/(4*i0*k)`` and every target keeping at
    least ``lambda^2*n/(32*i0*k)`` members.  Attempt ``r`` uses
    ``derive_seed(seed, r)`` (attempt 0 uses ``seed``).
    """
    fams = [frozenset(_vset(m) for m in t) for t in targets]
    if not fams or any(not f for f in fams):
        raise PreconditionViolated("every target family must be nonempty")
    union = sorted(set().union(*fams), key=_sorted_member)
    if k is None:
        k = len({v.part for v in union[0]})
    lam_sq = frac(lam_squared) if lam_squared is not None else frac(lam) ** 2
    p, size_sq, hit_bound = _selection_constants(lam_sq, i0, k, n)
    report = None
    for attempt in range(retries):
        s = seed if attempt == 0 else derive_seed(seed, attempt)
        kept = _sample_disjoint(union, p, SplitMix64(s))
        hits = tuple(sum(1 for m in kept if m in f) for f in fams)
        size_ok = Fraction(len(kept) ** 2) <= size_sq
        hits_ok = all(h >= hit_bound for h in hits)
        weak = next((idx for idx, h in enumerate(hits) if h < hit_bound), None)
        report = FamilyReport(tuple(_sorted_member(m) for m in kept), hits, attempt + 1, s, p,
                              size_sq, hit_bound, size_ok, hits_ok, weak)
        if report.success:
            return report
    raise SelectionFailed("selection missed its bounds on every attempt", report=report,
                          min_hits=min(report.hits), size=len(report.members))


def _fill_adversarial(H: Hypergraph, members: list[frozenset], per: int) -> frozenset[Vertex]:
    """A set with ``per`` vertices in every part that meets as many members as possible."""
    chosen: list[set[int]] = [set() for _ in range(H.k)]
    slots = [(j, r) for j in range(H.k) for r in range(per)]
    for m, (j, _r) in zip(members, slots):
        x = next(v.index for v in m if v.part == j)
        chosen[j].add(x)
    for j in range(H.k):
        x = 0
        while len(chosen[j]) < per:
            if x not in chosen[j]:
                chosen[j].add(x)
            x += 1
    return frozenset(Vertex(j, x) for j in range(H.k) for x in chosen[j])


def _implicit_selection(
    H: Hypergraph,
    candidates: Sequence[frozenset],
    in_some_target,
    hits_for,
    all_targets,
    per: int,
    i0: int,
    params: Params,
    lam_sq: Fraction,
    limit: int = 60000,
) -> FamilyReport:
    """Selection where target families are indexed by sets S and evaluated lazily.

    ``hits_for(S, kept)`` counts the members of ``kept`` that serve S;
    ``all_targets()`` enumerates every S.  Each attempt first tests an
    adversarial S meeting as many members as possible; only if it passes is
    every S checked (when there are at most ``limit`` of them).
    """
    n, k = H.n, H.k
    p, size_sq, hit_bound = _selection_constants(lam_sq, i0, k, n)
    report = None
    for attempt in range(params.retries):
        s = params.seed if attempt == 0 else derive_seed(params.seed, attempt)
        kept = [m for m in _sample_disjoint(candidates, p, SplitMix64(s)) if in_some_target(m)]
        size_ok = Fraction(len(kept) ** 2) <= size_sq
        S0 = _fill_adversarial(H, kept, per)
        h0 = hits_for(S0, kept)
        hits = [h0]
        weak = S0 if h0 < hit_bound else None
        note = ""
        if weak is None:
            total = math.comb(n, per) ** k
            if total > limit:
                note = f"exhaustive check skipped: {total} target sets exceed the limit {limit}"
                weak = "unverified"
            else:
                for S in all_targets():
                    h = hits_for(S, kept)
                    hits.append(h)
                    if h < hit_bound:
                        weak = S
                        break
        report = FamilyReport(tuple(_sorted_member(m) for m in kept), tuple(hits), attempt + 1, s, p,
                              size_sq, hit_bound, size_ok, weak is None, weak, note)
        if report.success:
            return report
    raise SelectionFailed("absorbing family missed its bounds on every attempt", report=report,
                          size=len(report.members), min_hits=min(report.hits),
                          hit_bound=str(hit_bound), size_bound_sq=str(size_sq))


def _balanced_sets(H: Hypergraph, per: int):
    pools = [list(itertools.combinations(range(s), per)) for s in H.sizes]
    for combo in itertools.product(*pools):
        yield frozenset(Vertex(j, x) for j, xs in enumerate(combo) for x in xs)


def _require_codegree(H: Hypergraph, parts: Iterable[int], eps: Fraction) -> None:
    for i in parts:
        a = partite_min_codegree(H, i)
        if a < eps * H.n:
            raise DegreeTooLow(f"codegree of part {i} is {a} < eps*n", part=i, a=a, needed=str(eps * H.n))


@dataclass(frozen=True)
class AbsorbingMatching:
    matching: Matching
    report: FamilyReport

    def count_absorbing(self, H: Hypergraph, S: Iterable) -> int:
        return count_absorbing(H, S, self.matching.edges)


def absorbing_matching_I(H: Hypergraph, params: Params = Params()) -> AbsorbingMatching:
    """A small matching holding many S-absorbing edges for every balanced 2k-set S.

    Uses lambda = sqrt(32*k*alpha) and i0 = 1, so success means
    ``|M'| <= sqrt(alpha)*n`` up to the constant and ``alpha*n`` absorbing
    edges per S.
    """
    if H.k < 3:
        raise PreconditionViolated("needs k >= 3")
    n, k = H.n, H.k
    _require_codegree(H, range(3), params.epsilon)
    lam_sq = 32 * k * params.alpha
    candidates = [frozenset(edge_vertices(e)) for e in H.sorted_edges]

    def to_edge(m: frozenset) -> Edge:
        return tuple(v.index for v in sorted(m))

    def in_target(m):
        return find_absorbable_set(H, to_edge(m)) is not None

    def hits_for(S, kept):
        return count_absorbing(H, S, [to_edge(m) for m in kept])

    rep = _implicit_selection(H, candidates, in_target, hits_for, lambda: _balanced_sets(H, 2),
                              2, 1, params, lam_sq)
    return AbsorbingMatching(Matching(tuple(to_edge(frozenset(m)) for m in rep.members)), rep)


def perfect_absorbing_family(H: Hypergraph, closed_part: int = 0, params: Params = Params()) -> FamilyReport:
    """Disjoint i0*k-sets, each spanning a matching of size i0, absorbing every crossing k-set."""
    n, k, i0 = H.n, H.k, params.i0
    _require_codegree(H, [closed_part], params.epsilon)
    if not is_closed_part(H, closed_part, params.beta, i0):
        raise NotClosed(f"part {closed_part} is not ({params.beta}, {i0})-closed")
    if i0 == 1:
        candidates = [frozenset(edge_vertices(e)) for e in H.sorted_edges]
    else:
        candidates = [T for T in _balanced_sets(H, i0) if perfect_matching_within(H, T) is not None]
    lam_sq = 32 * i0 * k * params.alpha
    crossing = [frozenset(Vertex(j, x) for j, x in enumerate(e))
                for e in itertools.product(*(range(s) for s in H.sizes))]

    def in_target(T):
        return any(not (S & T) and perfect_matching_within(H, S | T) is not None for S in crossing)

    def hits_for(S, kept):
        return count_perfect_absorbing(H, S, kept)

    return _implicit_selection(H, candidates, in_target, hits_for, lambda: iter(crossing),
                               1, i0, params, lam_sq)


# ---------------------------------------------------------------------------
# Lattice merging


@dataclass(frozen=True)
class MergeRecord:
    part: int
    cells: tuple[int, int]
    difference: tuple[int, ...]
    generators: tuple[tuple[int, ...], ...]
    merged: bool


def lattice_merge(H: Hypergraph, P: RefinedPartition, mu) -> tuple[RefinedPartition, list[MergeRecord]]:
    """Merge paired cells (A_i, B_i) while u_{A_i} - u_{B_i} lies in the robust lattice.

    After each merge the robust index set is recomputed for the new partition.
    The transcript lists every test, merged or refused, in order.
    """
    transcript: list[MergeRecord] = []
    while True:
        T = sorted(robust_index_set(H, P, mu))
        merged = False
        for a, b in P.pairs:
            diff = tuple(x - y for x, y in zip(P.unit(a), P.unit(b)))
            ok = in_lattice(diff, T)
            transcript.append(MergeRecord(P.cells[a][0], (a, b), diff, tuple(T), ok))
            if ok:
                P = P.merge(a, b)
                merged = True
                break
        if not merged:
            return P, transcript


# ---------------------------------------------------------------------------
# Dichotomy


@dataclass(frozen=True)
class DichotomyOutcome:
    """Either an absorbing family or a parity witness, plus the run transcript."""

    family: Optional[FamilyReport] = None
    bipartition: Optional[Bipartition] = None
    side: Optional[str] = None
    defect: Optional[int] = None
    transcript: dict = field(default_factory=dict)

    @property
    def kind(self) -> str:
        return "family" if self.family is not None else "witness"


def _flip_vec(w: tuple[int, ...], P: RefinedPartition, parts: Iterable[int], pair_of: dict) -> tuple[int, ...]:
    w = list(w)
    for i in parts:
        a, b = pair_of[i]
        w[a], w[b] = (w[a] + 1) % 2, (w[b] + 1) % 2
    return tuple(w)


def absorbing_or_extremal(H: Hypergraph, params: Params = Params()) -> DichotomyOutcome:
    """Either an absorbing family (perfect-absorbing sets) or a divisibility witness.

    Requires ``sum a >= (1-eps)n``, ``a_1 >= a_2 >= eps*n`` and ``a_j < eps*n``
    for ``j >= 3`` (parts as labelled).
    """
    n, k = H.n, H.k
    eps = params.epsilon
    a = codegrees(H)
    if not (sum(a) >= (1 - eps) * n and a[0] >= a[1] >= eps * n and all(x < eps * n for x in a[2:])):
        raise PreconditionViolated("codegree profile outside the dichotomy range", a=a)
    tr: dict = {"a": a}

    def family_on(part: int, prm: Params, stage: str) -> DichotomyOutcome:
        try:
            rep = perfect_absorbing_family(H, part, prm)
        except SelectionFailed as exc:
            err = PipelineFailed(stage, "absorbing family selection failed", part=part, **exc.diagnostics)
            err.report = exc.report
            raise err from exc
        except NotClosed as exc:
            raise PipelineFailed(stage, str(exc), part=part) from exc
        tr["family_part"] = part
        return DichotomyOutcome(family=rep, transcript=tr)

    if a[0] >= (Fraction(1, 2) + eps) * n:
        tr["route"] = "shortcut"
        return family_on(1, params, "shortcut-family")

    cells: list[tuple[int, frozenset[int]]] = []
    pairs: list[tuple[int, int]] = []
    residue: list[Vertex] = []
    partitions = []
    for j in range(k):
        try:
            cp = closed_partition(H, j, params.beta, 1, params.c)
        except TooManyClasses as exc:
            raise PipelineFailed("closed-partition", str(exc), part=j) from exc
        partitions.append(cp)
        if j < 2 and (cp.residue or not cp.classes):
            raise PipelineFailed("closed-partition", f"part {j} has residue vertices", part=j,
                                 residue=sorted(cp.residue))
        if j < 2 and len(cp.classes) == 1:
            if cp.closed_at_beta[0]:
                tr["route"] = "closed-part"
                return family_on(j, params, "closed-part-family")
            raise PipelineFailed("closed-partition", f"part {j} is one class but not closed", part=j)
        residue += [Vertex(j, x) for x in cp.residue]
        classes = sorted(cp.classes, key=lambda c: (len(c), min(c)))
        if len(classes) == 2:
            pairs.append((len(cells), len(cells) + 1))
        cells += [(j, c) for c in classes]
    tr["partitions"] = [
        {"part": cp.part, "classes": [sorted(c) for c in cp.classes], "residue": sorted(cp.residue),
         "beta_prime": [str(b) for b in cp.beta_prime]}
        for cp in partitions
    ]
    P = RefinedPartition(H.sizes, cells, residue, pairs)
    P, merges = lattice_merge(H, P, params.mu)
    tr["merges"] = [(m.part, m.cells, m.merged) for m in merges]
    for m in merges:
        if m.merged and m.part < 2:
            schedule = [params.t_schedule ** j for j in range(1, k + 1)]
            for t in schedule:
                if t * k - 1 <= n * k and t <= n and is_closed_part(H, m.part, params.beta, t):
                    tr["route"] = "merged-part"
                    tr["closed_schedule_step"] = t
                    return family_on(m.part, params.replace(i0=t), "merged-part-family")
            raise PipelineFailed("lattice-merge", f"part {m.part} merged but is not closed on the schedule",
                                 part=m.part, schedule=schedule)
    pair_of = {P.cells[x][0]: (x, y) for x, y in P.pairs}
    tilde = sorted(pair_of)
    T = robust_index_set(H, P, params.mu)
    dagger = all(_flip_vec(w, P, [i], pair_of) not in T for w in T for i in tilde)
    ddagger = all(_flip_vec(w, P, [i, 1], pair_of) in T for w in T for i in tilde if i != 1) if 1 in pair_of else False
    lower = (eps * n) ** (k - 1) * a[0] - params.mu * n ** k
    tr.update({"tilde_I": tilde, "T": sorted(T), "dagger": dagger, "ddagger": ddagger,
               "ddagger_bound": str(lower), "ddagger_bound_ok": lower >= params.mu * n ** k})

    def parity(w):
        return sum(w[pair_of[i][0]] for i in tilde) % 2

    parities = {parity(w) for w in T}
    if len(parities) != 1:
        raise PipelineFailed("parity-classification", "robust vectors have mixed parity",
                             vectors=sorted(T))
    side = "even" if parities == {0} else "odd"
    A = [P.cells[pair_of[j][0]][1] if j in pair_of else frozenset() for j in range(k)]
    bip = Bipartition(H.sizes, A)
    defect = parity_defect(H, bip, side)
    tr["route"] = "witness"
    return DichotomyOutcome(bipartition=bip, side=side, defect=defect, transcript=tr)
