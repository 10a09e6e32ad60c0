"""Brute-force reference implementations used to cross-check the fast code.

These deliberately share nothing with the production algorithms beyond the
edge set of a :class:`Hypergraph`: no tensors, no bitmasks, no bounds.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Iterable, Optional, Sequence

from .core import Hypergraph


def naive_codegree(H: Hypergraph, i: int) -> int:
    """min over crossing (k-1)-sets avoiding part i of the number of extensions."""
    others = [j for j in range(H.k) if j != i]
    best = None
    for idx in itertools.product(*(range(H.sizes[j]) for j in others)):
        count = 0
        for x in range(H.sizes[i]):
            e = [0] * H.k
            for j, y in zip(others, idx):
                e[j] = y
            e[i] = x
            if tuple(e) in H.edges:
                count += 1
        best = count if best is None else min(best, count)
    return 0 if best is None else best


def naive_max_matching(H: Hypergraph, vertices: Optional[Iterable] = None) -> int:
    """Matching number by deciding the vertices of part 0 one after another.

    With ``vertices`` given, only edges inside that vertex set count.
    """
    allowed = None if vertices is None else {tuple(v) for v in vertices}
    edges = [e for e in sorted(H.edges)
             if allowed is None or all((j, x) in allowed for j, x in enumerate(e))]
    by_first: dict[int, list] = {}
    for e in edges:
        by_first.setdefault(e[0], []).append(e)
    firsts = sorted(by_first)

    @lru_cache(maxsize=None)
    def go(pos: int, used: frozenset) -> int:
        if pos == len(firsts):
            return 0
        best = go(pos + 1, used)
        for e in by_first[firsts[pos]]:
            vs = frozenset((j, x) for j, x in enumerate(e) if j > 0)
            if not (vs & used):
                best = max(best, 1 + go(pos + 1, used | vs))
        return best

    return go(0, frozenset())


def naive_has_perfect_matching(H: Hypergraph, vertices: Iterable) -> bool:
    """Whether the vertex set (balanced) is covered exactly by disjoint edges of H."""
    vs = {tuple(v) for v in vertices}
    per = [sum(1 for v in vs if v[0] == j) for j in range(H.k)]
    if len(set(per)) != 1:
        return False
    return naive_max_matching(H, vs) == per[0]


def naive_is_absorbing(H: Hypergraph, S: Iterable, e: Sequence[int]) -> bool:
    """Try every pair of disjoint edges inside S and e with the absorbing intersection pattern."""
    k = H.k
    S = {tuple(v) for v in S}
    ev = {(j, x) for j, x in enumerate(e)}
    pool = S | ev
    inside = [f for f in H.edges if all((j, x) in pool for j, x in enumerate(f))]
    for f1, f2 in itertools.permutations(inside, 2):
        v1 = {(j, x) for j, x in enumerate(f1)}
        v2 = {(j, x) for j, x in enumerate(f2)}
        if v1 & v2:
            continue
        if len(v1 & S) == k - 1 and len(v1 & ev) == 1 and len(v2 & S) == 2 and len(v2 & ev) == k - 2:
            return True
    return False


def naive_is_perfect_absorbing(H: Hypergraph, S: Iterable, T: Iterable) -> bool:
    S = {tuple(v) for v in S}
    T = {tuple(v) for v in T}
    if S & T:
        return False
    return naive_has_perfect_matching(H, T) and naive_has_perfect_matching(H, S | T)
