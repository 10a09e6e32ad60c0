"""Generators: complete hypergraphs, the two barriers, random and perturbed instances."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Literal, Optional, Sequence, Union

import numpy as np

from .core import Bipartition, Hypergraph, Parity, frac, induced, parity_mask
from .errors import BudgetExceeded, EmptyPart, MalformedInput
from .rng import SplitMix64

Sizes = Union[int, Sequence[int]]


def _sizes(k: int, n: Sizes) -> tuple[int, ...]:
    sizes = (n,) * k if isinstance(n, int) else tuple(n)
    if len(sizes) != k:
        raise MalformedInput(f"expected {k} part sizes, got {len(sizes)}")
    if any(s <= 0 for s in sizes):
        raise MalformedInput("part sizes must be positive", sizes=sizes)
    return sizes


def from_mask(mask: np.ndarray) -> Hypergraph:
    """Hypergraph whose edges are the True cells of a k-dimensional boolean array."""
    edges = [tuple(int(x) for x in row) for row in np.argwhere(mask)]
    return Hypergraph(mask.shape, edges, check=False)


def complete(k: int, sizes: Sizes) -> Hypergraph:
    sizes = _sizes(k, sizes)
    return Hypergraph(sizes, itertools.product(*(range(s) for s in sizes)), check=False)


def edgeless(k: int, sizes: Sizes) -> Hypergraph:
    return Hypergraph(_sizes(k, sizes), ())


def space_barrier(k: int, n: int, a: Sequence[int]) -> Hypergraph:
    """Crossing k-sets meeting some A_i, where A_i is the first ``a[i]`` vertices of part i."""
    a = tuple(a)
    if len(a) != k or any(not 0 <= x <= n for x in a):
        raise MalformedInput("space barrier needs k values 0 <= a_i <= n", a=a)
    grids = np.indices((n,) * k)
    mask = np.zeros((n,) * k, dtype=bool)
    for i in range(k):
        mask |= grids[i] < a[i]
    return from_mask(mask)


def parity_family(k: int, n: Sizes, bip: Bipartition, side: Parity = "even") -> Hypergraph:
    """All crossing k-sets that are even (or odd) with respect to ``bip``."""
    sizes = _sizes(k, n)
    if bip.sizes != sizes:
        raise MalformedInput("bipartition sizes do not match the part sizes")
    if side not in ("even", "odd"):
        raise MalformedInput(f"side must be 'even' or 'odd', got {side!r}")
    even = parity_mask(bip)
    return from_mask(even if side == "even" else ~even)


def location_vertices(bip: Bipartition, v: Sequence[int]) -> list[tuple[int, int]]:
    return [(j, x) for j in range(bip.k) for x in sorted(bip.side(j, v[j]))]


def location_subgraph_with_map(H: Hypergraph, bip: Bipartition, v: Sequence[int]):
    """Like :func:`location_subgraph` but also returns the back map to H's indices."""
    if len(v) != H.k or any(b not in (0, 1) for b in v):
        raise MalformedInput("location vector must be a 0/1 vector of length k")
    for j in range(H.k):
        if not bip.side(j, v[j]):
            raise EmptyPart(f"side {'A' if v[j] else 'B'}_{j} is empty", part=j, vector=tuple(v))
    return induced(H, location_vertices(bip, v))


def location_subgraph(H: Hypergraph, bip: Bipartition, v: Sequence[int]) -> Hypergraph:
    """H(v): the sub-hypergraph induced on A_i (v_i = 1) or B_i (v_i = 0) in each part."""
    return location_subgraph_with_map(H, bip, v)[0]


def random_instance(k: int, n: Sizes, p, seed: int) -> Hypergraph:
    """Each crossing k-set, in lexicographic order, is kept with probability ``p``."""
    sizes = _sizes(k, n)
    p = frac(p)
    if not 0 <= p <= 1:
        raise MalformedInput("p must lie in [0, 1]")
    rng = SplitMix64(seed)
    edges = [e for e in itertools.product(*(range(s) for s in sizes)) if rng.bernoulli(p)]
    return Hypergraph(sizes, edges, check=False)


def non_edges(H: Hypergraph) -> list[tuple[int, ...]]:
    return [tuple(int(x) for x in row) for row in np.argwhere(~H.tensor)]


def perturb(H: Hypergraph, add: int, remove: int, seed: int) -> Hypergraph:
    """Remove ``remove`` seeded-random edges, then add ``add`` random non-edges of the original H."""
    edges = list(H.sorted_edges)
    missing = non_edges(H)
    if remove > len(edges) or add > len(missing) or add < 0 or remove < 0:
        raise BudgetExceeded(
            "perturbation exceeds available edges or non-edges",
            add=add, remove=remove, edges=len(edges), non_edges=len(missing),
        )
    rng = SplitMix64(seed)
    dropped = set(rng.sample(edges, remove))
    added = rng.sample(missing, add)
    return Hypergraph(H.sizes, [e for e in edges if e not in dropped] + added, check=False)


@dataclass(frozen=True)
class BarrierSpec:
    """Declarative description of a space or divisibility barrier."""

    kind: Literal["space", "divisibility"]
    k: int
    n: int
    a: tuple[int, ...]
    side: Parity = "even"

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(self.a))
        if self.kind not in ("space", "divisibility"):
            raise MalformedInput(f"unknown barrier kind {self.kind!r}")
        if len(self.a) != self.k or any(not 0 <= x <= self.n for x in self.a):
            raise MalformedInput("need k values in [0, n]", a=self.a)

    def bipartition(self) -> Bipartition:
        return Bipartition.prefix((self.n,) * self.k, self.a)

    def build(self) -> Hypergraph:
        if self.kind == "space":
            return space_barrier(self.k, self.n, self.a)
        return parity_family(self.k, self.n, self.bipartition(), self.side)

    def classic_constraints(self) -> dict[str, bool]:
        """Which of the textbook barrier size conditions hold for this spec.

        Space barrier: sum a_i <= n - 1.  Divisibility barrier: sum |A_i| odd,
        n/2 - 1 <= |A_i| <= n/2 + 1, even side.
        """
        if self.kind == "space":
            return {"sum_at_most_n_minus_1": sum(self.a) <= self.n - 1}
        return {
            "odd_total": sum(self.a) % 2 == 1,
            "near_half": all(2 * x >= self.n - 2 and 2 * x <= self.n + 2 for x in self.a),
            "even_side": self.side == "even",
        }


def all_crossing_sets(sizes: Sequence[int], parts: Optional[Sequence[int]] = None):
    """Yield crossing sets hitting exactly ``parts`` (default: all parts) as vertex tuples."""
    parts = range(len(sizes)) if parts is None else parts
    for idx in itertools.product(*(range(sizes[j]) for j in parts)):
        yield tuple(zip(parts, idx))


def num_crossing_sets(sizes: Sequence[int], parts: Sequence[int]) -> int:
    return math.prod(sizes[j] for j in parts)
