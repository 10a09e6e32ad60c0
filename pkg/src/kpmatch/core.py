"""Fundamental types and exact degree/parity/lattice computations.

Vertices are ``(part, index)`` pairs.  An edge is stored as a tuple of ``k``
indices where position ``j`` holds the index of the edge's vertex in part ``j``;
this makes edge sets canonical, so two hypergraphs with the same edges compare
equal bit for bit.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field, fields, replace
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Literal, NamedTuple, Optional, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    MalformedInput,
    MalformedSet,
    TouchesResidue,
    UnequalParts,
)

Edge = tuple[int, ...]
Parity = Literal["even", "odd"]


class Vertex(NamedTuple):
    part: int
    index: int


def frac(x) -> Fraction:
    """Convert an int, Fraction, decimal string or float to an exact Fraction.

    Floats go through their shortest repr so ``0.2`` becomes ``1/5``.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(str(x))


def ceil_frac(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def at_least(count: int, coeff, scale: int) -> bool:
    """Exact test ``count >= coeff * scale`` for a rational ``coeff``."""
    c = frac(coeff)
    return count * c.denominator >= c.numerator * scale


# ---------------------------------------------------------------------------
# Hypergraph


class Hypergraph:
    """A k-partite k-graph with explicit part sizes.

    Immutable once built.  ``edges`` is a frozenset of index tuples; use
    :attr:`sorted_edges` when a deterministic order is needed.
    """

    __slots__ = ("sizes", "edges", "__dict__")

    def __init__(self, sizes: Sequence[int], edges: Iterable[Sequence[int]] = (), *, check: bool = True):
        sizes = tuple(int(s) for s in sizes)
        if len(sizes) < 2:
            raise MalformedInput("a k-partite hypergraph needs k >= 2 parts", k=len(sizes))
        if any(s < 0 for s in sizes):
            raise MalformedInput("part sizes must be nonnegative", sizes=sizes)
        es = frozenset(tuple(e) for e in edges)
        if check:
            k = len(sizes)
            for e in es:
                if len(e) != k:
                    raise MalformedInput(f"edge {e} does not have exactly one vertex per part")
                for j, x in enumerate(e):
                    if not 0 <= x < sizes[j]:
                        raise MalformedInput(f"edge {e} has index {x} outside part {j}")
        self.sizes = sizes
        self.edges = es

    @property
    def k(self) -> int:
        return len(self.sizes)

    @property
    def n(self) -> int:
        """Common part size; raises :class:`UnequalParts` if sizes differ."""
        if len(set(self.sizes)) != 1:
            raise UnequalParts("parts have different sizes", sizes=self.sizes)
        return self.sizes[0]

    @property
    def equal_parts(self) -> bool:
        return len(set(self.sizes)) == 1

    def __len__(self) -> int:
        return len(self.edges)

    def __contains__(self, e) -> bool:
        return tuple(e) in self.edges

    def __eq__(self, other) -> bool:
        return isinstance(other, Hypergraph) and self.sizes == other.sizes and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.sizes, self.edges))

    def __repr__(self) -> str:
        return f"Hypergraph(sizes={self.sizes}, |E|={len(self.edges)})"

    @cached_property
    def sorted_edges(self) -> tuple[Edge, ...]:
        return tuple(sorted(self.edges))

    @cached_property
    def tensor(self) -> np.ndarray:
        t = np.zeros(self.sizes, dtype=bool)
        if self.edges:
            idx = np.array(self.sorted_edges, dtype=np.int64).T
            t[tuple(idx)] = True
        return t

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        return tuple(itertools.accumulate((0,) + self.sizes[:-1]))

    @cached_property
    def incident(self) -> dict[Vertex, tuple[Edge, ...]]:
        inc: dict[Vertex, list[Edge]] = {v: [] for v in self.vertices()}
        for e in self.sorted_edges:
            for j, x in enumerate(e):
                inc[Vertex(j, x)].append(e)
        return {v: tuple(es) for v, es in inc.items()}

    def vertices(self) -> Iterator[Vertex]:
        for j, s in enumerate(self.sizes):
            for x in range(s):
                yield Vertex(j, x)

    def part(self, j: int) -> tuple[Vertex, ...]:
        return tuple(Vertex(j, x) for x in range(self.sizes[j]))

    def total_vertices(self) -> int:
        return sum(self.sizes)

    def with_edges(self, edges: Iterable[Sequence[int]]) -> "Hypergraph":
        return Hypergraph(self.sizes, edges)


def edge_vertices(e: Sequence[int]) -> tuple[Vertex, ...]:
    return tuple(Vertex(j, x) for j, x in enumerate(e))


def vertices_to_edge(vs: Iterable, k: int) -> Edge:
    """Turn a crossing k-set of vertices into the canonical edge tuple."""
    slots: list[Optional[int]] = [None] * k
    for p, x in vs:
        if not 0 <= p < k or slots[p] is not None:
            raise MalformedSet("vertex set is not a crossing k-set")
        slots[p] = x
    if any(s is None for s in slots):
        raise MalformedSet("vertex set misses a part")
    return tuple(slots)  # type: ignore[arg-type]


def crossing_map(H: Hypergraph, S: Iterable, size: Optional[int] = None) -> dict[int, int]:
    """Validate that ``S`` is crossing in ``H`` and return it as ``{part: index}``."""
    out: dict[int, int] = {}
    for v in S:
        p, x = v
        if not 0 <= p < H.k or not 0 <= x < H.sizes[p]:
            raise MalformedSet(f"vertex {tuple(v)} is out of bounds")
        if p in out:
            raise MalformedSet(f"set has two vertices in part {p}")
        out[p] = x
    if size is not None and len(out) != size:
        raise MalformedSet(f"expected a crossing {size}-set, got {len(out)} vertices")
    return out


# ---------------------------------------------------------------------------
# Matchings


@dataclass(frozen=True)
class Matching:
    """An ordered sequence of pairwise disjoint edges."""

    edges: tuple[Edge, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))

    def __len__(self) -> int:
        return len(self.edges)

    def __iter__(self):
        return iter(self.edges)

    def vertices(self) -> set[Vertex]:
        return {Vertex(j, x) for e in self.edges for j, x in enumerate(e)}

    def is_disjoint(self) -> bool:
        seen: set[tuple[int, int]] = set()
        for e in self.edges:
            for j, x in enumerate(e):
                if (j, x) in seen:
                    return False
                seen.add((j, x))
        return True

    def is_valid(self, H: Hypergraph) -> bool:
        return all(e in H.edges for e in self.edges) and self.is_disjoint()

    def validate(self, H: Hypergraph) -> "Matching":
        for e in self.edges:
            if e not in H.edges:
                raise MalformedInput(f"matching edge {e} is not an edge of H")
        if not self.is_disjoint():
            raise MalformedInput("matching edges are not pairwise disjoint")
        return self

    def __add__(self, other: "Matching") -> "Matching":
        return Matching(self.edges + tuple(other.edges))


# ---------------------------------------------------------------------------
# Degrees


def codegree(H: Hypergraph, S: Iterable) -> int:
    """Number of vertices completing the crossing (k-1)-set ``S`` to an edge."""
    m = crossing_map(H, S, size=H.k - 1)
    missing = next(j for j in range(H.k) if j not in m)
    e = [m.get(j, 0) for j in range(H.k)]
    count = 0
    for x in range(H.sizes[missing]):
        e[missing] = x
        if tuple(e) in H.edges:
            count += 1
    return count


def partite_min_degree(H: Hypergraph, I: Iterable[int]) -> int:
    """delta_I(H): minimum number of extensions of a crossing set spanning the parts in ``I``."""
    I = sorted(set(I))
    if not I or any(not 0 <= i < H.k for i in I) or len(I) >= H.k:
        raise MalformedSet(f"index set {I} must be a nonempty proper subset of the parts")
    other = tuple(j for j in range(H.k) if j not in I)
    counts = H.tensor.sum(axis=other, dtype=np.int64)
    if counts.size == 0:
        return math.prod(H.sizes[j] for j in other)
    return int(counts.min())


def partite_min_codegree(H: Hypergraph, i: int) -> int:
    """a_i = delta_{[k] minus {i}}(H)."""
    if not 0 <= i < H.k:
        raise MalformedSet(f"part {i} out of range")
    return partite_min_degree(H, [j for j in range(H.k) if j != i])


def codegrees(H: Hypergraph) -> tuple[int, ...]:
    return tuple(partite_min_codegree(H, i) for i in range(H.k))


def partite_min_d_degree(H: Hypergraph, d: int) -> int:
    if not 1 <= d <= H.k - 1:
        raise MalformedSet(f"d must lie in [1, k-1], got {d}")
    return min(partite_min_degree(H, I) for I in itertools.combinations(range(H.k), d))


def codegree_counts(H: Hypergraph, i: int) -> np.ndarray:
    """Array of codegrees of all crossing (k-1)-sets avoiding part ``i``."""
    return H.tensor.sum(axis=i, dtype=np.int64)


def vertex_degree(H: Hypergraph, v) -> int:
    p, x = v
    return int(np.take(H.tensor, x, axis=p).sum())


def complement_degree(H: Hypergraph, v) -> int:
    """Degree of ``v`` in the complement of ``H`` within the same k-partition."""
    p, x = v
    if not 0 <= p < H.k or not 0 <= x < H.sizes[p]:
        raise MalformedSet(f"vertex {tuple(v)} out of bounds")
    full = math.prod(s for j, s in enumerate(H.sizes) if j != p)
    return full - vertex_degree(H, v)


def max_complement_degree(H: Hypergraph) -> int:
    """The largest complement degree over all vertices (0 for a complete H)."""
    best = 0
    t = H.tensor
    for p in range(H.k):
        if H.sizes[p] == 0:
            continue
        full = math.prod(s for j, s in enumerate(H.sizes) if j != p)
        axes = tuple(j for j in range(H.k) if j != p)
        deg = t.sum(axis=axes, dtype=np.int64)
        best = max(best, full - int(deg.min()))
    return best


def min_vertex_degree(H: Hypergraph) -> int:
    """delta_1(H) taken over all vertices of all parts."""
    return min(partite_min_degree(H, [p]) for p in range(H.k))


# ---------------------------------------------------------------------------
# Bipartitions and parity


class Bipartition:
    """A set ``A`` split per part as ``A_i``; ``B_i`` is the complement in part ``i``."""

    __slots__ = ("sizes", "A")

    def __init__(self, sizes: Sequence[int], A: Sequence[Iterable[int]]):
        sizes = tuple(sizes)
        A = tuple(frozenset(a) for a in A)
        if len(A) != len(sizes):
            raise MalformedInput("bipartition needs one A-set per part")
        for j, a in enumerate(A):
            if any(not 0 <= x < sizes[j] for x in a):
                raise MalformedInput(f"A_{j} is not inside part {j}")
        self.sizes = sizes
        self.A = A

    @classmethod
    def prefix(cls, sizes: Sequence[int], a_sizes: Sequence[int]) -> "Bipartition":
        """A_i is the first ``a_sizes[i]`` vertices of part ``i``."""
        if any(not 0 <= a <= s for a, s in zip(a_sizes, sizes)):
            raise MalformedInput("A-sizes must lie in [0, part size]")
        return cls(sizes, [range(a) for a in a_sizes])

    @property
    def k(self) -> int:
        return len(self.sizes)

    def B(self, i: int) -> frozenset[int]:
        return frozenset(range(self.sizes[i])) - self.A[i]

    def a_sizes(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.A)

    def a_total(self) -> int:
        return sum(len(a) for a in self.A)

    def in_A(self, v) -> bool:
        return v[1] in self.A[v[0]]

    def location(self, e: Sequence[int]) -> tuple[int, ...]:
        """Location vector of a crossing k-set: 1 where its vertex lies in A_i."""
        return tuple(int(x in self.A[j]) for j, x in enumerate(e))

    def side(self, i: int, bit: int) -> frozenset[int]:
        return self.A[i] if bit else self.B(i)

    def flip(self, parts: Iterable[int]) -> "Bipartition":
        parts = set(parts)
        return Bipartition(self.sizes, [self.B(j) if j in parts else self.A[j] for j in range(self.k)])

    def edge_parity(self, e: Sequence[int]) -> Parity:
        return "even" if sum(self.location(e)) % 2 == 0 else "odd"

    def __eq__(self, other) -> bool:
        return isinstance(other, Bipartition) and self.sizes == other.sizes and self.A == other.A

    def __hash__(self) -> int:
        return hash((self.sizes, self.A))

    def __repr__(self) -> str:
        return f"Bipartition(sizes={self.sizes}, |A_i|={self.a_sizes()})"


def set_parity(S: Iterable, P: Bipartition) -> Parity:
    """"even" iff S meets A in an even number of vertices."""
    return "even" if sum(1 for v in S if P.in_A(v)) % 2 == 0 else "odd"


def parity_mask(P: Bipartition) -> np.ndarray:
    """Boolean tensor marking the even crossing k-sets with respect to ``P``."""
    par = np.zeros(P.sizes, dtype=np.int8)
    for j in range(P.k):
        ind = np.zeros(P.sizes[j], dtype=np.int8)
        ind[list(P.A[j])] = 1
        shape = [1] * P.k
        shape[j] = P.sizes[j]
        par = par + ind.reshape(shape)
    return (par % 2) == 0


def parity_defect(H: Hypergraph, P: Bipartition, side: Parity) -> int:
    """Exact count |E_side(A, B) \\ E(H)|."""
    even = parity_mask(P)
    fam = even if side == "even" else ~even
    return int(np.count_nonzero(fam & ~H.tensor))


# ---------------------------------------------------------------------------
# Refined partitions, index vectors, lattices


class RefinedPartition:
    """Cells ``W_1..W_d`` each inside one original part, plus a residue ``W_0``.

    ``pairs`` lists index pairs ``(a, b)`` of cells that were split from the
    same part (the ``A_i``/``B_i`` pairs a merge step may reunite).
    """

    __slots__ = ("sizes", "cells", "residue", "pairs", "_where")

    def __init__(
        self,
        sizes: Sequence[int],
        cells: Sequence[tuple[int, Iterable[int]]],
        residue: Iterable = (),
        pairs: Sequence[tuple[int, int]] = (),
    ):
        self.sizes = tuple(sizes)
        self.cells = tuple((int(p), frozenset(c)) for p, c in cells)
        self.residue = frozenset(Vertex(*v) for v in residue)
        self.pairs = tuple((int(a), int(b)) for a, b in pairs)
        where: dict[Vertex, int] = {}
        for ci, (p, c) in enumerate(self.cells):
            if not c:
                raise MalformedInput(f"cell {ci} is empty")
            for x in c:
                if not 0 <= x < self.sizes[p]:
                    raise MalformedInput(f"cell {ci} leaves part {p}")
                v = Vertex(p, x)
                if v in where:
                    raise MalformedInput(f"vertex {v} lies in two cells")
                where[v] = ci
        for v in self.residue:
            if v in where:
                raise MalformedInput(f"vertex {v} is both in a cell and in the residue")
        if len(where) + len(self.residue) != sum(self.sizes):
            raise MalformedInput("cells and residue do not cover every vertex")
        for a, b in self.pairs:
            if self.cells[a][0] != self.cells[b][0] or a == b:
                raise MalformedInput(f"paired cells {a}, {b} must be distinct cells of one part")
        self._where = where

    @classmethod
    def trivial(cls, sizes: Sequence[int]) -> "RefinedPartition":
        return cls(sizes, [(j, range(s)) for j, s in enumerate(sizes)])

    @classmethod
    def from_bipartition(cls, P: Bipartition) -> "RefinedPartition":
        """Cells A_i, B_i for every part (empty sides dropped, unsplit parts unpaired)."""
        cells, pairs = [], []
        for j in range(P.k):
            a, b = P.A[j], P.B(j)
            if a and b:
                pairs.append((len(cells), len(cells) + 1))
                cells += [(j, a), (j, b)]
            else:
                cells.append((j, a or b))
        return cls(P.sizes, cells, (), pairs)

    @property
    def d(self) -> int:
        return len(self.cells)

    def cell_of(self, v) -> Optional[int]:
        return self._where.get(Vertex(*v))

    def unit(self, ci: int) -> tuple[int, ...]:
        return tuple(int(i == ci) for i in range(self.d))

    def merge(self, a: int, b: int) -> "RefinedPartition":
        """Replace cells ``a`` and ``b`` by their union (kept at position ``min(a, b)``)."""
        lo, hi = min(a, b), max(a, b)
        p = self.cells[lo][0]
        union = self.cells[lo][1] | self.cells[hi][1]
        cells = [c for i, c in enumerate(self.cells) if i != hi]
        cells[lo] = (p, union)

        def remap(i: int) -> int:
            return lo if i == hi else (i - 1 if i > hi else i)

        pairs = [(remap(x), remap(y)) for x, y in self.pairs if {x, y} != {a, b}]
        return RefinedPartition(self.sizes, cells, self.residue, pairs)

    def __repr__(self) -> str:
        desc = ", ".join(f"{p}:{sorted(c)}" for p, c in self.cells)
        return f"RefinedPartition([{desc}], W0={sorted(self.residue)})"


def index_vector(P: RefinedPartition, S: Iterable) -> tuple[int, ...]:
    """Counts of ``S`` in each cell W_1..W_d; ``S`` may not meet the residue."""
    vec = [0] * P.d
    for v in S:
        ci = P.cell_of(v)
        if ci is None:
            raise TouchesResidue(f"vertex {tuple(v)} lies in the residue W_0")
        vec[ci] += 1
    return tuple(vec)


def index_vector_counts(H: Hypergraph, P: RefinedPartition) -> Counter:
    """Number of edges of ``H`` (avoiding W_0) realising each index vector."""
    counts: Counter = Counter()
    for e in H.sorted_edges:
        cs = [P.cell_of((j, x)) for j, x in enumerate(e)]
        if any(c is None for c in cs):
            continue
        vec = [0] * P.d
        for c in cs:
            vec[c] += 1
        counts[tuple(vec)] += 1
    return counts


def robust_index_set(H: Hypergraph, P: RefinedPartition, mu) -> frozenset[tuple[int, ...]]:
    """Index vectors carried by at least ``mu * prod(sizes)`` edges (exact comparison).

    For equal parts the threshold is mu * n^k.  Only vectors realised by at
    least one edge are returned, so ``mu = 0`` yields the realised vectors.
    """
    scale = math.prod(H.sizes)
    counts = index_vector_counts(H, P)
    return frozenset(v for v, c in counts.items() if c >= 1 and at_least(c, mu, scale))


def hermite_basis(G: Iterable[Sequence[int]], d: int) -> list[list[int]]:
    """Row-echelon integer basis of the lattice spanned by ``G`` (exact, Euclid on columns)."""
    rows = [list(g) for g in G if any(g)]
    basis: list[list[int]] = []
    for col in range(d):
        active = [r for r in rows if r[col] != 0]
        rest = [r for r in rows if r[col] == 0]
        while len(active) > 1:
            active.sort(key=lambda r: abs(r[col]))
            piv = active[0]
            keep = [piv]
            for r in active[1:]:
                q = r[col] // piv[col]
                r2 = [x - q * y for x, y in zip(r, piv)]
                if r2[col] != 0:
                    keep.append(r2)
                elif any(r2):
                    rest.append(r2)
            active = keep
        if active:
            piv = active[0]
            if piv[col] < 0:
                piv = [-x for x in piv]
            basis.append(piv)
        rows = rest
    return basis


def in_lattice(v: Sequence[int], G: Iterable[Sequence[int]]) -> bool:
    """True iff ``v`` is an integer combination of the vectors in ``G``."""
    G = [tuple(g) for g in G]
    d = len(v)
    if any(len(g) != d for g in G):
        raise DimensionMismatch("generator and target dimensions differ", d=d)
    basis = hermite_basis(G, d)
    pivots = {}
    for row in basis:
        c = next(i for i, x in enumerate(row) if x != 0)
        pivots[c] = row
    w = list(v)
    for c in range(d):
        if w[c] == 0:
            continue
        row = pivots.get(c)
        if row is None or w[c] % row[c] != 0:
            return False
        q = w[c] // row[c]
        w = [x - q * y for x, y in zip(w, row)]
    return True


# ---------------------------------------------------------------------------
# Sub-hypergraphs


def induced(H: Hypergraph, keep: Iterable) -> tuple[Hypergraph, tuple[tuple[int, ...], ...]]:
    """Induced sub-hypergraph on ``keep`` with each part reindexed from 0.

    Returns the new hypergraph and, per part, the tuple mapping new indices
    back to the original ones.
    """
    per_part: list[set[int]] = [set() for _ in range(H.k)]
    for p, x in keep:
        per_part[p].add(x)
    back = tuple(tuple(sorted(s)) for s in per_part)
    fwd = [{x: i for i, x in enumerate(b)} for b in back]
    edges = [
        tuple(fwd[j][x] for j, x in enumerate(e))
        for e in H.sorted_edges
        if all(x in fwd[j] for j, x in enumerate(e))
    ]
    return Hypergraph([len(b) for b in back], edges, check=False), back


def lift_edges(edges: Iterable[Sequence[int]], back: Sequence[Sequence[int]]) -> list[Edge]:
    """Map edges of an induced sub-hypergraph back to original indices."""
    return [tuple(back[j][x] for j, x in enumerate(e)) for e in edges]


def restrict(H: Hypergraph, keep: Iterable) -> Hypergraph:
    """Same vertex universe, only the edges lying inside ``keep``."""
    keep = {Vertex(*v) for v in keep}
    return Hypergraph(
        H.sizes,
        (e for e in H.sorted_edges if all(Vertex(j, x) in keep for j, x in enumerate(e))),
        check=False,
    )


def permute_parts(H: Hypergraph, order: Sequence[int]) -> Hypergraph:
    """New hypergraph whose part ``j`` is the old part ``order[j]``."""
    return Hypergraph(
        [H.sizes[o] for o in order],
        (tuple(e[o] for o in order) for e in H.sorted_edges),
        check=False,
    )


def unpermute_edge(e: Sequence[int], order: Sequence[int]) -> Edge:
    out = [0] * len(order)
    for j, o in enumerate(order):
        out[o] = e[j]
    return tuple(out)


# ---------------------------------------------------------------------------
# Parameters


def _default(x: str) -> Fraction:
    return field(default=Fraction(x))


@dataclass(frozen=True)
class Params:
    """Named constants of the constructions, all rationals exact.

    ``t`` overrides the family size multiplier of the almost-perfect matching
    step (default ``ceil(k(k-1)/gamma)``); ``t_schedule`` is the base of the
    power schedule used when merged cells are re-checked for closedness.
    """

    epsilon: Fraction = _default("1/5")
    gamma: Fraction = _default("1/100")
    alpha: Fraction = _default("1/4")
    beta: Fraction = _default("1/100")
    mu: Fraction = _default("1/100")
    eta: Fraction = _default("1/100")
    epsilon0: Fraction = _default("1/10")
    t: Optional[int] = None
    i0: int = 1
    c: int = 2
    seed: int = 0
    retries: int = 20
    t_schedule: int = 2
    exact_limit: int = 8
    node_budget: Optional[int] = 2_000_000

    _RATIONALS = ("epsilon", "gamma", "alpha", "beta", "mu", "eta", "epsilon0")

    def __post_init__(self):
        for name in self._RATIONALS:
            value = frac(getattr(self, name))
            if not 0 <= value <= 1:
                raise MalformedInput(f"parameter {name}={value} must lie in [0, 1]")
            object.__setattr__(self, name, value)
        for name in ("i0", "c", "retries", "t_schedule", "exact_limit"):
            if int(getattr(self, name)) < 1:
                raise MalformedInput(f"parameter {name} must be a positive integer")
        if self.t is not None and self.t < 1:
            raise MalformedInput("parameter t must be a positive integer")
        if not 0 <= self.seed < 2**64:
            raise MalformedInput("seed must be a 64-bit unsigned integer")

    def replace(self, **changes) -> "Params":
        return replace(self, **changes)

    @classmethod
    def from_pairs(cls, pairs: Iterable[str], base: Optional["Params"] = None) -> "Params":
        """Build from ``key=value`` strings (the CLI's repeated ``--params``)."""
        base = base or cls()
        names = {f.name for f in fields(cls)}
        changes: dict = {}
        for item in pairs:
            key, sep, value = item.partition("=")
            key = key.strip()
            if not sep or key not in names:
                raise MalformedInput(f"unknown parameter assignment {item!r}")
            if key in cls._RATIONALS:
                changes[key] = frac(value.strip())
            elif value.strip().lower() == "none":
                changes[key] = None
            else:
                changes[key] = int(value)
        return replace(base, **changes)

    def as_dict(self) -> dict:
        return {f.name: (str(getattr(self, f.name)) if isinstance(getattr(self, f.name), Fraction)
                         else getattr(self, f.name)) for f in fields(self)}
