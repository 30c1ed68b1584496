"""Poset and DAG foundations.

Dense integer labels 1..n throughout.  The closure matrix is an n-by-n
boolean scratch structure (numpy) used at construction time only; the
succinct oracles never keep it around.  Vertex count is guarded at 2**16.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

MAX_N = 1 << 16


class NotADagError(ValueError):
    def __init__(self, vertex, msg=None):
        self.vertex = vertex
        super().__init__(msg or f"input graph has a cycle through vertex {vertex}")


class InvalidPosetError(ValueError):
    pass


@dataclass(frozen=True)
class Digraph:
    """Edge list over vertices 1..n; loops only when allow_loops is set."""

    n: int
    edges: tuple
    allow_loops: bool = False

    def __post_init__(self):
        if self.n < 0 or self.n > MAX_N:
            raise ValueError(f"vertex count {self.n} outside [0, {MAX_N}]")
        canon = tuple(sorted(set((int(u), int(v)) for u, v in self.edges)))
        object.__setattr__(self, "edges", canon)
        for u, v in canon:
            if not (1 <= u <= self.n and 1 <= v <= self.n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={self.n}")
            if u == v and not self.allow_loops:
                raise NotADagError(u, f"self-loop at vertex {u}")

    def adjacency(self):
        adj = [[] for _ in range(self.n + 1)]
        for u, v in self.edges:
            adj[u].append(v)
        return adj


class ClosureMatrix:
    """Strict-order bit matrix: bit (a, b) set iff a precedes b (a != b)."""

    def __init__(self, n, bits=None):
        if n < 0 or n > MAX_N:
            raise ValueError(f"element count {n} outside [0, {MAX_N}]")
        self.n = n
        if bits is None:
            bits = np.zeros((n, n), dtype=bool)
        self.bits = np.asarray(bits, dtype=bool)
        if self.bits.shape != (n, n):
            raise ValueError("closure matrix shape mismatch")

    def has(self, a, b):
        return bool(self.bits[a - 1, b - 1])

    def strict_pairs(self):
        for a, b in np.argwhere(self.bits):
            yield (int(a) + 1, int(b) + 1)

    def edge_count(self):
        return int(self.bits.sum())

    def __eq__(self, other):
        return (
            isinstance(other, ClosureMatrix)
            and self.n == other.n
            and bool(np.array_equal(self.bits, other.bits))
        )


@dataclass
class PosetValidation:
    ok: bool
    axiom: str = None
    witness: tuple = None

    def __bool__(self):
        return self.ok

    def describe(self):
        if self.ok:
            return "ok"
        return f"{self.axiom} violation at {self.witness}"


@dataclass
class AntichainDecomposition:
    """Elements split into height levels; each level is an antichain."""

    levels: list               # levels[h-1] = ascending labels of height h
    height_of: list            # 1-indexed by label
    rank_of: list              # 1-indexed by label; rank within its level
    H: int


@dataclass
class LinearExtension:
    order: list                # order[k-1] = label at position k
    position_of: list          # 1-indexed by label


def topological_order(g: Digraph):
    """Kahn's algorithm, smallest label first; raises NotADagError."""
    adj = g.adjacency()
    indeg = [0] * (g.n + 1)
    for u, v in g.edges:
        if u == v:
            raise NotADagError(u, f"self-loop at vertex {u}")
        indeg[v] += 1
    heap = [v for v in range(1, g.n + 1) if indeg[v] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        v = heapq.heappop(heap)
        order.append(v)
        for w in adj[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                heapq.heappush(heap, w)
    if len(order) != g.n:
        stuck = min(v for v in range(1, g.n + 1) if indeg[v] > 0)
        raise NotADagError(stuck)
    return order


def _pack_rows(mat):
    n = mat.shape[0]
    words = max(1, -(-n // 64))
    padded = np.zeros((n, words * 64), dtype=bool)
    padded[:, :n] = mat
    packed = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view(np.uint64)


def _unpack_rows(packed, n):
    raw = packed.view(np.uint8)
    bits = np.unpackbits(raw, axis=1, bitorder="little")
    return bits[:, :n].astype(bool)


def transitive_closure(g: Digraph) -> ClosureMatrix:
    """Closure of an acyclic edge set: bit (a,b) iff a path a -> b exists."""
    order = topological_order(g)
    n = g.n
    if n == 0:
        return ClosureMatrix(0)
    adj = np.zeros((n, n), dtype=bool)
    for u, v in g.edges:
        adj[u - 1, v - 1] = True
    adj_packed = _pack_rows(adj)
    reach = adj_packed.copy()
    children = g.adjacency()
    for v in reversed(order):
        kids = children[v]
        if kids:
            idx = np.array(kids, dtype=np.int64) - 1
            reach[v - 1] = np.bitwise_or.reduce(reach[idx], axis=0) | adj_packed[v - 1]
    return ClosureMatrix(n, _unpack_rows(reach, n))


def validate_poset(c: ClosureMatrix) -> PosetValidation:
    """Check the strict-order axioms on the matrix; first violation wins."""
    bits = c.bits
    diag = np.flatnonzero(np.diagonal(bits))
    if diag.size:
        a = int(diag[0]) + 1
        return PosetValidation(False, "antisymmetry", (a, a))
    sym = bits & bits.T
    if sym.any():
        a, b = np.argwhere(sym)[0]
        return PosetValidation(False, "antisymmetry", (int(a) + 1, int(b) + 1))
    if c.n:
        f = bits.astype(np.float32)
        composed = (f @ f) > 0.5
        missing = composed & ~bits
        if missing.any():
            a, cc = np.argwhere(missing)[0]
            mids = np.flatnonzero(bits[a] & bits[:, cc])
            b = int(mids[0]) + 1
            return PosetValidation(False, "transitivity", (int(a) + 1, b, int(cc) + 1))
    return PosetValidation(True)


def ensure_valid_poset(c: ClosureMatrix):
    v = validate_poset(c)
    if not v:
        raise InvalidPosetError(v.describe())
    return c


def transitive_reduction(c: ClosureMatrix) -> Digraph:
    """Cover edges: (a,b) kept iff no intermediate element sits between."""
    ensure_valid_poset(c)
    bits = c.bits
    if c.n == 0:
        return Digraph(0, ())
    f = bits.astype(np.float32)
    composed = (f @ f) > 0.5
    red = bits & ~composed
    edges = tuple((int(a) + 1, int(b) + 1) for a, b in np.argwhere(red))
    return Digraph(c.n, edges)


def height_decomposition(c: ClosureMatrix, validated=False) -> AntichainDecomposition:
    """Partition by height: sources at level 1, then longest-path depth."""
    if not validated:
        ensure_valid_poset(c)
    n = c.n
    bits = c.bits
    h = np.zeros(n, dtype=np.int64)
    # In a closure, predecessor sets strictly grow along edges, so sorting
    # by in-degree is a topological order.
    topo = np.argsort(bits.sum(axis=0), kind="stable")
    for v in topo:
        preds = h[bits[:, v]]
        h[v] = (preds.max() if preds.size else 0) + 1
    H = int(h.max()) if n else 0
    levels = []
    height_of = [0] * (n + 1)
    rank_of = [0] * (n + 1)
    for lv in range(1, H + 1):
        members = [int(x) + 1 for x in np.flatnonzero(h == lv)]
        for r, lab in enumerate(members, start=1):
            height_of[lab] = lv
            rank_of[lab] = r
        levels.append(members)
    return AntichainDecomposition(levels, height_of, rank_of, H)


def linear_extension(d: AntichainDecomposition) -> LinearExtension:
    """Level by level; ascending label inside a level (fixed tie-break)."""
    order = [lab for level in d.levels for lab in level]
    position_of = [0] * (len(order) + 1)
    for pos, lab in enumerate(order, start=1):
        position_of[lab] = pos
    return LinearExtension(order, position_of)
