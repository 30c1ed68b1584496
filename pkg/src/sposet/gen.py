"""Deterministic instance generators and brute-force oracles.

All randomness comes from splitmix64 so identical parameters reproduce
identical instances on any platform.  The algorithm, written out so other
implementations can match it bit for bit:

    state <- (state + 0x9E3779B97F4A7C15) mod 2^64
    z <- state
    z <- (z xor (z >> 30)) * 0xBF58476D1CE4E5B9 mod 2^64
    z <- (z xor (z >> 27)) * 0x94D049BB133111EB mod 2^64
    output z xor (z >> 31)

Because the state advances by a fixed increment, draw k is a pure function
of (seed, k); the vectorized path exploits that and is bit-identical to
repeated scalar calls.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .order import ClosureMatrix, Digraph, transitive_closure

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    def __init__(self, seed):
        self._state = seed & _MASK
        self._drawn = 0

    def next_u64(self):
        self._drawn += 1
        self._state = (self._state + _GAMMA) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK
        return (z ^ (z >> 31)) & _MASK

    def draw(self, count):
        """count draws as a uint64 array, identical to scalar calls."""
        if count == 0:
            return np.zeros(0, dtype=np.uint64)
        ks = np.arange(1, count + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self._state) + ks * np.uint64(_GAMMA)
            z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
            z = z ^ (z >> np.uint64(31))
        self._state = (self._state + count * _GAMMA) & _MASK
        self._drawn += count
        return z


def _prob_mask(rng, count, p):
    """Boolean array: each entry independently true with probability p."""
    if p <= 0:
        rng.draw(count)
        return np.zeros(count, dtype=bool)
    if p >= 1:
        rng.draw(count)
        return np.ones(count, dtype=bool)
    thresh = np.uint64(int(p * 2.0**64))
    return rng.draw(count) < thresh


@dataclass(frozen=True)
class GenSpec:
    """Reproducible instance description; same spec, same instance."""

    kind: str
    n: int = 0
    p: float = 0.0
    seed: int = 0
    rows: int = 0
    cols: int = 0

    def header(self):
        parts = [f"kind={self.kind}"]
        if self.kind == "grid":
            parts += [f"rows={self.rows}", f"cols={self.cols}"]
        else:
            parts.append(f"n={self.n}")
        if self.kind in ("random_dag", "random_digraph", "random_relation"):
            parts.append(f"p={self.p:g}")
        if self.kind.startswith("random"):
            parts.append(f"seed={self.seed}")
        return "# sposet-gen " + " ".join(parts)


def chain(n) -> ClosureMatrix:
    bits = np.triu(np.ones((n, n), dtype=bool), k=1)
    return ClosureMatrix(n, bits)


def antichain(n) -> ClosureMatrix:
    return ClosureMatrix(n)


def grid(rows, cols) -> ClosureMatrix:
    """Product order on a rows-by-cols grid; label (i,j) -> (i-1)*cols + j."""
    n = rows * cols
    ri = np.arange(n) // cols
    ci = np.arange(n) % cols
    le = (ri[:, None] <= ri[None, :]) & (ci[:, None] <= ci[None, :])
    np.fill_diagonal(le, False)
    return ClosureMatrix(n, le)


def random_dag(n, p, seed) -> Digraph:
    """Each pair (i, j) with i < j gets the edge i -> j with probability p,
    examined in row-major order."""
    rng = SplitMix64(seed)
    iu, ju = np.triu_indices(n, k=1)
    mask = _prob_mask(rng, len(iu), p)
    edges = tuple((int(a) + 1, int(b) + 1) for a, b in zip(iu[mask], ju[mask]))
    return Digraph(n, edges)


def random_layered_poset(n, seed) -> ClosureMatrix:
    """Three stacked layers sized (n//4, n - 2*(n//4), n//4), consecutive
    layers joined independently with probability 1/2 (draw odd = edge),
    then closed transitively.  Mirrors the typical shape of a uniformly
    random poset, which concentrates on three fat antichains."""
    q = n // 4
    sizes = (q, n - 2 * q, q)
    lo = list(range(1, sizes[0] + 1))
    mid = list(range(sizes[0] + 1, sizes[0] + sizes[1] + 1))
    hi = list(range(sizes[0] + sizes[1] + 1, n + 1))
    rng = SplitMix64(seed)
    edges = []
    for lower, upper in ((lo, mid), (mid, hi)):
        draws = rng.draw(len(lower) * len(upper))
        odd = (draws & np.uint64(1)).astype(bool)
        k = 0
        for u in lower:
            for v in upper:
                if odd[k]:
                    edges.append((u, v))
                k += 1
    return transitive_closure(Digraph(n, tuple(edges)))


def random_digraph(n, p, seed) -> Digraph:
    """Every ordered pair, diagonal included, drawn with probability p in
    row-major order; cycles and self-loops are expected."""
    rng = SplitMix64(seed)
    mask = _prob_mask(rng, n * n, p)
    idx = np.flatnonzero(mask)
    edges = tuple((int(k) // n + 1, int(k) % n + 1) for k in idx)
    return Digraph(n, edges, allow_loops=True)


def random_transitive_relation(n, p, seed) -> np.ndarray:
    """Random pairs (diagonal included) closed under composition; returned
    as an n-by-n boolean matrix.  Elements with no self-pair stay
    non-reflexive unless a cycle through them forces one."""
    rng = SplitMix64(seed)
    rel = _prob_mask(rng, n * n, p).reshape(n, n).copy()
    for k in range(n):
        rel |= np.outer(rel[:, k], rel[k, :])
    return rel


def instance(spec: GenSpec):
    if spec.kind == "chain":
        return chain(spec.n)
    if spec.kind == "antichain":
        return antichain(spec.n)
    if spec.kind == "grid":
        return grid(spec.rows, spec.cols)
    if spec.kind == "random_dag":
        return random_dag(spec.n, spec.p, spec.seed)
    if spec.kind == "random_layered":
        return random_layered_poset(spec.n, spec.seed)
    if spec.kind == "random_digraph":
        return random_digraph(spec.n, spec.p, spec.seed)
    if spec.kind == "random_relation":
        return random_transitive_relation(spec.n, spec.p, spec.seed)
    raise ValueError(f"unknown instance kind {spec.kind!r}")


# -- ground-truth oracles --------------------------------------------------


def oracle_precedes(c: ClosureMatrix, a, b):
    """Reflexive precedence straight off the matrix."""
    if a == b:
        return True
    return c.has(a, b)


def bfs_reachable_set(adj, start):
    seen = {start}
    frontier = [start]
    while frontier:
        nxt = []
        for u in frontier:
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    nxt.append(v)
        frontier = nxt
    return seen


def oracle_reachable(g: Digraph, a, b):
    """Breadth-first search; a vertex always reaches itself."""
    if a == b:
        return True
    return b in bfs_reachable_set(g.adjacency(), a)


def reachability_matrix(g: Digraph):
    """Per-vertex BFS matrix with a reflexive diagonal."""
    adj = g.adjacency()
    out = np.zeros((g.n, g.n), dtype=bool)
    for a in range(1, g.n + 1):
        for b in bfs_reachable_set(adj, a):
            out[a - 1, b - 1] = True
    return out


def poset_width(c: ClosureMatrix):
    """Maximum antichain size via Dilworth: n minus a maximum matching in
    the split bipartite comparability graph.  Small n only."""
    n = c.n
    adj = [list(np.flatnonzero(c.bits[u])) for u in range(n)]
    match_r = [-1] * n

    def augment(u, seen):
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                if match_r[v] == -1 or augment(match_r[v], seen):
                    match_r[v] = u
                    return True
        return False

    matched = 0
    for u in range(n):
        if augment(u, [False] * n):
            matched += 1
    return n - matched
