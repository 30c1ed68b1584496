"""Assembled oracles: succinct poset, digraph reachability, transitive
relations, and the correctness-only transitive-reduction edge index.

The poset oracle is the two-stage pipeline: height decomposition, flatten
with gamma = lg n, then the dense/sparse compression of the residual flat
poset.  A precedence query resolves inside one residual antichain via the
flatten index and across antichains via the compressed flat poset; both
paths are a bounded number of primitive steps.

Reachability reduces to the poset oracle over the condensation; transitive
relations add one reflexivity bit per element over the induced quasiorder.
The reduction-edge index reuses only the always-exact merge machinery
(gamma = 1), so its answers are exact but no succinctness is claimed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import opcount
from .bitseq import build_bitseq, lg
from .compress import CompressOutput, compress_flat, query_flat
from .flatten import FlattenAnswer, FlattenOutput, flatten, flatten_query
from .order import (
    ClosureMatrix,
    Digraph,
    InvalidPosetError,
    ensure_valid_poset,
    height_decomposition,
    linear_extension,
    transitive_closure,
    transitive_reduction,
)


@dataclass
class SuccinctPoset:
    n: int
    gamma: int
    flat: FlattenOutput
    dense: CompressOutput

    def size_report(self):
        comp = self.dense.size_report()
        flat_bits = self.flat.merged_bits.encoded_size_bits + 128 + self.flat.aux_bits
        total = flat_bits + comp["total_bits"]
        return {
            "n": self.n,
            "gamma": self.gamma,
            "flatten_raw_bits": self.flat.raw_bits,
            "flatten_bits": flat_bits,
            "compress": comp,
            "total_bits": total,
            "quarter_square_bits": self.n * self.n / 4,
            "triangular_bits": self.n * (self.n - 1) / 2,
            "ratio_quarter_square": total / (self.n * self.n / 4) if self.n > 1 else None,
        }


def build_succinct_poset(c: ClosureMatrix) -> SuccinctPoset:
    """Validate, decompose by height, flatten with gamma = lg n, compress."""
    if c.n < 1:
        raise ValueError("poset must have at least one element")
    ensure_valid_poset(c)
    d = height_decomposition(c, validated=True)
    gamma = max(1, lg(c.n))
    f = flatten(d, c, gamma)
    dense = compress_flat(f.residual_levels, c)
    return SuccinctPoset(c.n, gamma, f, dense)


def precedes(s: SuccinctPoset, a, b):
    """Reflexive precedence query; constant primitive operations."""
    if not (1 <= a <= s.n and 1 <= b <= s.n):
        raise IndexError(f"element out of range [1, {s.n}]")
    if a == b:
        return True
    ans = flatten_query(s.flat, a, b)
    if ans is FlattenAnswer.DIFFERENT_ANTICHAINS:
        return query_flat(s.dense, a, b)
    return ans is FlattenAnswer.YES


# -- reachability ----------------------------------------------------------


def strongly_connected_components(g: Digraph):
    """Iterative lowlink SCC computation; components come out in reverse
    topological order of the condensation."""
    n = g.n
    adj = g.adjacency()
    index = [0] * (n + 1)
    low = [0] * (n + 1)
    on_stack = [False] * (n + 1)
    stack = []
    comps = []
    counter = 1
    for root in range(1, n + 1):
        if index[root]:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            if pi < len(adj[v]):
                work[-1] = (v, pi + 1)
                w = adj[v][pi]
                if not index[w]:
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
            else:
                work.pop()
                if work:
                    u = work[-1][0]
                    low[u] = min(low[u], low[v])
                if low[v] == index[v]:
                    scc = []
                    while True:
                        w = stack.pop()
                        on_stack[w] = False
                        scc.append(w)
                        if w == v:
                            break
                    comps.append(sorted(scc))
    return comps


@dataclass
class ReachabilityOracle:
    n: int
    component_of: list
    poset: SuccinctPoset

    @property
    def n_components(self):
        return self.poset.n

    def size_report(self):
        inner = self.poset.size_report()
        comp_bits = self.n * max(1, self.poset.n.bit_length())
        total = inner["total_bits"] + comp_bits
        return {
            "n": self.n,
            "components": self.poset.n,
            "component_map_bits": comp_bits,
            "poset": inner,
            "total_bits": total,
            "quarter_square_bits": self.n * self.n / 4,
            "triangular_bits": self.n * (self.n - 1) / 2,
        }


def build_reachability(g: Digraph) -> ReachabilityOracle:
    """Contract strongly connected components, close the condensation, and
    put the poset oracle over the component DAG."""
    if g.n < 1:
        raise ValueError("graph must have at least one vertex")
    comps = strongly_connected_components(g)
    comps.sort(key=lambda scc: scc[0])
    component_of = [0] * (g.n + 1)
    for cid, scc in enumerate(comps, start=1):
        for v in scc:
            component_of[v] = cid
    cedges = set()
    for u, v in g.edges:
        cu, cv = component_of[u], component_of[v]
        if cu != cv:
            cedges.add((cu, cv))
    cond = Digraph(len(comps), tuple(sorted(cedges)))
    closure = transitive_closure(cond)
    poset = build_succinct_poset(closure)
    return ReachabilityOracle(g.n, component_of, poset)


def reachable(o: ReachabilityOracle, a, b):
    """Same component, or the component poset says the source precedes."""
    if not (1 <= a <= o.n and 1 <= b <= o.n):
        raise IndexError(f"vertex out of range [1, {o.n}]")
    opcount.bump(2)
    ca, cb = o.component_of[a], o.component_of[b]
    if ca == cb:
        return True
    return precedes(o.poset, ca, cb)


# -- transitive binary relations -------------------------------------------


@dataclass
class TransitiveRelationOracle:
    n: int
    reflexive_bits: object
    quasi: ReachabilityOracle

    def size_report(self):
        inner = self.quasi.size_report()
        refl = self.reflexive_bits.encoded_size_bits + 128
        return {
            "n": self.n,
            "reflexive_bits": refl,
            "reachability": inner,
            "total_bits": inner["total_bits"] + refl,
        }


def _relation_matrix(rel, n):
    mat = np.zeros((n, n), dtype=bool)
    if isinstance(rel, np.ndarray):
        mat[:, :] = rel.astype(bool)
    else:
        for a, b in rel:
            if not (1 <= a <= n and 1 <= b <= n):
                raise ValueError(f"pair ({a}, {b}) out of range for n={n}")
            mat[a - 1, b - 1] = True
    return mat


def build_transitive_relation(rel, n) -> TransitiveRelationOracle:
    """Reflexivity bits plus a reachability oracle over the distinct pairs.

    The input must already be transitive; a violating triple is reported."""
    if n < 1:
        raise ValueError("relation must cover at least one element")
    mat = _relation_matrix(rel, n)
    implied = (mat.astype(np.float32) @ mat.astype(np.float32)) > 0.5
    missing = implied & ~mat
    if missing.any():
        a, c = np.argwhere(missing)[0]
        b = int(np.flatnonzero(mat[a] & mat[:, c])[0]) + 1
        raise InvalidPosetError(
            f"relation is not transitive: ({int(a) + 1}, {b}) and "
            f"({b}, {int(c) + 1}) present but ({int(a) + 1}, {int(c) + 1}) missing")
    reflexive = build_bitseq(np.diagonal(mat).copy())
    off = mat.copy()
    np.fill_diagonal(off, False)
    edges = tuple((int(u) + 1, int(v) + 1) for u, v in np.argwhere(off))
    quasi = build_reachability(Digraph(n, edges, allow_loops=True))
    return TransitiveRelationOracle(n, reflexive, quasi)


def relation_query(o: TransitiveRelationOracle, a, b):
    """Membership of (a, b); the diagonal is answered by the stored bits."""
    if not (1 <= a <= o.n and 1 <= b <= o.n):
        raise IndexError(f"element out of range [1, {o.n}]")
    if a == b:
        return o.reflexive_bits.access(a) == 1
    return reachable(o.quasi, a, b)


# -- transitive-reduction edge index ----------------------------------------


@dataclass
class ReductionIndex:
    """Exact edge membership for a transitive reduction.

    Built from the merge machinery alone with gamma = 1, so everything ends
    up in one residual antichain and every cross-level pair is one access.
    Space is whatever the edge entropy costs; no succinctness is claimed."""

    n: int
    flat: FlattenOutput

    def size_report(self):
        bits = self.flat.merged_bits.encoded_size_bits + 128 + self.flat.aux_bits
        return {
            "n": self.n,
            "raw_bits": self.flat.raw_bits,
            "total_bits": bits,
            "triangular_bits": self.n * (self.n - 1) / 2,
        }


def build_reduction_index(r: Digraph) -> ReductionIndex:
    """Validate that r is a transitive reduction, then index its edges."""
    if r.n < 1:
        raise ValueError("reduction must have at least one vertex")
    closure = transitive_closure(r)
    canonical = transitive_reduction(closure)
    if set(canonical.edges) != set(r.edges):
        extra = sorted(set(r.edges) - set(canonical.edges))
        raise InvalidPosetError(
            f"input is not a transitive reduction: edge {extra[0]} is implied"
            if extra else "input is not a transitive reduction")
    d = height_decomposition(closure, validated=True)
    er = np.zeros((r.n, r.n), dtype=bool)
    for u, v in r.edges:
        er[u - 1, v - 1] = True
    f = flatten(d, ClosureMatrix(r.n, er), gamma=1)
    return ReductionIndex(r.n, f)


def reduction_edge(idx: ReductionIndex, a, b):
    """Is (a, b) an edge of the stored transitive reduction?"""
    if not (1 <= a <= idx.n and 1 <= b <= idx.n):
        raise IndexError(f"vertex out of range [1, {idx.n}]")
    if a == b:
        return False
    ans = flatten_query(idx.flat, a, b)
    assert ans is not FlattenAnswer.DIFFERENT_ANTICHAINS
    return ans is FlattenAnswer.YES


def space_report(oracle):
    """Uniform entry point for any built oracle's size breakdown."""
    return oracle.size_report()
