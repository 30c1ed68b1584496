"""Balanced biclique extraction from dense bipartite subgraphs.

The extractor is best-effort: degree pruning to the q-core, then a greedy
sweep that keeps the highest-degree rows whose common neighbourhood stays
big enough, wrapped in a binary search for the largest workable q and one
expansion pass that regrows both sides to the maximal biclique containing
the seed.  On instances below `C_MIN` vertices an exhaustive subset search
(capped at small q) runs as well and the better certificate wins.

Correctness never depends on extraction quality: every certificate is
checkable with verify_biclique, and any single edge yields a K_{1,1}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np

from .bitseq import lg

C_MIN = 64              # below this many vertices, exhaustive search joins in
C_Q = 0.25              # quality floor constant for the q target
_EXH_Q_CAP = 4
_EXH_COMBO_CAP = 250_000


class NoBicliqueError(ValueError):
    pass


@dataclass(frozen=True)
class BicliqueCertificate:
    left: tuple
    right: tuple

    @property
    def tau(self):
        return len(self.left) + len(self.right)


def q_target(n_vertices, n_edges, c_q=C_Q):
    """Guaranteed-extractable side size for a graph this dense.

    Tracks lg|V| / lg(|V|^2 / |E|) with the denominator clamped below at 1;
    never less than 1 when any edge exists.
    """
    if n_edges <= 0 or n_vertices <= 0:
        return 0
    ratio = (n_vertices * n_vertices) / n_edges
    denom = max(1, math.ceil(math.log2(ratio)) if ratio > 1 else 0)
    return max(1, int(c_q * lg(n_vertices) / denom))


def verify_biclique(cert: BicliqueCertificate, edges):
    """All cross pairs present and the two sides disjoint."""
    edge_set = set(edges)
    if set(cert.left) & set(cert.right):
        return False
    if len(set(cert.left)) != len(cert.left) or len(set(cert.right)) != len(cert.right):
        return False
    return all((l, r) in edge_set for l in cert.left for r in cert.right)


def _attempt(adj, q):
    """Greedy K_{q,q}: prune to the q-core, then absorb rows by degree."""
    rows = np.arange(adj.shape[0])
    cols = np.arange(adj.shape[1])
    m = adj
    while True:
        if m.shape[0] < q or m.shape[1] < q:
            return None
        rmask = m.sum(axis=1) >= q
        cmask = m.sum(axis=0) >= q
        if rmask.all() and cmask.all():
            break
        m = m[rmask][:, cmask]
        rows = rows[rmask]
        cols = cols[cmask]
    if m.shape[0] < q or m.shape[1] < q:
        return None
    order = np.argsort(-m.sum(axis=1), kind="stable")
    picked = []
    rmask = np.ones(m.shape[1], dtype=bool)
    for ri in order:
        cand = rmask & m[ri]
        if int(cand.sum()) >= q:
            picked.append(ri)
            rmask = cand
            if len(picked) == q:
                return rows[np.sort(np.array(picked))], cols[np.flatnonzero(rmask)[:q]]
    return None


def _expand(adj, rows, cols):
    """Regrow the seed to the maximal biclique around it, rebalanced."""
    q = min(len(rows), len(cols))
    for _ in range(3):
        cmask = adj[rows].all(axis=0)
        if not cmask.any():
            break
        cset = np.flatnonzero(cmask)
        rmask = adj[:, cset].all(axis=1)
        rset = np.flatnonzero(rmask)
        q2 = min(len(rset), len(cset))
        if q2 <= q:
            break
        q = q2
        rows, cols = rset[:q], cset[:q]
    return rows[:q], cols[:q]


def _exhaustive(adj, q_cap):
    nr, nc = adj.shape
    transposed = nr > nc
    m = adj.T if transposed else adj
    side = m.shape[0]
    for q in range(min(side, m.shape[1], q_cap), 0, -1):
        if comb(side, q) > _EXH_COMBO_CAP:
            continue
        for subset in combinations(range(side), q):
            common = m[subset[0]].copy()
            for s in subset[1:]:
                common &= m[s]
            if int(common.sum()) >= q:
                a = np.array(subset)
                b = np.flatnonzero(common)[:q]
                return (b, a) if transposed else (a, b)
    return None


def best_effort_biclique(adj, q_floor=1):
    """Largest balanced biclique this extractor can find in a boolean
    bipartite adjacency matrix; returns (row indices, col indices) or None
    when the matrix has no edges."""
    adj = np.asarray(adj, dtype=bool)
    if not adj.any():
        return None
    best = None
    lo, hi = 1, min(adj.shape)
    while lo <= hi:
        mid = (lo + hi) // 2
        got = _attempt(adj, mid)
        if got is not None:
            best = got
            lo = mid + 1
        else:
            hi = mid - 1
    if best is not None:
        best = _expand(adj, *best)
    if adj.shape[0] + adj.shape[1] < C_MIN:
        exh = _exhaustive(adj, _EXH_Q_CAP)
        if exh is not None and (best is None or len(exh[0]) > len(best[0])):
            best = exh
    if best is None:
        # any edge is a K_{1,1}
        r, c = np.argwhere(adj)[0]
        best = (np.array([r]), np.array([c]))
    q = min(len(best[0]), len(best[1]))
    return np.sort(best[0][:q]), np.sort(best[1][:q])


def find_balanced_biclique(lower, upper, edges, qt) -> BicliqueCertificate:
    """Extract a balanced biclique across two antichains.

    `edges` holds (lower element, upper element) pairs.  The result always
    verifies; its side size aims for `qt` but degrades gracefully down to a
    single edge when the graph is too sparse for the target.
    """
    edges = list(edges)
    if not edges:
        raise NoBicliqueError("cannot extract a biclique from an empty edge set")
    li = {lab: k for k, lab in enumerate(lower)}
    ui = {lab: k for k, lab in enumerate(upper)}
    adj = np.zeros((len(lower), len(upper)), dtype=bool)
    for l, r in edges:
        if l not in li or r not in ui:
            raise ValueError(f"edge ({l}, {r}) does not run from lower to upper")
        adj[li[l], ui[r]] = True
    rows, cols = best_effort_biclique(adj, qt)
    return BicliqueCertificate(
        tuple(lower[int(i)] for i in rows),
        tuple(upper[int(j)] for j in cols),
    )
