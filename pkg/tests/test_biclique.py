from itertools import combinations

import numpy as np
import pytest

from sposet.biclique import (
    BicliqueCertificate,
    NoBicliqueError,
    best_effort_biclique,
    find_balanced_biclique,
    q_target,
    verify_biclique,
)
from sposet.gen import SplitMix64


def random_bipartite(nl, nr, p, seed):
    rng = SplitMix64(seed)
    thresh = int(p * 2.0**64)
    lower = list(range(1, nl + 1))
    upper = list(range(101, 101 + nr))
    edges = [
        (l, r)
        for l in lower
        for r in upper
        if rng.next_u64() < thresh
    ]
    return lower, upper, edges


def exhaustive_best_q(lower, upper, edges, q_cap):
    edge_set = set(edges)
    small, big, flip = (lower, upper, False) if len(lower) <= len(upper) else (upper, lower, True)
    for q in range(min(len(small), len(big), q_cap), 0, -1):
        for sub in combinations(small, q):
            if not flip:
                common = [r for r in big if all((l, r) in edge_set for l in sub)]
            else:
                common = [l for l in big if all((l, r) in edge_set for r in sub)]
            if len(common) >= q:
                return q
    return 0


def test_complete_k33():
    lower, upper = [1, 2, 3], [4, 5, 6]
    edges = [(l, r) for l in lower for r in upper]
    cert = find_balanced_biclique(lower, upper, edges, 3)
    assert cert.tau == 6
    assert verify_biclique(cert, edges)


def test_single_edge():
    cert = find_balanced_biclique([1], [2], [(1, 2)], 1)
    assert cert.tau == 2
    assert cert.left == (1,) and cert.right == (2,)


def test_empty_edges_raises():
    with pytest.raises(NoBicliqueError):
        find_balanced_biclique([1], [2], [], 1)


def test_verify_rejects_missing_edge():
    edges = [(1, 3), (1, 4), (2, 3)]
    cert = BicliqueCertificate((1, 2), (3, 4))
    assert not verify_biclique(cert, edges)
    assert verify_biclique(BicliqueCertificate((1,), (3,)), edges)


def test_verify_rejects_overlapping_sides():
    assert not verify_biclique(BicliqueCertificate((1,), (1,)), [(1, 1)])


def test_fuzzed_certificates_always_verify():
    for seed in range(60):
        nl = 3 + seed % 14
        nr = 3 + (seed * 7) % 17
        p = 0.15 + (seed % 5) * 0.2
        lower, upper, edges = random_bipartite(nl, nr, p, seed)
        if not edges:
            continue
        cert = find_balanced_biclique(lower, upper, edges, 2)
        assert verify_biclique(cert, edges)
        assert len(cert.left) == len(cert.right) >= 1


def test_determinism():
    lower, upper, edges = random_bipartite(12, 15, 0.5, 77)
    a = find_balanced_biclique(lower, upper, edges, 2)
    b = find_balanced_biclique(lower, upper, edges, 2)
    assert a == b


def test_matches_exhaustive_optimum_small():
    # dense small instances: returned size must reach the exhaustive optimum
    # capped at q = 3
    for seed in range(25):
        lower, upper, edges = random_bipartite(10, 12, 0.55, seed + 500)
        if not edges:
            continue
        opt = exhaustive_best_q(lower, upper, edges, 3)
        cert = find_balanced_biclique(lower, upper, edges, max(1, opt))
        assert len(cert.left) >= opt
        assert verify_biclique(cert, edges)


def test_quality_floor_on_dense_instances():
    # instances satisfying the density precondition must reach the q target
    for seed in range(15):
        nl = nr = 40
        lower, upper, edges = random_bipartite(nl, nr, 0.6, seed + 900)
        nv = nl + nr
        ne = len(edges)
        if ne < 8 * nv**1.5:
            continue
        qt = q_target(nv, ne)
        cert = find_balanced_biclique(lower, upper, edges, qt)
        assert len(cert.left) >= qt
        assert verify_biclique(cert, edges)


def test_q_target_formula():
    assert q_target(100, 0) == 0
    assert q_target(0, 10) == 0
    # lg(100) = 7; ratio 10000/5000 = 2 -> denom 1 -> floor(0.25 * 7) = 1
    assert q_target(100, 5000) == 1
    # very sparse: denominator grows, target floors at 1
    assert q_target(100, 9) == 1


def test_best_effort_on_matrix_no_edges():
    assert best_effort_biclique(np.zeros((3, 3), dtype=bool)) is None


def test_best_effort_finds_planted_biclique():
    rng = SplitMix64(4)
    adj = np.zeros((30, 30), dtype=bool)
    # plant K_{6,6} inside noise
    rows = [2, 5, 9, 14, 20, 27]
    cols = [1, 3, 8, 13, 22, 29]
    for r in rows:
        for c in cols:
            adj[r, c] = True
    for _ in range(90):
        adj[rng.next_u64() % 30, rng.next_u64() % 30] = True
    r, c = best_effort_biclique(adj)
    assert len(r) == len(c) >= 4
    assert adj[np.ix_(r, c)].all()
