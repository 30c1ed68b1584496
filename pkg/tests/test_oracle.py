import numpy as np
import pytest

from sposet import opcount
from sposet.gen import (
    antichain,
    chain,
    oracle_precedes,
    random_dag,
    random_digraph,
    random_layered_poset,
    random_transitive_relation,
    reachability_matrix,
)
from sposet.oracle import (
    build_reachability,
    build_reduction_index,
    build_succinct_poset,
    build_transitive_relation,
    precedes,
    reachable,
    reduction_edge,
    relation_query,
    space_report,
    strongly_connected_components,
)
from sposet.order import (
    Digraph,
    InvalidPosetError,
    transitive_closure,
    transitive_reduction,
)


def assert_matches_closure(s, c):
    for a in range(1, c.n + 1):
        for b in range(1, c.n + 1):
            assert precedes(s, a, b) == oracle_precedes(c, a, b), (a, b)


def test_single_element():
    s = build_succinct_poset(antichain(1))
    assert precedes(s, 1, 1) is True


def test_chain_of_three():
    s = build_succinct_poset(transitive_closure(Digraph(3, ((1, 2), (2, 3)))))
    assert precedes(s, 1, 3) is True
    assert precedes(s, 3, 1) is False
    assert precedes(s, 2, 2) is True


def test_two_element_antichain():
    s = build_succinct_poset(antichain(2))
    assert precedes(s, 1, 2) is False
    assert precedes(s, 2, 1) is False


def test_invalid_closure_rejected():
    bits = np.zeros((3, 3), dtype=bool)
    bits[0, 1] = bits[1, 2] = True      # missing (1, 3)
    from sposet.order import ClosureMatrix

    with pytest.raises(InvalidPosetError):
        build_succinct_poset(ClosureMatrix(3, bits))


def test_random_posets_exhaustive():
    for seed in range(25):
        c = transitive_closure(random_dag(48, 0.08, seed))
        assert_matches_closure(build_succinct_poset(c), c)
    for seed in range(12):
        c = random_layered_poset(96, seed)
        assert_matches_closure(build_succinct_poset(c), c)


def test_partial_order_properties_of_precedes():
    for seed in range(6):
        c = random_layered_poset(64, seed + 50)
        s = build_succinct_poset(c)
        for a in range(1, 65):
            assert precedes(s, a, a)
        for a in range(1, 65):
            for b in range(a + 1, 65):
                if precedes(s, a, b) and precedes(s, b, a):
                    raise AssertionError(f"antisymmetry broken at ({a}, {b})")
        rng_triples = [(a, b, cc) for a in range(1, 65, 7)
                       for b in range(2, 65, 5) for cc in range(3, 65, 9)]
        for a, b, cc in rng_triples:
            if precedes(s, a, b) and precedes(s, b, cc):
                assert precedes(s, a, cc)


def test_precedes_range_errors():
    s = build_succinct_poset(chain(3))
    with pytest.raises(IndexError):
        precedes(s, 0, 1)
    with pytest.raises(IndexError):
        precedes(s, 1, 4)


# -- strongly connected components / reachability ---------------------------


def test_scc_two_cycle():
    comps = strongly_connected_components(Digraph(2, ((1, 2), (2, 1)), allow_loops=True))
    assert comps == [[1, 2]]


def test_scc_chain():
    comps = strongly_connected_components(Digraph(3, ((1, 2), (2, 3))))
    assert sorted(comps) == [[1], [2], [3]]


def test_reachability_two_cycle():
    o = build_reachability(Digraph(2, ((1, 2), (2, 1)), allow_loops=True))
    assert o.n_components == 1
    assert reachable(o, 1, 2) and reachable(o, 2, 1)


def test_reachability_edgeless():
    o = build_reachability(Digraph(4, ()))
    for a in range(1, 5):
        for b in range(1, 5):
            assert reachable(o, a, b) == (a == b)


def test_reachability_path():
    o = build_reachability(Digraph(4, ((1, 2), (2, 3), (3, 4))))
    assert reachable(o, 1, 4)
    assert not reachable(o, 4, 1)


def test_reachability_fuzz_matches_bfs():
    for seed in range(40):
        for p in (0.02, 0.1):
            g = random_digraph(48, p, seed * 2 + int(p * 100))
            o = build_reachability(g)
            m = reachability_matrix(g)
            for a in range(1, 49):
                for b in range(1, 49):
                    assert reachable(o, a, b) == bool(m[a - 1, b - 1]), (seed, p, a, b)


def test_reachable_agrees_with_precedes_on_closed_dag():
    c = transitive_closure(random_dag(32, 0.1, 5))
    edges = tuple(c.strict_pairs())
    o = build_reachability(Digraph(32, edges))
    s = build_succinct_poset(c)
    assert o.n_components == 32
    for a in range(1, 33):
        for b in range(1, 33):
            assert reachable(o, a, b) == precedes(s, a, b)


# -- transitive relations ----------------------------------------------------


def test_relation_single_self_pair():
    o = build_transitive_relation({(1, 1)}, 2)
    assert relation_query(o, 1, 1) is True
    assert relation_query(o, 2, 2) is False
    assert relation_query(o, 1, 2) is False


def test_relation_full():
    pairs = {(a, b) for a in range(1, 4) for b in range(1, 4)}
    o = build_transitive_relation(pairs, 3)
    for a in range(1, 4):
        for b in range(1, 4):
            assert relation_query(o, a, b)


def test_relation_rejects_nontransitive():
    with pytest.raises(InvalidPosetError):
        build_transitive_relation({(1, 2), (2, 3)}, 3)


def test_relation_fuzz_matches_membership():
    for seed in range(30):
        rel = random_transitive_relation(40, 0.04, seed)
        o = build_transitive_relation(rel, 40)
        for a in range(1, 41):
            for b in range(1, 41):
                assert relation_query(o, a, b) == bool(rel[a - 1, b - 1]), (seed, a, b)


# -- reduction index ----------------------------------------------------------


def test_reduction_index_chain():
    idx = build_reduction_index(Digraph(3, ((1, 2), (2, 3))))
    assert reduction_edge(idx, 1, 2) is True
    assert reduction_edge(idx, 1, 3) is False
    assert reduction_edge(idx, 2, 3) is True


def test_reduction_index_empty():
    idx = build_reduction_index(Digraph(3, ()))
    for a in range(1, 4):
        for b in range(1, 4):
            assert reduction_edge(idx, a, b) is False


def test_reduction_index_rejects_closed_edges():
    with pytest.raises(InvalidPosetError):
        build_reduction_index(Digraph(3, ((1, 2), (2, 3), (1, 3))))


def test_reduction_index_fuzz():
    for seed in range(30):
        c = transitive_closure(random_dag(40, 0.1, seed + 11))
        red = transitive_reduction(c)
        idx = build_reduction_index(red)
        edge_set = set(red.edges)
        for a in range(1, 41):
            for b in range(1, 41):
                assert reduction_edge(idx, a, b) == ((a, b) in edge_set)


# -- instrumentation and reports ----------------------------------------------


def test_precedes_op_budget():
    c = random_layered_poset(128, 3)
    s = build_succinct_poset(c)
    worst = 0
    for a in range(1, 129):
        for b in range(1, 129):
            if a == b:
                continue
            opcount.reset()
            precedes(s, a, b)
            worst = max(worst, opcount.snapshot())
    assert worst <= 32


def test_space_reports():
    s = build_succinct_poset(random_layered_poset(128, 7))
    rep = space_report(s)
    assert rep["total_bits"] > 0
    assert rep["triangular_bits"] == 128 * 127 / 2
    g = random_digraph(32, 0.05, 1)
    rep2 = space_report(build_reachability(g))
    assert rep2["total_bits"] >= rep2["poset"]["total_bits"]
    rel = random_transitive_relation(24, 0.05, 2)
    rep3 = space_report(build_transitive_relation(rel, 24))
    assert rep3["total_bits"] >= rep3["reachability"]["total_bits"]
    idx = build_reduction_index(transitive_reduction(chain(16)))
    assert space_report(idx)["total_bits"] > 0
