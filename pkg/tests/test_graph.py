import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynrank.graph import (BatchUpdate, BatchValidationError, GraphError, apply_batch, build_graph,
                           union_out_neighbors)

from oracles import random_graph


def test_single_edge_gains_self_loops():
    g = build_graph([(0, 1)], 2, add_self_loops=True)
    assert g.out(0).tolist() == [0, 1]
    assert g.out(1).tolist() == [1]
    assert g.num_edges == 3


def test_lone_vertex():
    g = build_graph([], 1, add_self_loops=True)
    assert g.out(0).tolist() == [0]
    assert g.num_edges == 1


def test_duplicates_dropped():
    g = build_graph([(0, 1), (1, 0), (0, 1)], 2, add_self_loops=False)
    assert g.num_edges == 2
    assert g.out(0).tolist() == [1]


def test_out_of_range_rejected():
    with pytest.raises(GraphError, match="out of range"):
        build_graph([(0, 5)], 3)


def test_snapshot_arrays_are_read_only():
    g = build_graph([(0, 1)], 2)
    with pytest.raises(ValueError):
        g.out_targets[0] = 1


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 60), st.lists(st.tuples(st.integers(0, 59), st.integers(0, 59)), max_size=400),
       st.booleans())
def test_dual_consistency(n, raw, loops):
    edges = [(u % n, v % n) for u, v in raw]
    g = build_graph(edges, n, add_self_loops=loops)
    expected = set(edges) | ({(v, v) for v in range(n)} if loops else set())
    out_pairs = {(u, int(v)) for u in range(n) for v in g.out(u)}
    in_pairs = {(int(u), v) for v in range(n) for u in g.in_(v)}
    assert out_pairs == expected == in_pairs
    for u in range(n):
        assert np.all(np.diff(g.out(u)) > 0)
        assert np.all(np.diff(g.in_(u)) > 0)
        assert g.out_degree[u] == g.out(u).size
    assert g.out_degree.sum() == g.num_edges
    if loops:
        assert g.out_degree.min() >= 1


def test_dual_consistency_large_random():
    g = random_graph(7, 1000, 10)
    n = g.num_vertices
    # rebuild in-adjacency by brute force from out-adjacency
    rebuilt = [[] for _ in range(n)]
    for u in range(n):
        for v in g.out(u).tolist():
            rebuilt[v].append(u)
    for v in range(n):
        assert sorted(rebuilt[v]) == g.in_(v).tolist()


def small_example_prev(self_loops=False):
    return build_graph([(7, 8), (10, 11)], 14, add_self_loops=self_loops)


def test_apply_batch_small_example():
    prev = small_example_prev(self_loops=True)
    curr = apply_batch(prev, BatchUpdate(deletions=[(10, 11)], insertions=[(7, 9)]))
    non_loops = {tuple(e) for e in curr.edges().tolist() if e[0] != e[1]}
    assert non_loops == {(7, 8), (7, 9)}
    assert curr.has_all_self_loops()
    # prev untouched
    assert prev.has_edge(10, 11) and not prev.has_edge(7, 9)


def test_empty_batch_is_identity():
    g = random_graph(1, 50, 3)
    assert apply_batch(g, BatchUpdate()).same_structure(g)


def test_delete_then_reinsert_roundtrip():
    g = random_graph(2, 50, 3)
    e = tuple(next(x for x in g.edges().tolist() if x[0] != x[1]))
    g1 = apply_batch(g, BatchUpdate(deletions=[e]))
    g2 = apply_batch(g1, BatchUpdate(insertions=[e]))
    assert g2.same_structure(g)
    assert not g1.same_structure(g)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_inverse_batch_restores_edges(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(seed, 30, 3)
    edges = [tuple(e) for e in g.edges().tolist() if e[0] != e[1]]
    k = int(rng.integers(0, len(edges) + 1))
    dels = [edges[i] for i in rng.choice(len(edges), size=k, replace=False)]
    ins = set()
    while len(ins) < 5:
        u, v = (int(x) for x in rng.integers(0, 30, 2))
        if u != v and not g.has_edge(u, v):
            ins.add((u, v))
    batch = BatchUpdate(dels, sorted(ins))
    g1 = apply_batch(g, batch)
    assert apply_batch(g1, batch.inverse()).same_structure(g)


@pytest.mark.parametrize("batch, msg", [
    (BatchUpdate(deletions=[(0, 2)]), "not in the graph"),
    (BatchUpdate(insertions=[(0, 1)]), "already in the graph"),
    (BatchUpdate(deletions=[(1, 1)]), "self-loops"),
    (BatchUpdate(deletions=[(0, 1)], insertions=[(0, 1)]), "both deleted and inserted"),
    (BatchUpdate(insertions=[(0, 9)]), "outside the fixed vertex set"),
    (BatchUpdate(insertions=[(1, 0), (1, 0)]), "duplicate"),
])
def test_batch_validation(batch, msg):
    g = build_graph([(0, 1), (1, 2)], 3)
    with pytest.raises(BatchValidationError, match=msg) as info:
        apply_batch(g, batch)
    assert info.value.offending


def test_union_out_neighbors():
    prev = build_graph([(7, 8)], 14)
    curr = build_graph([(7, 8), (7, 9)], 14)
    assert union_out_neighbors(prev, curr, 7).tolist() == [7, 8, 9]
    assert union_out_neighbors(prev, prev, 7).tolist() == prev.out(7).tolist()
    assert union_out_neighbors(prev, curr, 3).tolist() == [3]
