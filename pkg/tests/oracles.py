"""Independent slow references used only by the tests."""

import numpy as np

from dynrank.graph import build_graph


def dense_transition(graph):
    n = graph.num_vertices
    M = np.zeros((n, n))
    for u in range(n):
        for v in graph.out(u).tolist():
            M[v, u] += 1.0 / graph.out_degree[u]
    return M


def dense_power_iteration(graph, alpha=0.85, max_iterations=2000):
    """Dense-matrix power iteration to the float64 fixed point."""
    n = graph.num_vertices
    M = dense_transition(graph)
    R = np.full(n, 1.0 / n)
    for _ in range(max_iterations):
        nxt = alpha * (M @ R) + (1 - alpha) / n
        if np.array_equal(nxt, R):
            break
        R = nxt
    return R


def dense_solve(graph, alpha=0.85):
    """Solve (I - alpha M) R = (1 - alpha)/n directly."""
    n = graph.num_vertices
    M = dense_transition(graph)
    return np.linalg.solve(np.eye(n) - alpha * M, np.full(n, (1 - alpha) / n))


def reachable(graph, starts):
    """Plain BFS over out-edges using Python sets."""
    seen = set()
    frontier = list(starts)
    while frontier:
        u = frontier.pop()
        if u in seen:
            continue
        seen.add(u)
        frontier.extend(int(w) for w in graph.out(u))
    return seen


def transitive_closure(n, edges):
    """Floyd-Warshall boolean closure, reflexive."""
    C = np.eye(n, dtype=bool)
    for u, v in edges:
        C[u, v] = True
    for k in range(n):
        C |= C[:, [k]] & C[[k], :]
    return C


def random_graph(seed, n, avg_degree, self_loops=True):
    rng = np.random.default_rng(seed)
    m = int(n * avg_degree)
    return build_graph(rng.integers(0, n, size=(m, 2)), n, add_self_loops=self_loops)
