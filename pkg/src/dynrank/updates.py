"""Random batch generation and temporal edge-stream replay."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import BatchUpdate, Graph, build_graph

MODES = ("random-mixed", "random-deletions-only", "random-insertions-only", "temporal-replay")


class BatchGenerationError(ValueError):
    pass


@dataclass(frozen=True)
class BatchSpec:
    size_fraction: float
    mode: str = "random-mixed"
    rng_seed: int = 0
    initial_load_fraction: float = 0.9

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown batch mode {self.mode!r}; expected one of {', '.join(MODES)}")
        # zero is accepted so that harness sweeps can express "no update"
        if not 0 <= self.size_fraction <= 1:
            raise ValueError("size_fraction must lie in [0, 1]")
        if not 0 < self.initial_load_fraction < 1:
            raise ValueError("initial_load_fraction must lie in (0, 1)")


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def split_counts(total: int, mode: str) -> tuple[int, int]:
    """(deletions, insertions) for a batch of ``total`` edges; odd mixed totals favour deletions."""
    if mode == "random-deletions-only":
        return total, 0
    if mode == "random-insertions-only":
        return 0, total
    return total - total // 2, total // 2


def _sample_insertions(graph: Graph, k: int, rng: np.random.Generator) -> np.ndarray:
    n = graph.num_vertices
    if k == 0:
        return np.empty((0, 2), dtype=np.int64)
    existing_off_diag = graph.num_edges - int(graph.contains(
        np.stack([np.arange(n), np.arange(n)], axis=1)).sum())
    available = n * (n - 1) - existing_off_diag
    if available < k:
        raise BatchGenerationError(f"requested {k} insertions but only {available} non-adjacent pairs exist")
    if n * (n - 1) and existing_off_diag / (n * (n - 1)) > 0.5:
        # dense: enumerate non-edges and pick without replacement
        u, v = np.divmod(np.arange(n * n, dtype=np.int64), n)
        cand = np.stack([u, v], axis=1)
        cand = cand[(u != v) & ~graph.contains(cand)]
        picked = rng.choice(cand.shape[0], size=k, replace=False)
        return cand[np.sort(picked)]
    chosen: dict[int, None] = {}
    while len(chosen) < k:
        need = k - len(chosen)
        draw = rng.integers(0, n, size=(2 * need + 8, 2))
        draw = draw[draw[:, 0] != draw[:, 1]]
        draw = draw[~graph.contains(draw)]
        for u, v in draw.tolist():
            key = u * n + v
            if key not in chosen:
                chosen[key] = None
                if len(chosen) == k:
                    break
    keys = np.fromiter(chosen, dtype=np.int64, count=k)
    return np.stack([keys // n, keys % n], axis=1)


def generate_random_batch(graph: Graph, spec: BatchSpec) -> BatchUpdate:
    """Sample a batch of ``round(size_fraction * |E|)`` edges.

    ``|E|`` counts only non-self-loop edges, since self-loops are structural
    and never sampled. Deletions are drawn uniformly without replacement from
    existing edges; insertions are uniform non-adjacent ordered pairs.
    """
    if spec.mode == "temporal-replay":
        raise BatchGenerationError("temporal-replay batches come from temporal_batches()")
    edges = graph.edges()
    edges = edges[edges[:, 0] != edges[:, 1]]
    if edges.shape[0] == 0:
        raise BatchGenerationError("graph has no deletable (non-self-loop) edges")
    total = _round_half_up(spec.size_fraction * edges.shape[0])
    n_del, n_ins = split_counts(total, spec.mode)
    if n_del > edges.shape[0]:
        raise BatchGenerationError(f"requested {n_del} deletions but graph has {edges.shape[0]} deletable edges")
    rng = np.random.default_rng(spec.rng_seed)
    pick = np.sort(rng.choice(edges.shape[0], size=n_del, replace=False)) if n_del else np.empty(0, dtype=np.int64)
    dels = edges[pick]
    ins = _sample_insertions(graph, n_ins, rng)
    ins = ins[np.lexsort((ins[:, 1], ins[:, 0]))] if ins.shape[0] else ins
    return BatchUpdate(dels.tolist(), ins.tolist())


def temporal_batches(edge_stream, spec: BatchSpec, num_vertices: int | None = None):
    """Split an ordered edge stream into an initial snapshot and insertion-only batches.

    Batch sizes count raw stream entries; entries that would re-insert an edge
    present in the evolving graph (or repeat within the batch, or form a
    self-loop) are filtered out so every batch applies cleanly.
    """
    stream = np.asarray(edge_stream, dtype=np.int64).reshape(-1, 2)
    total = stream.shape[0]
    if total == 0:
        raise BatchGenerationError("empty edge stream")
    n = num_vertices if num_vertices is not None else int(stream.max()) + 1
    n_initial = int(math.floor(spec.initial_load_fraction * total + 1e-9))
    batch_size = max(1, _round_half_up(spec.size_fraction * total))
    initial = build_graph(stream[:n_initial], n, add_self_loops=True)
    present = set(initial.edge_keys.tolist())
    batches = []
    for start in range(n_initial, total, batch_size):
        ins = []
        for u, v in stream[start:start + batch_size].tolist():
            key = u * n + v
            if u == v or key in present:
                continue
            present.add(key)
            ins.append((u, v))
        batches.append(BatchUpdate((), ins))
    return initial, batches
