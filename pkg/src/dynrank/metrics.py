"""Reference ranks, error measurement, stability round trips and thread-scaling sweeps."""

from __future__ import annotations

import csv
import dataclasses
import statistics
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .engines import PageRankConfig, linf_norm, run_engine, static_counterpart
from .graph import BatchUpdate, Graph, apply_batch
from .updates import BatchSpec, generate_random_batch

REPORT_FIELDS = ["graph", "engine", "batch_fraction", "threads", "seed", "iterations", "seconds", "error",
                 "affected_initial", "affected_total", "converged"]
SCALING_FIELDS = ["threads", "seconds", "speedup", "error"]


@dataclass
class ErrorReport:
    linf_error: float
    runtime: float
    iterations: int


def reference_pagerank(graph: Graph, alpha: float = 0.85, max_iterations: int = 500) -> np.ndarray:
    """Synchronous power iteration run to the float64 fixed point (capped at 500 steps).

    The step change is tested against exact zero: any positive tolerance
    smaller than the rounding noise of a 64-bit sum behaves the same way.
    """
    n = graph.num_vertices
    if n == 0:
        return np.zeros(0)
    src = np.repeat(np.arange(n), graph.out_degree)
    # rows are targets, columns sources, so A @ (R / deg) gathers in-neighbour contributions
    A = sp.csr_matrix((np.ones(src.size), (graph.out_targets.astype(np.int64), src)), shape=(n, n))
    inv_deg = 1.0 / graph.out_degree
    R = np.full(n, 1.0 / n)
    teleport = (1 - alpha) / n
    for _ in range(max_iterations):
        nxt = alpha * (A @ (R * inv_deg)) + teleport
        if np.max(np.abs(nxt - R)) == 0.0:
            return nxt
        R = nxt
    return R


def error_vs_reference(ranks, graph: Graph, alpha: float = 0.85, reference: np.ndarray | None = None) -> float:
    if reference is None:
        reference = reference_pagerank(graph, alpha)
    return linf_norm(ranks, reference)


def _update(engine, prev, curr, batch, ranks, cfg, threads=None):
    if batch.is_empty:
        return ranks
    if threads is not None:
        cfg = dataclasses.replace(cfg, num_threads=threads)
    return run_engine(engine, prev, curr, batch, ranks, cfg).ranks


def stability_roundtrip(graph: Graph, fraction: float, engine: str, cfg: PageRankConfig, seed: int = 0,
                        base: str = "reference") -> float:
    """Delete a random edge set, update, re-insert it, update again; L-inf drift from the start.

    The original ranks are the fixed-point reference of ``graph`` by default.
    ``base="static"`` starts from the engine's static counterpart instead, in
    which case the drift also absorbs that run's own convergence error.
    An empty batch is a no-op update, so a zero fraction yields exactly 0.
    """
    if base == "reference":
        start = reference_pagerank(graph, cfg.damping)
    elif base == "static":
        start = run_engine(static_counterpart(engine), graph, graph, BatchUpdate(), None, cfg).ranks
    else:
        raise ValueError(f"base must be 'reference' or 'static', got {base!r}")
    batch = generate_random_batch(graph, BatchSpec(fraction, "random-deletions-only", seed))
    reduced = apply_batch(graph, batch)
    mid = _update(engine, graph, reduced, batch, start, cfg)
    back = batch.inverse()
    final = _update(engine, reduced, apply_batch(reduced, back), back, mid, cfg)
    return linf_norm(final, start)


def scaling_sweep(prev: Graph, curr: Graph, batch: BatchUpdate, prev_ranks, engine: str, cfg: PageRankConfig,
                  thread_counts, repetitions: int = 3, reference: np.ndarray | None = None) -> list[dict]:
    """Time the engine at each thread count on identical inputs.

    ``seconds`` is the geometric mean over repetitions and ``speedup`` is
    relative to the first thread count listed (normally 1).
    """
    thread_counts = list(thread_counts)
    if not thread_counts:
        raise ValueError("thread_counts must be non-empty")
    if reference is None:
        reference = reference_pagerank(curr, cfg.damping)
    rows = []
    for k in thread_counts:
        c = dataclasses.replace(cfg, num_threads=k)
        times, errors = [], []
        for _ in range(repetitions):
            rep = run_engine(engine, prev, curr, batch, prev_ranks, c)
            times.append(max(rep.wall_time, 1e-9))
            errors.append(linf_norm(rep.ranks, reference))
        rows.append({"threads": k, "seconds": statistics.geometric_mean(times), "error": max(errors)})
    t1 = rows[0]["seconds"]
    for row in rows:
        row["speedup"] = t1 / row["seconds"]
    return rows


def geometric_mean_by(rows, key_fields, value_field="seconds") -> dict:
    """Group rows and take the geometric mean of ``value_field`` in each group."""
    groups: dict = {}
    for row in rows:
        key = tuple(row[k] for k in key_fields)
        groups.setdefault(key, []).append(float(row[value_field]))
    return {k: statistics.geometric_mean(v) for k, v in groups.items()}


def write_csv(path, rows, fields) -> None:
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=fields, lineterminator="\n", extrasaction="raise")
        w.writeheader()
        for row in rows:
            w.writerow({k: _fmt(row.get(k)) for k in fields})


def read_csv(path) -> list[dict]:
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return value
