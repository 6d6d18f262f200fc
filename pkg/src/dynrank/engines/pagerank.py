"""Static, Naive-dynamic, Dynamic Traversal and Dynamic Frontier PageRank.

Each approach comes in a barrier-based (BB) and a lock-free (LF) flavour.
BB engines iterate Jacobi-style on two rank vectors with two full-team
rendezvous per iteration. LF engines update one shared vector in place,
claim vertex chunks from a per-iteration work pool, track per-vertex
convergence in a flag vector and never wait for each other.
"""

from __future__ import annotations

import threading

import numpy as np

from ..graph import BatchUpdate, Graph, union_out_neighbors
from . import kernels as K
from .base import (EngineCancelled, EngineHooks, FlagVectors, PageRankConfig, RunReport, StaticPool,
                   TeamBarrier, WorkPool, run_team)

_NO_HOOKS = EngineHooks()


def rank_contribution(graph: Graph, ranks: np.ndarray, v: int, alpha: float) -> float:
    """New rank of ``v`` from its in-neighbours' current ranks."""
    n = graph.num_vertices
    return float(K.vertex_rank(graph.in_offsets, graph.in_sources, graph.out_degree,
                               np.asarray(ranks, dtype=np.float64), v, alpha, (1 - alpha) / n))


def linf_norm(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return float(K.linf_range(a, b, 0, a.size)) if a.size else 0.0


def visit_dfs(flags: FlagVectors, graph: Graph, start: int, set_not_converged: bool = False) -> None:
    stack = np.empty(max(graph.num_vertices, 1), dtype=np.int64)
    K.visit_dfs(graph.out_offsets, graph.out_targets, start, flags.affected, flags.not_converged,
                set_not_converged, stack)


def mark_initial_affected_df(prev: Graph, curr: Graph, batch: BatchUpdate, flags: FlagVectors,
                             set_not_converged: bool = False) -> None:
    """Flag the out-neighbours (in either snapshot) of every batch source."""
    for u in batch.sources().tolist():
        K.mark_out_union(prev.out_offsets, prev.out_targets, curr.out_offsets, curr.out_targets,
                         u, flags.affected, flags.not_converged, set_not_converged)


def affected_by_traversal(prev: Graph, curr: Graph, batch: BatchUpdate) -> np.ndarray:
    """Vertices reachable in ``curr`` from an out-neighbour of any batch source."""
    flags = FlagVectors.zeros(curr.num_vertices)
    stack = np.empty(max(curr.num_vertices, 1), dtype=np.int64)
    for u in batch.sources().tolist():
        for w in union_out_neighbors(prev, curr, u).tolist():
            K.visit_dfs(curr.out_offsets, curr.out_targets, w, flags.affected, flags.not_converged,
                        False, stack)
    return flags.affected


class _Run:
    """State for one engine call: arrays, flags, pools and per-worker counters."""

    def __init__(self, name, curr: Graph, cfg: PageRankConfig, init_ranks, *, prev=None, batch=None,
                 lock_free: bool, approach: str, faults=None, hooks=None, cancel=None):
        self.name = name
        self.g = curr
        self.prev = prev if prev is not None else curr
        self.cfg = cfg
        self.lock_free = lock_free
        self.approach = approach  # static | nd | dt | df
        self.faults = faults
        self.hooks = hooks or _NO_HOOKS
        self.cancel = cancel or threading.Event()
        self.n = n = curr.num_vertices
        self.alpha = cfg.damping
        self.base = (1 - cfg.damping) / n if n else 0.0
        self.cs = cfg.chunk_size
        self.nchunks = (n + self.cs - 1) // self.cs
        T = cfg.num_threads

        self.ranks = np.array(init_ranks, dtype=np.float64, copy=True)
        if not lock_free:
            self.buffers = [self.ranks, self.ranks.copy()]
            self.cur = 0
            self.partial = [0.0] * T
            self.barrier = TeamBarrier(T, self.cancel)
            self.linf_pools = [WorkPool() for _ in range(cfg.max_iterations)]
            self.done = False
        self.flags = FlagVectors.zeros(n)
        self.pending = np.zeros(n if approach == "df" and not lock_free else 0, np.uint8)
        self.chunk_dirty = np.zeros(self.nchunks if cfg.chunk_convergence and lock_free else 0, np.uint8)
        if lock_free and approach in ("static", "nd"):
            # every vertex starts unconverged so the all-clear scan means something
            self.flags.not_converged[:] = 1
        # chunks start dirty; the first sweep over each one refreshes its flag
        self.chunk_dirty[:] = 1
        self.pools = [WorkPool() for _ in range(cfg.max_iterations)]

        if batch is not None and approach in ("dt", "df"):
            self.sources = np.ascontiguousarray(batch.edges()[:, 0]) if len(batch) else np.empty(0, np.int64)
        else:
            self.sources = np.empty(0, np.int64)
        self.edge_chunks = (self.sources.size + self.cs - 1) // self.cs
        self.mark_pool = WorkPool()
        self.stacks = [np.empty(max(n, 1), np.int64) for _ in range(T)] if approach == "dt" else None

        self.iterations = 0
        self.worker_iters = [0] * T
        self.computed = [0] * T
        self.converged = False

    # -- helpers -------------------------------------------------------------
    def _pool(self, shared, worker):
        if self.cfg.schedule == "static":
            return StaticPool(worker, self.cfg.num_threads)
        return shared

    def _stopped(self, w, phase, iteration, position) -> bool:
        if self.cancel.is_set():
            raise EngineCancelled("run cancelled")
        if self.hooks.should_stop(w, phase, iteration, position):
            return True
        if self.faults is not None and phase in ("compute", "norm"):
            return self.faults.crash_hook(w, iteration, position)
        return False

    def _drain(self, w, pool, limit, size, total, phase, iteration, body) -> bool:
        """Claim chunks until the pool runs dry. False means the worker stopped."""
        while True:
            c = pool.claim()
            position = min(c * size, total)
            if self._stopped(w, phase, iteration, position):
                return False
            if c >= limit:
                return True
            self.hooks.chunk_claimed(w, phase, iteration, c)
            lo = c * size
            hi = min(lo + size, total)
            computed = body(w, lo, hi)
            self.hooks.vertices_processed(w, phase, iteration, lo, hi, computed)

    def _ranked(self, w, lo, hi, sweep) -> int:
        """Run a rank sweep over [lo, hi), pausing wherever a delay is due."""
        pos = lo
        total = 0
        faults = self.faults
        while pos < hi:
            budget = faults.delay_budget(w) if faults is not None else K.NO_LIMIT
            pos, computed = sweep(pos, hi, budget)
            total += computed
            if faults is not None:
                faults.consume(w, computed)
        self.computed[w] += total
        return total

    # -- initial marking -----------------------------------------------------
    def _mark_body(self):
        prev, g, fl = self.prev, self.g, self.flags
        use_checked = self.lock_free
        dfs = self.approach == "dt"

        def body(w, lo, hi):
            for i in range(lo, hi):
                u = int(self.sources[i])
                if use_checked and fl.checked[u]:
                    continue
                if dfs:
                    K.traverse_from_sources(prev.out_offsets, prev.out_targets, g.out_offsets, g.out_targets,
                                            self.sources, i, i + 1, fl.affected, fl.not_converged,
                                            self.lock_free, self.stacks[w])
                else:
                    K.mark_out_union(prev.out_offsets, prev.out_targets, g.out_offsets, g.out_targets,
                                     u, fl.affected, fl.not_converged, self.lock_free)
                if use_checked:
                    fl.checked[u] = 1
            return hi - lo
        return body

    def _mark_phase(self, w) -> bool:
        if self.sources.size == 0:
            return True
        self.hooks.phase_entered(w, "mark")
        pool = self._pool(self.mark_pool, w)
        if not self._drain(w, pool, self.edge_chunks, self.cs, self.sources.size, "mark", -1,
                           self._mark_body()):
            return False
        if not self.lock_free:
            return True
        # help: keep sweeping unchecked sources until every one is checked
        checked = self.flags.checked
        body = self._mark_body()
        while not checked[self.sources].all():
            for c in range(self.edge_chunks):
                if self._stopped(w, "mark", -1, c * self.cs):
                    return False
                lo = c * self.cs
                hi = min(lo + self.cs, self.sources.size)
                if not checked[self.sources[lo:hi]].all():
                    body(w, lo, hi)
        return True

    # -- lock-free compute ---------------------------------------------------
    def _async_body(self):
        g, fl = self.g, self.flags
        use_affected = self.approach in ("dt", "df")
        ftol = self.cfg.frontier_tol if self.approach == "df" else -1.0
        tol = self.cfg.iteration_tolerance
        dirty = self.chunk_dirty

        def body(w, lo, hi):
            def sweep(pos, hi_, budget):
                return K.async_sweep(g.in_offsets, g.in_sources, g.out_offsets, g.out_targets, g.out_degree,
                                     self.ranks, pos, hi_, self.alpha, self.base, tol,
                                     fl.affected, use_affected, fl.not_converged, ftol,
                                     dirty, self.cs, budget)
            done = self._ranked(w, lo, hi, sweep)
            if dirty.size:
                K.refresh_chunk_flag(fl.not_converged, dirty, lo // self.cs, self.cs)
            return done
        return body

    def _all_converged(self) -> bool:
        if self.chunk_dirty.size:
            return bool(K.all_zero(self.chunk_dirty))
        return bool(K.all_zero(self.flags.not_converged))

    def lf_worker(self, w):
        if self.approach in ("dt", "df") and not self._mark_phase(w):
            return
        self.hooks.phase_entered(w, "compute")
        body = self._async_body()
        for i in range(self.cfg.max_iterations):
            ok = self._drain(w, self._pool(self.pools[i], w), self.nchunks, self.cs, self.n,
                             "compute", i, body)
            if not ok:
                return
            self.worker_iters[w] = i + 1
            if self._all_converged():
                self.converged = True
                return

    # -- barrier-based compute -----------------------------------------------
    def _sync_body(self):
        g, fl = self.g, self.flags
        use_affected = self.approach in ("dt", "df")
        ftol = self.cfg.frontier_tol if self.approach == "df" else -1.0
        pending = self.pending if self.pending.size else fl.affected

        def body(w, lo, hi):
            src = self.buffers[self.cur]
            dst = self.buffers[1 - self.cur]

            def sweep(pos, hi_, budget):
                return K.sync_sweep(g.in_offsets, g.in_sources, g.out_offsets, g.out_targets, g.out_degree,
                                    src, dst, pos, hi_, self.alpha, self.base,
                                    fl.affected, use_affected, ftol, pending, budget)
            return self._ranked(w, lo, hi, sweep)
        return body

    def _norm_body(self, w, lo, hi):
        a = self.buffers[self.cur]
        b = self.buffers[1 - self.cur]
        d = K.linf_range(a, b, lo, hi)
        if d > self.partial[w]:
            self.partial[w] = d
        if self.pending.size:
            K.fold_pending(self.flags.affected, self.pending, lo, hi)
        return 0

    def _reduce(self, i):
        delta = max(self.partial)
        self.partial = [0.0] * len(self.partial)
        self.cur = 1 - self.cur
        self.iterations = i + 1
        if delta <= self.cfg.iteration_tolerance:
            self.converged = True
            self.done = True
        elif i + 1 >= self.cfg.max_iterations:
            self.done = True

    def bb_worker(self, w):
        if self.approach in ("dt", "df"):
            if not self._mark_phase(w):
                return
            self.barrier.wait()
        self.hooks.phase_entered(w, "compute")
        body = self._sync_body()
        for i in range(self.cfg.max_iterations):
            if not self._drain(w, self._pool(self.pools[i], w), self.nchunks, self.cs, self.n,
                               "compute", i, body):
                return
            self.barrier.wait()
            if not self._drain(w, self._pool(self.linf_pools[i], w), self.nchunks, self.cs, self.n,
                               "norm", i, self._norm_body):
                return
            self.barrier.wait(lambda: self._reduce(i))
            self.worker_iters[w] = i + 1
            if self.done:
                return

    # -- entry -----------------------------------------------------------------
    def execute(self, timeout=None) -> RunReport:
        if self.n == 0:
            return RunReport(self.name, self.ranks, 0, 0.0, True, 0, 0)
        target = self.lf_worker if self.lock_free else self.bb_worker
        wall = run_team(self.cfg.num_threads, target, self.cancel, timeout)
        if self.lock_free:
            ranks = self.ranks
            iterations = max(self.worker_iters)
        else:
            ranks = self.buffers[self.cur]
            iterations = self.iterations
        report = RunReport(
            engine=self.name, ranks=ranks, iterations=iterations, wall_time=wall,
            converged=self.converged, rank_updates=sum(self.computed),
            worker_iterations=list(self.worker_iters))
        if self.approach in ("dt", "df"):
            report.affected = self.flags.affected.astype(bool)
            report.affected_total = int(np.count_nonzero(report.affected))
        if self.faults is not None:
            report.crashed_workers = self.faults.crashed_workers
            report.delay_count = self.faults.delay_count
            report.delay_seconds = self.faults.delay_seconds
        return report


def _check_ranks(prev_ranks, n):
    arr = np.asarray(prev_ranks, dtype=np.float64)
    if arr.shape != (n,):
        raise ValueError(f"prev_ranks has length {arr.size}, graph has {n} vertices")
    return arr


def _finish(run: _Run, timeout, prev=None, batch=None) -> RunReport:
    report = run.execute(timeout)
    if run.approach == "df" and batch is not None:
        flags = FlagVectors.zeros(run.n)
        mark_initial_affected_df(prev, run.g, batch, flags)
        report.affected_initial = int(np.count_nonzero(flags.affected))
    elif run.approach == "dt":
        report.affected_initial = report.affected_total
    return report


def _uniform(n):
    return np.full(n, 1.0 / n if n else 0.0)


def static_bb(graph: Graph, cfg: PageRankConfig, *, faults=None, hooks=None, cancel=None, timeout=None):
    run = _Run("static-bb", graph, cfg, _uniform(graph.num_vertices), lock_free=False, approach="static",
               faults=faults, hooks=hooks, cancel=cancel)
    return _finish(run, timeout)


def static_lf(graph: Graph, cfg: PageRankConfig, *, faults=None, hooks=None, cancel=None, timeout=None):
    run = _Run("static-lf", graph, cfg, _uniform(graph.num_vertices), lock_free=True, approach="static",
               faults=faults, hooks=hooks, cancel=cancel)
    return _finish(run, timeout)


def nd_bb(curr: Graph, prev_ranks, cfg: PageRankConfig, *, faults=None, hooks=None, cancel=None, timeout=None):
    run = _Run("nd-bb", curr, cfg, _check_ranks(prev_ranks, curr.num_vertices), lock_free=False,
               approach="nd", faults=faults, hooks=hooks, cancel=cancel)
    return _finish(run, timeout)


def nd_lf(curr: Graph, prev_ranks, cfg: PageRankConfig, *, faults=None, hooks=None, cancel=None, timeout=None):
    run = _Run("nd-lf", curr, cfg, _check_ranks(prev_ranks, curr.num_vertices), lock_free=True,
               approach="nd", faults=faults, hooks=hooks, cancel=cancel)
    return _finish(run, timeout)


def _dynamic(name, approach, lock_free, prev, curr, batch, prev_ranks, cfg, faults, hooks, cancel, timeout):
    if prev.num_vertices != curr.num_vertices:
        raise ValueError("snapshots must share the vertex set")
    run = _Run(name, curr, cfg, _check_ranks(prev_ranks, curr.num_vertices), prev=prev, batch=batch,
               lock_free=lock_free, approach=approach, faults=faults, hooks=hooks, cancel=cancel)
    return _finish(run, timeout, prev, batch)


def dt_bb(prev: Graph, curr: Graph, batch: BatchUpdate, prev_ranks, cfg: PageRankConfig, *,
          faults=None, hooks=None, cancel=None, timeout=None):
    return _dynamic("dt-bb", "dt", False, prev, curr, batch, prev_ranks, cfg, faults, hooks, cancel, timeout)


def dt_lf(prev: Graph, curr: Graph, batch: BatchUpdate, prev_ranks, cfg: PageRankConfig, *,
          faults=None, hooks=None, cancel=None, timeout=None):
    return _dynamic("dt-lf", "dt", True, prev, curr, batch, prev_ranks, cfg, faults, hooks, cancel, timeout)


def df_bb(prev: Graph, curr: Graph, batch: BatchUpdate, prev_ranks, cfg: PageRankConfig, *,
          faults=None, hooks=None, cancel=None, timeout=None):
    return _dynamic("df-bb", "df", False, prev, curr, batch, prev_ranks, cfg, faults, hooks, cancel, timeout)


def df_lf(prev: Graph, curr: Graph, batch: BatchUpdate, prev_ranks, cfg: PageRankConfig, *,
          faults=None, hooks=None, cancel=None, timeout=None):
    return _dynamic("df-lf", "df", True, prev, curr, batch, prev_ranks, cfg, faults, hooks, cancel, timeout)
