"""Configuration, reports and the worker-team substrate shared by all engines."""

from __future__ import annotations

import itertools
import threading
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class EngineCancelled(RuntimeError):
    """A worker was told to stop because the run was cancelled."""


class EngineTimeout(RuntimeError):
    """The run did not finish before its watchdog deadline."""


@dataclass(frozen=True)
class PageRankConfig:
    damping: float = 0.85
    iteration_tolerance: float = 1e-10
    frontier_tolerance: float | None = None  # defaults to iteration_tolerance / 1000
    max_iterations: int = 500
    chunk_size: int = 2048
    num_threads: int = 1
    # "static" hands chunk c to worker c % num_threads; meant for deterministic tests
    schedule: str = "dynamic"
    chunk_convergence: bool = False

    def __post_init__(self):
        if not 0 < self.damping < 1:
            raise ValueError("damping must lie in (0, 1)")
        if not self.iteration_tolerance > 0:
            raise ValueError("iteration_tolerance must be positive")
        if self.frontier_tolerance is not None and not (0 <= self.frontier_tolerance):
            raise ValueError("frontier_tolerance must be non-negative")
        if self.frontier_tolerance is not None and self.frontier_tolerance > self.iteration_tolerance \
                and self.frontier_tolerance != float("inf"):
            raise ValueError("frontier_tolerance must not exceed iteration_tolerance")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be >= 1")
        if self.num_threads < 1:
            raise ValueError("num_threads must be >= 1")
        if self.schedule not in ("dynamic", "static"):
            raise ValueError("schedule must be 'dynamic' or 'static'")

    @property
    def frontier_tol(self) -> float:
        if self.frontier_tolerance is None:
            return self.iteration_tolerance / 1000
        return self.frontier_tolerance


@dataclass
class FlagVectors:
    affected: np.ndarray
    checked: np.ndarray
    not_converged: np.ndarray

    @classmethod
    def zeros(cls, n: int) -> "FlagVectors":
        return cls(np.zeros(n, np.uint8), np.zeros(n, np.uint8), np.zeros(n, np.uint8))


@dataclass
class RunReport:
    engine: str
    ranks: np.ndarray
    iterations: int
    wall_time: float
    converged: bool
    affected_initial: int | None = None
    affected_total: int | None = None
    rank_updates: int = 0
    worker_iterations: list[int] = field(default_factory=list)
    crashed_workers: list[int] = field(default_factory=list)
    delay_count: int = 0
    delay_seconds: float = 0.0
    # boolean mask of vertices ever marked affected (dt/df engines only)
    affected: np.ndarray | None = None


class EngineHooks:
    """Debug interceptors. Subclass and override what you need.

    Calls arrive concurrently from every worker. ``vertices_processed`` fires
    once per chunk with the number of rank computations done in it.
    """

    def phase_entered(self, worker: int, phase: str) -> None:
        pass

    def chunk_claimed(self, worker: int, phase: str, iteration: int, chunk: int) -> None:
        pass

    def vertices_processed(self, worker: int, phase: str, iteration: int, lo: int, hi: int, computed: int) -> None:
        pass

    def should_stop(self, worker: int, phase: str, iteration: int, position: int) -> bool:
        return False


class WorkPool:
    """Shared claim counter; ``claim`` is a single indivisible fetch-and-increment."""

    def __init__(self):
        self._next = itertools.count().__next__

    def claim(self) -> int:
        return self._next()


class StaticPool:
    """Round-robin chunk assignment, one instance per worker."""

    def __init__(self, worker: int, num_workers: int):
        self._it = itertools.count(worker, num_workers).__next__

    def claim(self) -> int:
        return self._it()


class TeamBarrier:
    """Full-team rendezvous that can be abandoned through a cancel event.

    The last worker to arrive runs ``action`` before anyone is released.
    """

    def __init__(self, parties: int, cancel: threading.Event, poll: float = 0.02):
        self._parties = parties
        self._cancel = cancel
        self._poll = poll
        self._cond = threading.Condition()
        self._arrived = 0
        self._generation = 0

    def wait(self, action: Callable[[], None] | None = None) -> None:
        with self._cond:
            gen = self._generation
            self._arrived += 1
            if self._arrived == self._parties:
                if action is not None:
                    action()
                self._arrived = 0
                self._generation += 1
                self._cond.notify_all()
                return
            while gen == self._generation:
                if self._cancel.is_set():
                    raise EngineCancelled("barrier abandoned")
                self._cond.wait(self._poll)


def run_team(num_threads: int, target: Callable[[int], None], cancel: threading.Event,
             timeout: float | None = None) -> float:
    """Run ``target(worker_id)`` on a fresh team and return the wall time.

    A worker exception is re-raised in the caller. If ``timeout`` expires the
    team is cancelled and :class:`EngineTimeout` is raised.
    """
    errors: list[BaseException] = []

    def wrapped(w: int) -> None:
        try:
            target(w)
        except EngineCancelled:
            pass
        except BaseException as exc:  # surfaced to the caller below
            errors.append(exc)
            cancel.set()

    threads = [threading.Thread(target=wrapped, args=(w,), name=f"dynrank-worker-{w}", daemon=True)
               for w in range(num_threads)]
    start = time.perf_counter()
    for t in threads:
        t.start()
    deadline = None if timeout is None else start + timeout
    for t in threads:
        while t.is_alive():
            remaining = None if deadline is None else deadline - time.perf_counter()
            if remaining is not None and remaining <= 0:
                cancel.set()
                for t2 in threads:
                    t2.join()
                raise EngineTimeout(f"engine did not finish within {timeout:.3f}s")
            t.join(0.05 if remaining is None else min(0.05, remaining))
    elapsed = time.perf_counter() - start
    if errors:
        raise errors[0]
    if cancel.is_set():
        raise EngineCancelled("run cancelled")
    return elapsed
