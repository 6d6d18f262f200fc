"""Random thread delays and crash-stop failures for engine runs."""

from __future__ import annotations

import dataclasses
import json
import math
import threading
import time
from dataclasses import dataclass

import numpy as np

from .engines.kernels import NO_LIMIT


@dataclass(frozen=True)
class FaultPlan:
    """What to inject into a run.

    ``delay_probability`` is the per-vertex chance of a delay after a rank
    computation; one full sweep over ``|V|`` vertices therefore sees
    ``delay_probability * |V|`` delays on average. Crashing workers stop at
    a trigger point drawn uniformly from the first ``crash_window`` rank
    iterations.
    """

    delay_probability: float = 0.0
    delay_ms: float = 100.0
    crash_count: int = 0
    crash_window: int = 1
    virtual_clock: bool = False
    rng_seed: int = 0

    def __post_init__(self):
        if not 0 <= self.delay_probability <= 1:
            raise ValueError("delay_probability must lie in [0, 1]")
        if self.delay_ms < 0:
            raise ValueError("delay_ms must be non-negative")
        if self.crash_count < 0:
            raise ValueError("crash_count must be non-negative")
        if self.crash_window < 1:
            raise ValueError("crash_window must be >= 1")

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "FaultPlan":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown fault plan fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "FaultPlan":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class CrashEvent:
    worker: int
    iteration: int
    position: int


class FaultInjector:
    """Per-run fault state built from a :class:`FaultPlan`.

    Crash triggers and delay streams are fixed by ``rng_seed``; which vertex
    a delay lands on additionally depends on the thread schedule.
    """

    def __init__(self, plan: FaultPlan, num_threads: int, num_vertices: int):
        if plan.crash_count >= num_threads:
            raise ValueError(
                f"crash_count={plan.crash_count} leaves no surviving worker out of {num_threads}")
        self.plan = plan
        self.num_threads = num_threads
        self.num_vertices = num_vertices
        seq = np.random.SeedSequence(plan.rng_seed)
        crash_seed, *worker_seeds = seq.spawn(num_threads + 1)
        crash_rng = np.random.default_rng(crash_seed)
        victims = crash_rng.choice(num_threads, size=plan.crash_count, replace=False)
        self.triggers: dict[int, tuple[int, int]] = {}
        for w in sorted(int(x) for x in victims):
            it = int(crash_rng.integers(plan.crash_window))
            pos = int(crash_rng.integers(max(num_vertices, 1)))
            self.triggers[w] = (it, pos)
        self._rngs = [np.random.default_rng(s) for s in worker_seeds]
        self._gap = [self._draw_gap(w) for w in range(num_threads)]
        self._crashed = [False] * num_threads
        self._lock = threading.Lock()
        self.crash_events: list[CrashEvent] = []
        # per-worker lists are single-writer; totals are summed on read
        self._delays = [[] for _ in range(num_threads)]

    # -- delays --------------------------------------------------------------
    def _draw_gap(self, w: int) -> int:
        p = self.plan.delay_probability
        if p <= 0:
            return NO_LIMIT
        if p >= 1:
            return 1
        return int(self._rngs[w].geometric(p))

    def _sleep(self, w: int) -> float:
        seconds = self.plan.delay_ms / 1000.0
        self._delays[w].append(seconds)
        if not self.plan.virtual_clock and seconds > 0:
            time.sleep(seconds)
        return seconds

    def delay_hook(self, worker: int) -> float | None:
        """Call after a single vertex rank computation; may suspend the caller."""
        p = self.plan.delay_probability
        if p > 0 and self._rngs[worker].random() < p:
            return self._sleep(worker)
        return None

    def delay_budget(self, worker: int) -> int:
        """Rank computations the worker may perform before its next delay."""
        return self._gap[worker]

    def consume(self, worker: int, computed: int) -> None:
        if self._gap[worker] >= NO_LIMIT:
            return
        self._gap[worker] -= computed
        if self._gap[worker] <= 0:
            self._sleep(worker)
            self._gap[worker] = self._draw_gap(worker)

    @property
    def delay_count(self) -> int:
        return sum(len(d) for d in self._delays)

    @property
    def delay_seconds(self) -> float:
        return math.fsum(s for d in self._delays for s in d)

    # -- crashes -------------------------------------------------------------
    def crash_hook(self, worker: int, iteration: int, position: int) -> bool:
        """True once the worker has crashed; it must then stop for good."""
        if self._crashed[worker]:
            return True
        trig = self.triggers.get(worker)
        if trig is None or (iteration, position) < trig:
            return False
        self._crashed[worker] = True
        with self._lock:
            self.crash_events.append(CrashEvent(worker, iteration, position))
        return True

    @property
    def crashed_workers(self) -> list[int]:
        return sorted(e.worker for e in self.crash_events)
