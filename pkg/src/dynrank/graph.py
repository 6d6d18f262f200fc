"""Immutable directed-graph snapshots with out- and in-adjacency in CSR form."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class GraphError(ValueError):
    """Raised when a graph cannot be constructed from the given edges."""


class BatchValidationError(ValueError):
    """Raised when a batch update is inconsistent with the snapshot it is applied to."""

    def __init__(self, message: str, offending: Sequence[tuple[int, int]] = ()):
        self.offending = list(offending)
        if self.offending:
            shown = ", ".join(f"({u},{v})" for u, v in self.offending[:20])
            more = f" (+{len(self.offending) - 20} more)" if len(self.offending) > 20 else ""
            message = f"{message}: {shown}{more}"
        super().__init__(message)


def _as_edge_array(edges) -> np.ndarray:
    arr = np.asarray(edges, dtype=np.int64)
    if arr.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise GraphError(f"edges must be (u, v) pairs, got array of shape {arr.shape}")
    return arr


def _csr_from_sorted(major: np.ndarray, minor: np.ndarray, n: int):
    counts = np.bincount(major, minlength=n)
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    return offsets, minor.astype(np.int32)


@dataclass(frozen=True, eq=False)
class Graph:
    """A read-only snapshot. Use :func:`build_graph` rather than the constructor."""

    num_vertices: int
    out_offsets: np.ndarray
    out_targets: np.ndarray
    in_offsets: np.ndarray
    in_sources: np.ndarray
    out_degree: np.ndarray
    # sorted u*n + v keys; lets membership tests and batch application run vectorised
    edge_keys: np.ndarray = field(repr=False)

    @property
    def num_edges(self) -> int:
        return int(self.edge_keys.size)

    def out(self, u: int) -> np.ndarray:
        return self.out_targets[self.out_offsets[u]:self.out_offsets[u + 1]]

    def in_(self, v: int) -> np.ndarray:
        return self.in_sources[self.in_offsets[v]:self.in_offsets[v + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        key = u * self.num_vertices + v
        i = np.searchsorted(self.edge_keys, key)
        return bool(i < self.edge_keys.size and self.edge_keys[i] == key)

    def contains(self, edges) -> np.ndarray:
        """Vectorised membership: boolean mask over an (k, 2) edge array."""
        arr = _as_edge_array(edges)
        if arr.shape[0] == 0:
            return np.zeros(0, dtype=bool)
        keys = arr[:, 0] * self.num_vertices + arr[:, 1]
        idx = np.searchsorted(self.edge_keys, keys)
        idx = np.minimum(idx, max(self.edge_keys.size - 1, 0))
        if self.edge_keys.size == 0:
            return np.zeros(keys.size, dtype=bool)
        return self.edge_keys[idx] == keys

    def edges(self) -> np.ndarray:
        """All edges as an (m, 2) int64 array, sorted by (u, v)."""
        n = self.num_vertices
        return np.stack([self.edge_keys // n, self.edge_keys % n], axis=1)

    def has_all_self_loops(self) -> bool:
        v = np.arange(self.num_vertices, dtype=np.int64)
        return bool(self.contains(np.stack([v, v], axis=1)).all())

    def same_structure(self, other: "Graph") -> bool:
        return self.num_vertices == other.num_vertices and np.array_equal(self.edge_keys, other.edge_keys)

    def __repr__(self) -> str:
        return f"Graph(n={self.num_vertices}, m={self.num_edges})"


def _graph_from_keys(keys: np.ndarray, n: int) -> Graph:
    """Build a snapshot from unique, sorted u*n+v keys."""
    src = keys // n if n else keys
    dst = keys % n if n else keys
    out_offsets, out_targets = _csr_from_sorted(src, dst, n)
    order = np.lexsort((src, dst))
    in_offsets, in_sources = _csr_from_sorted(dst[order], src[order], n)
    out_degree = np.diff(out_offsets).astype(np.int64)
    for arr in (out_offsets, out_targets, in_offsets, in_sources, out_degree, keys):
        arr.flags.writeable = False
    return Graph(n, out_offsets, out_targets, in_offsets, in_sources, out_degree, keys)


def build_graph(edges, num_vertices: int, add_self_loops: bool = True) -> Graph:
    """Deduplicate ``edges`` and build the dual adjacency.

    With ``add_self_loops`` every vertex gets a ``(v, v)`` edge, which removes
    dead ends so that the rank kernel never divides by a zero out-degree.
    """
    if num_vertices < 0:
        raise GraphError("num_vertices must be non-negative")
    n = int(num_vertices)
    arr = _as_edge_array(edges)
    if arr.shape[0]:
        bad = (arr < 0) | (arr >= n)
        if bad.any():
            row = int(np.flatnonzero(bad.any(axis=1))[0])
            raise GraphError(
                f"vertex id out of range [0, {n}) in edge ({arr[row, 0]},{arr[row, 1]})")
    keys = arr[:, 0] * n + arr[:, 1]
    if add_self_loops:
        v = np.arange(n, dtype=np.int64)
        keys = np.concatenate([keys, v * n + v])
    keys = np.unique(keys)
    return _graph_from_keys(keys, n)


@dataclass(frozen=True)
class BatchUpdate:
    deletions: tuple[tuple[int, int], ...] = ()
    insertions: tuple[tuple[int, int], ...] = ()

    def __init__(self, deletions: Iterable = (), insertions: Iterable = ()):
        object.__setattr__(self, "deletions", tuple((int(u), int(v)) for u, v in deletions))
        object.__setattr__(self, "insertions", tuple((int(u), int(v)) for u, v in insertions))

    def __len__(self) -> int:
        return len(self.deletions) + len(self.insertions)

    @property
    def is_empty(self) -> bool:
        return not self.deletions and not self.insertions

    def inverse(self) -> "BatchUpdate":
        return BatchUpdate(self.insertions, self.deletions)

    def edges(self) -> np.ndarray:
        """Deletions followed by insertions as one (k, 2) array."""
        return _as_edge_array(list(self.deletions) + list(self.insertions))

    def sources(self) -> np.ndarray:
        return np.unique(self.edges()[:, 0]) if len(self) else np.empty(0, dtype=np.int64)


def validate_batch(prev: Graph, batch: BatchUpdate) -> None:
    n = prev.num_vertices
    dels = _as_edge_array(batch.deletions)
    ins = _as_edge_array(batch.insertions)
    every = np.concatenate([dels, ins])
    if every.size:
        out_of_range = ((every < 0) | (every >= n)).any(axis=1)
        if out_of_range.any():
            raise BatchValidationError(
                f"vertex ids outside the fixed vertex set [0, {n})",
                [tuple(e) for e in every[out_of_range].tolist()])
    loops = [tuple(e) for e in dels.tolist() if e[0] == e[1]]
    if loops:
        raise BatchValidationError("self-loops are structural and cannot be deleted", loops)
    for name, arr in (("deletions", dels), ("insertions", ins)):
        if arr.shape[0]:
            keys = arr[:, 0] * n + arr[:, 1]
            uniq, counts = np.unique(keys, return_counts=True)
            if (counts > 1).any():
                dup = uniq[counts > 1]
                raise BatchValidationError(
                    f"duplicate edges in {name}", [(int(k // n), int(k % n)) for k in dup])
    both = set(batch.deletions) & set(batch.insertions)
    if both:
        raise BatchValidationError("edges both deleted and inserted", sorted(both))
    missing = dels[~prev.contains(dels)]
    if missing.shape[0]:
        raise BatchValidationError("deleting edges not in the graph", [tuple(e) for e in missing.tolist()])
    present = ins[prev.contains(ins)]
    if present.shape[0]:
        raise BatchValidationError("inserting edges already in the graph", [tuple(e) for e in present.tolist()])


def apply_batch(prev: Graph, batch: BatchUpdate) -> Graph:
    """Return the next snapshot ``(E \\ deletions) | insertions``; ``prev`` is left untouched."""
    validate_batch(prev, batch)
    if batch.is_empty:
        return prev
    n = prev.num_vertices
    dels = _as_edge_array(batch.deletions)
    ins = _as_edge_array(batch.insertions)
    keys = prev.edge_keys
    if dels.shape[0]:
        keys = np.setdiff1d(keys, dels[:, 0] * n + dels[:, 1], assume_unique=True)
    if ins.shape[0]:
        keys = np.union1d(keys, ins[:, 0] * n + ins[:, 1])
    return _graph_from_keys(np.ascontiguousarray(keys, dtype=np.int64), n)


def union_out_neighbors(prev: Graph, curr: Graph, u: int) -> np.ndarray:
    if not (0 <= u < prev.num_vertices and u < curr.num_vertices):
        raise GraphError(f"vertex {u} out of range")
    return np.union1d(prev.out(u), curr.out(u)).astype(np.int32)
