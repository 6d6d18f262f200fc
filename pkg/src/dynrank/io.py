"""Readers and writers for MatrixMarket graphs, SNAP edge lists and batch CSV files."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .graph import BatchUpdate, Graph, build_graph


class ParseError(ValueError):
    def __init__(self, path, lineno: int, message: str):
        self.path = str(path)
        self.lineno = lineno
        super().__init__(f"{path}, line {lineno}: {message}")


def _is_comment(line: str) -> bool:
    return line.startswith("%") or line.startswith("#")


def read_matrix_market(path, add_self_loops: bool = True) -> Graph:
    """Load a SuiteSparse ``coordinate`` matrix as a directed graph (1-based ids).

    Symmetric matrices are doubled into two directed edges per entry before
    deduplication. Entry values, if any, are ignored.
    """
    path = Path(path)
    with path.open() as f:
        header = f.readline()
        tokens = header.strip().lower().split()
        if len(tokens) < 4 or tokens[0] != "%%matrixmarket" or tokens[1] != "matrix" \
                or tokens[2] != "coordinate":
            raise ParseError(path, 1, f"expected '%%MatrixMarket matrix coordinate ...' header, got {header.strip()!r}")
        symmetric = len(tokens) >= 5 and tokens[4] in ("symmetric", "skew-symmetric", "hermitian")
        lineno = 1
        size = None
        for line in f:
            lineno += 1
            s = line.strip()
            if not s or _is_comment(s):
                continue
            parts = s.split()
            try:
                rows, cols, nnz = (int(p) for p in parts[:3])
            except ValueError:
                raise ParseError(path, lineno, f"bad size line {s!r}") from None
            size = (rows, cols, nnz)
            break
        if size is None:
            raise ParseError(path, lineno, "missing size line")
        rows, cols, nnz = size
        n = max(rows, cols)
        edges = np.empty((nnz, 2), dtype=np.int64)
        k = 0
        for line in f:
            lineno += 1
            s = line.strip()
            if not s or _is_comment(s):
                continue
            parts = s.split()
            try:
                u, v = int(parts[0]) - 1, int(parts[1]) - 1
            except (ValueError, IndexError):
                raise ParseError(path, lineno, f"bad entry {s!r}") from None
            if not (0 <= u < n and 0 <= v < n):
                raise ParseError(path, lineno, f"entry ({u + 1},{v + 1}) outside {rows}x{cols}")
            if k >= nnz:
                raise ParseError(path, lineno, f"more than the declared {nnz} entries")
            edges[k] = (u, v)
            k += 1
        if k != nnz:
            raise ParseError(path, lineno, f"expected {nnz} entries, found {k}")
    if symmetric:
        edges = np.concatenate([edges, edges[:, ::-1]])
    return build_graph(edges, n, add_self_loops=add_self_loops)


def read_edge_stream(path) -> tuple[np.ndarray, np.ndarray | None]:
    """Read ``u v [timestamp]`` lines in file order.

    Returns the (k, 2) edge array and the timestamps (``None`` when the file
    has only two columns).
    """
    path = Path(path)
    edges = []
    stamps = []
    ncols = None
    with path.open() as f:
        for lineno, line in enumerate(f, 1):
            s = line.strip()
            if not s or _is_comment(s):
                continue
            parts = s.split()
            if len(parts) < 2:
                raise ParseError(path, lineno, f"expected 'u v [timestamp]', got {s!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
                t = int(float(parts[2])) if len(parts) > 2 else None
            except ValueError:
                raise ParseError(path, lineno, f"non-integer field in {s!r}") from None
            if u < 0 or v < 0:
                raise ParseError(path, lineno, "negative vertex id")
            if ncols is None:
                ncols = 3 if t is not None else 2
            edges.append((u, v))
            if t is not None:
                stamps.append(t)
    arr = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    ts = np.asarray(stamps, dtype=np.int64) if ncols == 3 and len(stamps) == len(edges) else None
    return arr, ts


def read_edge_list(path, num_vertices: int | None = None, add_self_loops: bool = True) -> Graph:
    edges, _ = read_edge_stream(path)
    n = num_vertices if num_vertices is not None else (int(edges.max()) + 1 if edges.size else 0)
    return build_graph(edges, n, add_self_loops=add_self_loops)


def detect_format(path) -> str:
    """'mtx' for MatrixMarket, 'temporal' for 3-column edge lists, else 'edgelist'."""
    path = Path(path)
    with path.open() as f:
        first = f.readline()
        if first.lower().startswith("%%matrixmarket"):
            return "mtx"
        for line in [first, *f]:
            s = line.strip()
            if s and not _is_comment(s):
                return "temporal" if len(s.split()) >= 3 else "edgelist"
    return "edgelist"


def write_batch_csv(path, batch: BatchUpdate) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["op", "u", "v"])
        for u, v in batch.deletions:
            w.writerow(["D", u, v])
        for u, v in batch.insertions:
            w.writerow(["I", u, v])


def read_batch_csv(path) -> BatchUpdate:
    dels, ins = [], []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != ["op", "u", "v"]:
            raise ParseError(path, 1, f"expected header 'op,u,v', got {header}")
        for lineno, row in enumerate(reader, 2):
            if not row:
                continue
            try:
                op, u, v = row[0], int(row[1]), int(row[2])
            except (ValueError, IndexError):
                raise ParseError(path, lineno, f"bad row {row}") from None
            if op == "D":
                dels.append((u, v))
            elif op == "I":
                ins.append((u, v))
            else:
                raise ParseError(path, lineno, f"op must be D or I, got {op!r}")
    return BatchUpdate(dels, ins)
