"""Parallel PageRank on dynamic graphs: barrier-based and lock-free engines plus a fault-injection harness."""

from .graph import BatchUpdate, BatchValidationError, Graph, GraphError, apply_batch, build_graph, union_out_neighbors
from .engines import ENGINE_IDS, PageRankConfig, RunReport, run_engine

__version__ = "0.1.0"
