"""PageRank engines and a uniform dispatch table keyed by engine id."""

from .base import (EngineCancelled, EngineHooks, EngineTimeout, FlagVectors, PageRankConfig, RunReport,
                   TeamBarrier, WorkPool)
from .pagerank import (affected_by_traversal, df_bb, df_lf, dt_bb, dt_lf, linf_norm, mark_initial_affected_df,
                       nd_bb, nd_lf, rank_contribution, static_bb, static_lf, visit_dfs)

ENGINE_IDS = ("static-bb", "static-lf", "nd-bb", "nd-lf", "dt-bb", "dt-lf", "df-bb", "df-lf")
LOCK_FREE_IDS = tuple(e for e in ENGINE_IDS if e.endswith("-lf"))
BARRIER_IDS = tuple(e for e in ENGINE_IDS if e.endswith("-bb"))


def run_engine(engine: str, prev, curr, batch, prev_ranks, cfg: PageRankConfig, **kw) -> RunReport:
    """Dispatch by id with one signature; static engines ignore prev/batch/prev_ranks."""
    if engine == "static-bb":
        return static_bb(curr, cfg, **kw)
    if engine == "static-lf":
        return static_lf(curr, cfg, **kw)
    if engine == "nd-bb":
        return nd_bb(curr, prev_ranks, cfg, **kw)
    if engine == "nd-lf":
        return nd_lf(curr, prev_ranks, cfg, **kw)
    if engine == "dt-bb":
        return dt_bb(prev, curr, batch, prev_ranks, cfg, **kw)
    if engine == "dt-lf":
        return dt_lf(prev, curr, batch, prev_ranks, cfg, **kw)
    if engine == "df-bb":
        return df_bb(prev, curr, batch, prev_ranks, cfg, **kw)
    if engine == "df-lf":
        return df_lf(prev, curr, batch, prev_ranks, cfg, **kw)
    raise ValueError(f"unknown engine {engine!r}; valid ids: {', '.join(ENGINE_IDS)}")


def static_counterpart(engine: str) -> str:
    return "static-lf" if engine.endswith("-lf") else "static-bb"


__all__ = [
    "ENGINE_IDS", "LOCK_FREE_IDS", "BARRIER_IDS", "run_engine", "static_counterpart",
    "EngineCancelled", "EngineHooks", "EngineTimeout", "FlagVectors", "PageRankConfig", "RunReport",
    "TeamBarrier", "WorkPool",
    "affected_by_traversal", "df_bb", "df_lf", "dt_bb", "dt_lf", "linf_norm", "mark_initial_affected_df",
    "nd_bb", "nd_lf", "rank_contribution", "static_bb", "static_lf", "visit_dfs",
]
