"""Command-line entry point: ``dynrank {run,faultsim,stability,scaling,genbatch}``.

Settings resolve as command-line flag, then ``--config`` JSON file, then
built-in default. ``DYNRANK_THREADS`` sets the default worker count.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .engines import ENGINE_IDS, EngineTimeout, PageRankConfig, run_engine, static_counterpart
from .engines.kernels import warm_up
from .faults import FaultInjector, FaultPlan
from .graph import BatchUpdate, apply_batch
from .io import ParseError, detect_format, read_batch_csv, read_edge_list, read_edge_stream, \
    read_matrix_market, write_batch_csv
from .metrics import REPORT_FIELDS, SCALING_FIELDS, reference_pagerank, scaling_sweep, \
    stability_roundtrip, write_csv
from .updates import MODES, BatchSpec, generate_random_batch, temporal_batches

log = logging.getLogger("dynrank")

FAULT_FIELDS = REPORT_FIELDS + ["delay_probability", "delay_ms", "crash_count", "completed", "delays",
                                "crashed_workers"]
STABILITY_FIELDS = ["graph", "engine", "batch_fraction", "seed", "error"]


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    graph: str | None = None
    format: str = "auto"
    engine: str = "df-lf"
    damping: float = 0.85
    tolerance: float = 1e-10
    frontier_tolerance: float | None = None
    max_iterations: int = 500
    chunk_size: int = 2048
    threads: int = field(default_factory=lambda: int(os.environ.get("DYNRANK_THREADS", "1")))
    batch_fraction: float = 1e-4
    batch_fractions: list[float] = field(default_factory=lambda: [1e-4, 1e-3, 1e-2])
    batch_mode: str = "random-mixed"
    batch_file: str | None = None
    initial_load: float = 0.9
    seed: int = 0
    repetitions: int = 5
    out: str = "report.csv"
    thread_counts: list[int] = field(default_factory=lambda: [1, 2, 4])
    delay_probabilities: list[float] = field(default_factory=lambda: [0.0])
    delay_ms: float = 100.0
    crash_counts: list[int] = field(default_factory=lambda: [0])
    crash_window: int = 1
    virtual_clock: bool = False
    watchdog_factor: float = 10.0
    stability_base: str = "reference"

    def validate(self) -> None:
        if self.engine not in ENGINE_IDS:
            raise ConfigError(f"unknown engine {self.engine!r}; valid ids: {', '.join(ENGINE_IDS)}")
        if self.format not in ("auto", "mtx", "edgelist", "temporal"):
            raise ConfigError(f"unknown format {self.format!r}; expected auto, mtx, edgelist or temporal")
        if self.batch_mode not in MODES:
            raise ConfigError(f"unknown batch mode {self.batch_mode!r}; expected one of {', '.join(MODES)}")
        if self.stability_base not in ("reference", "static"):
            raise ConfigError(f"stability base must be reference or static, got {self.stability_base!r}")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        try:
            self.pagerank()
            BatchSpec(self.batch_fraction, self.batch_mode, self.seed, self.initial_load)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def pagerank(self, threads: int | None = None) -> PageRankConfig:
        return PageRankConfig(self.damping, self.tolerance, self.frontier_tolerance, self.max_iterations,
                              self.chunk_size, threads or self.threads)


def _resolve(args: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig()
    names = {f.name for f in dataclasses.fields(cfg)}
    if getattr(args, "config", None):
        data = json.loads(Path(args.config).read_text())
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for k, v in data.items():
            setattr(cfg, k, v)
    for k in names:
        v = getattr(args, k, None)
        if v is not None:
            setattr(cfg, k, v)
    cfg.validate()
    return cfg


def _load(cfg: ExperimentConfig):
    """Return (graph, temporal batches or None)."""
    if cfg.graph is None:
        raise ConfigError("--graph is required")
    path = Path(cfg.graph)
    if not path.exists():
        raise FileNotFoundError(f"graph file not found: {path}")
    fmt = detect_format(path) if cfg.format == "auto" else cfg.format
    if fmt == "mtx":
        return read_matrix_market(path), None
    if fmt == "temporal" or cfg.batch_mode == "temporal-replay":
        stream, _ = read_edge_stream(path)
        spec = BatchSpec(cfg.batch_fraction, "temporal-replay", cfg.seed, cfg.initial_load)
        return temporal_batches(stream, spec)
    return read_edge_list(path), None


def _batches(cfg: ExperimentConfig, graph, temporal):
    """Yield (prev, curr, batch, seed) tuples; temporal batches chain, random ones share the base graph."""
    if cfg.batch_file:
        batch = read_batch_csv(cfg.batch_file)
        yield graph, apply_batch(graph, batch), batch, cfg.seed
        return
    if temporal is not None:
        prev = graph
        for b in temporal:
            curr = apply_batch(prev, b)
            yield prev, curr, b, cfg.seed
            prev = curr
        return
    for k in range(cfg.repetitions):
        seed = cfg.seed + k
        batch = generate_random_batch(graph, BatchSpec(cfg.batch_fraction, cfg.batch_mode, seed))
        yield graph, apply_batch(graph, batch), batch, seed


def _row(cfg, graph_name, report, seed, error, threads):
    return {
        "graph": graph_name, "engine": report.engine, "batch_fraction": cfg.batch_fraction, "threads": threads,
        "seed": seed, "iterations": report.iterations, "seconds": report.wall_time, "error": error,
        "affected_initial": report.affected_initial, "affected_total": report.affected_total,
        "converged": report.converged,
    }


def cmd_run(cfg: ExperimentConfig) -> int:
    graph, temporal = _load(cfg)
    warm_up()
    pr = cfg.pagerank()
    name = Path(cfg.graph).stem
    ranks0 = run_engine(static_counterpart(cfg.engine), graph, graph, BatchUpdate(), None, pr).ranks
    rows = []
    ranks = ranks0
    for prev, curr, batch, seed in _batches(cfg, graph, temporal):
        start = ranks if temporal is not None else ranks0
        rep = run_engine(cfg.engine, prev, curr, batch, start, pr)
        err = float(np.max(np.abs(rep.ranks - reference_pagerank(curr, cfg.damping))))
        rows.append(_row(cfg, name, rep, seed, err, pr.num_threads))
        ranks = rep.ranks
        log.info("%s batch of %d edges: %d iterations, %.4fs, error %.3e",
                 cfg.engine, len(batch), rep.iterations, rep.wall_time, err)
    write_csv(cfg.out, rows, REPORT_FIELDS)
    return 0


def cmd_faultsim(cfg: ExperimentConfig) -> int:
    graph, temporal = _load(cfg)
    warm_up()
    pr = cfg.pagerank()
    name = Path(cfg.graph).stem
    prev, curr, batch, seed = next(_batches(cfg, graph, temporal))
    ranks0 = run_engine(static_counterpart(cfg.engine), prev, prev, BatchUpdate(), None, pr).ranks
    reference = reference_pagerank(curr, cfg.damping)
    baseline = run_engine(cfg.engine, prev, curr, batch, ranks0, pr).wall_time
    rows = []
    for p in cfg.delay_probabilities:
        for crashes in cfg.crash_counts:
            plan = FaultPlan(p, cfg.delay_ms, crashes, cfg.crash_window, cfg.virtual_clock, cfg.seed)
            faults = FaultInjector(plan, pr.num_threads, curr.num_vertices)
            # delays lengthen a healthy run, so the watchdog only guards crash runs
            timeout = max(cfg.watchdog_factor * baseline, 0.05) if crashes else None
            row = {"delay_probability": p, "delay_ms": cfg.delay_ms, "crash_count": crashes}
            try:
                rep = run_engine(cfg.engine, prev, curr, batch, ranks0, pr, faults=faults, timeout=timeout)
            except EngineTimeout:
                row.update(graph=name, engine=cfg.engine, batch_fraction=cfg.batch_fraction,
                           threads=pr.num_threads, seed=seed, completed=False, converged=False,
                           delays=faults.delay_count, crashed_workers=" ".join(map(str, faults.crashed_workers)))
            else:
                err = float(np.max(np.abs(rep.ranks - reference)))
                row.update(_row(cfg, name, rep, seed, err, pr.num_threads))
                row.update(completed=True, delays=rep.delay_count,
                           crashed_workers=" ".join(map(str, rep.crashed_workers)))
            rows.append(row)
    write_csv(cfg.out, rows, FAULT_FIELDS)
    return 0


def cmd_stability(cfg: ExperimentConfig) -> int:
    graph, _ = _load(cfg)
    warm_up()
    name = Path(cfg.graph).stem
    rows = []
    for fraction in cfg.batch_fractions:
        for k in range(cfg.repetitions):
            err = stability_roundtrip(graph, fraction, cfg.engine, cfg.pagerank(), cfg.seed + k,
                                      base=cfg.stability_base)
            rows.append({"graph": name, "engine": cfg.engine, "batch_fraction": fraction,
                         "seed": cfg.seed + k, "error": err})
    write_csv(cfg.out, rows, STABILITY_FIELDS)
    return 0


def cmd_scaling(cfg: ExperimentConfig) -> int:
    graph, temporal = _load(cfg)
    warm_up()
    prev, curr, batch, _ = next(_batches(cfg, graph, temporal))
    ranks0 = run_engine(static_counterpart(cfg.engine), prev, prev, BatchUpdate(), None, cfg.pagerank()).ranks
    rows = scaling_sweep(prev, curr, batch, ranks0, cfg.engine, cfg.pagerank(), cfg.thread_counts,
                         repetitions=cfg.repetitions)
    write_csv(cfg.out, rows, SCALING_FIELDS)
    return 0


def cmd_genbatch(cfg: ExperimentConfig) -> int:
    graph, temporal = _load(cfg)
    out = Path(cfg.out)
    if temporal is not None:
        for i, b in enumerate(temporal):
            write_batch_csv(out.with_suffix(f".{i}{out.suffix}"), b)
        return 0
    if cfg.repetitions == 1:
        write_batch_csv(out, generate_random_batch(graph, BatchSpec(cfg.batch_fraction, cfg.batch_mode, cfg.seed)))
        return 0
    for k in range(cfg.repetitions):
        b = generate_random_batch(graph, BatchSpec(cfg.batch_fraction, cfg.batch_mode, cfg.seed + k))
        write_batch_csv(out.with_suffix(f".{k}{out.suffix}"), b)
    return 0


COMMANDS = {"run": cmd_run, "faultsim": cmd_faultsim, "stability": cmd_stability,
            "scaling": cmd_scaling, "genbatch": cmd_genbatch}


def _floats(s: str) -> list[float]:
    return [float(x) for x in s.split(",") if x]


def _ints(s: str) -> list[int]:
    return [int(x) for x in s.split(",") if x]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dynrank", description="Dynamic PageRank experiments")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        # every flag defaults to None so the config file can fill the gaps
        p.add_argument("--config", help="JSON file with ExperimentConfig fields")
        p.add_argument("--graph")
        p.add_argument("--format", choices=["auto", "mtx", "edgelist", "temporal"])
        p.add_argument("--engine", help=f"one of {', '.join(ENGINE_IDS)}")
        p.add_argument("--damping", type=float)
        p.add_argument("--tolerance", type=float)
        p.add_argument("--frontier-tolerance", type=float)
        p.add_argument("--max-iterations", type=int)
        p.add_argument("--chunk-size", type=int)
        p.add_argument("--threads", type=int)
        p.add_argument("--batch-fraction", type=float)
        p.add_argument("--batch-fractions", type=_floats)
        p.add_argument("--batch-mode", choices=MODES)
        p.add_argument("--batch-file")
        p.add_argument("--initial-load", type=float)
        p.add_argument("--seed", type=int)
        p.add_argument("--repetitions", type=int)
        p.add_argument("--out")
        p.add_argument("--thread-counts", type=_ints)
        p.add_argument("--delay-probabilities", type=_floats)
        p.add_argument("--delay-ms", type=float)
        p.add_argument("--crash-counts", type=_ints)
        p.add_argument("--crash-window", type=int)
        p.add_argument("--virtual-clock", action="store_const", const=True)
        p.add_argument("--watchdog-factor", type=float)
        p.add_argument("--stability-base", choices=["reference", "static"])
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _resolve(args)
        return COMMANDS[args.command](cfg)
    except (ConfigError, ParseError, FileNotFoundError, ValueError) as exc:
        print(f"dynrank {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
