import numpy as np
import pytest

from dynrank.engines import PageRankConfig, static_bb
from dynrank.graph import build_graph
from dynrank.metrics import (REPORT_FIELDS, SCALING_FIELDS, error_vs_reference, geometric_mean_by, read_csv,
                             reference_pagerank, scaling_sweep, stability_roundtrip, write_csv)
from dynrank.graph import BatchUpdate

from oracles import dense_solve, random_graph

CFG = PageRankConfig(num_threads=2, chunk_size=32)


def test_reference_single_vertex():
    assert reference_pagerank(build_graph([], 1)).tolist() == [1.0]


def test_reference_ring():
    assert np.allclose(reference_pagerank(build_graph([(i, (i + 1) % 9) for i in range(9)], 9)), 1 / 9,
                       atol=1e-15)


def test_reference_chain_matches_linear_solve():
    g = build_graph([(0, 1), (1, 2)], 3)
    assert np.allclose(reference_pagerank(g), dense_solve(g), atol=1e-14, rtol=0)


@pytest.mark.parametrize("seed", range(3))
def test_reference_random_matches_linear_solve(seed):
    g = random_graph(seed, 200, 6)
    ref = reference_pagerank(g)
    assert np.max(np.abs(ref - dense_solve(g))) < 1e-13
    assert abs(ref.sum() - 1.0) < 1e-6


def test_error_identities():
    g = random_graph(7, 100, 5)
    ref = reference_pagerank(g)
    assert error_vs_reference(ref, g) == 0.0
    bumped = ref.copy()
    bumped[17] += 1e-6
    assert error_vs_reference(bumped, g, reference=ref) == pytest.approx(1e-6, rel=1e-9)
    assert error_vs_reference(static_bb(g, CFG).ranks, g) < 1e-9
    with pytest.raises(ValueError):
        error_vs_reference(ref[:-1], g)


def test_error_symmetric():
    rng = np.random.default_rng(1)
    a, b = rng.random(50), rng.random(50)
    g = build_graph([], 50)
    assert error_vs_reference(a, g, reference=b) == error_vs_reference(b, g, reference=a)


@pytest.mark.parametrize("engine", ["nd-bb", "nd-lf", "df-bb", "df-lf", "dt-lf"])
def test_stability_zero_fraction(engine):
    assert stability_roundtrip(random_graph(2, 300, 4), 0.0, engine, CFG, seed=1) == 0.0


@pytest.mark.parametrize("engine", ["nd-bb", "nd-lf", "df-bb", "df-lf"])
def test_stability_small_fraction(engine):
    assert stability_roundtrip(random_graph(3, 1000, 5), 1e-3, engine, CFG, seed=2) <= 1e-9


def test_scaling_single_thread():
    g = random_graph(4, 300, 4)
    rows = scaling_sweep(g, g, BatchUpdate(), None, "static-lf", CFG, [1], repetitions=2)
    assert len(rows) == 1
    assert rows[0]["threads"] == 1 and rows[0]["speedup"] == 1.0
    assert rows[0]["error"] < 1e-9
    with pytest.raises(ValueError):
        scaling_sweep(g, g, BatchUpdate(), None, "static-lf", CFG, [])


def test_scaling_csv(tmp_path):
    g = random_graph(5, 200, 4)
    rows = scaling_sweep(g, g, BatchUpdate(), None, "static-bb", CFG, [1, 2], repetitions=1)
    path = tmp_path / "s.csv"
    write_csv(path, rows, SCALING_FIELDS)
    assert path.read_text().splitlines()[0] == "threads,seconds,speedup,error"
    back = read_csv(path)
    assert [int(r["threads"]) for r in back] == [1, 2]
    assert float(back[1]["seconds"]) == rows[1]["seconds"]


def test_report_csv_roundtrip(tmp_path):
    row = dict(graph="g", engine="df-lf", batch_fraction=1e-4, threads=2, seed=1, iterations=7,
               seconds=0.125, error=3.5e-11, affected_initial=None, affected_total=12, converged=True)
    path = tmp_path / "r.csv"
    write_csv(path, [row], REPORT_FIELDS)
    text = path.read_text().splitlines()
    assert text[0] == ("graph,engine,batch_fraction,threads,seed,iterations,seconds,error,"
                       "affected_initial,affected_total,converged")
    got = read_csv(path)[0]
    assert got["converged"] == "true" and got["affected_initial"] == ""
    assert float(got["error"]) == 3.5e-11


def test_geometric_mean_by():
    rows = [dict(e="a", seconds=1.0), dict(e="a", seconds=4.0), dict(e="b", seconds=3.0)]
    out = geometric_mean_by(rows, ["e"])
    assert out[("a",)] == pytest.approx(2.0) and out[("b",)] == pytest.approx(3.0)


def test_stability_static_base():
    g = random_graph(6, 400, 5)
    assert stability_roundtrip(g, 0.0, "df-lf", CFG, base="static") == 0.0
    # two independent convergence errors can add up, so only the looser bound holds here
    assert stability_roundtrip(g, 1e-2, "nd-bb", CFG, seed=1, base="static") < 2e-9
    with pytest.raises(ValueError):
        stability_roundtrip(g, 0.0, "df-lf", CFG, base="other")
