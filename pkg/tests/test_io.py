import numpy as np
import pytest

from dynrank.graph import BatchUpdate
from dynrank.io import (ParseError, detect_format, read_batch_csv, read_edge_list, read_edge_stream,
                        read_matrix_market, write_batch_csv)


def test_matrix_market_general(tmp_path):
    p = tmp_path / "g.mtx"
    p.write_text("%%MatrixMarket matrix coordinate pattern general\n% comment\n3 3 2\n1 2\n2 3\n")
    g = read_matrix_market(p)
    assert g.num_vertices == 3
    assert g.has_edge(0, 1) and g.has_edge(1, 2) and not g.has_edge(1, 0)
    assert g.has_all_self_loops()
    assert detect_format(p) == "mtx"


def test_matrix_market_symmetric_doubles_edges(tmp_path):
    p = tmp_path / "g.mtx"
    p.write_text("%%MatrixMarket matrix coordinate real symmetric\n3 3 2\n2 1 1.5\n3 2 0.5\n")
    g = read_matrix_market(p, add_self_loops=False)
    assert {tuple(e) for e in g.edges().tolist()} == {(1, 0), (0, 1), (2, 1), (1, 2)}


def test_matrix_market_bad_header(tmp_path):
    p = tmp_path / "g.mtx"
    p.write_text("%%MatrixMarket matrix array real general\n2 2\n")
    with pytest.raises(ParseError, match=r"line 1: expected '%%MatrixMarket matrix coordinate"):
        read_matrix_market(p)


def test_matrix_market_bad_entry_line(tmp_path):
    p = tmp_path / "g.mtx"
    p.write_text("%%MatrixMarket matrix coordinate pattern general\n3 3 2\n1 2\n2 x\n")
    with pytest.raises(ParseError) as info:
        read_matrix_market(p)
    assert info.value.lineno == 4


def test_edge_list_and_temporal_stream(tmp_path):
    p = tmp_path / "g.txt"
    p.write_text("# SNAP\n0 1\n1 2\n")
    assert detect_format(p) == "edgelist"
    g = read_edge_list(p)
    assert g.num_vertices == 3 and g.has_edge(1, 2)
    t = tmp_path / "t.txt"
    t.write_text("% temporal\n0 1 100\n1 2 105\n0 1 107\n")
    assert detect_format(t) == "temporal"
    edges, ts = read_edge_stream(t)
    assert edges.tolist() == [[0, 1], [1, 2], [0, 1]]
    assert ts.tolist() == [100, 105, 107]


def test_edge_list_parse_error_names_line(tmp_path):
    p = tmp_path / "g.txt"
    p.write_text("0 1\n\n2\n")
    with pytest.raises(ParseError) as info:
        read_edge_stream(p)
    assert info.value.lineno == 3


def test_batch_csv_roundtrip(tmp_path):
    b = BatchUpdate([(1, 2), (3, 4)], [(5, 6)])
    p = tmp_path / "b.csv"
    write_batch_csv(p, b)
    assert p.read_text().splitlines() == ["op,u,v", "D,1,2", "D,3,4", "I,5,6"]
    assert read_batch_csv(p) == b


def test_batch_csv_rejects_bad_op(tmp_path):
    p = tmp_path / "b.csv"
    p.write_text("op,u,v\nX,1,2\n")
    with pytest.raises(ParseError, match="op must be"):
        read_batch_csv(p)
