import csv

import numpy as np
import pytest

from driftgen.tabular import SourceDescriptor, Table, open_source, write_table


def csv_desc(path, **options):
    return SourceDescriptor(kind="csv", location=str(path), options=options)


def test_read_back_header(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("a,b\n1,x\n2,y\n3,z\n")
    t = open_source(csv_desc(p))
    assert t.row_count == 3
    assert t.column_names == ["a", "b"]
    assert t.column("a") == ["1", "2", "3"]
    assert t.name == "t"


def test_no_header_option(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("1,x\n2,y\n")
    t = open_source(csv_desc(p, header="false"))
    assert t.column_names == ["col0", "col1"]
    assert t.row_count == 2


def test_malformed_row_cites_index(tmp_path):
    p = tmp_path / "t.csv"
    lines = ["a,b"] + [f"{i},v{i}" for i in range(1, 5)] + ["lonely"] + ["6,v6"]
    p.write_text("\n".join(lines) + "\n")
    with pytest.raises(ValueError, match="row 5"):
        open_source(csv_desc(p))


def test_missing_file():
    with pytest.raises(FileNotFoundError):
        open_source(csv_desc("/nonexistent/nope.csv"))


def test_relational_stub_rejected_at_open():
    desc = SourceDescriptor(kind="relational-stub", location="db://host/table")
    with pytest.raises(NotImplementedError):
        open_source(desc)


def test_unknown_kind_rejected_at_parse():
    with pytest.raises(ValueError, match="unknown source kind"):
        SourceDescriptor(kind="parquet", location="x")


def test_null_token_round_trip(tmp_path):
    t = Table("t", [("num", ["1", None, "3"]), ("cat", ["x", "y", None])])
    p = tmp_path / "t.csv"
    write_table(t, p)
    back = open_source(csv_desc(p))
    assert back == t
    assert back.column("num")[1] is None


def test_custom_null_token(tmp_path):
    t = Table("t", [("num", ["1", None])])
    p = tmp_path / "t.csv"
    write_table(t, p, {"null_token": "NULL"})
    assert "NULL" in p.read_text()
    back = open_source(csv_desc(p, null_token="NULL"))
    assert back == t


def test_comma_value_is_quoted(tmp_path):
    t = Table("t", [("v", ["a,b", "plain"])])
    p = tmp_path / "t.csv"
    write_table(t, p)
    # independent reader agrees on the field split
    with open(p, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows == [["v"], ["a,b"], ["plain"]]
    assert '"a,b"' in p.read_text()


def test_quote_and_newline_round_trip(tmp_path):
    t = Table("t", [("v", ['say "hi"', "line1\nline2", "comma, inc"])])
    p = tmp_path / "t.csv"
    write_table(t, p)
    assert open_source(csv_desc(p)) == t


def test_empty_table_writes_header_only(tmp_path):
    t = Table("t", [("a", []), ("b", [])])
    p = tmp_path / "t.csv"
    write_table(t, p)
    assert p.read_text() == "a,b\n"


def test_write_is_byte_deterministic(tmp_path):
    t = Table("t", [("a", ["1", None, "x,y"])])
    p1, p2 = tmp_path / "1.csv", tmp_path / "2.csv"
    write_table(t, p1)
    write_table(t, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_round_trip_random_tables(tmp_path):
    rng = np.random.default_rng(5)
    alphabet = ["plain", "with,comma", 'with"quote', "with\nnewline", "7", "3.5", None]
    for case in range(5):
        cols = []
        for c in range(3):
            values = [alphabet[i] for i in rng.integers(0, len(alphabet), 20)]
            cols.append((f"c{c}", values))
        t = Table("rt", cols)
        p = tmp_path / f"rt{case}.csv"
        write_table(t, p)
        assert open_source(csv_desc(p)) == t


def test_table_invariants():
    with pytest.raises(ValueError, match="duplicate column"):
        Table("t", [("a", ["1"]), ("a", ["2"])])
    with pytest.raises(ValueError, match="ragged"):
        Table("t", [("a", ["1"]), ("b", ["1", "2"])])


def test_numeric_column_parses_datetime():
    t = Table("t", [("d", ["2020-01-01", "2020-01-02", None])])
    arr = t.numeric_column("d")
    assert arr[1] - arr[0] == 86400.0
    assert np.isnan(arr[2])
