import numpy as np
import pytest

from ncfv.errors import IoError
from ncfv.io import (ErrorTable, Snapshot, fmt, read_error_table, read_snapshot_csv,
                     write_error_table, write_gnuplot, write_snapshot_csv)


def test_fmt_round_trips_doubles(rng):
    vals = np.concatenate([rng.normal(size=200) * 10.0 ** rng.integers(-300, 300, 200),
                           [0.1, 1 / 3, np.pi, 5e-324, 1.7976931348623157e308]])
    for v in vals:
        assert float(fmt(v)) == v


def test_snapshot_with_exact_has_five_columns(tmp_path):
    x = np.linspace(0.05, 0.95, 10)
    vals = np.stack([np.sin(x), np.cos(x)], -1)
    snap = Snapshot(x, vals, vals + 1e-17, time=0.3)
    p = tmp_path / "s.csv"
    write_snapshot_csv(snap, p)
    raw = p.read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")
    assert raw.decode("utf-8").splitlines()[0] == "x,u1,u2,exact1,exact2"
    back = read_snapshot_csv(p)
    assert np.array_equal(back.x, x) and np.array_equal(back.values, vals)
    assert np.array_equal(back.exact, snap.exact)


def test_snapshot_without_exact(tmp_path):
    p = tmp_path / "s.csv"
    write_snapshot_csv(Snapshot([0.5], [[1.0, 2.0, 3.0]]), p)
    assert p.read_text().splitlines() == ["x,u1,u2,u3", "0.5,1,2,3"]
    assert read_snapshot_csv(p).exact is None


def test_empty_snapshot_writes_header_only(tmp_path):
    p = tmp_path / "e.csv"
    write_snapshot_csv(None, p, n_vars=2)
    assert p.read_bytes() == b"x,u1,u2\n"


def test_error_table_orders():
    t = ErrorTable([100, 200, 400, 300], [[4e-2, 1e-2], [1e-2, 5e-3], [2.5e-3, 2.5e-3],
                                          [1.0, 1.0]])
    o = t.orders
    assert np.isnan(o[0]).all() and np.isnan(o[3]).all()
    np.testing.assert_allclose(o[1], [2.0, 1.0])
    np.testing.assert_allclose(o[2], [2.0, 1.0])


def test_error_table_file(tmp_path):
    t = ErrorTable([100, 200], [[0.1, 0.2], [0.025, 0.1]])
    p = tmp_path / "d" / "err.csv"
    write_error_table(t, p)
    lines = p.read_text().splitlines()
    assert lines[0] == "cells,err_1,err_2,order_1,order_2"
    assert lines[1] == "100,0.10000000000000001,0.20000000000000001,,"
    assert lines[2].endswith(",2,1")
    back = read_error_table(p)
    assert back.cells == [100, 200] and np.array_equal(back.errors, t.errors)


def test_write_errors_raise_ioerror(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(IoError):
        write_snapshot_csv(None, blocker / "s.csv")
    with pytest.raises(IoError):
        write_error_table(ErrorTable([10], [[1.0]]), blocker / "e.csv")
    with pytest.raises(IoError):
        read_snapshot_csv(tmp_path / "missing.csv")


def test_gnuplot_script_references_csv(tmp_path):
    p = tmp_path / "plot.gp"
    write_gnuplot(p, ["a.csv", "b.csv"], ["h", "q"], "t", with_exact=True)
    text = p.read_text()
    assert "'a.csv' using 1:2" in text and "'b.csv' using 1:3" in text
    assert "column('exact2')" in text
