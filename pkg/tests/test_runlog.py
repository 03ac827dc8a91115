import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cgacdts.sim.runlog import LogWriteError, RunLog, csv_body, export_csv, ik_columns, mpc_columns, read_csv


def test_column_layout():
    assert ik_columns(2) == ["iter", "cost", "constraint_norm", "q_1", "q_2",
                             "ee1_x", "ee1_y", "ee1_z", "ee2_x", "ee2_y", "ee2_z"]
    cols = mpc_columns(14)
    assert cols[:6] == ["tick", "time_s", "cost", "res_align", "res_axis", "res_dist"]
    assert len(cols) == 6 + 3 * 14 and cols[-1] == "u_14"


def test_empty_log_is_header_only(tmp_path):
    path = export_csv(RunLog("ik", ik_columns(1)), tmp_path / "empty.csv")
    lines = path.read_text().splitlines()
    assert len(lines) == 2 and lines[0].startswith("# ")
    meta, cols, values = read_csv(path)
    assert cols == ik_columns(1) and values.shape == (0, len(cols))
    assert "created" in meta


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=4, max_size=40))
def test_roundtrip_is_bit_exact(tmp_path_factory, values):
    n = len(values) // 4
    rows = [[i, *values[4 * i:4 * i + 3]] for i in range(n)]
    log = RunLog("ik", ["iter", "a", "b", "c"], rows, {"scenario": "x"})
    path = export_csv(log, tmp_path_factory.mktemp("rt") / "log.csv")
    meta, cols, data = read_csv(path)
    assert meta["scenario"] == "x"
    assert np.array_equal(data, np.array(rows, dtype=float).reshape(-1, 4))


def test_body_excludes_timestamp(tmp_path):
    log = RunLog("ik", ["iter", "a"], [[0, 0.1], [1, 1 / 3]], {"scenario": "x"})
    a = export_csv(log, tmp_path / "a.csv")
    b = export_csv(log, tmp_path / "b.csv", timestamp=False)
    assert a.read_bytes() != b.read_bytes()
    assert csv_body(a) == csv_body(b) == b"iter,a\n0,0.10000000000000001\n1,0.33333333333333331\n"


def test_write_error_names_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    target = blocker / "sub" / "log.csv"
    with pytest.raises(LogWriteError, match=str(blocker)):
        export_csv(RunLog("ik", ["iter"]), target)


def test_column_accessor():
    log = RunLog("ik", ["iter", "a"], [[0, 2.0], [1, 3.0]])
    assert np.array_equal(log.column("a"), [2.0, 3.0]) and len(log) == 2
