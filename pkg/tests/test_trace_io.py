"""
Unit tests for trace and summary CSV files
"""

import numpy as np
import pandas as pd
import pytest

from core.diagnostics import ReplicateSummary
from core.samplers import Trace
from core.trace_io import read_trace_csv, trace_columns, write_summary_csv, write_trace_csv


@pytest.fixture
def trace():
    rng = np.random.default_rng(0)
    states = rng.standard_normal((5, 3)) * np.array([1e-12, 1.0, 1e8])
    return Trace(
        states=states,
        log_pi=np.array([-0.1, -1.0 / 3.0, -2.5, -np.pi, -1e-300]),
        iterations=np.array([2, 4, 6, 8, 10]),
        stage1_accept=np.array([True, False, True, True, False]),
        stage2_accept=np.array([True, False, False, True, False]),
        expensive_eval=np.array([True, False, True, True, False]),
        wall_seconds=1.5,
    )


class TestTraceCsv:
    """Test write_trace_csv() and read_trace_csv()"""

    def test_columns(self):
        """Test the header order"""
        assert trace_columns(2) == ["iter", "x_1", "x_2", "log_pi", "stage1_accept", "stage2_accept", "expensive_eval"]

    def test_crlf_rows(self, trace, tmp_path):
        """Test every row ends with CRLF"""
        path = write_trace_csv(trace, tmp_path / "out" / "trace.csv")
        raw = path.read_bytes()
        assert raw.count(b"\r\n") == 6
        assert raw.replace(b"\r\n", b"").count(b"\n") == 0

    def test_exact_floats(self, trace, tmp_path):
        """Test states and log densities read back bit-for-bit"""
        frame = read_trace_csv(write_trace_csv(trace, tmp_path / "trace.csv"))

        assert list(frame.columns) == trace_columns(3)
        assert np.array_equal(frame[["x_1", "x_2", "x_3"]].to_numpy(), trace.states)
        assert np.array_equal(frame["log_pi"].to_numpy(), trace.log_pi)
        assert frame["iter"].tolist() == [2, 4, 6, 8, 10]

    def test_flags_as_integers(self, trace, tmp_path):
        """Test flags are written as 0/1"""
        frame = read_trace_csv(write_trace_csv(trace, tmp_path / "trace.csv"))
        assert frame["stage1_accept"].tolist() == [1, 0, 1, 1, 0]
        assert frame["stage2_accept"].tolist() == [1, 0, 0, 1, 0]


class TestSummaryCsv:
    """Test write_summary_csv()"""

    def test_replicate_rows(self, tmp_path):
        """Test objects with as_row() become rows"""
        rows = [ReplicateSummary(100, 1.5, 0.25), ReplicateSummary(200, 1.25, 0.125)]
        frame = pd.read_csv(write_summary_csv(rows, tmp_path / "summary.csv"))
        assert frame.to_dict("records") == [
            {"n": 100, "mean": 1.5, "sd": 0.25},
            {"n": 200, "mean": 1.25, "sd": 0.125},
        ]

    def test_frame(self, tmp_path):
        """Test a frame is written unchanged"""
        source = pd.DataFrame({"thinning": [1, 10], "redpm": [2.0, 3.5]})
        frame = pd.read_csv(write_summary_csv(source, tmp_path / "redpm.csv"))
        assert frame.equals(source)

    def test_empty_trace(self, tmp_path):
        """Test a trace with no retained rows gives a header-only file"""
        empty = Trace(
            states=np.empty((0, 2)),
            log_pi=np.empty(0),
            iterations=np.empty(0, dtype=int),
            stage1_accept=np.empty(0, dtype=bool),
            stage2_accept=np.empty(0, dtype=bool),
            expensive_eval=np.empty(0, dtype=bool),
            wall_seconds=0.0,
        )
        path = write_trace_csv(empty, tmp_path / "empty.csv")
        assert path.read_bytes() == b"iter,x_1,x_2,log_pi,stage1_accept,stage2_accept,expensive_eval\r\n"
