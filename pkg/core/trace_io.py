"""
Trace and Summary CSV Files

RFC-4180 CSV with CRLF row terminators, '.' as decimal separator and 17
significant digits for reals, so every float64 value reads back exactly.
Flags are written as 0/1.
"""

import logging
from pathlib import Path
from typing import Iterable, List, Union

import pandas as pd

from core.samplers import Trace

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
LINE_TERMINATOR = "\r\n"
FLAG_COLUMNS = ("stage1_accept", "stage2_accept", "expensive_eval")


def trace_columns(dim: int) -> List[str]:
    """Header of a trace CSV: iter, x_1..x_dim, log_pi and the three 0/1 flags"""
    return ["iter", *[f"x_{i + 1}" for i in range(dim)], "log_pi", *FLAG_COLUMNS]


def trace_frame(trace: Trace) -> pd.DataFrame:
    """Trace rows as a frame in file column order"""
    data = {"iter": trace.iterations.astype(int)}
    for i in range(trace.dim):
        data[f"x_{i + 1}"] = trace.states[:, i]
    data["log_pi"] = trace.log_pi
    for name in FLAG_COLUMNS:
        data[name] = getattr(trace, name).astype(int)
    return pd.DataFrame(data, columns=trace_columns(trace.dim))


def _write_frame(frame: pd.DataFrame, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator=LINE_TERMINATOR)
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def write_trace_csv(trace: Trace, path) -> Path:
    """
    Write a trace as CSV

    Args:
        trace: Chain output
        path: Destination file (parent directories are created)

    Returns:
        Path written

    Raises:
        OSError: If the file cannot be written
    """
    return _write_frame(trace_frame(trace), path)


def write_summary_csv(result: Union[pd.DataFrame, Iterable], path) -> Path:
    """
    Write an experiment summary as CSV

    Args:
        result: Frame, or rows as dicts or objects with an as_row() method
        path: Destination file

    Returns:
        Path written
    """
    if isinstance(result, pd.DataFrame):
        frame = result
    else:
        frame = pd.DataFrame([row.as_row() if hasattr(row, "as_row") else dict(row) for row in result])
    return _write_frame(frame, path)


def read_trace_csv(path) -> pd.DataFrame:
    """Read a trace CSV back with exact float parsing"""
    return pd.read_csv(path, float_precision="round_trip")
