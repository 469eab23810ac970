"""
CSV ingestion and atomic output

Input schemas:
    survival curve: time_months, survival_prob[, std_err]
    waterfall:      pchg
Lines starting with '#' are comments (fixture provenance, output headers).
Row numbers in errors count data rows only, starting at 1.
"""

import logging
import os
import pathlib
import tempfile
from typing import Iterable, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..exceptions import EmptySample, InvariantViolation, ParseError
from ..models.base import CurveMetadata, SurvivalCurve, WaterfallSample

logger = logging.getLogger(__name__)

PathLike = Union[str, pathlib.Path]

SURVIVAL_COLUMNS = ("time_months", "survival_prob")
OPTIONAL_SURVIVAL_COLUMNS = ("std_err",)
WATERFALL_COLUMN = "pchg"
FLOAT_FORMAT = "%.10g"


def _read_table(path: PathLike) -> pd.DataFrame:
    path = pathlib.Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"No such file: {path}")
    try:
        frame = pd.read_csv(path, comment="#", dtype=str, skip_blank_lines=True)
    except pd.errors.EmptyDataError:
        raise ParseError(f"{path.name} is empty")
    except pd.errors.ParserError as e:
        raise ParseError(f"{path.name} is not valid CSV: {e}")
    frame.columns = [str(c).strip() for c in frame.columns]
    return frame


def _numeric_column(frame: pd.DataFrame, column: str) -> np.ndarray:
    raw = frame[column]
    values = pd.to_numeric(raw.str.strip(), errors="coerce")
    bad = np.flatnonzero(values.isna().to_numpy())
    if bad.size:
        i = int(bad[0])
        raise ParseError(f"{column} value '{raw.iloc[i]}' is not a number", row=i + 1)
    return values.to_numpy(dtype=float)


def _check_columns(frame: pd.DataFrame, required: Sequence[str], optional: Sequence[str] = ()):
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise ParseError(f"missing column(s) {missing}; found {list(frame.columns)}")
    extra = [c for c in frame.columns if c not in required and c not in optional]
    if extra:
        raise ParseError(f"unexpected column(s) {extra}")


def load_survival_csv(path: PathLike) -> SurvivalCurve:
    """
    Load a tabulated survival curve

    Inserts (0, 1) when the file does not start at t = 0 and records that in
    ``metadata.inserted_origin``.

    Raises:
        ParseError: empty file, wrong columns, non-numeric cells
        InvariantViolation: negative times, times not increasing, probabilities
            outside [0, 1] or increasing, S(0) != 1
    """
    frame = _read_table(path)
    _check_columns(frame, SURVIVAL_COLUMNS, OPTIONAL_SURVIVAL_COLUMNS)
    if frame.empty:
        raise ParseError(f"{pathlib.Path(path).name} has no data rows")

    times = _numeric_column(frame, "time_months")
    probs = _numeric_column(frame, "survival_prob")
    std_err = _numeric_column(frame, "std_err") if "std_err" in frame.columns else None

    for i in range(times.size):
        row = i + 1
        if not np.isfinite(times[i]) or not np.isfinite(probs[i]):
            raise InvariantViolation("non-finite value", row=row)
        if times[i] < 0:
            raise InvariantViolation(f"negative time {times[i]}", row=row)
        if not 0.0 <= probs[i] <= 1.0:
            raise InvariantViolation(f"probability {probs[i]} outside [0, 1]", row=row)
        if i > 0 and times[i] <= times[i - 1]:
            raise InvariantViolation("times must be strictly increasing", row=row)
        if i > 0 and probs[i] > probs[i - 1]:
            raise InvariantViolation("survival probabilities must be nonincreasing", row=row)
        if std_err is not None and (not np.isfinite(std_err[i]) or std_err[i] < 0):
            raise InvariantViolation(f"std_err {std_err[i]} must be finite and >= 0", row=row)

    inserted = times[0] != 0.0
    if inserted:
        logger.info(f"{pathlib.Path(path).name}: inserted (0, 1) at the start of the curve")
        times = np.insert(times, 0, 0.0)
        probs = np.insert(probs, 0, 1.0)
        if std_err is not None:
            std_err = np.insert(std_err, 0, 0.0)
    elif abs(probs[0] - 1.0) > 1e-12:
        raise InvariantViolation(f"S(0) must be 1, got {probs[0]}", row=1)

    return SurvivalCurve(
        times=times,
        probs=probs,
        std_err=std_err,
        metadata=CurveMetadata(inserted_origin=inserted, source=str(path)),
    )


def load_waterfall_csv(path: PathLike, label: Optional[str] = None) -> WaterfallSample:
    """
    Load best % change from baseline, one patient per row

    Values below -100 are rejected, not clamped.

    Raises:
        ParseError: empty file, wrong column, non-numeric cells
        InvariantViolation: value below -100 or non-finite
        EmptySample: header without data rows
    """
    frame = _read_table(path)
    _check_columns(frame, (WATERFALL_COLUMN,))
    if frame.empty:
        raise EmptySample(f"{pathlib.Path(path).name} has no data rows")
    values = _numeric_column(frame, WATERFALL_COLUMN)
    return WaterfallSample(values=values, label=label or pathlib.Path(path).stem)


def _atomic_write(path: PathLike, write) -> pathlib.Path:
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            write(handle)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_frame_csv(
    frame: pd.DataFrame,
    path: PathLike,
    header: Optional[Mapping[str, object]] = None,
) -> pathlib.Path:
    """
    Write a table atomically (temp file + rename)

    ``header`` items become leading ``# key=value`` comment lines.
    """
    def write(handle):
        for key, value in (header or {}).items():
            handle.write(f"# {key}={value}\n")
        frame.to_csv(handle, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")

    return _atomic_write(path, write)


def key_value_frame(rows: Union[Mapping[str, object], Iterable[Tuple[str, object]]]) -> pd.DataFrame:
    items = rows.items() if isinstance(rows, Mapping) else rows
    return pd.DataFrame([(str(k), _format_value(v)) for k, v in items], columns=["key", "value"])


def _format_value(value) -> str:
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT % value
    return str(value)


def write_key_values(
    rows: Union[Mapping[str, object], Iterable[Tuple[str, object]]],
    path: PathLike,
) -> pathlib.Path:
    """Write (key, value) rows atomically"""
    return write_frame_csv(key_value_frame(rows), path)
