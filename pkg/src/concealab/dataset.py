"""Time-series container, CSV round trip, normalization and windowing.

CSV layout: a timestamp column (default DATETIME), one column per channel,
and an optional trailing ATT_FLAG label column (1 under attack, 0 normal,
-999 unlabeled, mapped to 0 with a warning). Floats are written with %.17g
so a save/load round trip reproduces float64 values bit for bit.
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from datetime import datetime, timedelta

import numpy as np

from .errors import DataError, DimensionError

TIMESTAMP_COL = "DATETIME"
LABEL_COL = "ATT_FLAG"


@dataclass
class TimeSeries:
    """A named multivariate series with optional attack labels."""

    names: list[str]
    values: np.ndarray                      # (rows, channels) float64
    timestamps: list[str] = field(default_factory=list)
    labels: np.ndarray | None = None        # (rows,) int, 0 normal / 1 attack
    interval_s: float = 900.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise DimensionError(f"values must be 2-D, got shape {self.values.shape}")
        if self.values.shape[1] != len(self.names):
            raise DimensionError(
                f"{len(self.names)} names but {self.values.shape[1]} value columns")
        if not self.timestamps:
            self.timestamps = make_timestamps(self.values.shape[0], self.interval_s)
        if len(self.timestamps) != self.values.shape[0]:
            raise DimensionError("timestamps and values disagree on row count")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.labels.shape != (self.values.shape[0],):
                raise DimensionError("labels must be one int per row")

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def n_channels(self) -> int:
        return self.values.shape[1]

    def slice(self, start: int, stop: int) -> "TimeSeries":
        return TimeSeries(
            names=self.names,
            values=self.values[start:stop].copy(),
            timestamps=self.timestamps[start:stop],
            labels=None if self.labels is None else self.labels[start:stop].copy(),
            interval_s=self.interval_s,
        )

    def with_values(self, values: np.ndarray) -> "TimeSeries":
        """Same metadata, new matrix (used by attacks to emit tampered copies)."""
        return TimeSeries(self.names, np.asarray(values, dtype=np.float64),
                          list(self.timestamps),
                          None if self.labels is None else self.labels.copy(),
                          self.interval_s)


def make_timestamps(n: int, interval_s: float, start: str = "2026-01-01 00:00:00") -> list[str]:
    t0 = datetime.fromisoformat(start)
    step = timedelta(seconds=float(interval_s))
    return [(t0 + i * step).strftime("%Y-%m-%d %H:%M:%S") for i in range(n)]


# -- CSV --------------------------------------------------------------------

def load_csv(path, expected_names: list[str] | None = None) -> TimeSeries:
    """Read a series CSV. Column names are whitespace-stripped; the label
    column is recognized by name and -999 entries are treated as unlabeled
    normal rows (a warning is emitted once per file)."""
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        has_ts = bool(header) and header[0].upper() == TIMESTAMP_COL
        has_label = bool(header) and header[-1].upper() == LABEL_COL
        lo = 1 if has_ts else 0
        hi = len(header) - 1 if has_label else len(header)
        names = header[lo:hi]
        if not names:
            raise DataError(f"{path}: no channel columns")

        timestamps: list[str] = []
        rows: list[list[float]] = []
        labels: list[int] = []
        unlabeled = 0
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(rec)}")
            if has_ts:
                timestamps.append(rec[0].strip())
            try:
                rows.append([float(c) for c in rec[lo:hi]])
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: non-numeric value ({exc})") from None
            if has_label:
                raw = float(rec[-1])
                if raw == -999:
                    unlabeled += 1
                    labels.append(0)
                elif raw in (0.0, 1.0):
                    labels.append(int(raw))
                else:
                    raise DataError(f"{path}:{lineno}: label must be 0, 1 or -999, got {raw}")
    if unlabeled:
        warnings.warn(f"{path}: {unlabeled} rows labeled -999 treated as normal",
                      stacklevel=2)
    values = np.array(rows, dtype=np.float64)
    if values.size == 0:
        raise DataError(f"{path}: no data rows")
    if expected_names is not None:
        # match case-insensitively, then reorder columns to the expected order
        lower = {n.lower(): i for i, n in enumerate(names)}
        missing = [n for n in expected_names if n.lower() not in lower]
        if missing:
            raise DataError(f"{path}: missing channel columns: {', '.join(missing)}")
        order = [lower[n.lower()] for n in expected_names]
        values = values[:, order]
        names = list(expected_names)
    return TimeSeries(names=names, values=values,
                      timestamps=timestamps or make_timestamps(len(values), 900.0),
                      labels=np.array(labels, dtype=np.int64) if has_label else None)


def _fmt(x: float) -> str:
    return "%.17g" % x


def save_csv(series: TimeSeries, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        header = [TIMESTAMP_COL] + series.names
        if series.labels is not None:
            header.append(LABEL_COL)
        writer.writerow(header)
        for i in range(len(series)):
            rec = [series.timestamps[i]] + [_fmt(v) for v in series.values[i]]
            if series.labels is not None:
                rec.append(str(int(series.labels[i])))
            writer.writerow(rec)


# -- normalization ----------------------------------------------------------

class Normalizer:
    """Per-channel min-max scaling to [0, 1].

    Constant channels (max == min) map to 0.5 everywhere and are inverted
    back to their constant. Out-of-range inputs are scaled, not clamped, so
    anomalies keep their magnitude.
    """

    def __init__(self):
        self.vmin: np.ndarray | None = None
        self.vmax: np.ndarray | None = None

    @property
    def fitted(self) -> bool:
        return self.vmin is not None

    def fit(self, matrix: np.ndarray) -> "Normalizer":
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] == 0:
            raise DimensionError("normalizer needs a non-empty 2-D matrix")
        if not np.isfinite(matrix).all():
            raise DataError("normalizer input contains NaN or inf")
        self.vmin = matrix.min(axis=0)
        self.vmax = matrix.max(axis=0)
        return self

    def _check(self, matrix: np.ndarray) -> np.ndarray:
        if not self.fitted:
            raise DataError("normalizer used before fit")
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.shape[-1] != self.vmin.shape[0]:
            raise DimensionError(
                f"matrix has {matrix.shape[-1]} channels, normalizer has {self.vmin.shape[0]}")
        return matrix

    def transform(self, matrix: np.ndarray) -> np.ndarray:
        matrix = self._check(matrix)
        span = self.vmax - self.vmin
        const = span == 0
        safe = np.where(const, 1.0, span)
        out = (matrix - self.vmin) / safe
        if const.any():
            out[..., const] = 0.5
        return out

    def inverse_transform(self, matrix: np.ndarray) -> np.ndarray:
        matrix = self._check(matrix)
        span = self.vmax - self.vmin
        out = matrix * span + self.vmin
        const = span == 0
        if const.any():
            out[..., const] = self.vmin[const]
        return out

    def to_dict(self) -> dict:
        return {"vmin": self.vmin.tolist(), "vmax": self.vmax.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Normalizer":
        nz = cls()
        nz.vmin = np.asarray(d["vmin"], dtype=np.float64)
        nz.vmax = np.asarray(d["vmax"], dtype=np.float64)
        return nz


# -- windowing and splits ----------------------------------------------------

def window(matrix: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Sliding windows of m+1 consecutive rows.

    Returns (windows, targets): windows[i] = matrix[i : i+m+1] with shape
    (rows-m, m+1, channels); targets[i] is the final row of window i, the
    observation a reconstruction model must reproduce.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2:
        raise DimensionError("window() needs a 2-D matrix")
    if m < 0:
        raise DimensionError(f"history length m must be >= 0, got {m}")
    rows = matrix.shape[0]
    if rows <= m:
        raise DimensionError(f"need more than m={m} rows, got {rows}")
    idx = np.arange(rows - m)[:, None] + np.arange(m + 1)[None, :]
    wins = matrix[idx]
    return wins, matrix[m:].copy()


def split_train_val(matrix: np.ndarray, ratio: float = 2.0 / 3.0) -> tuple[np.ndarray, np.ndarray]:
    """Contiguous head/tail split; no shuffling, series order is meaningful."""
    matrix = np.asarray(matrix)
    if not 0.0 < ratio < 1.0:
        raise DataError(f"split ratio must be in (0, 1), got {ratio}")
    n = matrix.shape[0]
    n_train = int(round(n * ratio))
    n_train = min(max(n_train, 1), n - 1)
    return matrix[:n_train], matrix[n_train:]


def subsample_fraction(matrix: np.ndarray, p: float, mode: str = "prefix",
                       rng: np.random.Generator | None = None) -> np.ndarray:
    """Keep ceil(p * rows) rows: the leading block ("prefix") or a sorted
    random sample without replacement ("random")."""
    matrix = np.asarray(matrix)
    if not 0.0 < p <= 1.0:
        raise DataError(f"fraction must be in (0, 1], got {p}")
    rows = matrix.shape[0]
    keep = int(math.ceil(p * rows))
    if mode == "prefix":
        return matrix[:keep]
    if mode == "random":
        if rng is None:
            rng = np.random.default_rng(0)
        idx = np.sort(rng.choice(rows, size=keep, replace=False))
        return matrix[idx]
    raise DataError(f"unknown subsample mode {mode!r}")
