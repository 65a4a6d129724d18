"""Reconstruction-error anomaly detector.

A trained network reconstructs the current reading vector from its input
window; the per-step score is the mean squared residual in normalized units.
The threshold is the 99.5th percentile of those scores on the training
series, and classification applies a trailing mean of width W before the
strict comparison against the threshold.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import Normalizer, TimeSeries, window
from .errors import DataError, DimensionError, SpecError
from .nn import (NetworkSpec, TrainConfig, TrainHistory, detector_conv_spec,
                 detector_dense_spec, detector_lstm_spec, predict, train)

DEFAULT_PERCENTILE = 99.5


@dataclass
class Detector:
    """Immutable after build; safe to share across attack runs."""

    spec: NetworkSpec
    params: dict
    normalizer: Normalizer
    theta: float
    window: int                      # trailing-mean width W
    names: list[str] = field(default_factory=list)

    @property
    def history(self) -> int:
        """Rows of context before the current one (m); input window is m+1."""
        return self.spec.window - 1

    @property
    def n_channels(self) -> int:
        return self.spec.channels


@dataclass
class DetectionTrace:
    timestamps: list[str]
    epsilon: np.ndarray            # raw per-step score
    epsilon_smoothed: np.ndarray   # trailing W-mean of epsilon
    labels: np.ndarray             # 1 under attack, 0 safe
    channel_errors: np.ndarray     # signed residuals target - output, (steps, channels)
    theta: float
    window: int

    def __len__(self) -> int:
        return len(self.epsilon)

    def to_csv(self, path, channel_names: list[str] | None = None) -> None:
        """timestamp, epsilon, epsilon_smoothed, label, then one residual
        column per channel when names are given."""
        import csv

        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            head = ["timestamp", "epsilon", "epsilon_smoothed", "label"]
            if channel_names:
                head += [f"e_{n}" for n in channel_names]
            writer.writerow(head)
            for i in range(len(self)):
                rec = [self.timestamps[i], "%.17g" % self.epsilon[i],
                       "%.17g" % self.epsilon_smoothed[i], str(int(self.labels[i]))]
                if channel_names:
                    rec += ["%.17g" % v for v in self.channel_errors[i]]
                writer.writerow(rec)


def reconstruction_error(detector: Detector, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Residuals and scores for a batch of normalized windows.

    Returns (e, eps): e[i] = target row - reconstruction, eps[i] = mean(e[i]**2).
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 2:
        X = X[:, None, :]
    if X.shape[-1] != detector.n_channels:
        raise DimensionError(
            f"sample has {X.shape[-1]} channels, detector expects {detector.n_channels}")
    out = predict(detector.spec, detector.params, X)
    e = X[:, -1, :] - out
    return e, np.mean(e * e, axis=1)


def calibrate_threshold(errors, percentile: float = DEFAULT_PERCENTILE) -> float:
    """Linear-interpolation percentile (rank = q/100 * (N-1)) of the scores."""
    errors = np.asarray(errors, dtype=np.float64)
    if errors.size == 0:
        raise DataError("cannot calibrate a threshold from zero scores")
    return float(np.percentile(errors, percentile))


def smooth_errors(eps: np.ndarray, W: int) -> np.ndarray:
    """Trailing mean over the last W steps; early steps average what exists."""
    if W < 1:
        raise SpecError(f"window W must be >= 1, got {W}")
    eps = np.asarray(eps, dtype=np.float64)
    if W == 1:
        return eps.copy()
    c = np.cumsum(eps)
    out = np.empty_like(eps)
    out[:W] = c[:W] / np.arange(1, min(W, eps.size) + 1)
    if eps.size > W:
        out[W:] = (c[W:] - c[:-W]) / W
    return out


def classify(eps: np.ndarray, theta: float, W: int) -> np.ndarray:
    """1 where the trailing W-mean strictly exceeds theta, else 0."""
    return (smooth_errors(eps, W) > theta).astype(np.int64)


def detect_series(detector: Detector, series: TimeSeries) -> DetectionTrace:
    """Score every row of a series.

    The first history rows have no complete window; their windows are filled
    by repeating the first reading, so the trace covers the whole series.
    """
    if series.n_channels != detector.n_channels:
        raise DimensionError(
            f"series has {series.n_channels} channels, detector expects {detector.n_channels}")
    if detector.names and series.names != detector.names:
        raise DataError("series channel names do not match the detector's")
    m = detector.history
    N = detector.normalizer.transform(series.values)
    if m > 0:
        N = np.vstack([np.repeat(N[:1], m, axis=0), N])
    X, _ = window(N, m)
    e, eps = reconstruction_error(detector, X)
    smoothed = smooth_errors(eps, detector.window)
    labels = (smoothed > detector.theta).astype(np.int64)
    return DetectionTrace(list(series.timestamps), eps, smoothed, labels, e,
                          detector.theta, detector.window)


class DetectorStream:
    """Online wrapper producing the same labels as detect_series, one row at
    a time. History windows and the trailing mean are maintained causally;
    before enough rows arrived, the first row fills the missing history."""

    def __init__(self, detector: Detector):
        self.detector = detector
        self._ctx: list[np.ndarray] = []      # normalized rows, most recent last
        self._eps_hist: list[float] = []

    def push(self, row: np.ndarray) -> tuple[float, float, int]:
        """Feed one raw reading; returns (eps, eps_smoothed, label)."""
        det = self.detector
        xn = det.normalizer.transform(np.asarray(row, dtype=np.float64)[None])[0]
        m = det.history
        if not self._ctx:
            ctx = [xn] * m
        else:
            ctx = self._ctx[-m:] if m else []
            if len(ctx) < m:
                ctx = [self._ctx[0]] * (m - len(ctx)) + ctx
        win = np.asarray([*ctx, xn])[None] if m else xn[None, None, :]
        _, eps = reconstruction_error(det, win)
        eps = float(eps[0])
        self._ctx.append(xn)
        self._eps_hist.append(eps)
        tail = self._eps_hist[-det.window:]
        smoothed = float(np.mean(tail))
        return eps, smoothed, int(smoothed > det.theta)


def build_detector(kind: str, normal: TimeSeries, cfg: TrainConfig | None = None,
                   W: int = 1, spec: NetworkSpec | None = None,
                   ) -> tuple[Detector, TrainHistory]:
    """Train a detector on normal-operation data.

    Normalization stats come from the leading training split only; the
    threshold is calibrated on scores over the full normal series. Data
    carrying attack labels is rejected, the detector must never see attacks.
    """
    cfg = cfg or TrainConfig()
    if normal.labels is not None and (normal.labels != 0).any():
        raise DataError("detector training data contains attack-labeled rows")
    if W < 1:
        raise SpecError(f"window W must be >= 1, got {W}")
    n = normal.n_channels
    if spec is None:
        if kind == "dense":
            spec = detector_dense_spec(n)
        elif kind == "lstm":
            spec = detector_lstm_spec(n)
        elif kind == "conv":
            spec = detector_conv_spec(n)
        else:
            raise SpecError(f"unknown detector kind {kind!r}")
    elif spec.channels != n:
        raise DimensionError(f"spec expects {spec.channels} channels, data has {n}")

    rows = normal.values.shape[0]
    n_head = min(max(int(round(rows * (1.0 - cfg.val_ratio))), 1), rows - 1)
    normalizer = Normalizer().fit(normal.values[:n_head])
    N = normalizer.transform(normal.values)

    X, Y = window(N, spec.window - 1)
    params, hist = train(spec, X, Y, cfg)

    det = Detector(spec, params, normalizer, 0.0, W, list(normal.names))
    _, eps = reconstruction_error(det, X)
    det.theta = calibrate_threshold(eps)
    return det, hist
