"""Metrics, attack-effectiveness evaluation, sweep harness, latency timing.

Under-attack is the positive class everywhere. Attack effectiveness is
Recall restricted to ground-truth attack steps: the attacker wins by driving
it toward zero, and a constrained replay can push it above the baseline.
"""
from __future__ import annotations

import csv
import json
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .attacks import (AttackConstraint, ChangeLog, IterativeBudget, partial,
                      conceal_series_iterative, conceal_series_learning,
                      replay_attack, select_best_case_features,
                      topology_features, train_generator)
from .dataset import TimeSeries
from .detector import Detector, detect_series
from .errors import DataError, DimensionError, SpecError
from .nn import TrainConfig
from .schema import SensorSchema


@dataclass(frozen=True)
class Confusion:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def confusion(predicted, truth) -> Confusion:
    predicted = np.asarray(predicted).astype(bool)
    truth = np.asarray(truth).astype(bool)
    if predicted.shape != truth.shape:
        raise DimensionError(f"predicted {predicted.shape} vs truth {truth.shape}")
    return Confusion(
        tp=int(np.sum(predicted & truth)),
        fp=int(np.sum(predicted & ~truth)),
        tn=int(np.sum(~predicted & ~truth)),
        fn=int(np.sum(~predicted & truth)),
    )


def metrics(c: Confusion) -> dict:
    """Recall, Precision, Accuracy, FPR; None where the denominator is 0."""

    def ratio(num: int, den: int) -> float | None:
        return num / den if den else None

    return {
        "recall": ratio(c.tp, c.tp + c.fn),
        "precision": ratio(c.tp, c.tp + c.fp),
        "accuracy": ratio(c.tp + c.tn, c.total),
        "fpr": ratio(c.fp, c.fp + c.tn),
    }


def attack_windows(truth) -> list[tuple[int, int]]:
    """Contiguous [start, stop) runs of under-attack truth labels."""
    truth = np.asarray(truth).astype(bool)
    windows = []
    start = None
    for i, v in enumerate(truth):
        if v and start is None:
            start = i
        elif not v and start is not None:
            windows.append((start, i))
            start = None
    if start is not None:
        windows.append((start, len(truth)))
    return windows


def attack_recall(detector: Detector, series: TimeSeries,
                  truth=None) -> float | None:
    """Detector Recall over ground-truth attack steps only (normal steps are
    excluded; the attacker's goal is to push this to 0)."""
    if truth is None:
        truth = series.labels
    if truth is None:
        raise DataError("attack_recall needs ground-truth labels")
    truth = np.asarray(truth).astype(bool)
    if truth.shape != (len(series),):
        raise DimensionError("truth length does not match series")
    if not truth.any():
        return None
    trace = detect_series(detector, series)
    return float(np.mean(trace.labels[truth]))


def scenario_detection(predicted, truth) -> list[dict]:
    """Per contiguous attack window: detected iff >= 1 under-attack label
    falls inside it, plus the window's own recall."""
    predicted = np.asarray(predicted).astype(bool)
    out = []
    for start, stop in attack_windows(truth):
        hits = predicted[start:stop]
        out.append({"start": int(start), "stop": int(stop),
                    "detected": bool(hits.any()),
                    "recall": float(np.mean(hits))})
    return out


@dataclass
class EvalReport:
    counts: Confusion
    metric_values: dict
    attack_recall: float | None = None
    scenarios: list[dict] = field(default_factory=list)
    timing_mean_s: float | None = None
    timing_std_s: float | None = None
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "counts": {"tp": self.counts.tp, "fp": self.counts.fp,
                       "tn": self.counts.tn, "fn": self.counts.fn},
            "metrics": self.metric_values,
            "attack_recall": self.attack_recall,
            "scenarios": self.scenarios,
            "timing": {"mean_s": self.timing_mean_s, "std_s": self.timing_std_s},
            "meta": self.meta,
        }

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        return cls(counts=Confusion(**d["counts"]), metric_values=d["metrics"],
                   attack_recall=d.get("attack_recall"),
                   scenarios=d.get("scenarios", []),
                   timing_mean_s=d.get("timing", {}).get("mean_s"),
                   timing_std_s=d.get("timing", {}).get("std_s"),
                   meta=d.get("meta", {}))


def evaluate(detector: Detector, series: TimeSeries, truth=None,
             step_seconds=None, meta: dict | None = None) -> EvalReport:
    """Full-series evaluation: confusion over every step, metrics, Recall on
    attack steps, per-scenario detection, optional timing stats."""
    if truth is None:
        truth = series.labels
    if truth is None:
        raise DataError("evaluation needs ground-truth labels")
    truth = np.asarray(truth).astype(bool)
    trace = detect_series(detector, series)
    c = confusion(trace.labels, truth)
    rep = EvalReport(c, metrics(c), meta=dict(meta or {}))
    if truth.any():
        rep.attack_recall = float(np.mean(trace.labels[truth]))
        rep.scenarios = scenario_detection(trace.labels, truth)
    if step_seconds is not None and len(step_seconds):
        arr = np.asarray(step_seconds, dtype=np.float64)
        rep.timing_mean_s = float(arr.mean())
        rep.timing_std_s = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return rep


def measure_latency(fn, samples, warmup: int = 5) -> tuple[float, float]:
    """Per-sample wall-clock seconds of fn over samples (monotonic clock),
    after warmup untimed calls. Returns (mean, sample std)."""
    samples = list(samples)
    if not samples:
        raise DataError("measure_latency needs at least one sample")
    if len(samples) < 30:
        warnings.warn(f"only {len(samples)} samples; timing stats will be noisy",
                      stacklevel=2)
    for s in samples[:warmup]:
        fn(s)
    times = np.empty(len(samples))
    for i, s in enumerate(samples):
        t0 = time.perf_counter()
        fn(s)
        times[i] = time.perf_counter() - t0
    return float(times.mean()), float(times.std(ddof=1)) if times.size > 1 else 0.0


# -- sweep harness ------------------------------------------------------------

SWEEP_COLUMNS = ["attack", "k", "repetition", "recall", "mean_time_s", "std_time_s"]
FRACTION_COLUMNS = ["fraction", "repetition", "recall", "mean_time_s", "std_time_s"]


@dataclass
class SweepInputs:
    """Everything a sweep cell needs to run one attack end to end."""

    detector: Detector
    series: TimeSeries              # attacked series with ground-truth labels
    schema: SensorSchema            # carries normal ranges for the mutation grid
    normal: TimeSeries              # eavesdropped normal data (generator training)
    offset: int = 96                # replay offset in timesteps
    budget: IterativeBudget = field(default_factory=IterativeBudget)
    gen_cfg: TrainConfig = field(default_factory=TrainConfig)


def _run_attack_cell(kind: str, inputs: SweepInputs, constraint: AttackConstraint,
                     gen_cache: dict, seed: int, measure_time: bool,
                     ) -> tuple[TimeSeries, list[float]]:
    if kind == "replay":
        t0 = time.perf_counter()
        concealed, _ = replay_attack(inputs.series, inputs.offset, constraint)
        steps = max(int(np.sum(inputs.series.labels == 1)), 1)
        times = [(time.perf_counter() - t0) / steps] if measure_time else []
        return concealed, times
    if kind == "iterative":
        concealed, _, results = conceal_series_iterative(
            inputs.detector, inputs.series, constraint, inputs.budget, inputs.schema)
        return concealed, [r.seconds for r in results] if measure_time else []
    if kind == "learning":
        key = (constraint.read, constraint.fraction, seed)
        if key not in gen_cache:
            cfg = TrainConfig(**{**inputs.gen_cfg.to_dict(), "seed": seed})
            gen_cache[key], _ = train_generator(inputs.normal, constraint, cfg)
        concealed, _, times = conceal_series_learning(
            gen_cache[key], inputs.series, constraint, inputs.schema)
        return concealed, times if measure_time else []
    raise SpecError(f"unknown attack kind {kind!r}")


def sweep_constraints(inputs: SweepInputs, k_values, change_log: ChangeLog | None = None,
                      attacks=("replay", "iterative", "learning"),
                      selection: str = "best-case", mode: str = "partial",
                      repetitions: int = 1, base_seed: int = 0,
                      measure_time: bool = False) -> list[dict]:
    """Recall vs number of writable channels, long format.

    best-case selection takes the k most-modified channels of a prior
    unconstrained run's change log; topology selection iterates PLCs and
    k_values is read as PLC ids. Timing columns are filled only when
    measure_time is set (wall-clock numbers break bit-exact reproducibility).
    """
    n = inputs.series.n_channels
    truth = inputs.series.labels
    rows: list[dict] = []
    gen_cache: dict = {}

    cells: list[tuple[int, tuple[int, ...]]] = []
    if selection == "best-case":
        if change_log is None:
            raise SpecError("best-case selection needs an unconstrained change log")
        for k in k_values:
            if not 1 <= k <= n:
                raise SpecError(f"k={k} outside 1..{n}")
            cells.append((k, select_best_case_features(change_log.counts, k)))
    elif selection == "topology":
        for plc in k_values:
            _, write = topology_features(inputs.schema, plc)
            cells.append((len(write), write))
    else:
        raise SpecError(f"unknown selection {selection!r}")

    for kind in attacks:
        for k, write in cells:
            for rep in range(repetitions):
                seed = base_seed + rep
                if mode == "partial":
                    constraint = partial(n, write)
                elif mode == "full":
                    constraint = AttackConstraint("full", write, write)
                else:
                    raise SpecError(f"unknown constraint mode {mode!r}")
                concealed, times = _run_attack_cell(kind, inputs, constraint,
                                                    gen_cache, seed, measure_time)
                recall = attack_recall(inputs.detector, concealed, truth)
                row = {"attack": kind, "k": int(k), "repetition": rep,
                       "recall": recall, "mean_time_s": None, "std_time_s": None}
                if times:
                    arr = np.asarray(times)
                    row["mean_time_s"] = float(arr.mean())
                    row["std_time_s"] = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
                rows.append(row)
    return rows


def sweep_data_fraction(inputs: SweepInputs, fractions, repetitions: int = 10,
                        base_seed: int = 0, sample_mode: str = "random",
                        measure_time: bool = False) -> list[dict]:
    """Learning-attack Recall vs eavesdropped data fraction, long format.
    Each repetition reseeds the row subsample and generator training."""
    n = inputs.series.n_channels
    truth = inputs.series.labels
    rows: list[dict] = []
    for p in fractions:
        for rep in range(repetitions):
            seed = base_seed + rep
            constraint = AttackConstraint("unconstrained", tuple(range(n)),
                                          tuple(range(n)), p)
            cfg = TrainConfig(**{**inputs.gen_cfg.to_dict(), "seed": seed})
            gen, _ = train_generator(inputs.normal, constraint, cfg,
                                     sample_mode=sample_mode)
            concealed, _, times = conceal_series_learning(
                gen, inputs.series, constraint, inputs.schema)
            row = {"fraction": float(p), "repetition": rep,
                   "recall": attack_recall(inputs.detector, concealed, truth),
                   "mean_time_s": None, "std_time_s": None}
            if measure_time and times:
                arr = np.asarray(times)
                row["mean_time_s"] = float(arr.mean())
                row["std_time_s"] = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
            rows.append(row)
    return rows


def sweep_to_csv(rows: list[dict], path, columns=None) -> None:
    columns = columns or SWEEP_COLUMNS
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow(["" if row.get(c) is None else row.get(c) for c in columns])
