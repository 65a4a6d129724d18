"""Train a reconstruction-error detector on normal plant data.

An undercomplete autoencoder learns to reproduce each normalized sensor
row; the alarm threshold theta is the 99.5th percentile of its squared
reconstruction error on the training period, and at detection time the
error is smoothed over a trailing window of W steps before comparison.
"""
from pathlib import Path

import numpy as np

from concealab.detector import build_detector, detect_series
from concealab.model_io import save_detector
from concealab.nn import TrainConfig
from concealab.simulator import (AnomalyScenario, PlantConfig, inject_anomaly,
                                 simulate_normal)

OUT = Path("demo_out")
OUT.mkdir(exist_ok=True)

normal = simulate_normal(PlantConfig(seed=0), 6000)
held_out = simulate_normal(PlantConfig(seed=2), 3000)

detector, hist = build_detector("dense", normal, TrainConfig(seed=0), W=3)
print(f"trained {hist.epochs_run} epochs on {hist.n_train} rows "
      f"({hist.n_val} validation), best val loss {hist.best_val:.3e}")
print(f"alarm threshold theta = {detector.theta:.3e} "
      f"(Q99.5 of training errors, smoothing W={detector.window})")

trace = detect_series(detector, held_out)
print(f"\nheld-out normal data: FPR {trace.labels.mean():.4f} "
      f"({int(trace.labels.sum())} of {trace.labels.size} steps flagged)")

scenarios = (
    AnomalyScenario("force-actuator-on", "PU1", 400, 48, 0.0),
    AnomalyScenario("force-actuator-off", "PU2", 800, 48, 0.0),
    AnomalyScenario("sensor-offset", "L_T2", 1200, 48, 1.2),
)
attacked = inject_anomaly(PlantConfig(seed=1), scenarios, 1600)
trace = detect_series(detector, attacked)
truth = attacked.labels.astype(bool)
recall = trace.labels[truth].mean()
print(f"faulty data: recall {recall:.4f} on {int(truth.sum())} anomalous steps")

# which channels carry the evidence during the first fault
window = slice(400, 448)
mean_sq = (trace.channel_errors[window] ** 2).mean(axis=0)
order = np.argsort(mean_sq)[::-1][:5]
print("\ntop residual channels while PU1 is forced on:")
for j in order:
    print(f"  {attacked.names[j]:>6}  mean squared residual {mean_sq[j]:.3e}")

save_detector(detector, OUT / "detector.model")
print(f"\nwrote detector.model to {OUT}/")
