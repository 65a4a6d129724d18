"""White-box concealment by coordinate descent on the detector's own error.

The attacker holds a copy of the detector and, for each anomalous sample,
repeatedly picks the channel with the worst squared residual, tries a grid
of plausible replacement values for it, and keeps the best strict
improvement. The loop stops when the error drops below the alarm
threshold, when patience consecutive proposals fail to improve, or when
the mutation budget runs out. Whatever happens, the emitted sample never
scores worse than the raw one.
"""
import numpy as np

from concealab.attacks import (IterativeBudget, conceal_series_iterative,
                               unconstrained, partial)
from concealab.detector import build_detector, detect_series
from concealab.evaluation import attack_recall
from concealab.nn import TrainConfig
from concealab.simulator import (AnomalyScenario, PlantConfig, inject_anomaly,
                                 sim_schema, simulate_normal)

plant = PlantConfig(seed=0)
normal = simulate_normal(plant, 6000)
schema = sim_schema(plant).with_ranges_from(normal.values)
n = len(schema)

scenarios = (
    AnomalyScenario("force-actuator-on", "PU1", 400, 48, 0.0),
    AnomalyScenario("force-actuator-off", "PU2", 800, 48, 0.0),
    AnomalyScenario("force-actuator-on", "PU3", 1200, 48, 0.0),
)
attacked = inject_anomaly(PlantConfig(seed=1), scenarios, 1600)
detector, _ = build_detector("dense", normal, TrainConfig(seed=0), W=3)
original = attack_recall(detector, attacked)
print(f"raw fault recall: {original:.4f}  (theta = {detector.theta:.3e})")

budget = IterativeBudget(patience=15, budget=200, grid=50)
concealed, log, results = conceal_series_iterative(
    detector, attacked, unconstrained(n), budget, schema)

solved = sum(r.solved for r in results)
iters = np.array([r.iterations for r in results])
before = np.array([r.eps_before for r in results])
after = np.array([r.eps_after for r in results])
print(f"\n{len(results)} anomalous samples processed")
print(f"solved (error pushed below theta): {solved} ({solved / len(results):.1%})")
print(f"iterations per sample: median {np.median(iters):.0f}, max {iters.max()}")
print(f"mean error {before.mean():.3e} -> {after.mean():.3e} "
      f"({(1 - after.mean() / before.mean()):.1%} reduction)")
assert np.all(after <= before), "non-regression guarantee violated"

recall = attack_recall(detector, concealed, attacked.labels)
print(f"concealed recall: {recall:.4f}")

# the same attack through a keyhole: only PLC2's two writable analog
# channels, so most of the anomaly is out of reach
write = (schema.index("L_T3"), schema.index("P_J3"))
concealed_c, _, results_c = conceal_series_iterative(
    detector, attacked, partial(n, write), budget, schema)
solved_c = sum(r.solved for r in results_c)
recall_c = attack_recall(detector, concealed_c, attacked.labels)
print(f"\nrestricted to writes on L_T3 and P_J3: solved {solved_c} "
      f"of {len(results_c)}, recall {recall_c:.4f}")
print("(a keyhole attacker can only fix what it can touch, but the "
      "guarantee still holds: no edited sample scores worse)")

trace_raw = detect_series(detector, attacked)
trace_con = detect_series(detector, concealed)
t = max(results, key=lambda r: r.eps_before).t
edited = [schema.names[ch] for (tt, ch, _, _) in log.entries if tt == t]
print(f"\nworst sample t={t}: epsilon {trace_raw.epsilon[t]:.3e} -> "
      f"{trace_con.epsilon[t]:.3e}, edits {edited}")
