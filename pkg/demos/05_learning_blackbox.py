"""Black-box concealment with a learned generator, and how well it transfers.

This attacker never queries the detector. It eavesdrops normal traffic,
trains an overcomplete autoencoder to map sensor rows onto the manifold of
healthy data, and at attack time pushes every anomalous row through it.
Discrete channels are snapped to legal values and flows zeroed when their
actuator reads off. Because the generator models the data rather than any
particular detector, the same concealed stream degrades detectors the
attacker has never seen.
"""
import numpy as np

from concealab.attacks import conceal_series_learning, train_generator, unconstrained
from concealab.detector import build_detector
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

gen, hist = train_generator(normal, unconstrained(n), TrainConfig(seed=1))
print(f"generator: {n} channels -> hidden {gen.spec.hidden} -> {n}, "
      f"trained {hist.epochs_run} epochs, best val {hist.best_val:.3e}")

concealed, log, times = conceal_series_learning(gen, attacked,
                                                unconstrained(n), schema)
times = np.asarray(times)
print(f"concealed {len(times)} rows, {times.mean() * 1e3:.2f} ms per row")

print("\nhow the concealed stream fares against different detectors:")
for kind, seed in (("dense", 0), ("lstm", 3), ("conv", 4)):
    det, _ = build_detector(kind, normal,
                            TrainConfig(seed=seed, max_epochs=60), W=3)
    orig = attack_recall(det, attacked)
    red = attack_recall(det, concealed, attacked.labels)
    print(f"  {kind:>5}: recall {orig:.4f} -> {red:.4f}")

# how much eavesdropped data does the attacker actually need?
print("\nrecall vs amount of eavesdropped normal data (dense detector):")
det, _ = build_detector("dense", normal, TrainConfig(seed=0), W=3)
for frac in (1.0, 0.5, 0.25, 0.1):
    g, _ = train_generator(normal, unconstrained(n, fraction=frac),
                           TrainConfig(seed=1), sample_mode="random")
    c, _, _ = conceal_series_learning(g, attacked, unconstrained(n), schema)
    r = attack_recall(det, c, attacked.labels)
    print(f"  {frac:>4.0%} of the capture: recall {r:.4f}")
