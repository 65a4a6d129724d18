"""Replay concealment, and why partial write access can backfire.

A replay attacker overwrites sensor readings with values recorded exactly
one day earlier, when the plant was healthy. With every channel writable
the detector sees a perfectly plausible day and the attack vanishes. The
interesting part is what happens when the attacker only controls a few
channels: replaying a subset breaks cross-channel physics (a tank level
that no longer matches its junction pressure) and the detector fires MORE
often than it did on the raw fault.
"""
import numpy as np

from concealab.attacks import replay_attack, unconstrained
from concealab.attacks.constraints import partial, select_best_case_features
from concealab.attacks.iterative import IterativeBudget, conceal_series_iterative
from concealab.detector import build_detector
from concealab.evaluation import attack_recall
from concealab.nn import TrainConfig
from concealab.simulator import (AnomalyScenario, PlantConfig, inject_anomaly,
                                 sim_schema, simulate_normal)

plant = PlantConfig(seed=0)
normal = simulate_normal(plant, 6000)
schema = sim_schema(plant).with_ranges_from(normal.values)
n = len(schema)

scenarios = tuple(
    AnomalyScenario(kind, pump, start, 48, 0.0)
    for start, (kind, pump) in enumerate(
        [("force-actuator-on", "PU1"), ("force-actuator-off", "PU2"),
         ("force-actuator-on", "PU3"), ("force-actuator-off", "PU1")], 1)
    for start in [start * 400]
)
attacked = inject_anomaly(PlantConfig(seed=1), scenarios, 2000)

detector, _ = build_detector("dense", normal, TrainConfig(seed=0), W=3)
original = attack_recall(detector, attacked)
print(f"detector recall on the raw faults: {original:.4f}")

concealed, log = replay_attack(attacked, 96, unconstrained(n))
full = attack_recall(detector, concealed, attacked.labels)
print(f"replaying ALL {n} channels from one day earlier: recall {full:.4f}")
print(f"  ({len(log.entries)} overwrites across {int(attacked.labels.sum())} steps)")

# rank channels the way a strong attacker would: by how often an
# unconstrained white-box attack needed to edit each one
_, iter_log, _ = conceal_series_iterative(detector, attacked, unconstrained(n),
                                          IterativeBudget(), schema)
counts = iter_log.counts
print("\nchannels a white-box attack edits most:")
for j in np.argsort(counts)[::-1][:6]:
    print(f"  {schema.names[j]:>6}  {counts[j]} edits")

print("\nreplay restricted to the attacker's top-k channels:")
for k in (1, 2, 3, 4, 6, 8):
    write = select_best_case_features(counts, k)
    constraint = partial(n, write)
    concealed_k, _ = replay_attack(attacked, 96, constraint)
    r = attack_recall(detector, concealed_k, attacked.labels)
    names = ",".join(schema.names[j] for j in write)
    marker = "  <- worse than no attack at all" if r >= original else ""
    print(f"  k={k}: recall {r:.4f}  writes [{names}]{marker}")
