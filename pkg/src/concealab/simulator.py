"""Synthetic water-distribution plant.

Three elevated tanks, each filled by a pump under hysteresis control and
drained by a consumer demand; two district valves modulate demand on a day
schedule. Demands share a common noise factor (plus a small per-tank one),
so channels are strongly correlated: pump flow is an exact function of pump
status, a junction pressure sensor tracks each tank's static head, and the
three demand flows co-move. That correlation structure is what makes
partially replayed data stand out as contextual anomalies.

Controllers act on reported sensor values, so sensor tampering scenarios
(stuck, offset) also disturb the physics through the control loop. Euler
integration at the sampling interval; levels clamp to [0, capacity].
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dataset import TimeSeries, make_timestamps
from .errors import SpecError
from .schema import Channel, SensorSchema

FORCE_KINDS = ("force-actuator-on", "force-actuator-off")
SENSOR_KINDS = ("stuck-sensor", "sensor-offset")


@dataclass(frozen=True)
class TankSpec:
    capacity: float = 5.0       # max level
    area: float = 120.0         # tank cross-section
    level0: float = 2.8
    pump_rate: float = 110.0    # inflow when the pump runs
    on_level: float = 2.0       # hysteresis: pump starts at or below this
    off_level: float = 3.5      # pump stops at or above this
    base_demand: float = 55.0
    phase_h: float = 0.0        # demand phase offset in hours

    def __post_init__(self):
        if self.capacity <= 0 or self.area <= 0 or self.pump_rate <= 0:
            raise SpecError("tank capacity, area and pump rate must be positive")
        if not self.on_level < self.off_level:
            raise SpecError("hysteresis needs on_level < off_level")
        if self.base_demand < 0:
            raise SpecError("demand must be >= 0")
        if not 0 <= self.level0 <= self.capacity:
            raise SpecError("initial level outside [0, capacity]")


@dataclass(frozen=True)
class PlantConfig:
    tanks: tuple[TankSpec, ...] = (
        TankSpec(phase_h=0.0),
        TankSpec(level0=2.4, base_demand=50.0, pump_rate=100.0, phase_h=1.5),
        TankSpec(level0=3.1, base_demand=60.0, pump_rate=120.0, phase_h=-2.0),
    )
    interval_s: float = 900.0
    sin_amp: float = 0.35        # relative amplitude of the 24h demand curve
    shared_sigma: float = 0.15   # stationary sd of the shared demand factor
    shared_tau_h: float = 6.0    # mean-reversion time of the shared factor
    idio_sigma: float = 0.04     # per-tank demand noise sd
    valve_boost: float = 1.08    # demand factor while the district valve is open
    valve_cut: float = 0.92     # demand factor while it is closed
    p_base: float = 18.0         # junction pressure at an empty tank
    p_coeff: float = 9.0         # pressure per unit of level (static head)
    p_sigma: float = 0.02        # pressure sensor noise sd
    seed: int = 0

    def __post_init__(self):
        if not self.tanks:
            raise SpecError("plant needs at least one tank")
        if self.interval_s <= 0:
            raise SpecError("sampling interval must be positive")
        if self.shared_tau_h <= 0:
            raise SpecError("shared noise needs a positive time constant")
        if self.p_coeff <= 0 or self.p_sigma < 0:
            raise SpecError("pressure head needs p_coeff > 0 and p_sigma >= 0")

    @property
    def n_tanks(self) -> int:
        return len(self.tanks)


@dataclass(frozen=True)
class AnomalyScenario:
    """A physical fault or sensor tamper window with ground-truth labels.

    kind force-actuator-on/off targets an actuator name (PU1..PUk, V1, V2);
    stuck-sensor / sensor-offset target a reported channel name (L_T1 ...).
    """

    kind: str
    target: str
    start: int
    duration: int
    magnitude: float = 0.0

    def __post_init__(self):
        if self.kind not in FORCE_KINDS + SENSOR_KINDS:
            raise SpecError(f"unknown scenario kind {self.kind!r}")
        if self.duration < 1:
            raise SpecError("scenario duration must be >= 1")
        if self.start < 0:
            raise SpecError("scenario start must be >= 0")

    @property
    def stop(self) -> int:
        return self.start + self.duration

    def active(self, t: int) -> bool:
        return self.start <= t < self.stop


def channel_names(cfg: PlantConfig) -> list[str]:
    k = cfg.n_tanks
    names = [f"L_T{i}" for i in range(1, k + 1)]
    for i in range(1, k + 1):
        names += [f"F_PU{i}", f"S_PU{i}"]
    names += [f"F_T{i}" for i in range(1, k + 1)]
    names += ["S_V1", "S_V2"]
    names += [f"P_J{i}" for i in range(1, k + 1)]
    return names


def sim_schema(cfg: PlantConfig | None = None) -> SensorSchema:
    """Schema for the emitted channels. PLC 1 runs tanks 1..2, PLC 2 the
    rest; pump flows depend on their status channel."""
    cfg = cfg or PlantConfig()
    k = cfg.n_tanks
    plc_of_tank = [1 if i < 2 else 2 for i in range(k)]
    chans = [Channel(f"L_T{i + 1}", "continuous", plc=plc_of_tank[i]) for i in range(k)]
    for i in range(k):
        chans.append(Channel(f"F_PU{i + 1}", "continuous", plc=plc_of_tank[i],
                             depends_on=f"S_PU{i + 1}"))
        chans.append(Channel(f"S_PU{i + 1}", "binary", plc=plc_of_tank[i]))
    chans += [Channel(f"F_T{i + 1}", "continuous", plc=plc_of_tank[i]) for i in range(k)]
    chans.append(Channel("S_V1", "binary", plc=1))
    chans.append(Channel("S_V2", "binary", plc=2))
    chans += [Channel(f"P_J{i + 1}", "continuous", plc=plc_of_tank[i]) for i in range(k)]
    return SensorSchema(chans)


def _check_scenarios(cfg: PlantConfig, scenarios, steps: int) -> None:
    names = set(channel_names(cfg))
    actuators = {f"PU{i}" for i in range(1, cfg.n_tanks + 1)} | {"V1", "V2"}
    for sc in scenarios:
        if sc.stop > steps:
            raise SpecError(f"scenario on {sc.target!r} ends at {sc.stop}, "
                            f"horizon is {steps} steps")
        if sc.kind in FORCE_KINDS and sc.target not in actuators:
            raise SpecError(f"unknown actuator {sc.target!r}")
        if sc.kind in SENSOR_KINDS and sc.target not in names:
            raise SpecError(f"unknown sensor channel {sc.target!r}")


def _simulate(cfg: PlantConfig, steps: int, scenarios: tuple[AnomalyScenario, ...],
              ) -> TimeSeries:
    if steps < 1:
        raise SpecError("need at least one simulation step")
    _check_scenarios(cfg, scenarios, steps)
    k = cfg.n_tanks
    names = channel_names(cfg)
    col = {n: i for i, n in enumerate(names)}
    dt_h = cfg.interval_s / 3600.0

    # noise is drawn up front so scenario overrides never shift the stream:
    # a run with no scenarios is bitwise identical to the normal run
    rng = np.random.default_rng(cfg.seed)
    shared_noise = rng.standard_normal(steps)
    idio_noise = rng.standard_normal((steps, k))
    pressure_noise = rng.standard_normal((steps, k))
    rho = math.exp(-dt_h / cfg.shared_tau_h)
    spread = cfg.shared_sigma * math.sqrt(1.0 - rho * rho)

    force_on = [sc for sc in scenarios if sc.kind == "force-actuator-on"]
    force_off = [sc for sc in scenarios if sc.kind == "force-actuator-off"]
    stuck = [sc for sc in scenarios if sc.kind == "stuck-sensor"]
    offset = [sc for sc in scenarios if sc.kind == "sensor-offset"]

    level = np.array([t.level0 for t in cfg.tanks])
    pump_on = np.zeros(k, dtype=bool)
    reported_level = level.copy()
    frozen: dict[str, float] = {}

    values = np.zeros((steps, len(names)))
    labels = np.zeros(steps, dtype=np.int64)

    shared_state = 0.0
    for t in range(steps):
        if t == 0:
            shared_state = cfg.shared_sigma * shared_noise[0]
        else:
            shared_state = rho * shared_state + spread * shared_noise[t]

        # hysteresis on the reported level from the previous step
        for i in range(k):
            tank = cfg.tanks[i]
            if reported_level[i] <= tank.on_level:
                pump_on[i] = True
            elif reported_level[i] >= tank.off_level:
                pump_on[i] = False
        for sc in force_on:
            if sc.active(t) and sc.target.startswith("PU"):
                pump_on[int(sc.target[2:]) - 1] = True
        for sc in force_off:
            if sc.active(t) and sc.target.startswith("PU"):
                pump_on[int(sc.target[2:]) - 1] = False

        hour = t * dt_h
        valve = [math.sin(2.0 * math.pi * hour / 24.0) > 0.0,
                 math.sin(2.0 * math.pi * (hour + 8.0) / 24.0) > 0.0]
        for sc in force_on:
            if sc.active(t) and sc.target.startswith("V"):
                valve[int(sc.target[1:]) - 1] = True
        for sc in force_off:
            if sc.active(t) and sc.target.startswith("V"):
                valve[int(sc.target[1:]) - 1] = False

        row = np.zeros(len(names))
        for i in range(k):
            tank = cfg.tanks[i]
            inflow = tank.pump_rate if pump_on[i] else 0.0
            sin_t = math.sin(2.0 * math.pi * (hour + tank.phase_h) / 24.0)
            v_open = valve[0] if i < 2 else valve[1]
            factor = cfg.valve_boost if v_open else cfg.valve_cut
            demand = tank.base_demand * (1.0 + cfg.sin_amp * sin_t)
            demand *= (1.0 + shared_state) * (1.0 + cfg.idio_sigma * idio_noise[t, i])
            demand = max(demand * factor, 0.0)
            served = min(demand, level[i] * tank.area / dt_h + inflow)
            level[i] = min(max(level[i] + (inflow - served) * dt_h / tank.area, 0.0),
                           tank.capacity)
            row[col[f"L_T{i + 1}"]] = level[i]
            row[col[f"F_PU{i + 1}"]] = inflow
            row[col[f"S_PU{i + 1}"]] = 1.0 if pump_on[i] else 0.0
            row[col[f"F_T{i + 1}"]] = served
            # static head at the junction below the tank, from the true level
            row[col[f"P_J{i + 1}"]] = (cfg.p_base + cfg.p_coeff * level[i]
                                       + cfg.p_sigma * pressure_noise[t, i])
        row[col["S_V1"]] = 1.0 if valve[0] else 0.0
        row[col["S_V2"]] = 1.0 if valve[1] else 0.0

        # sensor tampering rewrites the report, not the physics; the control
        # loop still reads the tampered report, so effects can propagate
        for sc in stuck:
            if sc.active(t):
                if t == sc.start:
                    # freeze at the last clean report
                    if sc.target.startswith("L_T"):
                        frozen[sc.target] = reported_level[int(sc.target[3:]) - 1]
                    elif t > 0:
                        frozen[sc.target] = values[t - 1, col[sc.target]]
                    else:
                        frozen[sc.target] = row[col[sc.target]]
                row[col[sc.target]] = frozen[sc.target]
        for sc in offset:
            if sc.active(t):
                row[col[sc.target]] += sc.magnitude

        for i in range(k):
            reported_level[i] = row[col[f"L_T{i + 1}"]]
        if any(sc.active(t) for sc in scenarios):
            labels[t] = 1
        values[t] = row

    return TimeSeries(names=names, values=values,
                      timestamps=make_timestamps(steps, cfg.interval_s),
                      labels=labels, interval_s=cfg.interval_s)


def simulate_normal(cfg: PlantConfig, steps: int) -> TimeSeries:
    """Normal operation; labels all safe. Deterministic per seed."""
    return _simulate(cfg, steps, ())


def inject_anomaly(cfg: PlantConfig, scenarios, steps: int) -> TimeSeries:
    """Rerun the simulation with scenario overrides active in their windows;
    rows inside any window carry the under-attack label. With no scenarios
    the output equals simulate_normal bit for bit."""
    return _simulate(cfg, steps, tuple(scenarios))
