"""Command-line experiment runner.

Commands: simulate, train-detector, attack, evaluate, sweep, realtime. Each
takes --config (JSON), with --seed and --out overrides. A run directory is
named by a content hash of the resolved config, so identical configs share
artifacts and different configs never collide. Commands build whatever
upstream artifacts are missing (dataset, detector, concealed series) from
the same config, deterministically, so any command works standalone.

Exit code 0 on success; on failure a single line "error: <Kind>: <message>"
goes to stderr and the exit code is nonzero.
"""
from __future__ import annotations

import argparse
import copy
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import model_io
from .attacks import (AttackConstraint, ChangeLog, IterativeBudget, full,
                      conceal_learning, conceal_series_iterative,
                      conceal_series_learning, iterative_conceal, partial,
                      replay_attack, topology_constraint, train_generator,
                      unconstrained, DetectorOracle)
from .dataset import TimeSeries, load_csv, save_csv
from .detector import DetectorStream, build_detector, detect_series
from .errors import ConcealabError, DataError, SpecError
from .evaluation import (SweepInputs, evaluate, sweep_constraints,
                         sweep_data_fraction, sweep_to_csv, FRACTION_COLUMNS)
from .nn import TrainConfig
from .schema import SensorSchema
from .simulator import AnomalyScenario, PlantConfig, TankSpec, inject_anomaly, sim_schema, simulate_normal

TRAIN_KEYS = {"lr", "batch_size", "max_epochs", "es_patience", "plateau_patience",
              "lr_decay", "lr_floor", "val_ratio", "seed"}

DEFAULTS: dict = {
    "seed": 0,
    "output_dir": "runs",
    "dataset": {
        "source": "simulator",        # "simulator" or "csv"
        "steps": 6000,                # training-series length (simulator)
        "attack_steps": 3000,         # attacked-series length (simulator)
        "plant": {},                  # PlantConfig overrides; "tanks" is a list of dicts
        "scenarios": "auto",          # list of scenario dicts, or "auto" for a benchmark set
        "train_csv": None,
        "test_csv": None,
        "schema": None,
    },
    "detector": {
        "kind": "dense",
        "window_w": 3,
        "train": {},                  # TrainConfig overrides
    },
    "attack": {
        "kind": "identity",           # identity | replay | iterative | learning
        "mode": "unconstrained",      # unconstrained | partial | full | topology
        "write": [],                  # channel names or indices for partial/full
        "plc": None,                  # for topology mode
        "offset": 96,                 # replay offset, timesteps
        "fraction": 1.0,              # eavesdropped data fraction p
        "sample_mode": "prefix",      # prefix | random
        "budget": {"patience": 15, "budget": 200, "grid": 50},
        "generator_train": {},        # TrainConfig overrides for the generator
    },
    "evaluation": {
        "selection": "best-case",     # best-case | topology
        "mode": "partial",            # partial | full
        "k_values": [],               # defaults to a grid over the channel count
        "attacks": ["replay", "iterative", "learning"],
        "repetitions": 1,
        "fractions": [],              # non-empty runs the data-fraction sweep too
        "fraction_repetitions": 10,
        "measure_time": False,
    },
    "realtime": {
        "pace": "max",                # "max" (simulated clock) or "real" (sleep)
        "interval_s": None,           # defaults to the dataset sampling interval
        "steps": None,                # defaults to the whole attacked series
    },
}


# -- config handling ----------------------------------------------------------

def _check_keys(given: dict, allowed, path: str) -> None:
    for key in given:
        if key not in allowed:
            raise SpecError(f"unknown config key {path}{key}")


def _merge(defaults: dict, given: dict, path: str = "") -> dict:
    _check_keys(given, defaults, path)
    out = copy.deepcopy(defaults)
    for key, value in given.items():
        if isinstance(value, dict) and isinstance(defaults.get(key), dict) \
                and key not in ("plant", "train", "generator_train", "budget"):
            out[key] = _merge(defaults[key], value, f"{path}{key}.")
        else:
            out[key] = copy.deepcopy(value)
    return out


def load_config(path: str | None, seed: int | None = None,
                out: str | None = None) -> dict:
    cfg = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except OSError as exc:
            raise DataError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise DataError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(cfg, dict):
            raise DataError(f"config {path} must hold a JSON object")
    cfg = _merge(DEFAULTS, cfg)
    _check_keys(cfg["attack"].get("budget", {}), {"patience", "budget", "grid"},
                "attack.budget.")
    _check_keys(cfg["detector"].get("train", {}), TRAIN_KEYS, "detector.train.")
    _check_keys(cfg["attack"].get("generator_train", {}), TRAIN_KEYS,
                "attack.generator_train.")
    if seed is not None:
        cfg["seed"] = int(seed)
    if out is not None:
        cfg["output_dir"] = out
    ds = cfg["dataset"]
    if ds["source"] not in ("simulator", "csv"):
        raise SpecError(f"dataset.source must be 'simulator' or 'csv', got {ds['source']!r}")
    if ds["source"] == "csv":
        for key in ("train_csv", "test_csv", "schema"):
            if not ds[key]:
                raise SpecError(f"dataset.source 'csv' requires dataset.{key}")
            if not Path(ds[key]).exists():
                raise DataError(f"dataset.{key} file not found: {ds[key]}")
    return cfg


def run_id(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:12]


def run_dir(cfg: dict) -> Path:
    d = Path(cfg["output_dir"]) / run_id(cfg)
    d.mkdir(parents=True, exist_ok=True)
    resolved = d / "config.json"
    if not resolved.exists():
        resolved.write_text(json.dumps(cfg, indent=2, sort_keys=True) + "\n",
                            encoding="utf-8")
    return d


# -- artifact builders ---------------------------------------------------------

def _plant_config(cfg: dict) -> PlantConfig:
    overrides = dict(cfg["dataset"]["plant"])
    allowed = {"tanks", "interval_s", "sin_amp", "shared_sigma", "shared_tau_h",
               "idio_sigma", "valve_boost", "valve_cut", "p_base", "p_coeff",
               "p_sigma", "seed"}
    _check_keys(overrides, allowed, "dataset.plant.")
    tanks = overrides.pop("tanks", None)
    if tanks is not None:
        overrides["tanks"] = tuple(TankSpec(**t) for t in tanks)
    overrides.setdefault("seed", cfg["seed"])
    return PlantConfig(**overrides)


def default_scenarios(steps: int) -> list[AnomalyScenario]:
    """Benchmark anomaly set: actuator forcing on every pump plus a sensor
    tamper, spread out with day-scale gaps so replay sources stay clean."""
    protos = [
        ("force-actuator-on", "PU1", 0.0),
        ("force-actuator-off", "PU2", 0.0),
        ("force-actuator-on", "PU3", 0.0),
        ("force-actuator-off", "PU1", 0.0),
        ("sensor-offset", "L_T2", 1.2),
        ("force-actuator-on", "PU2", 0.0),
    ]
    scenarios = []
    start = 200
    duration = 48
    for kind, target, mag in protos:
        if start + duration > steps:
            break
        scenarios.append(AnomalyScenario(kind, target, start, duration, mag))
        start += duration + 260
    return scenarios


def _scenarios(cfg: dict, steps: int) -> list[AnomalyScenario]:
    raw = cfg["dataset"]["scenarios"]
    if raw == "auto":
        return default_scenarios(steps)
    out = []
    for item in raw:
        _check_keys(item, {"kind", "target", "start", "duration", "magnitude"},
                    "dataset.scenarios[].")
        out.append(AnomalyScenario(**item))
    return out


def ensure_dataset(cfg: dict, d: Path) -> tuple[TimeSeries, TimeSeries, SensorSchema]:
    """(normal training series, attacked series with labels, schema)."""
    ds = cfg["dataset"]
    normal_p, attacked_p, schema_p = d / "normal.csv", d / "attacked.csv", d / "schema.json"
    if ds["source"] == "csv":
        schema = SensorSchema.load(ds["schema"])
        normal = load_csv(ds["train_csv"], schema.names)
        attacked = load_csv(ds["test_csv"], schema.names)
        return normal, attacked, schema
    if normal_p.exists() and attacked_p.exists() and schema_p.exists():
        schema = SensorSchema.load(schema_p)
        return (load_csv(normal_p, schema.names), load_csv(attacked_p, schema.names),
                schema)
    plant = _plant_config(cfg)
    normal = simulate_normal(plant, int(ds["steps"]))
    attack_plant = PlantConfig(**{**plant.__dict__, "seed": plant.seed + 1})
    scenarios = _scenarios(cfg, int(ds["attack_steps"]))
    attacked = inject_anomaly(attack_plant, scenarios, int(ds["attack_steps"]))
    schema = sim_schema(plant).with_ranges_from(normal.values)
    save_csv(normal, normal_p)
    save_csv(attacked, attacked_p)
    schema.save(schema_p)
    return normal, attacked, schema


def _train_cfg(overrides: dict, seed: int) -> TrainConfig:
    merged = dict(overrides)
    merged.setdefault("seed", seed)
    return TrainConfig(**merged)


def ensure_detector(cfg: dict, d: Path, normal: TimeSeries):
    model_p = d / "detector.model"
    if model_p.exists():
        return model_io.load_detector(model_p)
    det_cfg = cfg["detector"]
    tc = _train_cfg(det_cfg["train"], cfg["seed"])
    det, hist = build_detector(det_cfg["kind"], normal, tc, int(det_cfg["window_w"]))
    model_io.save_detector(det, model_p)
    log = {"train_loss": hist.train_loss, "val_loss": hist.val_loss,
           "best_epoch": hist.best_epoch, "best_val": hist.best_val,
           "epochs_run": hist.epochs_run, "final_lr": hist.final_lr}
    (d / "train_log.json").write_text(json.dumps(log, indent=2) + "\n", encoding="utf-8")
    return det


def _resolve_write(cfg: dict, schema: SensorSchema) -> list[int]:
    write = cfg["attack"]["write"]
    out = []
    for ch in write:
        out.append(schema.index(ch) if isinstance(ch, str) else int(ch))
    return out


def _constraint(cfg: dict, schema: SensorSchema) -> AttackConstraint:
    a = cfg["attack"]
    n = len(schema)
    p = float(a["fraction"])
    if a["mode"] == "unconstrained":
        return unconstrained(n, p)
    if a["mode"] == "partial":
        return partial(n, _resolve_write(cfg, schema), p)
    if a["mode"] == "full":
        return full(n, _resolve_write(cfg, schema), p)
    if a["mode"] == "topology":
        if a["plc"] is None:
            raise SpecError("attack.mode 'topology' requires attack.plc")
        return topology_constraint(schema, int(a["plc"]), fraction=p)
    raise SpecError(f"unknown attack.mode {a['mode']!r}")


def _budget(cfg: dict) -> IterativeBudget:
    return IterativeBudget(**cfg["attack"]["budget"])


def ensure_generator(cfg: dict, d: Path, normal: TimeSeries, constraint: AttackConstraint):
    gen_p = d / "generator.model"
    if gen_p.exists():
        return model_io.load_generator(gen_p)
    tc = _train_cfg(cfg["attack"]["generator_train"], cfg["seed"] + 1)
    gen, _ = train_generator(normal, constraint, tc,
                             sample_mode=cfg["attack"]["sample_mode"])
    model_io.save_generator(gen, gen_p)
    return gen


def ensure_attack(cfg: dict, d: Path, det, normal: TimeSeries,
                  attacked: TimeSeries, schema: SensorSchema) -> TimeSeries:
    kind = cfg["attack"]["kind"]
    if kind == "identity":
        return attacked
    concealed_p = d / "concealed.csv"
    if concealed_p.exists():
        return load_csv(concealed_p, schema.names)
    constraint = _constraint(cfg, schema)
    meta: dict = {"kind": kind, "mode": constraint.mode, "k": constraint.k}
    if kind == "replay":
        concealed, log = replay_attack(attacked, int(cfg["attack"]["offset"]), constraint)
    elif kind == "iterative":
        concealed, log, results = conceal_series_iterative(
            det, attacked, constraint, _budget(cfg), schema)
        meta["steps"] = [{"t": r.t, "solved": r.solved, "iterations": r.iterations,
                          "eps_before": r.eps_before, "eps_after": r.eps_after}
                         for r in results]
        meta["solved_fraction"] = (float(np.mean([r.solved for r in results]))
                                   if results else None)
    elif kind == "learning":
        gen = ensure_generator(cfg, d, normal, constraint)
        concealed, log, _ = conceal_series_learning(gen, attacked, constraint, schema)
    else:
        raise SpecError(f"unknown attack.kind {kind!r}")
    save_csv(concealed, concealed_p)
    log.to_csv(d / "change_log.csv")
    (d / "attack_meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n",
                                        encoding="utf-8")
    return concealed


# -- commands -------------------------------------------------------------------

def cmd_simulate(cfg: dict) -> int:
    d = run_dir(cfg)
    if cfg["dataset"]["source"] != "simulator":
        raise SpecError("simulate requires dataset.source 'simulator'")
    ensure_dataset(cfg, d)
    print(d / "normal.csv")
    print(d / "attacked.csv")
    print(d / "schema.json")
    return 0


def cmd_train_detector(cfg: dict) -> int:
    d = run_dir(cfg)
    normal, _, _ = ensure_dataset(cfg, d)
    ensure_detector(cfg, d, normal)
    print(d / "detector.model")
    return 0


def cmd_attack(cfg: dict) -> int:
    d = run_dir(cfg)
    normal, attacked, schema = ensure_dataset(cfg, d)
    det = ensure_detector(cfg, d, normal)
    ensure_attack(cfg, d, det, normal, attacked, schema)
    print(d / "concealed.csv")
    return 0


def cmd_evaluate(cfg: dict) -> int:
    d = run_dir(cfg)
    normal, attacked, schema = ensure_dataset(cfg, d)
    det = ensure_detector(cfg, d, normal)
    concealed = ensure_attack(cfg, d, det, normal, attacked, schema)
    baseline = evaluate(det, attacked, meta={"series": "attacked", "seed": cfg["seed"],
                                             "detector": cfg["detector"]["kind"],
                                             "attack": "identity"})
    report = evaluate(det, concealed, truth=attacked.labels,
                      meta={"series": "concealed", "seed": cfg["seed"],
                            "detector": cfg["detector"]["kind"],
                            "attack": cfg["attack"]["kind"],
                            "original_attack_recall": baseline.attack_recall})
    report.save(d / "report.json")
    baseline.save(d / "baseline.json")
    detect_series(det, concealed).to_csv(d / "trace.csv", concealed.names)
    print(d / "report.json")
    return 0


def cmd_sweep(cfg: dict) -> int:
    d = run_dir(cfg)
    normal, attacked, schema = ensure_dataset(cfg, d)
    det = ensure_detector(cfg, d, normal)
    ev = cfg["evaluation"]
    n = len(schema)
    k_values = ev["k_values"] or [k for k in range(n, 0, -max(1, n // 8))]
    inputs = SweepInputs(det, attacked, schema, normal,
                         offset=int(cfg["attack"]["offset"]), budget=_budget(cfg),
                         gen_cfg=_train_cfg(cfg["attack"]["generator_train"],
                                            cfg["seed"] + 1))
    change_log = None
    if ev["selection"] == "best-case":
        log_p = d / "unconstrained_log.csv"
        if log_p.exists():
            change_log = ChangeLog.from_csv(log_p, n)
        else:
            _, change_log, _ = conceal_series_iterative(
                det, attacked, unconstrained(n), _budget(cfg), schema)
            change_log.to_csv(log_p)
    rows = sweep_constraints(inputs, k_values, change_log=change_log,
                             attacks=tuple(ev["attacks"]), selection=ev["selection"],
                             mode=ev["mode"], repetitions=int(ev["repetitions"]),
                             base_seed=cfg["seed"], measure_time=bool(ev["measure_time"]))
    sweep_to_csv(rows, d / "sweep.csv")
    print(d / "sweep.csv")
    if ev["fractions"]:
        frows = sweep_data_fraction(inputs, ev["fractions"],
                                    repetitions=int(ev["fraction_repetitions"]),
                                    base_seed=cfg["seed"],
                                    sample_mode=cfg["attack"]["sample_mode"],
                                    measure_time=bool(ev["measure_time"]))
        sweep_to_csv(frows, d / "fractions.csv", FRACTION_COLUMNS)
        print(d / "fractions.csv")
    return 0


def cmd_realtime(cfg: dict) -> int:
    d = run_dir(cfg)
    normal, attacked, schema = ensure_dataset(cfg, d)
    det = ensure_detector(cfg, d, normal)
    rt = cfg["realtime"]
    interval = float(rt["interval_s"] or attacked.interval_s)
    steps = int(rt["steps"] or len(attacked))
    steps = min(steps, len(attacked))
    kind = cfg["attack"]["kind"]
    constraint = _constraint(cfg, schema) if kind != "identity" else None
    gen = (ensure_generator(cfg, d, normal, constraint)
           if kind == "learning" else None)
    budget = _budget(cfg)
    oracle = DetectorOracle(det) if kind == "iterative" else None
    offset = int(cfg["attack"]["offset"])
    labels = attacked.labels if attacked.labels is not None else np.zeros(steps, dtype=int)

    stream = DetectorStream(det)
    m = det.history
    reported: list[np.ndarray] = []
    lat_rows = []
    trace_rows = []
    t_wall = time.perf_counter()
    for t in range(steps):
        row = attacked.values[t].copy()
        start = time.perf_counter()
        if kind != "identity" and labels[t] == 1:
            if kind == "replay":
                if t - offset < 0:
                    raise SpecError(f"replay offset {offset} reaches before the stream start")
                src = attacked.values[t - offset]
                row[list(constraint.write)] = src[list(constraint.write)]
            elif kind == "learning":
                row = conceal_learning(gen, row, constraint, schema)
            elif kind == "iterative":
                if m == 0 or t == 0:
                    oracle.set_context(None)
                else:
                    ctx = np.asarray(reported[max(0, t - m):t])
                    if ctx.shape[0] < m:
                        ctx = np.vstack([np.repeat(np.asarray(reported[0])[None],
                                                   m - ctx.shape[0], axis=0), ctx])
                    oracle.set_context(ctx)
                row = iterative_conceal(oracle, row, constraint, budget, schema).x_prime
        eps, smoothed, label = stream.push(row)
        latency = time.perf_counter() - start
        reported.append(row)
        lat_rows.append((t, latency, int(latency > interval)))
        trace_rows.append((attacked.timestamps[t], eps, smoothed, label))
        if rt["pace"] == "real":
            sleep_for = interval - (time.perf_counter() - t_wall)
            if sleep_for > 0:
                time.sleep(sleep_for)
            t_wall = time.perf_counter()

    import csv as _csv
    with open(d / "realtime_trace.csv", "w", newline="", encoding="utf-8") as fh:
        w = _csv.writer(fh)
        w.writerow(["timestamp", "epsilon", "epsilon_smoothed", "label"])
        for ts, eps, sm, lab in trace_rows:
            w.writerow([ts, "%.17g" % eps, "%.17g" % sm, lab])
    with open(d / "realtime_latency.csv", "w", newline="", encoding="utf-8") as fh:
        w = _csv.writer(fh)
        w.writerow(["t", "seconds", "deadline_miss"])
        for t, sec, miss in lat_rows:
            w.writerow([t, "%.9f" % sec, miss])
    lats = np.asarray([r[1] for r in lat_rows])
    report = {"steps": steps, "interval_s": interval,
              "latency_mean_s": float(lats.mean()),
              "latency_std_s": float(lats.std(ddof=1)) if lats.size > 1 else 0.0,
              "deadline_misses": int(sum(r[2] for r in lat_rows)),
              "attack": kind, "pace": rt["pace"]}
    (d / "realtime_report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n",
                                            encoding="utf-8")
    print(d / "realtime_report.json")
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "train-detector": cmd_train_detector,
    "attack": cmd_attack,
    "evaluate": cmd_evaluate,
    "sweep": cmd_sweep,
    "realtime": cmd_realtime,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="concealab",
        description="Concealment attacks against reconstruction-based ICS anomaly detectors.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="JSON experiment config")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", default=None, help="override the output directory")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, args.seed, args.out)
        return COMMANDS[args.command](cfg)
    except ConcealabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: OSError: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
