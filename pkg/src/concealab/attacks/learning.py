"""Black-box learning-based concealment.

The attacker never queries the detector. It eavesdrops normal operation
(possibly only a fraction of it), trains an overcomplete autoencoder on the
readable channels, and at attack time morphs each anomalous reading by
passing it through that autoencoder. Post-processing keeps the forgery
physically plausible: discrete channels snap to allowed values and dependent
channels follow their governing actuator.
"""
from __future__ import annotations

import time
import warnings
from dataclasses import dataclass

import numpy as np

from ..dataset import Normalizer, TimeSeries, subsample_fraction
from ..errors import DataError, DimensionError, SpecError
from ..nn import TrainConfig, TrainHistory, generator_spec, predict, train
from ..schema import SensorSchema
from .constraints import AttackConstraint, ChangeLog


@dataclass
class Generator:
    """Trained concealment autoencoder over the attacker's read set."""

    spec: object                 # NetworkSpec over len(read) channels
    params: dict
    normalizer: Normalizer       # fitted on the eavesdropped slice
    read: tuple[int, ...]        # indices into the full channel list
    names: list[str]

    @property
    def n_read(self) -> int:
        return len(self.read)


def train_generator(normal: TimeSeries, constraint: AttackConstraint,
                    cfg: TrainConfig | None = None, sample_mode: str = "prefix",
                    ) -> tuple[Generator, TrainHistory]:
    """Fit the 2n'/4n'/2n' sigmoid autoencoder on the eavesdropped data.

    The eavesdropped set is fraction p of the normal series (contiguous
    prefix by default, seeded random rows with sample_mode="random"),
    restricted to the read channels.
    """
    cfg = cfg or TrainConfig()
    if normal.labels is not None and (normal.labels != 0).any():
        raise DataError("generator training data contains attack-labeled rows")
    read = list(constraint.read)
    if not read or max(read) >= normal.n_channels:
        raise SpecError("constraint read set does not fit the series")

    rng = np.random.default_rng(cfg.seed)
    sub = subsample_fraction(normal.values, constraint.fraction, sample_mode, rng)
    D = sub[:, read]
    n_read = len(read)
    if D.shape[0] < 10 * n_read:
        warnings.warn(f"only {D.shape[0]} eavesdropped rows for {n_read} channels; "
                      "the generator may underfit", stacklevel=2)

    normalizer = Normalizer().fit(D)
    Dn = normalizer.transform(D)
    spec = generator_spec(n_read)
    params, hist = train(spec, Dn[:, None, :], Dn, cfg)
    names = [normal.names[i] for i in read]
    return Generator(spec, params, normalizer, tuple(read), names), hist


def _post_process(x_out: np.ndarray, write: tuple[int, ...], schema: SensorSchema) -> np.ndarray:
    """Snap written discrete channels to allowed values, then zero written
    dependent channels whose governing actuator reads 0."""
    wset = set(write)
    for i in schema.discrete_indices():
        if i in wset:
            allowed = np.asarray(schema.channels[i].allowed_values, dtype=np.float64)
            x_out[i] = allowed[int(np.argmin(np.abs(allowed - x_out[i])))]
    for dep, gov in schema.dependent_pairs():
        if dep in wset and x_out[gov] == 0.0:
            x_out[dep] = 0.0
    return x_out


def conceal_learning(gen: Generator, x: np.ndarray, constraint: AttackConstraint,
                     schema: SensorSchema) -> np.ndarray:
    """Morph one reading: run the read slice through the generator and copy
    the outputs onto the write channels, then post-process."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (len(schema),):
        raise DimensionError(f"sample has shape {x.shape}, schema has {len(schema)} channels")
    missing = [i for i in constraint.write if i not in gen.read]
    if missing:
        raise SpecError(f"write channels {missing} were not in the generator's training slice")
    if not constraint.write:
        return x.copy()

    z = gen.normalizer.transform(x[list(gen.read)])
    out = predict(gen.spec, gen.params, z[None, None, :])[0]
    raw = gen.normalizer.inverse_transform(out)
    pos = {ch: idx for idx, ch in enumerate(gen.read)}
    x_new = x.copy()
    for ch in constraint.write:
        x_new[ch] = raw[pos[ch]]
    return _post_process(x_new, constraint.write, schema)


def conceal_series_learning(gen: Generator, series: TimeSeries,
                            constraint: AttackConstraint, schema: SensorSchema,
                            mask: np.ndarray | None = None,
                            ) -> tuple[TimeSeries, ChangeLog, list[float]]:
    """Apply the generator to every attacked step; returns the concealed
    series, the change log, and per-step seconds."""
    if mask is None:
        if series.labels is None:
            raise DataError("learning attack needs attack labels or an explicit mask")
        mask = series.labels == 1
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (len(series),):
        raise SpecError("mask must have one entry per row")
    if len(schema) != series.n_channels:
        raise DimensionError("schema does not match series width")

    reported = series.values.copy()
    log = ChangeLog(series.n_channels)
    times: list[float] = []
    for t in np.nonzero(mask)[0]:
        start = time.perf_counter()
        x_new = conceal_learning(gen, reported[t], constraint, schema)
        times.append(time.perf_counter() - start)
        log.record_row(int(t), reported[t], x_new)
        reported[t] = x_new
    return series.with_values(reported), log, times
