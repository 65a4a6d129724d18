"""Replay attack: substitute attacked readings with values the attacker
recorded earlier during normal operation, shifted back by a fixed offset."""
from __future__ import annotations

import warnings

import numpy as np

from ..dataset import TimeSeries
from ..errors import DataError, SpecError
from .constraints import AttackConstraint, ChangeLog


def replay_attack(series: TimeSeries, offset: int, constraint: AttackConstraint,
                  mask: np.ndarray | None = None) -> tuple[TimeSeries, ChangeLog]:
    """Overwrite write-set channels at every attacked timestep t with the
    recorded values from t - offset. Other channels and timesteps are kept.

    mask defaults to the series' attack labels. A replay source row that is
    itself attack-labeled triggers a warning (the attack still runs; a real
    attacker would pick a clean offset).
    """
    if offset < 1:
        raise SpecError(f"replay offset must be >= 1 timestep, got {offset}")
    if mask is None:
        if series.labels is None:
            raise DataError("replay needs attack labels or an explicit mask")
        mask = series.labels == 1
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (len(series),):
        raise SpecError("mask must have one entry per row")

    steps = np.nonzero(mask)[0]
    log = ChangeLog(series.n_channels)
    out = series.values.copy()
    if steps.size == 0 or not constraint.write:
        return series.with_values(out), log

    if steps.min() - offset < 0:
        raise SpecError(
            f"offset {offset} reaches before the recording starts "
            f"(first attacked step is {int(steps.min())})")
    src = steps - offset
    if series.labels is not None and (series.labels[src] == 1).any():
        warnings.warn("replay source window overlaps attack-labeled rows", stacklevel=2)

    cols = list(constraint.write)
    for t, s in zip(steps, src):
        for ch in cols:
            log.record(int(t), ch, out[t, ch], series.values[s, ch])
        out[t, cols] = series.values[s, cols]
    return series.with_values(out), log
