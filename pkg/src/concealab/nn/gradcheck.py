"""Central finite-difference gradients, the reference the backprop code is
checked against in tests."""
from __future__ import annotations

import numpy as np

from .network import forward
from .ops import mse
from .params import flatten_params, unflatten_params
from .spec import NetworkSpec


def finite_difference_gradients(spec: NetworkSpec, params: dict, X: np.ndarray,
                                Y: np.ndarray, h: float = 1e-5,
                                dropout_mask: np.ndarray | None = None) -> dict:
    """d(mse)/d(theta) via central differences, one parameter at a time."""
    theta = flatten_params(params)
    grad = np.zeros_like(theta)
    Y = np.asarray(Y, dtype=np.float64)

    def loss_at(vec: np.ndarray) -> float:
        out, _ = forward(spec, unflatten_params(vec, params), X, dropout_mask)
        return mse(out, Y)

    for j in range(theta.size):
        orig = theta[j]
        theta[j] = orig + h
        up = loss_at(theta)
        theta[j] = orig - h
        down = loss_at(theta)
        theta[j] = orig
        grad[j] = (up - down) / (2.0 * h)
    return unflatten_params(grad, params)


def kink_margin(spec: NetworkSpec, params: dict, X: np.ndarray) -> float:
    """Smallest distance from the forward pass to a relu or max-pool
    switching point: min over |preactivation| and over top-two pool gaps
    (among groups whose winner is active). Central differences are only
    trustworthy when this comfortably exceeds the probe step h; smooth
    architectures return inf."""
    smooth = ("linear", "sigmoid", "tanh")
    if spec.kind != "conv":
        if spec.hidden_activation in smooth and spec.output_activation in smooth:
            return float("inf")
        return 0.0
    _, cache = forward(spec, params, np.asarray(X, dtype=np.float64))
    margin = np.inf
    for entry in cache["layers"]:
        margin = min(margin, float(np.abs(entry["z"]).min()))
        if "idx" not in entry:
            continue
        h = entry["h"]
        groups = entry["length"] // spec.pool
        hr = h[:, :groups * spec.pool, :].reshape(h.shape[0], groups, spec.pool, -1)
        top2 = np.sort(hr, axis=2)[:, :, -2:, :]
        live = top2[:, :, 1, :] > 0.0
        if live.any():
            gap = top2[:, :, 1, :] - top2[:, :, 0, :]
            margin = min(margin, float(gap[live].min()))
    return margin


def max_relative_error(analytic: dict, numeric: dict, min_mag: float = 1e-6) -> float:
    """Largest |a - n| / max(|a|, |n|) over elements where that denominator
    exceeds min_mag; 0.0 if no element does."""
    a = flatten_params(analytic)
    n = flatten_params(numeric)
    denom = np.maximum(np.abs(a), np.abs(n))
    keep = denom > min_mag
    if not keep.any():
        return 0.0
    return float((np.abs(a - n)[keep] / denom[keep]).max())
