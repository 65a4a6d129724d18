"""Activations and the mean-squared-error loss with their derivatives."""
from __future__ import annotations

import numpy as np

from ..errors import SpecError


def sigmoid(x: np.ndarray) -> np.ndarray:
    # split by sign to avoid overflow in exp
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def apply_activation(name: str, x: np.ndarray) -> np.ndarray:
    if name == "linear":
        return x
    if name == "sigmoid":
        return sigmoid(x)
    if name == "tanh":
        return np.tanh(x)
    if name == "relu":
        return np.maximum(x, 0.0)
    raise SpecError(f"unknown activation {name!r}")


def activation_grad(name: str, y: np.ndarray, dout: np.ndarray) -> np.ndarray:
    """Chain dout through an activation given its output y."""
    if name == "linear":
        return dout
    if name == "sigmoid":
        return dout * y * (1.0 - y)
    if name == "tanh":
        return dout * (1.0 - y * y)
    if name == "relu":
        return dout * (y > 0.0)
    raise SpecError(f"unknown activation {name!r}")


def mse(pred: np.ndarray, target: np.ndarray) -> float:
    """Mean over every element of the squared residual."""
    diff = pred - target
    return float(np.mean(diff * diff))


def mse_grad(pred: np.ndarray, target: np.ndarray) -> np.ndarray:
    return 2.0 * (pred - target) / pred.size
