"""Parameter initialization, flattening, and the ADAM optimizer.

Parameters are a plain dict of name -> float64 array. Flatten order is the
sorted key order, which makes finite-difference checks and serialization
deterministic.
"""
from __future__ import annotations

import numpy as np

from ..errors import DimensionError, NumericError
from .spec import NetworkSpec

Params = dict


def glorot_uniform(rng: np.random.Generator, shape: tuple[int, ...],
                   fan_in: int, fan_out: int) -> np.ndarray:
    """Uniform on [-L, L] with L = sqrt(6 / (fan_in + fan_out))."""
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def init_params(spec: NetworkSpec, seed: int) -> Params:
    """Glorot-uniform weights, zero biases, from a dedicated seeded stream."""
    rng = np.random.default_rng(seed)
    p: Params = {}
    if spec.kind == "dense":
        widths = [spec.window * spec.channels, *spec.hidden, spec.channels]
        for i, (a, b) in enumerate(zip(widths[:-1], widths[1:])):
            p[f"W{i}"] = glorot_uniform(rng, (a, b), a, b)
            p[f"b{i}"] = np.zeros(b)
    elif spec.kind == "lstm":
        n, h = spec.channels, spec.hidden[0]
        p["Wx"] = glorot_uniform(rng, (n, 4 * h), n, 4 * h)
        p["Wh"] = glorot_uniform(rng, (h, 4 * h), h, 4 * h)
        p["b"] = np.zeros(4 * h)
        p["Wd"] = glorot_uniform(rng, (h, n), h, n)
        p["bd"] = np.zeros(n)
    elif spec.kind == "conv":
        c_in = spec.channels
        for i, c_out in enumerate(spec.hidden):
            fan_in = spec.kernel * c_in
            fan_out = spec.kernel * c_out
            p[f"cW{i}"] = glorot_uniform(rng, (spec.kernel, c_in, c_out), fan_in, fan_out)
            p[f"cb{i}"] = np.zeros(c_out)
            c_in = c_out
        flat = _conv_flat_width(spec)
        p["W_out"] = glorot_uniform(rng, (flat, spec.channels), flat, spec.channels)
        p["b_out"] = np.zeros(spec.channels)
    return p


def _conv_flat_width(spec: NetworkSpec) -> int:
    """Length * channels after the conv/pool stack (same padding keeps
    length through convs; each pool halves it while length >= pool)."""
    length = spec.window
    for _ in spec.hidden:
        if length >= spec.pool:
            length //= spec.pool
    return length * spec.hidden[-1]


def copy_params(p: Params) -> Params:
    return {k: v.copy() for k, v in p.items()}


def flatten_params(p: Params) -> np.ndarray:
    return np.concatenate([p[k].ravel() for k in sorted(p)])


def unflatten_params(vec: np.ndarray, template: Params) -> Params:
    out: Params = {}
    pos = 0
    for k in sorted(template):
        size = template[k].size
        out[k] = vec[pos:pos + size].reshape(template[k].shape).copy()
        pos += size
    if pos != vec.size:
        raise DimensionError(f"flat vector has {vec.size} entries, template needs {pos}")
    return out


class Adam:
    """Bias-corrected ADAM; the learning rate is supplied per step so a
    plateau schedule can decay it without touching optimizer state."""

    def __init__(self, params: Params, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8):
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: Params, grads: Params, lr: float) -> None:
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for k, g in grads.items():
            if not np.isfinite(g).all():
                raise NumericError(f"non-finite gradient for {k}")
            m = self.m[k]
            v = self.v[k]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            params[k] -= lr * (m / c1) / (np.sqrt(v / c2) + self.eps)
