"""Single-layer LSTM with a dense readout of the final hidden state.

Gate layout in the stacked weight matrices is [input, forget, cell, output]
along the last axis. State starts at zero; backpropagation runs through the
full window (no truncation).
"""
from __future__ import annotations

import numpy as np

from .ops import activation_grad, apply_activation, sigmoid
from .spec import NetworkSpec


def forward(spec: NetworkSpec, params: dict, X: np.ndarray) -> tuple[np.ndarray, dict]:
    batch, steps, _ = X.shape
    h_size = spec.hidden[0]
    Wx, Wh, b = params["Wx"], params["Wh"], params["b"]

    h = np.zeros((batch, h_size))
    c = np.zeros((batch, h_size))
    gates = []      # per step: (i, f, g, o, c_prev, tanh_c)
    hs = [h]
    for t in range(steps):
        z = X[:, t, :] @ Wx + h @ Wh + b
        i = sigmoid(z[:, :h_size])
        f = sigmoid(z[:, h_size:2 * h_size])
        g = np.tanh(z[:, 2 * h_size:3 * h_size])
        o = sigmoid(z[:, 3 * h_size:])
        c_prev = c
        c = f * c_prev + i * g
        tc = np.tanh(c)
        h = o * tc
        gates.append((i, f, g, o, c_prev, tc))
        hs.append(h)

    z_out = h @ params["Wd"] + params["bd"]
    out = apply_activation(spec.output_activation, z_out)
    return out, {"X": X, "gates": gates, "hs": hs, "out": out}


def backward(spec: NetworkSpec, params: dict, cache: dict, dout: np.ndarray) -> dict:
    X, gates, hs = cache["X"], cache["gates"], cache["hs"]
    batch, steps, _ = X.shape
    h_size = spec.hidden[0]
    Wx, Wh = params["Wx"], params["Wh"]

    dz_out = activation_grad(spec.output_activation, cache["out"], dout)
    grads = {
        "Wd": hs[-1].T @ dz_out,
        "bd": dz_out.sum(axis=0),
        "Wx": np.zeros_like(Wx),
        "Wh": np.zeros_like(Wh),
        "b": np.zeros_like(params["b"]),
    }

    dh = dz_out @ params["Wd"].T
    dc = np.zeros((batch, h_size))
    for t in range(steps - 1, -1, -1):
        i, f, g, o, c_prev, tc = gates[t]
        do = dh * tc
        dc = dc + dh * o * (1.0 - tc * tc)
        di = dc * g
        dg = dc * i
        df = dc * c_prev
        dz = np.concatenate([
            di * i * (1.0 - i),
            df * f * (1.0 - f),
            dg * (1.0 - g * g),
            do * o * (1.0 - o),
        ], axis=1)
        grads["Wx"] += X[:, t, :].T @ dz
        grads["Wh"] += hs[t].T @ dz
        grads["b"] += dz.sum(axis=0)
        dh = dz @ Wh.T
        dc = dc * f
    return grads
