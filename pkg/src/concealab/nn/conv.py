"""1-D convolutional reconstruction network over the time axis.

Convolutions are same-padded (even kernels pad the right edge more, so
output length equals input length), each followed by a max-pool of width
`pool` while the sequence is at least that long. The stack ends in dropout
on the flattened features and a dense readout.
"""
from __future__ import annotations

import numpy as np

from .ops import activation_grad, apply_activation
from .spec import NetworkSpec


def forward(spec: NetworkSpec, params: dict, X: np.ndarray,
            dropout_mask: np.ndarray | None = None) -> tuple[np.ndarray, dict]:
    """dropout_mask: precomputed inverted-dropout mask for the flattened
    features, or None for inference."""
    batch = X.shape[0]
    a = X
    layers = []
    for i in range(len(spec.hidden)):
        W, b = params[f"cW{i}"], params[f"cb{i}"]
        length = a.shape[1]
        pad_l = (spec.kernel - 1) // 2
        pad_r = spec.kernel - 1 - pad_l
        ap = np.pad(a, ((0, 0), (pad_l, pad_r), (0, 0)))
        z = np.zeros((batch, length, W.shape[2]))
        for dt in range(spec.kernel):
            z += ap[:, dt:dt + length, :] @ W[dt]
        z += b
        h = apply_activation(spec.hidden_activation, z)
        entry = {"ap": ap, "z": z, "h": h, "pad_l": pad_l, "length": length}
        if length >= spec.pool:
            groups = length // spec.pool
            hr = h[:, :groups * spec.pool, :].reshape(batch, groups, spec.pool, -1)
            idx = hr.argmax(axis=2)
            a = np.take_along_axis(hr, idx[:, :, None, :], axis=2)[:, :, 0, :]
            entry["idx"] = idx
        else:
            a = h
        layers.append(entry)

    flat = a.reshape(batch, -1)
    if dropout_mask is not None:
        flat = flat * dropout_mask
    z_out = flat @ params["W_out"] + params["b_out"]
    out = apply_activation(spec.output_activation, z_out)
    return out, {"layers": layers, "flat": flat, "mask": dropout_mask,
                 "pre_flat_shape": a.shape, "out": out}


def backward(spec: NetworkSpec, params: dict, cache: dict, dout: np.ndarray) -> dict:
    grads: dict = {}
    dz_out = activation_grad(spec.output_activation, cache["out"], dout)
    grads["W_out"] = cache["flat"].T @ dz_out
    grads["b_out"] = dz_out.sum(axis=0)
    dflat = dz_out @ params["W_out"].T
    if cache["mask"] is not None:
        dflat = dflat * cache["mask"]
    da = dflat.reshape(cache["pre_flat_shape"])

    for i in range(len(spec.hidden) - 1, -1, -1):
        entry = cache["layers"][i]
        h = entry["h"]
        batch, length = h.shape[0], entry["length"]
        if "idx" in entry:
            groups = length // spec.pool
            dh = np.zeros_like(h)
            dhr = np.zeros((batch, groups, spec.pool, h.shape[2]))
            np.put_along_axis(dhr, entry["idx"][:, :, None, :], da[:, :, None, :], axis=2)
            dh[:, :groups * spec.pool, :] = dhr.reshape(batch, groups * spec.pool, -1)
        else:
            dh = da
        dz = activation_grad(spec.hidden_activation, h, dh)
        W = params[f"cW{i}"]
        ap = entry["ap"]
        grads[f"cb{i}"] = dz.sum(axis=(0, 1))
        dW = np.zeros_like(W)
        dap = np.zeros_like(ap)
        for dt in range(spec.kernel):
            dW[dt] = np.tensordot(ap[:, dt:dt + length, :], dz, axes=([0, 1], [0, 1]))
            dap[:, dt:dt + length, :] += dz @ W[dt].T
        grads[f"cW{i}"] = dW
        da = dap[:, entry["pad_l"]:entry["pad_l"] + length, :]
    return grads
