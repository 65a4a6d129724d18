"""Binary model files for detectors and attack generators.

Layout (all integers little-endian):
    bytes 0..3    magic "CLAB"
    bytes 4..7    uint32 format version (currently 1)
    bytes 8..11   uint32 header length H
    bytes 12..    H bytes of UTF-8 JSON header
    then          raw float64 little-endian C-order array data, concatenated

The JSON header carries the role ("detector" / "generator"), the network
spec, channel names, role-specific scalars (theta, window, read indices),
and an ordered array manifest of {name, shape} covering the parameter
arrays in layer order plus the normalization stats (__norm_vmin,
__norm_vmax). Round trips are lossless: float64 payloads are written bit
for bit.
"""
from __future__ import annotations

import json
import struct

import numpy as np

from .attacks import Generator
from .dataset import Normalizer
from .detector import Detector
from .errors import DataError
from .nn import NetworkSpec

MAGIC = b"CLAB"
VERSION = 1


def _write(path, header: dict, arrays: dict) -> None:
    manifest = [{"name": k, "shape": list(v.shape)} for k, v in arrays.items()]
    header = dict(header, arrays=manifest)
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, len(blob)))
        fh.write(blob)
        for v in arrays.values():
            fh.write(np.ascontiguousarray(v, dtype="<f8").tobytes())


def _read(path) -> tuple[dict, dict]:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read model file {path}: {exc}") from exc
    if len(raw) < 12 or raw[:4] != MAGIC:
        raise DataError(f"{path}: not a model file (bad magic)")
    version, hlen = struct.unpack("<II", raw[4:12])
    if version != VERSION:
        raise DataError(f"{path}: unsupported format version {version}")
    try:
        header = json.loads(raw[12:12 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DataError(f"{path}: corrupt header: {exc}") from exc
    pos = 12 + hlen
    arrays = {}
    for item in header["arrays"]:
        shape = tuple(item["shape"])
        count = int(np.prod(shape)) if shape else 1
        end = pos + 8 * count
        if end > len(raw):
            raise DataError(f"{path}: truncated array data for {item['name']!r}")
        arrays[item["name"]] = np.frombuffer(raw[pos:end], dtype="<f8").reshape(shape).copy()
        pos = end
    if pos != len(raw):
        raise DataError(f"{path}: {len(raw) - pos} trailing bytes")
    return header, arrays


def _pack_params(params: dict, normalizer: Normalizer) -> dict:
    arrays = dict(params)  # insertion order is layer order
    arrays["__norm_vmin"] = normalizer.vmin
    arrays["__norm_vmax"] = normalizer.vmax
    return arrays


def _unpack_params(arrays: dict) -> tuple[dict, Normalizer]:
    nz = Normalizer()
    try:
        nz.vmin = arrays.pop("__norm_vmin")
        nz.vmax = arrays.pop("__norm_vmax")
    except KeyError:
        raise DataError("model file lacks normalization stats") from None
    return arrays, nz


def save_detector(det: Detector, path) -> None:
    header = {"role": "detector", "spec": det.spec.to_dict(), "theta": det.theta,
              "window": det.window, "names": det.names}
    _write(path, header, _pack_params(det.params, det.normalizer))


def load_detector(path) -> Detector:
    header, arrays = _read(path)
    if header.get("role") != "detector":
        raise DataError(f"{path}: expected a detector model, found {header.get('role')!r}")
    params, nz = _unpack_params(arrays)
    return Detector(NetworkSpec.from_dict(header["spec"]), params, nz,
                    float(header["theta"]), int(header["window"]),
                    list(header.get("names", [])))


def save_generator(gen: Generator, path) -> None:
    header = {"role": "generator", "spec": gen.spec.to_dict(),
              "read": list(gen.read), "names": gen.names}
    _write(path, header, _pack_params(gen.params, gen.normalizer))


def load_generator(path) -> Generator:
    header, arrays = _read(path)
    if header.get("role") != "generator":
        raise DataError(f"{path}: expected a generator model, found {header.get('role')!r}")
    params, nz = _unpack_params(arrays)
    return Generator(NetworkSpec.from_dict(header["spec"]), params, nz,
                     tuple(int(i) for i in header["read"]),
                     list(header.get("names", [])))
