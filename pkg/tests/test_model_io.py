"""Binary model files: lossless round trips and corruption detection."""
import numpy as np
import pytest

from concealab.attacks import train_generator, unconstrained
from concealab.dataset import TimeSeries
from concealab.detector import build_detector, detect_series
from concealab.errors import DataError
from concealab.model_io import (load_detector, load_generator, save_detector,
                                save_generator)
from concealab.nn import TrainConfig


def _normal(rows=300, n=3, seed=0):
    rng = np.random.default_rng(seed)
    base = 2.0 + np.sin(np.linspace(0, 15, rows))[:, None] * np.arange(1, n + 1)
    return TimeSeries([f"c{i}" for i in range(n)],
                      base + rng.normal(scale=0.05, size=(rows, n)))


def test_detector_round_trip_is_bit_exact(tmp_path):
    normal = _normal()
    det, _ = build_detector("dense", normal, TrainConfig(max_epochs=10, seed=0), W=4)
    path = tmp_path / "d.model"
    save_detector(det, path)
    back = load_detector(path)
    assert back.theta == det.theta
    assert back.window == det.window
    assert back.names == det.names
    assert back.spec == det.spec
    for k in det.params:
        np.testing.assert_array_equal(back.params[k], det.params[k])
    np.testing.assert_array_equal(back.normalizer.vmin, det.normalizer.vmin)
    np.testing.assert_array_equal(back.normalizer.vmax, det.normalizer.vmax)
    # identical detection trace on fresh data
    t1 = detect_series(det, normal)
    t2 = detect_series(back, normal)
    np.testing.assert_array_equal(t1.epsilon, t2.epsilon)


def test_lstm_and_conv_detectors_round_trip(tmp_path):
    normal = _normal()
    for kind in ("lstm", "conv"):
        det, _ = build_detector(kind, normal, TrainConfig(max_epochs=3, seed=0), W=2)
        path = tmp_path / f"{kind}.model"
        save_detector(det, path)
        back = load_detector(path)
        t1 = detect_series(det, normal)
        t2 = detect_series(back, normal)
        np.testing.assert_array_equal(t1.epsilon, t2.epsilon)


def test_generator_round_trip(tmp_path):
    normal = _normal(n=4)
    c = unconstrained(4)
    gen, _ = train_generator(normal, c, TrainConfig(max_epochs=5, seed=1))
    path = tmp_path / "g.model"
    save_generator(gen, path)
    back = load_generator(path)
    assert back.read == gen.read
    assert back.names == gen.names
    for k in gen.params:
        np.testing.assert_array_equal(back.params[k], gen.params[k])


def test_wrong_magic_rejected(tmp_path):
    path = tmp_path / "bad.model"
    path.write_bytes(b"NOPE" + b"\x00" * 64)
    with pytest.raises(DataError):
        load_detector(path)


def test_truncated_payload_rejected(tmp_path):
    normal = _normal()
    det, _ = build_detector("dense", normal, TrainConfig(max_epochs=2, seed=0))
    path = tmp_path / "d.model"
    save_detector(det, path)
    blob = path.read_bytes()
    path.write_bytes(blob[:-16])
    with pytest.raises(DataError):
        load_detector(path)


def test_trailing_garbage_rejected(tmp_path):
    normal = _normal()
    det, _ = build_detector("dense", normal, TrainConfig(max_epochs=2, seed=0))
    path = tmp_path / "d.model"
    save_detector(det, path)
    path.write_bytes(path.read_bytes() + b"junk")
    with pytest.raises(DataError):
        load_detector(path)


def test_role_mixup_rejected(tmp_path):
    normal = _normal()
    det, _ = build_detector("dense", normal, TrainConfig(max_epochs=2, seed=0))
    path = tmp_path / "d.model"
    save_detector(det, path)
    with pytest.raises(DataError):
        load_generator(path)
