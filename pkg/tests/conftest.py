import numpy as np
import pytest

from concealab.schema import Channel, SensorSchema


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def toy_schema():
    """Five channels: two continuous, one binary pair with a flow that
    depends on its switch, one categorical."""
    return SensorSchema((
        Channel("level", "continuous", plc=1, vmin=0.0, vmax=4.0),
        Channel("flow", "continuous", plc=1, vmin=0.0, vmax=100.0,
                depends_on="switch"),
        Channel("switch", "binary", plc=1),
        Channel("pressure", "continuous", plc=2, vmin=1.0, vmax=9.0),
        Channel("setting", "categorical", plc=2, allowed_values=(0.0, 2.0, 5.0)),
    ))
