"""Test configuration and fixtures"""

import os
import sys

import orjson
import pytest

# Add src to path for imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


SWEEP_CONFIG = {
    "pipeline": "sweep",
    "transform": {"kind": "rotation", "alpha": "√2-1"},
    "f": [["0", "√2-1", "2-√2"], ["√2-1", "1", "1-√2"]],
    "r": "inf",
    "n_max": 20,
    "transfer_bound": "2",
}


@pytest.fixture
def write_config(tmp_path):
    """Write an experiment document and return its path"""

    def _write(data, name="config.json"):
        path = tmp_path / name
        path.write_bytes(data if isinstance(data, bytes) else orjson.dumps(data))
        return path

    return _write


@pytest.fixture
def sweep_config():
    return dict(SWEEP_CONFIG)
