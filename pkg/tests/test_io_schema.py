import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lscorr import io, scenarios
from lscorr.errors import ConfigurationError
from lscorr.grid import make_grid
from lscorr.manybody import ManyBodyWavefunction
from lscorr.schema import config_errors, validate_config, validate_report


def test_floats_use_seventeen_digits():
    text = io.dumps({"a": 0.1, "b": [1, 2.5], "c": 1 / 3})
    assert "0.10000000000000001" in text and "0.33333333333333331" in text
    assert json.loads(text) == {"a": 0.1, "b": [1, 2.5], "c": 1 / 3}


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_round_trip(x):
    assert json.loads(io.dumps({"v": x}))["v"] == x


def test_special_values_and_complex():
    out = json.loads(io.dumps({"z": 1 + 2j, "n": float("nan"), "arr": np.arange(3), "k": np.int64(4)}))
    assert out == {"z": {"re": 1.0, "im": 2.0}, "n": "nan", "arr": [0, 1, 2], "k": 4}
    with pytest.raises(TypeError):
        io.dumps({"bad": object()})


def test_dumps_is_order_independent():
    assert io.dumps({"b": 1, "a": {"y": 2, "x": 3}}) == io.dumps({"a": {"x": 3, "y": 2}, "b": 1})


def test_csv_round_trip(tmp_path):
    x = np.linspace(0, 1, 7)
    v = np.exp(1j * x) / 3
    io.write_csv(tmp_path / "f.csv", x, v)
    x2, v2 = io.read_csv(tmp_path / "f.csv")
    assert np.array_equal(x, x2) and np.array_equal(v, v2)


def test_snapshot_size_mismatch(tmp_path):
    g = make_grid(0, 1, 8)
    io.write_snapshot(tmp_path / "s", ManyBodyWavefunction(g, 2, np.ones((8, 8), complex)))
    meta = io.read_json(tmp_path / "s.json")
    meta["shape"] = [8, 9]
    io.write_json(tmp_path / "s.json", meta)
    with pytest.raises(ConfigurationError):
        io.read_snapshot(tmp_path / "s")


@pytest.mark.parametrize("name", scenarios.names())
def test_bundled_scenarios_are_valid(name):
    assert config_errors(scenarios.load(name)) == []


def test_config_errors_point_at_fields():
    cfg = scenarios.load("plane-wave-translation")
    cfg["potential"]["symmetries"][0]["sigma"] = 0
    errs = config_errors(cfg)
    assert errs and errs[0].startswith("potential/symmetries/0/sigma")
    cfg = scenarios.load("plane-wave-translation")
    cfg["checks"].append({"id": "canonical"})
    assert any("not available for engine" in e for e in config_errors(cfg))
    cfg = scenarios.load("plane-wave-translation")
    del cfg["grid"]
    with pytest.raises(ConfigurationError, match="grid"):
        validate_config(cfg)


def test_report_schema():
    good = {"check": "c", "equation": "e", "passed": True,
            "levels": [{"equation": "e", "norms": {"max": 1.0, "l2": 0.5}, "dx": 0.1, "dt": None}]}
    validate_report(good)
    bad = dict(good, levels=[{"equation": "e", "dx": 0.1, "dt": None}])
    with pytest.raises(ConfigurationError, match="norms"):
        validate_report(bad)
