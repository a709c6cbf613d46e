import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from acwave.config import DEFAULTS, ConfigError, RunConfig
from acwave.cross_section import CrossSectionGrid
from acwave.reporting import dumps, fmt, read_table, wave_header, wave_rows, write_csv


def test_defaults_are_complete():
    cfg = RunConfig.from_dict({})
    assert cfg.data == DEFAULTS
    assert cfg["channel"]["spacing"] == 0.025
    assert len(cfg.digest()) == 64


def test_partial_sections_merge_with_defaults():
    cfg = RunConfig.from_dict({"channel": {"spacing": 0.05}, "seeds": {"k_max": 3}})
    assert cfg["channel"] == {"x_min": -40.0, "x_max": 40.0, "spacing": 0.05}
    assert cfg["seeds"]["k_max"] == 3 and cfg["seeds"]["per_mode"] == 4
    assert cfg.digest() != RunConfig.from_dict({}).digest()


@pytest.mark.parametrize(
    "raw",
    [
        {"unknown": 1},
        {"channel": {"spacing": -1}},
        {"channel": {"x_min": 5.0}},
        {"speed": 0},
        {"cross_section": {"shape": "disk"}},
        {"cross_section": {"shape": "rectangle"}},
        {"channel": {"x_min": -40.0, "spacing": 0.3}},
        {"channel": {"spacing": 2.0, "x_min": -40, "x_max": 40}},
        {"seeds": {"k_max": 0}},
        {"tolerances": {"critical": 1e-10, "typo": 1}},
    ],
)
def test_invalid_configs_are_rejected(raw):
    with pytest.raises(ConfigError):
        RunConfig.from_dict(raw)


def test_load_and_override(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"speed": 0.5}))
    cfg = RunConfig.load(path)
    assert cfg["speed"] == 0.5
    assert cfg.override(speed=0.7, speeds=None)["speed"] == 0.7
    assert RunConfig.load(None).data == DEFAULTS
    (tmp_path / "bad.json").write_text("{")
    with pytest.raises(ConfigError):
        RunConfig.load(tmp_path / "bad.json")
    with pytest.raises(ConfigError):
        RunConfig.load(tmp_path / "missing.json")


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_fmt_round_trips(x):
    assert float(fmt(x)) == x


def test_fmt_non_finite():
    assert fmt(float("nan")) == "nan"
    assert fmt(float("inf")) == "inf" and fmt(-float("inf")) == "-inf"


def test_dumps_is_canonical():
    a = dumps({"b": 0.1, "a": [1, 2.5, np.float64(3.0)], "c": {"z": None, "y": True}})
    b = dumps({"c": {"y": True, "z": None}, "a": [1, 2.5, 3.0], "b": 0.1})
    assert a == b
    parsed = json.loads(a)
    assert parsed["b"] == 0.1 and parsed["a"] == [1, 2.5, 3.0]
    assert json.loads(dumps({"x": float("nan")}))["x"] == "NaN"
    assert json.loads(dumps({"x": np.array([1.0, 2.0])}))["x"] == [1.0, 2.0]
    with pytest.raises(TypeError):
        dumps({"x": object()})


def test_wave_rows_order_and_round_trip(tmp_path):
    cross = CrossSectionGrid.interval(2.0, 3)
    x = np.array([-1.0, 0.0])
    U = np.array([[0.0, 0.1, 0.0], [0.0, 0.2, 0.0]])
    rows = list(wave_rows(U, x, cross))
    assert rows[:3] == [(-1.0, 0.0, 0.0), (-1.0, 1.0, 0.1), (-1.0, 2.0, 0.0)]
    write_csv(tmp_path / "w.csv", wave_header(cross), rows)
    header, data = read_table(tmp_path / "w.csv")
    assert header == ["x", "y", "u"]
    np.testing.assert_array_equal(data[:, -1].reshape(2, 3), U)


def test_rectangle_header():
    rect = CrossSectionGrid.rectangle(2.0, 1.0, 3, 3)
    assert wave_header(rect) == ["x", "y1", "y2", "u"]
    rows = list(wave_rows(np.zeros((1, 3, 3)), [0.0], rect))
    assert len(rows) == 9 and rows[1][:3] == (0.0, 0.0, 0.5)


def test_csv_integers_and_nan(tmp_path):
    write_csv(tmp_path / "t.csv", ["j", "v"], [(1, 0.5), (2, math.nan)])
    assert (tmp_path / "t.csv").read_text() == "j,v\n1,0.5\n2,nan\n"
