import io
import json
import math

import numpy as np
import pytest

from central_configs.utils import parse_angle, read_csv_rows, show_progress, to_jsonable, write_csv, write_json


@pytest.mark.parametrize("text, degrees, expected", [
    ("75deg", False, math.radians(75)),
    ("1.309rad", True, 1.309),
    ("1.5", False, 1.5),
    ("45", True, math.pi / 4),
    (" -2.5e-1 deg ", False, math.radians(-0.25)),
])
def test_parse_angle(text, degrees, expected):
    assert parse_angle(text, degrees) == pytest.approx(expected)


@pytest.mark.parametrize("text", ["", "deg", "75 degrees", "pi/4"])
def test_parse_angle_rejects(text):
    with pytest.raises(ValueError, match="Not an angle"):
        parse_angle(text)


def test_to_jsonable_converts_numpy():
    data = to_jsonable({"a": np.array([1.0, 2.0]), (0, 1): np.float64(0.5), "ok": np.bool_(True), "n": np.int64(3)})
    assert json.loads(json.dumps(data)) == {"a": [1.0, 2.0], "(0, 1)": 0.5, "ok": True, "n": 3}


def test_write_json_to_stream():
    stream = io.StringIO()
    write_json({"x": np.arange(2)}, stream=stream)
    assert json.loads(stream.getvalue()) == {"x": [0, 1]}


def test_write_csv_cells(tmp_path):
    path = str(tmp_path / "t.csv")
    write_csv(("a", "b", "c"), [(0.1, None, 3)], path=path)
    rows = read_csv_rows(path)
    assert rows == [{"a": "0.1", "b": "", "c": "3"}]


def test_show_progress_uses_stderr(capsys):
    show_progress("sweeping")
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "sweeping" in captured.err
