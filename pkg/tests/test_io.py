import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hsmirnov import io
from hsmirnov.fixtures import dipole, figure_eight


@given(st.lists(st.floats(allow_nan=False, allow_infinity=True), max_size=20))
def test_floats_round_trip(xs):
    back = io._revive(json.loads(io.dumps({"x": xs})))["x"]
    assert back == xs


def test_sentinels(tmp_path):
    p = tmp_path / "a.json"
    io.write_json(p, {"a": [math.inf, -math.inf], "b": math.nan, "c": True, "d": None, "e": 3})
    data = io.read_json(p)
    assert data["a"] == [math.inf, -math.inf] and math.isnan(data["b"])
    assert data["c"] is True and data["d"] is None and data["e"] == 3
    assert '"inf"' in p.read_text()
    with pytest.raises(TypeError):
        io.dumps({"x": object()})


def test_charge_round_trip():
    mu, div = dipole()
    back, bdiv = io.charge_from_json(json.loads(io.dumps(io.charge_to_json(mu, div))))
    assert np.array_equal(back.points, mu.points) and np.array_equal(back.vectors, mu.vectors)
    assert len(bdiv) == 2 and bdiv[0][1] == 1.0
    mu8 = figure_eight(10)
    back, bdiv = io.charge_from_json(io.charge_to_json(mu8))
    assert bdiv is None and np.array_equal(back.vectors, mu8.vectors)


@pytest.mark.parametrize("bad, field", [
    ([], "top level"),
    ({"atoms": []}, "'n'"),
    ({"n": 0, "atoms": []}, "charge.n"),
    ({"n": 1, "atoms": [{"point": [0, 0], "vector": [1, 0]}]}, "atoms[0].point"),
    ({"n": 1, "atoms": [{"point": [0, 0, 0], "vector": [1]}]}, "atoms[0].vector"),
    ({"n": 1, "atoms": [{"point": [0, 0, 0]}]}, "atoms[0]"),
    ({"n": 1, "atoms": [], "divergence": [{"point": [0, 0, 0]}]}, "divergence[0]"),
])
def test_charge_errors_name_field(bad, field):
    with pytest.raises(ValueError, match=field.replace("[", r"\[").replace("]", r"\]")):
        io.charge_from_json(bad)


def test_trajectory_csv(tmp_path):
    from hsmirnov.fixtures import rotational_field
    from hsmirnov.flow import FlowConfig, integrate
    c = integrate([1, 0, 0], rotational_field(), FlowConfig(0.5, 1.0))
    io.write_trajectory_csv(tmp_path / "t.csv", c)
    rows = (tmp_path / "t.csv").read_text().splitlines()
    assert rows[0] == "t,x1,y1,z" and len(rows) == 4
    assert np.allclose([float(v) for v in rows[-1].split(",")], [1.0, *c.end])
