import json
from pathlib import Path

import numpy as np
import pytest

from hsmirnov import io
from hsmirnov.cli import RunConfig, InputError, main

DATA = Path(__file__).resolve().parents[1] / "src" / "hsmirnov" / "data"


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture
def fast_config(tmp_path):
    return write(tmp_path / "cfg.json", {"n": 1, "l": 0.5, "eps": 0.1, "grid": 1 / 30, "dt": 0.05})


def test_config_validation():
    with pytest.raises(InputError, match="config.grid"):
        RunConfig.from_json({"grid": -1})
    with pytest.raises(InputError, match="config.bogus"):
        RunConfig.from_json({"bogus": 1})
    with pytest.raises(InputError, match="eps_schedule"):
        RunConfig.from_json({"eps_schedule": [0.1, 0.2]})
    with pytest.raises(InputError, match="tolerances"):
        RunConfig.from_json({"tolerances": {"nope": 1}})
    cfg = RunConfig.from_json({"l": 2.0, "eps_schedule": [0.4, 0.2]})
    assert RunConfig.from_json(json.loads(io.dumps(cfg.to_json()))) == cfg


def test_bundled_configs_parse():
    for name in ("figure_eight_config.json", "dipole_config.json", "rotational_flow_config.json"):
        RunConfig.from_json(io.read_json(DATA / name))


def test_decompose_and_verify(tmp_path, fast_config):
    out = tmp_path / "run"
    assert main(["decompose", "--config", fast_config, "--charge", str(DATA / "figure_eight.json"),
                 "--out", str(out)]) == 0
    report = io.read_json(out / "report.json")
    assert report["passed"] and set(report["checks"]) >= {"mass_identity", "pairing", "variation", "support"}
    assert report["checks"]["contact"]["value"] <= 1e-10
    header = (out / "curves.csv").read_text().splitlines()[0]
    assert header == "curve,weight,t,x1,y1,z"
    assert main(["verify", "--curves", str(out / "curves.json"), "--charge", str(DATA / "figure_eight.json"),
                 "--config", fast_config]) == 0

    # tampered weight: exit 3 and the failing check is named
    data = json.loads((out / "curves.json").read_text())
    for e in data["entries"]:
        e["weight"] *= 3
    tampered = write(tmp_path / "tampered.json", data)
    assert main(["verify", "--curves", tampered, "--charge", str(DATA / "figure_eight.json"),
                 "--config", fast_config]) == 3


def test_tampered_weight_names_check(tmp_path, fast_config, capsys):
    out = tmp_path / "run"
    main(["decompose", "--config", fast_config, "--charge", str(DATA / "figure_eight.json"), "--out", str(out)])
    data = json.loads((out / "curves.json").read_text())
    k = max(range(len(data["entries"])), key=lambda i: data["entries"][i]["weight"])
    data["entries"][k]["weight"] *= 50
    tampered = write(tmp_path / "t.json", data)
    capsys.readouterr()
    assert main(["verify", "--curves", tampered, "--charge", str(DATA / "figure_eight.json"),
                 "--config", fast_config]) == 3
    assert "check failed: mass_identity" in capsys.readouterr().err


def test_zero_charge(tmp_path, fast_config):
    charge = write(tmp_path / "zero.json", {"n": 1, "atoms": []})
    out = tmp_path / "zero"
    assert main(["decompose", "--config", fast_config, "--charge", charge, "--out", str(out)]) == 0
    assert io.read_json(out / "curves.json")["entries"] == []
    assert io.read_json(out / "report.json")["curves"] == 0


def test_dipole_needs_general(tmp_path, fast_config, capsys):
    assert main(["decompose", "--config", fast_config, "--charge", str(DATA / "dipole.json"),
                 "--out", str(tmp_path / "d")]) == 2
    assert "NotSolenoidal" in capsys.readouterr().err


def test_input_errors(tmp_path, fast_config, capsys):
    charge2 = write(tmp_path / "c2.json", {"n": 2, "atoms": [{"point": [0] * 5, "vector": [1, 0, 0, 0]}]})
    assert main(["decompose", "--config", fast_config, "--charge", charge2, "--out", str(tmp_path / "x")]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    assert main(["decompose", "--config", str(bad), "--charge", charge2]) == 1
    assert "line 1" in capsys.readouterr().err
    assert main(["decompose", "--charge", str(tmp_path / "missing.json")]) == 1
    assert main(["frobnicate"]) == 1


def test_verify_mismatched_n(tmp_path, fast_config):
    out = tmp_path / "run"
    main(["decompose", "--config", fast_config, "--charge", str(DATA / "figure_eight.json"), "--out", str(out)])
    charge2 = write(tmp_path / "c2.json", {"n": 2, "atoms": [{"point": [0] * 5, "vector": [1, 0, 0, 0]}]})
    cfg2 = write(tmp_path / "cfg2.json", {"n": 2})
    assert main(["verify", "--curves", str(out / "curves.json"), "--charge", charge2, "--config", cfg2]) == 1


def test_epsilon_schedule(tmp_path):
    cfg = write(tmp_path / "cfg.json", {"n": 1, "l": 0.5, "grid": 0.1, "dt": 0.05})
    out = tmp_path / "sched"
    main(["decompose", "--config", cfg, "--charge", str(DATA / "figure_eight.json"), "--out", str(out),
          "--epsilon-schedule", "0.3,0.15"])
    rep = io.read_json(out / "report.json")
    assert [r["eps"] for r in rep["refinement"]] == [0.3, 0.15]
    assert rep["eps"] == 0.15
    assert main(["decompose", "--config", cfg, "--charge", str(DATA / "figure_eight.json"),
                 "--epsilon-schedule", "0.1,0.2"]) == 1


def test_flow_rotational(tmp_path):
    out = tmp_path / "flow"
    assert main(["flow", "--config", str(DATA / "rotational_flow_config.json"), "--field",
                 str(DATA / "rotational_field.json"), "--seeds", str(DATA / "rotational_seeds.json"),
                 "--out", str(out)]) == 0
    last = (out / "trajectory_0.csv").read_text().splitlines()[-1]
    t, x, y, z = map(float, last.split(","))
    assert abs(t - 2 * np.pi) < 1e-12 and max(abs(x - 1), abs(y), abs(z - np.pi)) <= 1e-6
    rep = io.read_json(out / "flow_report.json")
    assert rep["passed"] and rep["trajectories"][0]["gronwall"]["holds"]


def test_flow_zero_and_fast_fields(tmp_path, capsys):
    cfg = write(tmp_path / "cfg.json", {"n": 1, "l": 1.0, "dt": 0.25})
    seeds = write(tmp_path / "s.json", [[0.5, 0.5, 0.1]])
    zero = write(tmp_path / "z.json", {"preset": "constant", "coefficients": [0, 0]})
    assert main(["flow", "--config", cfg, "--field", zero, "--seeds", seeds, "--out", str(tmp_path / "z")]) == 0
    rows = (tmp_path / "z" / "trajectory_0.csv").read_text().splitlines()[1:]
    assert {r.split(",", 1)[1] for r in rows} == {"0.5,0.5,0.10000000000000001"}
    fast = write(tmp_path / "f.json", {"preset": "constant", "coefficients": [2, 0]})
    assert main(["flow", "--config", cfg, "--field", fast, "--seeds", seeds, "--out", str(tmp_path / "f")]) != 0
    assert "SpeedBound" in capsys.readouterr().err
    bad = write(tmp_path / "b.json", {"preset": "nope"})
    assert main(["flow", "--config", cfg, "--field", bad, "--seeds", seeds]) == 1
