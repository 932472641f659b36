import json
import math

from bayesbai import cli


def write(path, obj):
    path.write_text(json.dumps(obj), encoding="utf-8")


def test_regret_curve_shape_and_determinism(tmp_path):
    cfg = tmp_path / "cfg.json"
    write(cfg, {
        "policies": ["uniform", "successive-rejects"],
        "instance": [0.0, 0.0, 0.5],
        "horizons": [30, 60],
        "reps": 5000,
        "seed": 3,
    })
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    assert cli.main(["regret-curve", "--config", str(cfg), "--out", str(out1)]) == 0
    assert cli.main(["regret-curve", "--config", str(cfg), "--out", str(out2)]) == 0
    raw = out1.read_bytes()
    assert raw == out2.read_bytes()
    assert b"\r" not in raw
    lines = [l for l in raw.decode("utf-8").splitlines() if not l.startswith("#")]
    assert lines[0] == "policy,T,reps,regret_mean,regret_se,seed,status"
    assert len(lines) == 1 + 2 * 2  # header + policies x horizons
    assert all(l.endswith(",ok") for l in lines[1:])


def test_regret_curve_flag_overrides_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    write(cfg, {"policies": ["uniform"], "instance": [0.0, 0.5],
                "horizons": [4], "reps": 1000, "seed": 3})
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    cli.main(["regret-curve", "--config", str(cfg), "--out", str(out1)])
    cli.main(["regret-curve", "--config", str(cfg), "--out", str(out2), "--seed", "4"])
    assert out1.read_bytes() != out2.read_bytes()


def test_regret_curve_rejects_bad_horizons(tmp_path):
    cfg = tmp_path / "cfg.json"
    write(cfg, {"policies": ["uniform"], "instance": [0.0, 0.5],
                "horizons": [9, 3], "reps": 100, "seed": 0})
    assert cli.main(["regret-curve", "--config", str(cfg),
                     "--out", str(tmp_path / "x.csv")]) == 2


def test_ebi_probe_records(tmp_path):
    cfg = tmp_path / "cfg.json"
    write(cfg, {
        "states": [
            {"S": [0.0, 0.0], "N": [1, 1]},
            {"w_state": {"T": 9, "C_U": 3.0, "n12": 2}},
            {"S": [0.0, 0.0, 0.0, 0.0], "N": [1, 1, 1, 1]},
        ],
        "budgets": [0, 2],
    })
    out = tmp_path / "probe.json"
    assert cli.main(["ebi-probe", "--config", str(cfg), "--out", str(out)]) == 0
    doc = json.loads(out.read_text(encoding="utf-8"))
    assert "config" in doc
    recs = doc["results"]
    assert len(recs) == 6
    base = recs[0]
    assert base["budget"] == 0 and base["chosen_arm"] is None
    assert base["improvement"] == [] and base["arm_losses"] == []
    sym = recs[1]
    assert sym["symmetric_tie"] is True
    assert math.isclose(sym["improvement"][0], sym["improvement"][1], abs_tol=1e-9)
    w = recs[3]
    assert min(w["improvement"][:2]) > w["improvement"][2]
    assert recs[4]["error"] == "CapacityError"
    assert recs[5]["error"] == "CapacityError"


def test_event_probe_rows(tmp_path):
    cfg = tmp_path / "cfg.json"
    write(cfg, {"T": [11], "C_U": 2.0, "Delta_G": 0.5, "reps": 20000, "seed": 1})
    out = tmp_path / "events.csv"
    assert cli.main(["event-probe", "--config", str(cfg), "--out", str(out)]) == 0
    lines = [l for l in out.read_text(encoding="utf-8").splitlines()
             if not l.startswith("#")]
    assert lines[0].startswith("T,event,probability")
    assert len(lines) == 4
    assert all(l.endswith(",pass") for l in lines[1:])


def test_validate_subset_passes_and_reports(capsys):
    assert cli.main(["validate", "--criteria", "1,2,9"]) == 0
    text = capsys.readouterr().out
    assert text.count("[PASS]") == 3
    assert "3/3 criteria passed" in text


def test_validate_negative_control(capsys):
    # degrading the solver's quadrature must break the improvement suite
    assert cli.main(["validate", "--criteria", "5", "--quadrature-order", "1"]) != 0
    assert "[FAIL]" in capsys.readouterr().out


def test_missing_config_is_an_error(tmp_path):
    assert cli.main(["regret-curve", "--config", str(tmp_path / "nope.json"),
                     "--out", str(tmp_path / "x.csv")]) == 2
