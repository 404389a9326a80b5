import csv
import json

import pytest

from mqite.cli import PRESETS, main, preset_config

SMALL = {
    "name": "small",
    "problem": {"kind": "maxcut", "n": 6, "params": {"seed": 1}},
    "mqite": {"delta": 0.2, "T": 0.6, "chi": 200, "epsilon": 2, "eta_cap": 36, "mode": "hybrid",
              "seed": 3, "qse_enabled": True},
}


def write_config(tmp_path, d, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(d, indent=1))
    return path


def test_unknown_key_exits_2(tmp_path, capsys):
    d = dict(SMALL, mqite=dict(SMALL["mqite"], shots=10))
    assert main(["run", str(write_config(tmp_path, d)), "--out", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert "shots" in err and "line" in err
    d = dict(SMALL, plots=True)
    assert main(["run", str(write_config(tmp_path, d)), "--out", str(tmp_path / "o")]) == 2


def test_bad_json_exits_2(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"problem": {"kind": "tfim",}\n')
    assert main(["run", str(p)]) == 2


def test_numerical_failure_exits_3(tmp_path, capsys):
    d = dict(SMALL, mqite=dict(SMALL["mqite"], delta=1.5, T=1.5), problem={"kind": "tfim", "n": 3})
    assert main(["run", str(write_config(tmp_path, d)), "--out", str(tmp_path / "o")]) == 3
    assert "sweep 1" in capsys.readouterr().err


def test_run_writes_outputs_and_is_reproducible(tmp_path):
    cfg = write_config(tmp_path, SMALL)
    outs = [tmp_path / "a" / "nested", tmp_path / "b"]
    for out in outs:
        assert main(["run", str(cfg), "--out", str(out)]) == 0
    names = {"run.json", "trajectory.csv", "terms.csv", "ite_trajectory.csv", "edges.csv", "qse.json",
             "manifest.json"}
    assert names <= {p.name for p in outs[0].iterdir()}
    for name in names - {"manifest.json"}:
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
    rows = list(csv.DictReader((outs[0] / "trajectory.csv").open()))
    assert list(rows[0]) == ["tau", "energy", "rel_error", "fidelity", "eta", "delta_star", "gates_1q", "gates_2q"]
    assert len(rows) == 4 and float(rows[-1]["tau"]) == 0.6
    man = json.loads((outs[0] / "manifest.json").read_text())
    assert man["seed"] == 3 and set(man["checksums"]) == names - {"manifest.json"}
    assert "numpy" in man["versions"]
    qse = json.loads((outs[0] / "qse.json").read_text())
    assert qse["energy"] <= qse["mqite_final_energy"] + 1e-12


def test_seed_fan_out(tmp_path, monkeypatch):
    monkeypatch.setenv("MQITE_OUTPUT_ROOT", str(tmp_path / "root"))
    cfg = write_config(tmp_path, SMALL)
    assert main(["run", str(cfg), "--seeds", "1", "2", "--jobs", "2"]) == 0
    assert (tmp_path / "root" / "small-seed1" / "run.json").exists()
    assert (tmp_path / "root" / "small-seed2" / "run.json").exists()


def test_presets_sorted(capsys):
    assert main(["presets"]) == 0
    names = [line.split("\t")[0] for line in capsys.readouterr().out.splitlines()]
    assert names == sorted(PRESETS) and "maxcut-10" in names
    assert main(["presets", "--show", "nuclear-pshell"]) == 0
    shown = json.loads(capsys.readouterr().out)
    assert shown["mqite"]["delta"] == 0.05


def test_preset_fields():
    m = preset_config("maxcut-10").mqite
    assert (m.delta, m.T, m.chi, m.epsilon, m.eta_cap) == (0.1, 3.0, 1000, 2, 100)
    v = preset_config("validation-6q").mqite
    assert (v.delta, v.T, v.chi) == (0.3, 3.0, 100)
    nuc = preset_config("nuclear-pshell").mqite
    assert nuc.delta == 0.05 and nuc.eta_cap == 36


def test_problems_gen(tmp_path, capsys):
    out, edges = tmp_path / "h.txt", tmp_path / "e.csv"
    assert main(["problems", "gen", "--kind", "maxcut", "--n", "6", "--seed", "2", "--out", str(out),
                 "--edges", str(edges)]) == 0
    assert len(out.read_text().splitlines()) == 9
    assert edges.read_text().startswith("t,q,weight")
    assert main(["problems", "gen", "--kind", "tfim", "--n", "4", "--h-x", "0.5", "--out", str(out)]) == 0
    assert "7 terms" in capsys.readouterr().out
    assert main(["problems", "gen", "--kind", "tfim", "--out", str(out)]) == 2


def test_decompose_check_csv(capsys):
    assert main(["decompose-check", "--n-max", "2", "--random", "4", "--random-n", "3"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "n,weight,strings,gates_1q,gates_2q,max_deviation"
    assert max(float(line.split(",")[-1]) for line in lines[1:]) < 1e-9


def test_run_qse(tmp_path, capsys):
    out = tmp_path / "o"
    assert main(["run", str(write_config(tmp_path, SMALL)), "--out", str(out)]) == 0
    capsys.readouterr()
    assert main(["run-qse", "--record", str(out / "run.json"), "--stride", "1"]) == 0
    line = capsys.readouterr().out
    assert line.startswith("E_QSE=") and "rank=" in line
    assert main(["run-qse", "--record", str(tmp_path / "missing.json")]) == 2
