import json
import math

import pytest

from slgap.cli import main

PI = math.pi


def _write(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def _free_problem(tmp_path):
    return _write(tmp_path, "prob.json", {"interval": [0.0, PI], "V": 0.0, "w": 1.0})


def test_solve_outputs(tmp_path, capsys):
    out = tmp_path / "out"
    rc = main(["solve", "--input", _free_problem(tmp_path), "--out", str(out), "--mesh-n", "512"])
    assert rc == 0
    res = json.loads((out / "results.json").read_text())
    assert abs(res["gap"] - 3.0) < 1e-7
    lines = (out / "eigenfunctions.csv").read_text().splitlines()
    assert lines[0] == "x,u1,u2"
    assert len(lines) == 515  # header + n + 2 boundary rows


def test_analyze_reports_crossings(tmp_path):
    out = tmp_path / "out"
    rc = main(["analyze", "--input", _free_problem(tmp_path), "--out", str(out), "--mesh-n", "512"])
    assert rc == 0
    res = json.loads((out / "analysis.json").read_text())
    assert abs(res["crossings"]["x_minus"] - PI / 3) < 1e-2


def test_secular_outputs(tmp_path):
    inp = _write(
        tmp_path,
        "sp.json",
        {"interval": [0.0, PI], "x_minus": 1.2, "Vmax": 2.0,
         "xhat_minus": 1.6, "N_big": 1.5, "w_low": 1.0},
    )
    out = tmp_path / "out"
    rc = main(["secular", "--input", inp, "--out", str(out), "--mesh-n", "512"])
    assert rc == 0
    res = json.loads((out / "results.json").read_text())
    assert len(res["roots"]) == 2
    assert (out / "secular.csv").read_text().splitlines()[0] == "lambda,F"


def test_optimize_outputs_and_determinism(tmp_path):
    inp = _write(
        tmp_path,
        "space.json",
        {"interval": [0.0, PI], "M": 0.0, "N_less": 1.0, "N_big": 2.0, "mesh_n": 512},
    )
    outs = []
    for name in ("o1", "o2"):
        out = tmp_path / name
        assert main(["optimize", "--input", inp, "--out", str(out)]) == 0
        outs.append(out)
    assert (outs[0] / "optimum.json").read_bytes() == (outs[1] / "optimum.json").read_bytes()
    assert (outs[0] / "trace.csv").read_bytes() == (outs[1] / "trace.csv").read_bytes()
    res = json.loads((outs[0] / "optimum.json").read_text())
    assert abs(res["gamma"] - 1.5) < 1e-6
    assert (outs[0] / "trace.csv").read_text().splitlines()[0] == "iter,gamma"


def test_liouville_outputs(tmp_path):
    inp = _write(
        tmp_path,
        "smooth.json",
        {"interval": [0.0, PI], "V": 0.0,
         "w": {"breakpoints": [0.0, PI], "pieces": [[1.0, 0.1, 0.02]]}},
    )
    out = tmp_path / "out"
    rc = main(["liouville", "--input", inp, "--out", str(out), "--mesh-n", "512"])
    assert rc == 0
    res = json.loads((out / "bounds.json").read_text())
    assert set(res) >= {"L", "bound", "convex", "gap"}
    assert res["gap"] >= res["bound"] - 1e-6
    assert (out / "liouville.csv").read_text().splitlines()[0] == "xi,psi,dpsi,d2psi"


def test_liouville_jump_density_is_solver_failure(tmp_path, capsys):
    inp = _write(
        tmp_path,
        "jump.json",
        {"interval": [0.0, PI], "V": 0.0,
         "w": {"breakpoints": [0.0, 1.0, PI], "pieces": [[2.0], [1.0]]}},
    )
    rc = main(["liouville", "--input", inp, "--out", str(tmp_path / "out")])
    assert rc == 3
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "solver-failure"
    assert "w not C" in err["detail"]


def test_validate_accepts_and_rejects(tmp_path, capsys):
    good = _write(
        tmp_path,
        "good.json",
        {"interval": [0.0, PI], "w": 1.0,
         "V": {"breakpoints": [0.0, 1.0, PI], "pieces": [[3.0], [0.0]]},
         "classes": {"M": 4.0, "V_transition": 1.5}},
    )
    out = tmp_path / "good_out"
    assert main(["validate", "--input", good, "--out", str(out)]) == 0
    assert json.loads((out / "validation.json").read_text())["valid"]

    bad = _write(
        tmp_path,
        "bad.json",
        {"interval": [0.0, PI], "w": 1.0,
         "V": {"breakpoints": [0.0, 1.0, PI], "pieces": [[0.0], [6.0]]},
         "classes": {"M": 4.0, "V_transition": 1.5}},
    )
    out2 = tmp_path / "bad_out"
    assert main(["validate", "--input", bad, "--out", str(out2)]) == 2
    report = json.loads((out2 / "validation.json").read_text())
    assert not report["valid"] and report["violations"]
    assert json.loads(capsys.readouterr().err)["error"] == "invalid-input"


def test_malformed_json_exit_2(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{"interval": [0, 3.14], ')
    rc = main(["solve", "--input", str(path), "--out", str(tmp_path / "out")])
    assert rc == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "invalid-input"
    assert "line" in err["detail"]


def test_missing_field_exit_2(tmp_path, capsys):
    path = _write(tmp_path, "partial.json", {"interval": [0.0, PI], "V": 0.0})
    rc = main(["solve", "--input", str(path), "--out", str(tmp_path / "out")])
    assert rc == 2
    assert "'w'" in json.loads(capsys.readouterr().err)["detail"]


def test_negative_density_exit_2(tmp_path, capsys):
    path = _write(tmp_path, "neg.json", {"interval": [0.0, PI], "V": 0.0, "w": -1.0})
    rc = main(["solve", "--input", str(path), "--out", str(tmp_path / "out")])
    assert rc == 2
    capsys.readouterr()


def test_bad_flags_exit_2(tmp_path, capsys):
    inp = _free_problem(tmp_path)
    assert main(["solve", "--input", inp, "--out", str(tmp_path / "o"), "--mesh-n", "8"]) == 2
    assert main(["solve", "--input", inp, "--out", str(tmp_path / "o"), "--k", "0"]) == 2
    capsys.readouterr()
