import json

import pytest

from l2torsion.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_eval_csv(capsys):
    code, out, _ = run(capsys, "eval", "--manifold", "trefoil", "--grid", "log:0:1:2")
    assert code == 0
    assert out.splitlines()[0] == "t,rho,exact"


def test_degree_json(capsys):
    code, out, _ = run(capsys, "degree", "--manifold", "figure8", "--grid", "log:-4:4:161")
    data = json.loads(out)
    assert code == 0 and data["schema"] == "l2torsion/1"
    assert data["degree"] == -1 and data["thurston"]["verdict"] == "EQUAL"


def test_check_passes(capsys):
    code, out, _ = run(capsys, "check", "--manifold", "5_2", "--grid", "log:-2:2:41", "--fuzz", "10")
    assert code == 0 and json.loads(out)["passed"]


def test_tower(capsys, tmp_path):
    target = tmp_path / "tower.csv"
    code, _, _ = run(capsys, "tower", "--demo", "lawton", "--levels", "5", "--format", "csv",
                     "--output", str(target))
    assert code == 0
    assert target.read_text().startswith("level,t,value")
    code, _, _ = run(capsys, "tower", "--levels", "5", "--strict")
    assert code == 1


def test_bad_input(capsys):
    assert run(capsys, "eval", "--manifold", "nonexistent")[0] == 2
    assert run(capsys, "eval", "--manifold", "trefoil", "--grid", "bogus")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2


def test_non_acyclic(capsys, tmp_path):
    from l2torsion import catalog
    from l2torsion.foxcalc import square_matrix_boundary
    data = square_matrix_boundary(catalog.get("trefoil").presentation).to_json()
    data["A"] = [[[]]]
    path = tmp_path / "zero.json"
    path.write_text(json.dumps(data))
    code, _, err = run(capsys, "eval", "--manifold", str(path))
    assert code == 3
    cert = json.loads(err)
    assert cert["error"] == "NonAcyclic" and cert["certificate"]["kernel_dimension"] == "1"
