import json

import numpy as np
import pytest

from drealize import catalog, serialize
from drealize.beurling import InterpolationSpec
from drealize.charfun import RowContraction
from drealize.cli import EXAMPLES, Check, main
from drealize.colligation import Colligation


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(serialize.dumps(obj))
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def checks(report):
    return {c["name"]: c for c in report["checks"]}


@pytest.fixture
def quad_file(tmp_path):
    return write(tmp_path, "quad.json", serialize.colligation_to_obj(catalog.quadratic_colligation()))


def test_check_quadratic(capsys, quad_file):
    code, out, _ = run(capsys, "check", quad_file, "--grid-n", "6")
    rep = json.loads(out)
    assert code == 0 and rep["schema"] == "drealize.report/1" and rep["command"] == "check"
    assert rep["input_digest"].startswith("sha256:")
    c = checks(rep)
    assert c["isometric"]["verdict"] == "pass"
    assert c["weakly_coisometric"]["verdict"] == "pass"
    assert c["coisometric"]["verdict"] == "fail"
    assert c["inner"]["verdict"] == "pass"
    for entry in rep["checks"]:
        assert {"name", "residual", "threshold", "verdict"} <= set(entry)


def test_check_twisted(capsys, tmp_path):
    path = write(tmp_path, "t.json", serialize.colligation_to_obj(catalog.twisted_colligation()))
    code, out, _ = run(capsys, "check", path, "--grid-n", "5", "--require", "coisometric",
                       "--require", "commutative")
    c = checks(json.loads(out))
    assert code == 0
    assert c["coisometric"]["verdict"] == "pass" and c["commutative"]["verdict"] == "pass"
    assert c["inner"]["verdict"] == "fail"


def test_check_zero_colligation(capsys, tmp_path):
    col = Colligation(np.zeros((2, 2, 2)), np.zeros((2, 2, 2)), np.zeros((2, 2)), np.zeros((2, 2)))
    path = write(tmp_path, "z.json", serialize.colligation_to_obj(col))
    code, out, _ = run(capsys, "check", path, "--grid-n", "4", "--require", "contractive")
    assert code == 0 and checks(json.loads(out))["contractive"]["verdict"] == "pass"


def test_failed_requirement_exits_one(capsys, quad_file):
    code, out, _ = run(capsys, "check", quad_file, "--grid-n", "4", "--require", "coisometric")
    assert code == 1 and json.loads(out)["exit_code"] == 1


def test_inconclusive_exits_three(capsys, tmp_path):
    col = Colligation([[[0.999]]], [[[0.0]]], [[0.04]], [[0.0]])
    path = write(tmp_path, "slow.json", serialize.colligation_to_obj(col))
    code, out, _ = run(capsys, "check", path, "--grid-n", "3", "--stability-horizon", "20",
                       "--require", "strongly_stable")
    assert code == 3
    assert checks(json.loads(out))["strongly_stable"]["verdict"] == "inconclusive"


@pytest.mark.parametrize("content", ["{not json", '{"d": 2}', "[]"])
def test_input_errors_exit_two(capsys, tmp_path, content):
    path = tmp_path / "bad.json"
    path.write_text(content)
    code, out, err = run(capsys, "check", str(path))
    assert code == 2 and out == "" and "input error" in err


def test_missing_file_and_bad_flags(capsys, tmp_path):
    assert run(capsys, "check", str(tmp_path / "missing.json"))[0] == 2
    assert run(capsys, "check")[0] == 2
    assert run(capsys, "probe-hankel", "--n", "100")[0] == 2


def test_unknown_required_check(capsys, quad_file):
    code, _, err = run(capsys, "check", quad_file, "--grid-n", "3", "--require", "bogus")
    assert code == 2 and "bogus" in err


def test_reports_are_deterministic(capsys, quad_file):
    first = run(capsys, "check", quad_file, "--seed", "7", "--grid-n", "5")[1]
    second = run(capsys, "check", quad_file, "--seed", "7", "--grid-n", "5")[1]
    assert first == second


def test_tolerance_from_environment(capsys, quad_file, monkeypatch):
    monkeypatch.setenv("DREALIZE_TOL", "1e-6")
    rep = json.loads(run(capsys, "check", quad_file, "--grid-n", "3")[1])
    assert checks(rep)["isometric"]["threshold"] == 1e-6
    rep = json.loads(run(capsys, "check", quad_file, "--grid-n", "3", "--tol", "1e-8")[1])
    assert checks(rep)["isometric"]["threshold"] == 1e-8
    monkeypatch.setenv("DREALIZE_TOL", "abc")
    assert run(capsys, "check", quad_file)[0] == 2


def test_text_format(capsys, quad_file):
    code, out, _ = run(capsys, "check", quad_file, "--grid-n", "3", "--format", "text")
    assert code == 0 and out.startswith("# drealize.report/1 check")
    assert "weakly_coisometric" in out and out.rstrip().endswith("# exit: 0")


def test_realize_writes_roundtrippable_artifact(capsys, tmp_path):
    pair = catalog.quadratic_colligation().pair
    src = write(tmp_path, "pair.json", serialize.pair_to_obj(pair))
    dest = tmp_path / "out.json"
    code, out, _ = run(capsys, "realize", src, "-o", str(dest))
    assert code == 0
    text = dest.read_text()
    col = serialize.colligation_from_obj(serialize.loads(text))
    assert serialize.dumps(serialize.colligation_to_obj(col)) == text
    assert col.dim_input == 4
    assert checks(json.loads(out))["coisometric"]["verdict"] == "pass"


def test_representer(capsys, tmp_path):
    spec = InterpolationSpec("points", 2, [[0.5, 0]], [[1]])
    src = write(tmp_path, "spec.json", serialize.spec_to_obj(spec))
    code, out, _ = run(capsys, "representer", src)
    rep = json.loads(out)
    assert code == 0 and rep["data"]["renormalized"] is True
    assert checks(rep)["membership"]["verdict"] == "pass"


def test_model_with_parameter(capsys, tmp_path):
    src = write(tmp_path, "m.json", serialize.multiplier_to_obj(catalog.balanced_multiplier()))
    code, out, _ = run(capsys, "model", src, "--param", "[[[1, 0]]]", "--require", "coisometric")
    rep = json.loads(out)
    assert code == 0 and rep["data"]["parameter_shape"] == [1, 1]
    col = serialize.colligation_from_obj(rep["artifacts"]["colligation"])
    assert np.allclose(col.B, catalog.balanced_B(1))
    code, _, _ = run(capsys, "model", src, "--param", "[[[2, 0]]]")
    assert code == 1


def test_model_non_invariant_reports_failure(capsys, tmp_path):
    src = write(tmp_path, "m.json", serialize.multiplier_to_obj(catalog.quadratic_multiplier()))
    code, _, err = run(capsys, "model", src, "--degree", "2")
    assert code == 1 and "CaptureError" in err


def test_charfun(capsys, tmp_path):
    T = RowContraction(np.array([np.diag([0.3, 0.1]), np.diag([0.2, 0.4])]))
    src = write(tmp_path, "t.json", serialize.row_contraction_to_obj(T))
    code, out, _ = run(capsys, "charfun", src, "--grid-n", "5")
    c = checks(json.loads(out))
    assert code == 0 and c["unitary"]["verdict"] == "pass" and c["coincidence"]["verdict"] == "pass"


def test_probe_hankel(capsys):
    code, out, _ = run(capsys, "probe-hankel", "--n", "8")
    rep = json.loads(out)
    assert code == 0 and rep["data"]["ranks"] == list(range(1, 10))


def test_kernel_grid_emits_arrays(capsys, quad_file):
    code, out, _ = run(capsys, "kernel-grid", quad_file, "--grid-n", "3", "--which", "KCA")
    grid = json.loads(out)["artifacts"]["kernel_grid"]
    assert code == 0 and grid["which"] == "KCA"
    assert len(grid["points"]) == 3 and len(grid["values"]) == 3 and len(grid["values"][0]) == 3


@pytest.mark.parametrize("name", sorted(EXAMPLES))
def test_examples_are_valid_inputs(capsys, tmp_path, name):
    dest = tmp_path / f"{name}.json"
    code, out, _ = run(capsys, "example", name, "-o", str(dest))
    assert code == 0
    kind = json.loads(out)["data"]["kind"]
    command = {"colligation": "check", "multiplier": "model", "spec": "representer"}[kind]
    code, out, _ = run(capsys, command, str(dest), "--grid-n", "3") if command == "check" \
        else run(capsys, command, str(dest))
    assert code == 0 and json.loads(out)["command"] == command


def test_non_finite_residuals_are_strings():
    assert Check("x", float("inf"), 1e-10, "fail").to_obj()["residual"] == "inf"
    assert Check("x", float("nan"), 1e-10, "fail").to_obj()["residual"] == "nan"
