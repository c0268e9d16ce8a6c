import io
import json
import subprocess
import sys

import numpy as np
import pytest

from einstein_core import inverses as inv
from einstein_core.cli import run
from einstein_core.io import loads, read_tensor, write_tensor
from einstein_core.tensor import TensorShape, identity
from einstein_core.testkit import Family, GeneratorSpec, example_section3, generate, oracle_core_equations

S22 = TensorShape((2, 2), (2, 2))


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def example_files(tmp_path):
    ex = example_section3()
    paths = {}
    for key in ("A", "B"):
        paths[key] = str(tmp_path / f"{key}.json")
        write_tensor(paths[key], ex[key])
    return paths


def test_core_of_example(example_files):
    code, out, err = call("core", example_files["A"])
    assert code == 0 and err == ""
    x = loads(out)
    assert max(oracle_core_equations(example_section3()["A"], x)) <= 1e-10


@pytest.mark.parametrize("cmd", ["pinv", "group", "drazin"])
def test_inverse_commands(cmd, example_files):
    code, out, _ = call(cmd, example_files["B"])
    assert code == 0
    assert np.allclose(loads(out).data, example_section3()["B"].data)


def test_index_and_mul(example_files):
    code, out, _ = call("index", example_files["A"])
    assert code == 0 and json.loads(out) == {"index": 1, "ranks": [5, 5]}
    code, out, _ = call("mul", example_files["A"], example_files["B"])
    assert code == 0
    assert loads(out) == example_section3()["A"]


def test_check_law_random():
    code, out, _ = call("check-law", "C3_2", "--random", "100", "--seed", "7")
    rep = json.loads(out)
    assert code == 0
    assert rep["trials"] == 100 and rep["implication_ok"] == 100 and rep["failures"] == []


def test_check_law_files(example_files):
    code, out, _ = call("check-law", "T3_1", "--a", example_files["A"], "--b", example_files["B"])
    assert code == 0 and json.loads(out)["conclusion_pass"] is True


def test_check_law_is_byte_stable():
    a = call("check-law", "T4_3", "--trials", "12", "--seed", "3", "--shape", "2,2")
    b = call("check-law", "T4_3", "--trials", "12", "--seed", "3", "--shape", "2,2")
    assert a == b


def test_solve_one_and_two_sided(tmp_path, example_files):
    code, out, _ = call("solve", "--a", example_files["A"], "--b", example_files["A"])
    assert code == 0 and json.loads(out)["solvable"] is True
    c = str(tmp_path / "c.json")
    write_tensor(c, identity((2, 3)))
    code, out, _ = call("solve", "--c", c, "--d", c, "--b", example_files["B"])
    assert code == 0 and json.loads(out)["residual"] == 0.0


def test_solve_inconsistent_exits_one(tmp_path):
    a = str(tmp_path / "a.json")
    b = str(tmp_path / "b.json")
    write_tensor(a, generate(GeneratorSpec(S22, Family.HERMITIAN_IDEMPOTENT, seed=1, rank=1)))
    write_tensor(b, identity((2, 2)))
    code, out, _ = call("solve", "--a", a, "--b", b)
    assert code == 1 and json.loads(out)["solvable"] is False


def test_poisson_output(tmp_path):
    code, out, err = call("poisson", "--m", "8")
    assert code == 0
    rows = out.splitlines()
    assert len(rows) == 8 and all(len(r.split(",")) == 8 for r in rows)
    assert err.startswith("residual<=1e-8")
    dest = tmp_path / "grid.csv"
    code, out, _ = call("poisson", "--m", "8", "--out", str(dest))
    assert code == 0 and out.startswith("residual<=1e-8")
    assert dest.read_text().splitlines() == rows


def test_poisson_with_rhs(tmp_path):
    rhs = str(tmp_path / "f.json")
    f = np.random.default_rng(1).standard_normal((8, 8))
    write_tensor(rhs, loads(json.dumps({"left_shape": [8], "right_shape": [8], "re": list(f.ravel())})))
    code, out, err = call("poisson", "--m", "8", "--rhs", rhs)
    assert code == 0 and "residual<=1e-8" in err


def test_convert(tmp_path, example_files):
    dest = tmp_path / "out.json"
    code, _, _ = call("convert", example_files["A"], "--out", str(dest))
    assert code == 0 and read_tensor(dest) == example_section3()["A"]
    csv = tmp_path / "g.csv"
    csv.write_text("1,2\n3,4\n")
    code, out, _ = call("convert", str(csv))
    assert json.loads(out) == {"left_shape": [2], "right_shape": [2], "re": [1.0, 2.0, 3.0, 4.0]}


def test_malformed_tensor_exit_two(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"left_shape": [2], "right_shape": [2], "re": [1, 2, 3]}')
    code, out, err = call("core", str(bad))
    assert code == 2 and out == ""
    e = json.loads(err)["error"]
    assert e["type"] == "format" and e["field"] == "re"


def test_index_failure_exit_one(tmp_path):
    path = str(tmp_path / "n.json")
    write_tensor(path, generate(GeneratorSpec(S22, Family.NILPOTENT, seed=1, index=3)))
    code, _, err = call("core", path)
    assert code == 1
    assert json.loads(err)["error"]["index"] == 3


@pytest.mark.parametrize(
    "argv",
    [
        ["bogus"],
        ["check-law", "NOT_A_LAW", "--random", "3"],
        ["check-law", "C3_2"],
        ["check-law", "C3_2", "--random", "0"],
        ["check-law", "C3_2", "--random", "2", "--shape", "a,b"],
        ["solve", "--b", "x.json"],
        ["poisson", "--m", "2"],
        ["core", "/nonexistent/file.json"],
        ["index", "A.json", "--seed", "-1"],
    ],
)
def test_usage_errors(argv):
    code, out, err = call(*argv)
    assert code == 2 and out == ""
    assert "error" in json.loads(err)


def test_shape_mismatch_exit_two(tmp_path):
    a, b = str(tmp_path / "a.json"), str(tmp_path / "b.json")
    write_tensor(a, identity((2,)))
    write_tensor(b, identity((3,)))
    code, _, err = call("mul", a, b)
    assert code == 2 and json.loads(err)["error"]["type"] == "shape"


def test_module_entry_point(example_files):
    proc = subprocess.run(
        [sys.executable, "-m", "einstein_core", "index", example_files["A"]],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["index"] == 1


def test_tolerance_flags(example_files):
    code, out, _ = call("--tol", "1e-9", "index", example_files["A"], "--rank-tol", "1e-10")
    assert code == 0 and json.loads(out)["index"] == 1
    assert inv.index(example_section3()["A"]).k == 1
