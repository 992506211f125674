import json

import numpy as np
import pytest

from lmsreg.cli import main
from lmsreg.dataio import InputFormatError, format_csv, generate_instance, parse_csv

INTERCEPT_CSV = "x1,y\n1,0\n1,1\n1,4\n1,5\n1,9\n"


@pytest.fixture
def intercept_csv(tmp_path):
    path = tmp_path / "intercept.csv"
    path.write_text(INTERCEPT_CSV)
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_fit_exhaustive(capsys, intercept_csv):
    code, out, _ = run(capsys, "fit", intercept_csv, "--algorithm", "exhaustive")
    assert code == 0
    rep = json.loads(out)
    assert rep["schema_version"] == "1"
    assert rep["value"] == 2
    assert rep["value_squared"] == 4
    assert [o["theta"] for o in rep["optimizers"]] == [[2.0], [3.0]]
    assert [o["active"] for o in rep["optimizers"]] == [[1, 3], [2, 4]]
    assert rep["minimax_fit"]["theta"] == [4.5]


@pytest.mark.parametrize("algorithm", ["greedy", "bpb", "brute-force"])
def test_fit_other_algorithms(capsys, intercept_csv, algorithm):
    code, out, _ = run(capsys, "fit", intercept_csv, "--algorithm", algorithm)
    assert code == 0
    assert json.loads(out)["value"] == 2


def test_fit_profile(capsys, intercept_csv):
    code, out, _ = run(capsys, "fit", intercept_csv, "--profile")
    rep = json.loads(out)
    assert rep["profile_local_minima"] == [2.0, 3.0, 6.5]
    assert len(rep["profile"]) > 5


def test_fit_k_override(capsys, intercept_csv):
    code, out, _ = run(capsys, "fit", intercept_csv, "--k", "0")
    assert json.loads(out)["value"] == 4.5
    code, _, err = run(capsys, "fit", intercept_csv, "--k", "4")
    assert code == 2 and "--k" in err


@pytest.mark.parametrize("fmt", ["csv", "human"])
def test_fit_formats(capsys, intercept_csv, fmt):
    code, out, _ = run(capsys, "fit", intercept_csv, "--output", fmt)
    assert code == 0
    assert "2" in out


def test_json_output_is_byte_stable(capsys, intercept_csv):
    outs = [run(capsys, "fit", intercept_csv, "--algorithm", "bpb", "--seed", "9")[1] for _ in range(2)]
    assert outs[0] == outs[1]


def test_rank_deficient_exit_3(capsys, tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x1,x2,y\n" + "".join(f"1,1,{i}\n" for i in range(6)))
    code, _, err = run(capsys, "fit", str(path))
    assert code == 3
    assert "x2" in err


def test_too_few_rows_exit_3(capsys, tmp_path):
    path = tmp_path / "short.csv"
    path.write_text("x1,x2,y\n1,0,1\n0,1,2\n1,1,3\n")
    assert run(capsys, "fit", str(path))[0] == 3


@pytest.mark.parametrize(
    "text", ["", "a,b\n1,2\n", "x1,y\n1,2,3\n", "x1,y\n1,abc\n", "x1,y\n", "x1,y\n1,nan\n1,2\n"]
)
def test_malformed_exit_2(capsys, tmp_path, text):
    path = tmp_path / "m.csv"
    path.write_text(text)
    assert run(capsys, "fit", str(path))[0] == 2


def test_missing_file_exit_2(capsys, tmp_path):
    assert run(capsys, "fit", str(tmp_path / "nope.csv"))[0] == 2


def test_enumerate_minima(capsys, intercept_csv):
    code, out, _ = run(capsys, "enumerate-minima", intercept_csv)
    rep = json.loads(out)
    assert rep["count"] == rep["theory_count"] == 3
    assert [m["theta"][0] for m in rep["minima"]] == [2.0, 3.0, 6.5]
    code, out, _ = run(capsys, "enumerate-minima", intercept_csv, "--k", "1", "--output", "csv")
    assert out.splitlines()[0] == "theta1,value,rho,active"
    assert len(out.splitlines()) == 3


def test_verify_theorem_fixed_shape(capsys):
    code, out, _ = run(capsys, "verify-theorem", "--trials", "2", "--n-min", "5", "--n-max", "5", "--p-min", "1", "--p-max", "1", "--output", "json")
    rep = json.loads(out)
    assert code == 0 and rep["all_match"]
    rows = [r for r in rep["counts"] if r["trial"] == 1]
    assert [r["measured"] for r in rows[:3]] == [1, 2, 3]
    assert [r["k"] for r in rows] == [0, 1, 2, 3]


def test_verify_theorem_larger_shapes(capsys):
    code, out, _ = run(capsys, "verify-theorem", "--trials", "1", "--n-min", "8", "--n-max", "8", "--p-min", "2", "--p-max", "2", "--output", "json")
    rows = json.loads(out)["counts"]
    assert rows[-1]["k"] == 5 and rows[-1]["measured"] == rows[-1]["theory"] == 21
    code, out, _ = run(capsys, "verify-theorem", "--trials", "1", "--n-min", "12", "--n-max", "12", "--p-min", "3", "--p-max", "3", "--output", "json", "--threads", "2")
    rows = json.loads(out)["counts"]
    assert rows[8]["k"] == 8 and rows[8]["measured"] == 165
    assert code == 0


def test_verify_theorem_human(capsys):
    code, out, _ = run(capsys, "verify-theorem", "--trials", "3", "--n-max", "7")
    assert code == 0
    assert "all match: yes" in out


def test_generate_deterministic(capsys):
    a = run(capsys, "generate", "--n", "10", "--p", "2", "--outliers", "0.3", "--seed", "7")[1]
    b = run(capsys, "generate", "--n", "10", "--p", "2", "--outliers", "0.3", "--seed", "7")[1]
    assert a == b
    assert len(a.splitlines()) == 11


def test_generate_bad_shape(capsys):
    assert run(capsys, "generate", "--n", "3", "--p", "2")[0] == 2
    assert run(capsys, "generate", "--n", "10", "--p", "2", "--outliers", "0.5")[0] == 2


def test_generate_round_trip():
    data, _ = generate_instance(12, 3, seed=4)
    back = parse_csv(format_csv(data))
    np.testing.assert_array_equal(back.X, data.X)
    np.testing.assert_array_equal(back.y, data.y)


def test_parse_rejects_wrong_header():
    with pytest.raises(InputFormatError):
        parse_csv("x2,y\n1,2\n")


def test_generated_instance_lms_beats_minimax(capsys, tmp_path):
    data_path, truth_path = tmp_path / "g.csv", tmp_path / "truth.json"
    data_path.write_text(
        run(capsys, "generate", "--n", "14", "--p", "2", "--outliers", "0.3", "--seed", "7", "--intercept", "--truth", str(truth_path))[1]
    )
    coef = np.array(json.loads(truth_path.read_text())["coef"])
    rep = json.loads(run(capsys, "fit", str(data_path), "--algorithm", "exhaustive")[1])
    lms_err = np.linalg.norm(np.array(rep["optimizers"][0]["theta"]) - coef)
    mm_err = np.linalg.norm(np.array(rep["minimax_fit"]["theta"]) - coef)
    print(f"distance to truth: LMS {lms_err:.4f}, minimax {mm_err:.4f}")
    assert lms_err < mm_err
