import csv
import io
import json

import pytest

from bifixsearch.cli import run
from bifixsearch.model import problem_from_json

WORKED = {"symbols": ["0", "1"], "probs": [0.5, 0.5], "sequences": ["010", "100"]}


@pytest.fixture
def problem_file(tmp_path):
    def write(doc=WORKED, name="problem.json"):
        path = tmp_path / name
        path.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
        return str(path)

    return write


def invoke(argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(argv, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_moments_worked_pair(problem_file):
    code, out, _ = invoke(["moments", problem_file()])
    assert code == 0
    doc = json.loads(out)
    assert doc["T"] == 4.0
    assert doc["split"] == [0.5, 0.5]
    assert doc["provenance"]["numeric_mode"] == "float"


def test_moments_exact_serialises_rationals(problem_file):
    code, out, _ = invoke(["moments", problem_file(), "--exact"])
    doc = json.loads(out)
    assert code == 0
    assert doc["T"] == "4/1"
    assert doc["variance"] == "34/3"
    assert doc["partial_means"] == ["11/6", "13/6"]


def test_moments_single_reports_secondary_path(problem_file):
    path = problem_file({"symbols": ["1", "0"], "probs": ["1/2", "1/2"], "sequences": ["10"]})
    code, out, _ = invoke(["moments", path, "--exact"])
    doc = json.loads(out)
    assert doc["second_moment"] == "13/1"
    assert doc["secondary"]["second_moment"] == "13/1"
    assert doc["secondary"]["variance"] == "4/1"


def test_spectrum_matrices(problem_file):
    code, out, _ = invoke(["spectrum", problem_file(), "--free"])
    doc = json.loads(out)
    assert code == 0
    assert doc["h"] == [[[1, 1], [1, 1]], [[1, 0], [1, 0]], [[0, 1], [0, 0]], [[1, 0], [0, 1]]]
    assert doc["cross_bifix_free"] is False
    assert doc["tails"] == [[1.0, 0.5, 0.25, 0.125], [1.0, 0.5, 0.25, 0.125]]


def test_dist_kmax_zero(problem_file):
    code, out, err = invoke(["dist", problem_file(), "--kmax", "0"])
    assert code == 2
    assert "kmax must be ≥ 1" in err
    assert out == ""


def test_dist_csv_header_and_rows(problem_file):
    code, out, err = invoke(["dist", problem_file(), "--kmax", "3", "--exact"])
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["k", "pr_total", "pr_seq_1", "pr_seq_2", "cdf"]
    assert rows[1] == ["1", "1/4", "1/8", "1/8", "1/4"]
    assert rows[2][1] == "3/16"
    assert "warning" in err


def test_dist_auto_truncation_reaches_mass(problem_file):
    code, out, err = invoke(["dist", problem_file(), "--format", "json"])
    doc = json.loads(out)
    assert code == 0 and err == ""
    assert doc["cumulative"][-1] >= 1 - 1e-9
    assert doc["provenance"]["truncated"] is False


def test_outputs_are_byte_identical(problem_file):
    path = problem_file()
    for argv in (["moments", path], ["dist", path, "--kmax", "20"], ["simulate", path, "--trials", "500", "--seed", "9"]):
        assert invoke(argv)[1] == invoke(argv)[1]


def test_oracle_engines(problem_file):
    path = problem_file()
    code, out, _ = invoke(["oracle", path, "--engine", "chain", "--kmax", "2", "--exact"])
    doc = json.loads(out)
    assert code == 0
    assert doc["mean_tests"] == pytest.approx(4.0)
    assert doc["distribution"] == ["1/4", "3/16"]
    code, out, _ = invoke(["oracle", path, "--engine", "enumerate", "--kmax", "2", "--exact"])
    assert json.loads(out)["distribution"] == ["1/4", "3/16"]
    code, out, _ = invoke(["oracle", path, "--engine", "simulate", "--trials", "2000", "--seed", "1"])
    doc = json.loads(out)
    assert doc["trials"] == 2000 and "stderr" in doc


def test_design_command():
    code, out, _ = invoke(["design", "--L", "2", "--N", "5", "--M", "2", "--probs", "0.3,0.7", "--top", "2"])
    assert code == 0
    doc = json.loads(out)
    assert len(doc) == 2
    assert all(item["cross_bifix_free"] for item in doc)


def test_design_infeasible_is_computational_error():
    code, _, err = invoke(["design", "--L", "2", "--N", "3", "--M", "2"])
    assert code == 3
    assert "NoFeasibleSet" in err


@pytest.mark.parametrize(
    "doc, field",
    [
        ({"symbols": ["0", "1"], "probs": [0.5, 0.6], "sequences": ["01"]}, "probs"),
        ({"symbols": ["0", "1"], "probs": [0.5, 0.5], "sequences": ["01", "011"]}, "sequences"),
        ({"symbols": ["0", "1"], "probs": [0.5, 0.5]}, "sequences"),
        ("{not json", "problem"),
        ([1, 2], "problem"),
    ],
)
def test_validation_errors_exit_2(problem_file, doc, field):
    code, out, err = invoke(["moments", problem_file(doc)])
    assert code == 2
    assert field in err
    assert out == ""


def test_missing_file_exit_1(tmp_path):
    code, _, err = invoke(["moments", str(tmp_path / "missing.json")])
    assert code == 1


def test_bad_flags_exit_2(problem_file):
    assert invoke(["moments"])[0] == 2
    assert invoke(["oracle", problem_file(), "--engine", "magic"])[0] == 2
    assert invoke(["simulate", problem_file(), "--trials", "0"])[0] == 2


def test_guard_exceeded_exit_3():
    code, _, err = invoke(["design", "--L", "2", "--N", "12", "--M", "3", "--constraint", "none"])
    assert code == 3 and "TooLarge" in err


def test_emitted_problem_round_trips(problem_file):
    code, out, _ = invoke(["moments", problem_file()])
    doc = json.loads(out)
    again = problem_from_json({"symbols": WORKED["symbols"], "probs": WORKED["probs"], "sequences": doc["sequences"]})
    assert [again.render(j) for j in range(again.M)] == WORKED["sequences"]
