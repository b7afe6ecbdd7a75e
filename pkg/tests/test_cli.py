import json
import math
import subprocess
import sys

import pytest

from oracles import example1_phi
from rftflow.cli import EXIT_BUDGET, EXIT_NUMERIC, EXIT_OK, EXIT_SPEC, decode_number, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--format", "json")
    assert code == EXIT_OK, err
    return json.loads(out)


def test_entropy_text_fields(capsys):
    code, out, _ = run(capsys, "entropy", "fullshift_n3")
    assert code == EXIT_OK
    for key in ("x_hat", "entropy", "bracket", "r_F", "r_phi", "x_tilde0", "mme", "path"):
        assert key in out
    value = float(next(l for l in out.splitlines() if l.startswith("entropy")).split()[1])
    assert value == pytest.approx(math.log(3), abs=1e-9)


def test_entropy_json_example2(capsys):
    doc = run_json(capsys, "entropy", "example2")
    assert doc["entropy"] == pytest.approx(0.8665, abs=5e-4)
    assert doc["mme"] == "Exists"
    assert set(doc["r_F"]) >= {"lower", "upper", "exact"}
    assert set(doc["bracket"]) == {"lo", "hi"}
    assert doc["bracket"]["lo"] <= doc["x_hat"] <= doc["bracket"]["hi"]


def test_entropy_json_example3(capsys):
    doc = run_json(capsys, "entropy", "example3")
    assert doc["x_hat"] == 0.5
    assert doc["entropy"] == pytest.approx(math.log(2), abs=1e-9)
    assert doc["mme"] == "DoesNotExist"
    assert doc["x_tilde0"] is None


def test_json_round_trip(capsys):
    doc = run_json(capsys, "phi", "example1", "--x", "0.2", "0.7")
    beyond = doc["rows"][1]
    assert beyond["status"] == "BeyondSeriesRadius"
    assert math.isinf(decode_number(beyond["phi"]))
    assert json.loads(json.dumps(doc)) == doc


def test_output_is_deterministic(capsys):
    first = run(capsys, "entropy", "example1", "--format", "json")
    second = run(capsys, "entropy", "example1", "--format", "json")
    assert first == second


def test_phi_rows_match_direct_formula(capsys):
    doc = run_json(capsys, "phi", "example1", "--x", "0.1", "0.2", "0.3")
    assert len(doc["rows"]) == 3
    for row in doc["rows"]:
        assert row["status"] == "InDomain"
        assert row["phi"] == pytest.approx(example1_phi(row["x"]), rel=1e-10)
        assert all(a > 0 for a in row["A"])


def test_phi_at_zero_and_out_of_domain(capsys):
    doc = run_json(capsys, "phi", "example1", "--x", "0", "0.5", "0.7")
    zero, singular, beyond = doc["rows"]
    assert zero["phi"] == 0.0 and zero["status"] == "InDomain"
    assert singular["status"] == "SingularAtOrBefore"
    assert beyond["status"] == "BeyondSeriesRadius"


def test_radius(capsys):
    doc = run_json(capsys, "radius", "example3")
    assert doc["r_F"]["exact"] == 0.5
    assert doc["r_F"]["converges_at_radius"] is True
    doc = run_json(capsys, "radius", "fullshift_n3")
    assert decode_number(doc["r_F"]["exact"]) == math.inf


def test_oracle_full_shift_gap(capsys):
    doc = run_json(capsys, "oracle", "fullshift_n3", "--L", "8", "--x", "0.2")
    point = doc["points"][0]
    assert 0 <= point["gap"] < 2e-3
    assert doc["counts_by_length"] == [2 ** (n - 1) for n in range(1, 9)]


def test_oracle_empty_notice(capsys):
    code, out, _ = run(capsys, "oracle", "example1", "--L", "1", "--N", "3", "--x", "0.2")
    assert code == EXIT_OK
    assert "no root-cycles" in out


def test_oracle_monotone_table(capsys):
    doc = run_json(capsys, "oracle", "example1", "--L", "5", "--N", "10", "--x", "0.3")
    partial = doc["points"][0]["truncated"]
    assert len(partial) == 5
    assert all(b >= a for a, b in zip(partial, partial[1:]))
    assert partial[-1] <= doc["points"][0]["phi"]


def test_list(capsys):
    code, out, _ = run(capsys, "list")
    assert code == EXIT_OK
    assert {"example1", "example2", "example3", "fullshift_n3"} <= set(out.split())


def test_spec_error_exit_code(capsys, tmp_path):
    bad = tmp_path / "bad.spec"
    bad.write_text("class a finite { x: 1\nroot x\n")
    code, _, err = run(capsys, "entropy", str(bad))
    assert code == EXIT_SPEC
    assert "line 2" in err


def test_missing_file_exit_code(capsys, tmp_path):
    code, _, _ = run(capsys, "entropy", str(tmp_path / "nope.spec"))
    assert code == EXIT_SPEC


def test_numeric_exit_code(capsys, tmp_path):
    spec = tmp_path / "dense.spec"
    spec.write_text("class a finite { x: 1 }\nclass f family k from 1 height 1 + 1/k\n")
    code, _, err = run(capsys, "entropy", str(spec))
    assert code == EXIT_NUMERIC
    assert "numerical" in err


def test_budget_exit_code(capsys):
    code, _, err = run(capsys, "oracle", "example1", "--L", "6", "--budget", "50")
    assert code == EXIT_BUDGET
    assert "budget" in err


def test_bad_arguments_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["oracle", "example1", "--L", "0"])
    assert exc.value.code == EXIT_SPEC
    with pytest.raises(SystemExit):
        main(["entropy", "example1", "--tol", "0"])


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "rftflow", "entropy", "fullshift_n3", "--format", "json"],
                         capture_output=True, text=True, check=True)
    assert json.loads(res.stdout)["mme"] == "Exists"
