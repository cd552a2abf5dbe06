import csv
import io
import json
import math
import subprocess
import sys

import pytest

from loqc.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestRun:
    def test_bundled_parity(self, capsys):
        code, out, _ = run(capsys, "run", "parity3.loqc")
        data = json.loads(out)
        assert code == 0
        assert data["acceptance_probability"] == pytest.approx(0.25, abs=1e-9)
        assert data["outputs"] == [{"value": "0", "probability": 1.0}]
        assert data["per_gate_acceptance"] == pytest.approx([0.5, 0.5])

    def test_missing_file(self, capsys):
        code, out, err = run(capsys, "run", "missing.loqc")
        assert code == 1 and out == ""
        assert "not found" in err

    def test_bad_syntax(self, capsys, tmp_path):
        path = tmp_path / "bad_syntax.loqc"
        path.write_text("qubit q0 1 0 0 0\nqubit q1 1 0 0\n")
        code, _, err = run(capsys, "run", str(path))
        assert code == 1
        assert "line 2" in err and "syntax" in err

    def test_elaboration_error(self, capsys, tmp_path):
        path = tmp_path / "reuse.loqc"
        path.write_text("qubit a 1 0 0 0\nqubit b 1 0 0 0\ngate xor a b -> t\nmeasure a hv\n")
        code, _, err = run(capsys, "run", str(path))
        assert code == 1 and "line 4" in err

    def test_runtime_error(self, capsys, tmp_path):
        path = tmp_path / "big.loqc"
        path.write_text("\n".join(f"bell a{i} b{i}" for i in range(5)) + "\n")
        code, _, err = run(capsys, "run", str(path))
        assert code == 2 and "runtime error" in err

    def test_csv_and_out(self, capsys, tmp_path):
        target = tmp_path / "report.csv"
        code, out, _ = run(capsys, "run", "parity3.loqc", "--format", "csv", "--out", str(target))
        assert code == 0 and out == ""
        (row,) = rows(target.read_text())
        assert row == {"value": "0", "probability": "1", "acceptance_probability": "0.25"}


class TestTruthTable:
    def test_cnot(self, capsys):
        code, out, _ = run(capsys, "truth-table", "cnot", "--format", "csv")
        table = rows(out)
        assert code == 0 and len(table) == 4
        assert {(r["input"], r["output"]) for r in table} == {
            ("00", "00"), ("01", "01"), ("10", "11"), ("11", "10")}
        assert all(float(r["conditional_probability"]) == 1.0 for r in table)
        assert all(float(r["acceptance_probability"]) == 0.25 for r in table)

    def test_distinguishable(self, capsys):
        code, out, _ = run(capsys, "truth-table", "cnot", "--overlap", "0", "--format", "csv")
        off = [r for r in rows(out) if (r["input"], r["output"]) in {("00", "01"), ("10", "10")}]
        assert code == 0
        assert off and all(float(r["conditional_probability"]) > 0 for r in off)

    def test_json_mirror(self, capsys):
        code, out, _ = run(capsys, "truth-table", "xor")
        data = json.loads(out)
        assert code == 0
        assert {r["input"]: r["acceptance_probability"] for r in data["rows"]} == pytest.approx(
            {"00": 0.5, "01": 0.5, "10": 0.5, "11": 0.5})

    def test_rejected_inputs_listed(self, capsys):
        _, out, _ = run(capsys, "truth-table", "parity_check", "--format", "csv")
        assert [r["input"] for r in rows(out)] == ["00", "01", "10", "11"]

    def test_unknown_gate(self, capsys):
        code, _, err = run(capsys, "truth-table", "nosuch")
        assert code == 1 and "unknown gate" in err

    def test_overlap_range(self, capsys):
        assert run(capsys, "truth-table", "cnot", "--overlap", "2")[0] == 1


class TestSourceStats:
    def test_poisson(self, capsys):
        code, out, _ = run(capsys, "source-stats", "poisson", "--mu", "1", "--n-max", "3", "--format", "csv")
        table = rows(out)
        assert code == 0 and len(table) == 4
        assert float(table[0]["probability"]) == pytest.approx(math.exp(-1), abs=1e-12)
        assert float(table[1]["probability"]) == pytest.approx(math.exp(-1), abs=1e-12)

    def test_spdc_json(self, capsys):
        _, out, _ = run(capsys, "source-stats", "spdc", "--p", "0.1", "--doubles", "--n-max", "2")
        data = json.loads(out)
        assert [r["probability"] for r in data["pmf"]] == pytest.approx([0.89, 0.1, 0.01])

    LOOP = ("source-stats", "loop", "--p", "0.05", "--eta-sw", "0.9", "--eta-loop", "0.95",
            "--trials", "100000", "--seed", "7")

    def test_loop_deterministic(self, capsys):
        first = run(capsys, *self.LOOP)[1]
        second = run(capsys, *self.LOOP)[1]
        assert first == second

    def test_loop_agrees_with_analytic(self, capsys):
        code, out, _ = run(capsys, *self.LOOP)
        assert code == 0
        for r in json.loads(out)["requests"]:
            assert abs(r["z_score"]) < 3

    @pytest.mark.parametrize("argv", [
        ("poisson", "--mu", "-1"),
        ("spdc", "--p", "1.5"),
        ("loop", "--requests", "5,3"),
        ("loop", "--requests", "a,b"),
        ("loop", "--trials", "0"),
        ("loop", "--eta-sw", "1.2"),
    ])
    def test_invalid_parameters(self, capsys, argv):
        assert run(capsys, "source-stats", *argv)[0] == 1


def test_usage_error_exit_status(capsys):
    with pytest.raises(SystemExit) as err:
        main(["run"])
    assert err.value.code == 1


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "loqc.cli", "truth-table", "xor", "--format", "csv"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "input,output,conditional_probability,acceptance_probability"
