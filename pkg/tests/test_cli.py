import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from stochorder.cli import main

DATA = Path(__file__).parent / "data"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    return code, json.loads(out), err


class TestCheck:
    def test_binomial_holds(self, capsys):
        code, js, _ = run_json(capsys, "check-st", "binom(5,1/4)", "binom(5,3/4)")
        assert code == 0 and js["holds"]

    def test_poisson_fails(self, capsys):
        code, js, _ = run_json(capsys, "check-st", "poiss(2)", "poiss(1)")
        assert code == 1 and not js["holds"]

    def test_reflexive_margin_zero(self, capsys):
        code, js, _ = run_json(capsys, "check-st", "binom(5,1/2)", "binom(5,1/2)")
        assert code == 0 and js["margin"] == "0/1"

    def test_check_cx(self, capsys):
        assert run(capsys, "check-cx", "delta(0)", "binom(2,1/2)")[0] == 1
        assert run(capsys, "check-cx", "delta(1)", "binom(2,1/2)")[0] == 0

    @pytest.mark.parametrize("spec", ["binom(5)", "wibble(1)", "binom(5,3/2)", "poiss(-1)", "@/nonexistent.json"])
    def test_bad_spec(self, capsys, spec):
        code, _, err = run(capsys, "check-st", spec, "poiss(1)")
        assert code == 2 and err

    def test_measure_file(self, capsys, tmp_path):
        path = tmp_path / "m.json"
        path.write_text(json.dumps({"regime": "exact", "atoms": [{"x": "0", "w": "1/2"}, {"x": "2", "w": "1/2"}]}))
        code, js, _ = run_json(capsys, "check-cx", "delta(1)", f"@{path}")
        assert code == 0 and js["holds"]

    def test_continuous_specs(self, capsys):
        assert run(capsys, "check-st", "gamma(1,2)", "gamma(2,1)")[0] == 0
        assert run(capsys, "check-st", "norm(1,1)", "norm(0,1)")[0] == 1

    def test_unknown_command(self, capsys):
        assert run(capsys, "frobnicate")[0] == 2

    def test_out_file(self, capsys, tmp_path):
        out = tmp_path / "v.json"
        assert run(capsys, "check-st", "poiss(1)", "poiss(2)", "--out", str(out))[0] == 0
        assert json.loads(out.read_text())["holds"]


class TestSweep:
    def test_bernstein_grid(self, capsys, tmp_path):
        out = tmp_path / "gaps.csv"
        code, summary, _ = run_json(capsys, "rasa-sweep", "binom", "--n", "4", "--x", "0:1:11",
                                    "--battery", "9", "--out", str(out))
        rows = list(csv.DictReader(out.open()))
        assert code == 0 and summary["holds"] and summary["regime"] == "exact"
        assert summary["rows"] == len(rows) == 121 * 11
        assert min(__import__("fractions").Fraction(r["gap"]) for r in rows) >= 0

    def test_diagonal_grid(self, capsys):
        code, out, err = run(capsys, "rasa-sweep", "binom", "--n", "3", "--x", "1/3", "--battery", "4")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0 and rows and all(r["gap"] == "0" for r in rows)
        assert json.loads(err)["min_gap"] == "0/1"

    def test_negative_binomial_warning(self, capsys):
        code, out, err = run(capsys, "rasa-sweep", "nb", "--r", "1,2", "--p", "1/5,2/5",
                             "--battery", "3", "--format", "json")
        js = json.loads(out)
        assert "hypothesis violated" in err
        assert js["summary"]["hypothesis_violations"] == 2
        assert code == 0

    def test_poisson(self, capsys):
        code, out, err = run(capsys, "rasa-sweep", "poiss", "--x", "0:2:5", "--battery", "5")
        assert code == 0 and json.loads(err)["regime"] == "float"

    def test_gamma(self, capsys):
        code, _, err = run(capsys, "rasa-sweep", "gamma", "--a", "1,2", "--b", "1",
                           "--battery", "3", "--grid-n", "500")
        assert code == 0 and json.loads(err)["holds"]

    @pytest.mark.parametrize("argv", [
        ("rasa-sweep", "binom", "--x", "0:1:3"),
        ("rasa-sweep", "binom", "--n", "2", "--x", "0:1:0"),
        ("rasa-sweep", "binom", "--n", "2", "--x", "1:0:x"),
        ("rasa-sweep", "cauchy", "--x", "0:1:3"),
        ("rasa-sweep", "poiss", "--x", "0:1:3", "--tol", "0"),
    ])
    def test_invalid(self, capsys, argv):
        assert run(capsys, *argv)[0] == 2

    def test_byte_identical(self, capsys, tmp_path):
        paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
        for p in paths:
            run(capsys, "rasa-sweep", "poiss", "--x", "0:2:5", "--battery", "5", "--out", str(p))
        assert paths[0].read_bytes() == paths[1].read_bytes()


class TestMuirhead:
    def test_binomial_pair(self, capsys):
        code, js, _ = run_json(capsys, "muirhead", "binom(3,1/4)", "binom(3,3/4)", "--p", "1,1", "--q", "2,0")
        assert code == 0 and js["endpoint"]["holds"] and js["consistent"]

    def test_poisson_triple(self, capsys):
        code, js, _ = run_json(capsys, "muirhead", "poiss(1)", "poiss(2)", "poiss(3)",
                               "--p", "1,1,1", "--q", "2,1,0")
        assert code == 0 and js["chain"] == [[1, 1, 1], [2, 1, 0]]

    def test_order_violated(self, capsys):
        code, _, err = run(capsys, "muirhead", "poiss(1)", "poiss(2)", "--p", "2,0", "--q", "1,1")
        assert code == 2 and "majorized" in err

    def test_incomparable(self, capsys):
        mu, nu = f"@{DATA / 'mu.json'}", f"@{DATA / 'nu.json'}"
        assert run(capsys, "muirhead", mu, nu, "--p", "1,1", "--q", "2,0")[0] == 3
        assert run(capsys, "muirhead", mu, nu, "--p", "1,1", "--q", "2,0", "--unconditional")[0] == 0

    def test_chain(self, capsys):
        code, js, _ = run_json(capsys, "chain", "--p", "1,1,1,1", "--q", "4,0,0,0")
        assert code == 0
        assert js["chain"][0] == [1, 1, 1, 1] and js["chain"][-1] == [4, 0, 0, 0]
        assert js["potential"][-1] == 0


class TestCounterexample:
    @pytest.mark.parametrize("name", ["ex2.4", "ex3.9"])
    def test_reproduces(self, capsys, name):
        code, js, _ = run_json(capsys, "counterexample", name)
        assert code == 0 and all(c["passed"] for c in js["checks"])

    def test_unknown(self, capsys):
        assert run(capsys, "counterexample", "ex9.9")[0] == 2


class TestCouple:
    def test_poisson(self, capsys):
        code, js, _ = run_json(capsys, "couple", "poisson", "1", "2", "--n", "100000", "--seed", "7")
        assert code == 0 and js["dominance_violations"] == 0

    def test_gamma(self, capsys):
        code, js, _ = run_json(capsys, "couple", "gamma", "1", "2", "2", "1", "--n", "100000")
        assert code == 0 and js["dominance_violations"] == 0

    def test_normal_pairs(self, capsys):
        code, js, _ = run_json(capsys, "couple", "normal", "0", "1", "1", "--n", "10", "--pairs")
        assert code == 0 and len(js["pairs"]) == 10
        assert all(y - x == pytest.approx(1) for x, y in js["pairs"])

    def test_hypothesis_violation(self, capsys):
        assert run(capsys, "couple", "poisson", "2", "1")[0] == 2

    def test_seeded(self, capsys):
        first = run(capsys, "couple", "beta", "1", "2", "2", "1", "--n", "500", "--seed", "3")[1]
        second = run(capsys, "couple", "beta", "1", "2", "2", "1", "--n", "500", "--seed", "3")[1]
        assert first == second


class TestEval:
    def test_bernstein(self, capsys):
        code, js, _ = run_json(capsys, "eval-op", "bernstein", "--n", "2", "--phi", "square", "--x", "1/2")
        assert code == 0 and js["value"] == "3/8"

    def test_beta_operator(self, capsys):
        code, js, _ = run_json(capsys, "eval-op", "beta", "--t", "3", "--phi", "stoploss(1/2)", "--x", "0.5")
        assert code == 0 and 0 < js["value"] < 0.5

    def test_bad_phi(self, capsys):
        assert run(capsys, "eval-op", "bernstein", "--n", "2", "--phi", "cosh", "--x", "1/2")[0] == 2

    def test_eval_poly(self, capsys):
        code, js, _ = run_json(capsys, "eval-poly", f"@{DATA / 'v_poly.json'}", "delta(0)", "binom(1,1/2)")
        assert code == 0
        weights = {a["x"]: a["w"] for a in js["atoms"]}
        assert weights == {"0/1": "5/16", "1/1": "7/16", "2/1": "3/16", "3/1": "1/16"}


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "stochorder", "counterexample", "ex3.9"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["checks"]
