import json
import shutil
import subprocess
import sys

import numpy as np
import pytest

from distreg.cli import main
from distreg.data import Dataset, save_csv


@pytest.fixture
def data_csv(tmp_path):
    rng = np.random.default_rng(0)
    X = rng.normal(size=(40, 2))
    d = Dataset(X, 1.0 + X @ [2.0, -1.0] + rng.laplace(size=40))
    path = tmp_path / "data.csv"
    save_csv(d, path)
    return path


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def body(text):
    return [ln for ln in text.splitlines() if not ln.startswith("#")]


class TestFit:
    def test_all_methods_csv(self, data_csv, capsys):
        code, out, _ = run(["fit", "--input", data_csv, "--method", "all"], capsys)
        assert code == 0
        assert out.startswith("# ")
        rows = body(out)
        assert rows[0] == "method,term,estimate"
        assert {r.split(",")[0] for r in rows[1:]} == {"DR", "MR", "QR"}

    def test_json(self, data_csv, capsys):
        code, out, _ = run(["--seed", "3", "fit", "--input", data_csv, "--format", "json",
                            "--bandwidth", "fixed:0.5", "--kernel", "epanechnikov-smoothed"], capsys)
        payload = json.loads(out)
        assert code == 0 and payload["config"]["args"]["seed"] == 3
        bw = [r for r in payload["rows"] if r["term"] == "bandwidth"][0]
        assert bw["estimate"] == 0.5

    def test_output_file(self, data_csv, tmp_path, capsys):
        out = tmp_path / "fit.csv"
        assert run(["fit", "--input", data_csv, "--method", "mr", "--output", out], capsys)[0] == 0
        assert body(out.read_text())[0] == "method,term,estimate"


class TestOtherCommands:
    def test_select(self, data_csv, capsys):
        code, out, _ = run(["select", "--input", data_csv, "--method", "mr",
                            "--lambda-grid", "0.001,0.01,0.1"], capsys)
        rows = body(out)
        assert code == 0 and len(rows) == 4
        assert sum(int(r.split(",")[rows[0].split(",").index("selected")]) for r in rows[1:]) == 1

    def test_evaluate(self, data_csv, capsys):
        code, out, _ = run(["evaluate", "--input", data_csv, "--format", "json"], capsys)
        payload = json.loads(out)
        assert code == 0 and payload["config"]["n_test"] == 5
        pe = {r["method"]: r["value"] for r in payload["rows"] if r["quantity"] == "PE"}
        assert set(pe) == {"DR", "MR", "QR"}

    def test_density(self, data_csv, tmp_path, capsys):
        for extra in (["--column", "y"], ["--residuals", "dr"]):
            out = tmp_path / "dens.csv"
            code, _, _ = run(["density", "--input", data_csv, "--output", out, *extra], capsys)
            assert code == 0 and len(body(out.read_text())) == 513

    def test_simulate_worker_determinism(self, tmp_path, capsys):
        args = ["--seed", "5", "simulate", "--case", "case1", "--dist", "t3", "--n", "30",
                "--reps", "6", "--method", "dr,mr"]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run([*args, "--workers", "1", "--output", a], capsys)[0] == 0
        assert run([*args, "--workers", "3", "--output", b], capsys)[0] == 0
        assert a.read_bytes() == b.read_bytes()


class TestExitCodes:
    def test_argument_errors(self, data_csv, capsys):
        assert run(["fit", "--input", data_csv, "--bandwidth", "cv"], capsys)[0] == 2
        assert run(["fit", "--input", data_csv, "--method", "lad"], capsys)[0] == 2
        assert run(["fit", "--input", data_csv, "--response", "nope"], capsys)[0] == 2
        assert run(["density", "--input", data_csv, "--output", "x.csv"], capsys)[0] == 2
        assert run(["bogus"], capsys)[0] == 2

    def test_io_and_data_errors(self, tmp_path, capsys):
        code, _, err = run(["fit", "--input", tmp_path / "absent.csv"], capsys)
        assert code == 5 and "cannot read" in err
        bad = tmp_path / "bad.csv"
        bad.write_text("y,x\n1,2\nfoo,3\n")
        assert run(["fit", "--input", bad], capsys)[0] == 7
        bad.write_text("y,x\n1,2\n2,bar\n")
        assert run(["fit", "--input", bad], capsys)[0] == 3
        bad.write_text("y,x\nNA,1\n")
        assert run(["fit", "--input", bad], capsys)[0] == 6

    def test_degenerate_data(self, tmp_path, capsys):
        path = tmp_path / "exact.csv"
        X = np.random.default_rng(1).normal(size=(20, 1))
        save_csv(Dataset(X, 2 * X[:, 0]), path)
        # noiseless data leave no residual spread for the bandwidth
        assert run(["fit", "--input", path], capsys)[0] == 3

    def test_numeric_error(self, tmp_path, capsys):
        path = tmp_path / "collinear.csv"
        x = np.random.default_rng(2).normal(size=(20, 1))
        save_csv(Dataset(np.hstack([x, 2 * x]), x[:, 0] + 1), path)
        assert run(["fit", "--input", path, "--method", "mr"], capsys)[0] == 4

    def test_unwritable_output(self, data_csv, tmp_path, capsys):
        out = tmp_path / "missing_dir" / "r.csv"
        assert run(["fit", "--input", data_csv, "--method", "mr", "--output", out], capsys)[0] == 5


@pytest.mark.skipif(shutil.which("distreg") is None, reason="console script not installed")
def test_console_script(data_csv):
    proc = subprocess.run(["distreg", "fit", "--input", str(data_csv), "--method", "mr"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "MR,x1," in proc.stdout


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "distreg", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "0.1.0" in proc.stdout
