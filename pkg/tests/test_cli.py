import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from spherecone import cli, wce
from spherecone.spheremap import SpacePoints
from spherecone.wce import KernelParams


def run_cli(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def read_csv_text(text):
    rows = list(csv.reader(text.strip().splitlines()))
    return rows[0], np.array([[float(v) for v in r] for r in rows[1:]])


class TestPoints:
    def test_sobol_points(self, capsys):
        code, out, _ = run_cli(["points", "--dim", "2", "--n", "4",
                                "--gen", "sobol"], capsys)
        assert code == 0
        header, rows = read_csv_text(out)
        assert header == ["x1", "x2"]
        np.testing.assert_allclose(rows[0], [0.5, 0.5])

    def test_sphere_points_are_normal_shaped(self, capsys):
        code, out, _ = run_cli(["points", "--dim", "3", "--n", "64",
                                "--gen", "sphere", "--scramble"], capsys)
        assert code == 0
        header, rows = read_csv_text(out)
        assert header == ["x1", "x2", "x3"] and rows.shape == (64, 3)

    def test_polar_output_roundtrips(self, capsys, tmp_path):
        path = tmp_path / "pts.csv"
        code = cli.main(["points", "--dim", "3", "--n", "16",
                         "--gen", "sphere", "--polar", "--scramble",
                         "--output", str(path)])
        assert code == 0
        header, rows = read_csv_text(path.read_text())
        assert header[0] == "radius"
        np.testing.assert_allclose(np.linalg.norm(rows[:, 1:], axis=1), 1.0,
                                   atol=1e-12)

    def test_random_generator(self, capsys):
        code, out, _ = run_cli(["points", "--dim", "2", "--n", "8",
                                "--gen", "random", "--seed", "5"], capsys)
        assert code == 0
        _, rows = read_csv_text(out)
        assert rows.shape == (8, 2)


class TestSphereMap:
    def test_unit_norms(self, capsys):
        code, out, _ = run_cli(["sphere-map", "--dim", "3", "--n", "32",
                                "--gen", "sobol", "--scramble"], capsys)
        assert code == 0
        header, rows = read_csv_text(out)
        assert len(header) == 4
        np.testing.assert_allclose(np.linalg.norm(rows, axis=1), 1.0,
                                   atol=1e-12)


class TestWceCommand:
    def test_matches_library(self, capsys, tmp_path):
        path = tmp_path / "pts.csv"
        cli.main(["points", "--dim", "3", "--n", "32", "--gen", "sphere",
                  "--scramble", "--seed", "3", "--output", str(path)])
        capsys.readouterr()
        code, out, _ = run_cli(["wce", "--input", str(path),
                                "--mu", "1.5", "--A", "1.5", "--B", "3"],
                               capsys)
        assert code == 0
        payload = json.loads(out)
        header, rows = read_csv_text(path.read_text())
        pts = SpacePoints.from_cartesian(rows)
        report = wce.wce_nakagami(KernelParams(1.5, 1.5, 3.0, d=2), pts)
        assert payload["wce"] == pytest.approx(report.wce, rel=1e-12)
        assert payload["n_points"] == 32
        assert payload["wce"]**2 == pytest.approx(
            payload["double_sum_term"] - payload["single_sum_term"],
            abs=1e-13)

    def test_polar_csv_accepted(self, capsys, tmp_path):
        path = tmp_path / "pts.csv"
        cli.main(["points", "--dim", "3", "--n", "16", "--gen", "sphere",
                  "--polar", "--scramble", "--seed", "3",
                  "--output", str(path)])
        capsys.readouterr()
        code, out, _ = run_cli(["wce", "--input", str(path),
                                "--mu", "1.5", "--A", "1.5", "--B", "3"],
                               capsys)
        assert code == 0
        assert json.loads(out)["wce"] > 0

    def test_seventeen_digit_roundtrip(self, capsys, tmp_path):
        # CSV output must preserve every bit of the doubles
        path = tmp_path / "pts.csv"
        cli.main(["points", "--dim", "2", "--n", "64", "--gen", "random",
                  "--seed", "9", "--output", str(path)])
        capsys.readouterr()
        _, rows = read_csv_text(path.read_text())
        rng = np.random.Generator(np.random.Philox(
            np.random.SeedSequence([9])))
        cube = rng.random((64, 2))
        from spherecone.spheremap import lift_to_space
        np.testing.assert_array_equal(rows, lift_to_space(cube).cartesian)


class TestRmsWce:
    def test_json_fields(self, capsys, tmp_path):
        path = tmp_path / "dirs.csv"
        cli.main(["points", "--dim", "3", "--n", "8", "--gen", "sphere",
                  "--polar", "--scramble", "--output", str(path)])
        capsys.readouterr()
        code, out, _ = run_cli(["rms-wce", "--mu", "1.5", "--A", "1.5",
                                "--B", "3", "--N", "10",
                                "--input", str(path)], capsys)
        assert code == 0
        payload = json.loads(out)
        p = KernelParams(1.5, 1.5, 3.0, d=2)
        assert payload["iid_constant"] == pytest.approx(wce.rms_wce_iid(p))
        assert payload["iid_expected_wce_sq"] == pytest.approx(
            wce.rms_wce_iid(p) / 10)
        assert payload["fixed_directions_expected_wce_sq"] > 0


class TestLambda:
    def test_exact_value(self, capsys):
        code, out, _ = run_cli(["lambda", "--mu", "1", "--c", "2",
                                "--K", "4"], capsys)
        assert code == 0
        expect = 1 / 3 + 1 / 8 + 1 / 96
        assert float(out.strip()) == pytest.approx(expect, rel=1e-13)


class TestTrialIntegral:
    def test_errors_reported(self, capsys):
        code, out, _ = run_cli(
            ["trial-integral", "--dim", "4", "--n-list", "64,256",
             "--gen", "inverse_beta,random", "--seed", "1"], capsys)
        assert code == 0
        header, rows = None, []
        lines = out.strip().splitlines()
        header = lines[0].split(",")
        assert header == ["generator", "N", "abs_error"]
        assert len(lines) == 5


class TestStrata:
    def test_formula_rows_and_slope(self, capsys):
        code, out, err = run_cli(
            ["strata", "--mu", "1.5", "--A", "1.5", "--B", "3",
             "--M-list", "16,64", "--draws", "2"], capsys)
        assert code == 0
        header, rows = read_csv_text(out)
        assert header[:4] == ["M", "K", "N", "formula"]
        assert "empirical" in header
        assert rows.shape[0] == 2
        assert "slope" in err


class TestPriceAndTable:
    def test_price_sigma_zero(self, capsys):
        code, out, _ = run_cli(
            ["price", "--N", "64", "--reps", "4", "--sigma", "0",
             "--gen", "sobol", "--construction", "pca"], capsys)
        assert code == 0
        lines = out.strip().splitlines()
        row = lines[1].split(",")
        t = np.arange(1, 31) / 30
        expect = math.exp(-0.05) * max(
            float(np.mean(100 * np.exp(0.05 * t))) - 100, 0.0)
        assert float(row[5]) == pytest.approx(expect, abs=1e-12)

    def test_table_shape(self, capsys):
        code, out, _ = run_cli(
            ["table", "--n-list", "256", "--kind", "digital"], capsys)
        assert code == 0
        header, rows = read_csv_text(out)
        assert len(header) == 6 and rows.shape == (1, 6)
        assert rows[0, 0] == 256

    def test_indivisible_n_rejected(self, capsys):
        code, _, err = run_cli(["price", "--N", "100", "--reps", "8"],
                               capsys)
        assert code == 2 and "error" in err


class TestErrors:
    def test_bad_kernel_params_exit_2(self, capsys):
        code, _, err = run_cli(["rms-wce", "--mu", "1", "--A", "3",
                                "--B", "2"], capsys)
        assert code == 2 and "error" in err

    def test_missing_file_exit_2(self, capsys):
        code, _, _ = run_cli(["wce", "--input", "/nonexistent.csv",
                              "--mu", "1", "--A", "1", "--B", "2"], capsys)
        assert code == 2

    def test_bad_barrier_exit_2(self, capsys):
        code, _, _ = run_cli(["price", "--N", "128", "--kind", "barrier",
                              "--barrier", "50"], capsys)
        assert code == 2

    def test_bad_dirfile_exit_2(self, capsys, tmp_path):
        f = tmp_path / "dirs.txt"
        f.write_text("2 1 0 2\n")  # even m is invalid
        code, _, _ = run_cli(["points", "--dim", "2", "--n", "4",
                              "--gen", "sobol", "--dirfile", str(f)],
                             capsys)
        assert code == 2


class TestConsoleScript:
    def test_entry_point_runs(self):
        out = subprocess.run(
            [sys.executable, "-m", "spherecone.cli", "lambda", "--mu", "1",
             "--c", "2", "--K", "16"],
            capture_output=True, text=True)
        assert out.returncode == 0
        assert float(out.stdout.strip()) > 0

    def test_dirfile_env_var(self, tmp_path):
        f = tmp_path / "dirs.txt"
        f.write_text("2 1 0 1\n")
        out = subprocess.run(
            [sys.executable, "-m", "spherecone.cli", "points", "--dim", "3",
             "--n", "4", "--gen", "sobol"],
            capture_output=True, text=True,
            env={"PATH": "/usr/bin:/bin", "SPHERECONE_DIRFILE": str(f)})
        # the two-dimension table cannot serve dimension 3
        assert out.returncode == 2
