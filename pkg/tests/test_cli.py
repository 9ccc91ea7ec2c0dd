import hashlib
import json
import subprocess
import sys

import pytest

from footinterface import storage
from footinterface.cli import EXIT_IO, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, main


def digest(root):
    return {p.relative_to(root).as_posix(): hashlib.sha256(p.read_bytes()).hexdigest()
            for p in sorted(root.rglob("*")) if p.is_file()}


@pytest.fixture(scope="module")
def cohort(tmp_path_factory):
    out = tmp_path_factory.mktemp("cohort")
    assert main(["simulate", "--subjects", "2", "--seed", "3", "-o", str(out)]) == EXIT_OK
    return out


class TestSimulate:
    def test_files(self, cohort):
        trials = list(cohort.rglob("*.csv"))
        assert len(trials) == 2 * 84
        manifest = json.loads((cohort / storage.MANIFEST_NAME).read_text())
        assert len(manifest["subjects"]) == 2 and len(manifest["trials"]) == 168

    def test_rerun_identical(self, cohort, tmp_path):
        assert main(["simulate", "--subjects", "2", "--seed", "3", "-o", str(tmp_path)]) == EXIT_OK
        assert digest(tmp_path) == digest(cohort)

    def test_zero_subjects(self, tmp_path, capsys):
        assert main(["simulate", "--subjects", "0", "-o", str(tmp_path)]) == EXIT_USAGE
        assert "at least 1" in capsys.readouterr().err

    def test_bad_config(self, tmp_path):
        cfg = tmp_path / "bad.ini"
        cfg.write_text("[run]\nunknown = 1\n")
        assert main(["--config", str(cfg), "simulate", "--subjects", "1", "-o", str(tmp_path)]) == EXIT_USAGE

    def test_unwritable(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        assert main(["simulate", "--subjects", "1", "-o", str(blocker / "sub")]) == EXIT_IO

    def test_argparse_errors_exit_one(self):
        with pytest.raises(SystemExit) as exc:
            main(["simulate"])
        assert exc.value.code == EXIT_USAGE


class TestCalibrateEvaluate:
    def test_cohort_roundtrip(self, cohort, tmp_path, capsys):
        models = tmp_path / "models"
        assert main(["calibrate", "--in", str(cohort), "--out", str(models)]) == EXIT_OK
        assert sorted(p.name for p in models.iterdir()) == ["subject01.model.txt", "subject02.model.txt"]
        report = tmp_path / "report.csv"
        assert main(["evaluate", "--model", str(models), "--in", str(cohort), "--report", str(report)]) == EXIT_OK
        out = capsys.readouterr().out
        assert "dataset 2 ica" in out and "dataset 3 kinematic" in out
        rows = [l.split(",") for l in report.read_text().splitlines()[1:]]
        assert {r[5] for r in rows} == {"ica", "kinematic"}

    def test_deterministic(self, cohort, tmp_path):
        for run in ("a", "b"):
            assert main(["calibrate", "--in", str(cohort), "--out", str(tmp_path / run / "m")]) == EXIT_OK
            assert main(["evaluate", "--model", str(tmp_path / run / "m"), "--in", str(cohort),
                         "--report", str(tmp_path / run / "r.csv")]) == EXIT_OK
        assert digest(tmp_path / "a") == digest(tmp_path / "b")

    def test_single_subject(self, cohort, tmp_path):
        model = tmp_path / "one.txt"
        assert main(["calibrate", "--in", str(cohort), "--subject", "02", "--out", str(model)]) == EXIT_OK
        assert storage.model_subject(model) == "02"
        report = tmp_path / "r.csv"
        assert main(["evaluate", "--model", str(model), "--in", str(cohort / "subject02"),
                     "--baseline", "ica", "--datasets", "2", "--report", str(report)]) == EXIT_OK
        assert {l.split(",")[5] for l in report.read_text().splitlines()[1:]} == {"ica"}

    def test_missing_directions(self, cohort, tmp_path, capsys):
        sub = tmp_path / "subject01" / "dataset1"
        sub.mkdir(parents=True)
        for p in (cohort / "subject01" / "dataset1").glob("*.csv"):
            if "_TU_" not in p.name and "_LT_" not in p.name:
                (sub / p.name).write_bytes(p.read_bytes())
        assert main(["calibrate", "--in", str(tmp_path), "--out", str(tmp_path / "m")]) == EXIT_USAGE
        err = capsys.readouterr().err
        assert "TU" in err and "LT" in err

    def test_non_convergence(self, cohort, tmp_path, capsys):
        cfg = tmp_path / "run.ini"
        cfg.write_text("[mapping]\nica_max_iterations = 1\nica_tolerance = 1e-12\n")
        code = main(["--config", str(cfg), "calibrate", "--in", str(cohort), "--subject", "01",
                     "--out", str(tmp_path / "m.txt")])
        assert code == EXIT_NUMERIC
        assert "iterations" in capsys.readouterr().err

    def test_missing_input(self, tmp_path):
        assert main(["calibrate", "--in", str(tmp_path / "none"), "--out", str(tmp_path / "m")]) == EXIT_IO

    def test_bad_model_file(self, cohort, tmp_path):
        bad = tmp_path / "subject01.model.txt"
        bad.write_text("{}")
        assert main(["evaluate", "--model", str(bad), "--in", str(cohort),
                     "--report", str(tmp_path / "r.csv")]) == EXIT_USAGE

    def test_bad_datasets(self, cohort, tmp_path):
        assert main(["evaluate", "--model", str(tmp_path), "--in", str(cohort), "--datasets", "two",
                     "--report", str(tmp_path / "r.csv")]) == EXIT_USAGE


class TestEnergyScan:
    def test_outside(self, tmp_path, capsys):
        out = tmp_path / "grid.csv"
        svg = tmp_path / "e.svg"
        assert main(["energy-scan", "--nx", "21", "--ny", "21", "--nyaw", "21", "-o", str(out),
                     "--svg", str(svg)]) == EXIT_OK
        minima = (tmp_path / "grid_minima.csv").read_text().splitlines()
        assert len(minima) == 2 and minima[1].startswith("0.000000,0.000000,0.000000")
        assert len(out.read_text().splitlines()) == 21 ** 3 + 1
        assert svg.read_text().startswith("<svg")

    def test_inside(self, tmp_path):
        out = tmp_path / "grid.csv"
        assert main(["energy-scan", "--placement", "inside", "--nx", "21", "--ny", "21", "--nyaw", "21",
                     "-o", str(out)]) == EXIT_OK
        assert len((tmp_path / "grid_minima.csv").read_text().splitlines()) - 1 >= 3

    def test_invalid_grid(self, tmp_path):
        assert main(["energy-scan", "--nx", "5", "-o", str(tmp_path / "g.csv")]) == EXIT_USAGE


class TestMetrics:
    def test_metrics(self, cohort, tmp_path):
        out = tmp_path / "m.csv"
        assert main(["metrics", "--in", str(cohort / "subject01" / "dataset1"), "--out", str(out)]) == EXIT_OK
        lines = out.read_text().splitlines()
        assert lines[0] == "subject,direction,trial,foot_path_error_cm,sparc" and len(lines) == 25


def test_module_entry_point():
    done = subprocess.run([sys.executable, "-m", "footinterface", "--help"], capture_output=True, text=True)
    assert done.returncode == 0 and "simulate" in done.stdout
