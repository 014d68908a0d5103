import csv
import json

import pytest

from pacuplan import GenSpec, Instance, Schedule, generate_instance
from pacuplan import io
from pacuplan.cli import main


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def small_instance_file(tmp_path):
    path = tmp_path / "instance.json"
    assert run("generate", "--patients", 12, "--surgeons", 6, "--ors", 4,
               "--seed", 3, "--out", path) == 0
    return path


@pytest.fixture
def small_schedule_file(tmp_path, small_instance_file):
    out = tmp_path / "schedule.json"
    assert run("optimize", small_instance_file, "--iterations", 40,
               "--seed", 1, "--out", out) == 0
    return out


class TestGenerate:
    def test_writes_instance_and_manifest(self, tmp_path, capsys):
        out = tmp_path / "day.json"
        assert run("generate", "--patients", 10, "--surgeons", 5, "--ors", 3,
                   "--seed", 5, "--out", out) == 0
        instance = io.read_instance(out)
        assert len(instance.patients) == 10
        assert (tmp_path / "day.manifest.json").exists()
        assert "10 patients" in capsys.readouterr().out

    def test_same_seed_same_bytes(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        run("generate", "--seed", 7, "--patients", 9, "--surgeons", 4, "--ors", 3, "--out", a)
        run("generate", "--seed", 7, "--patients", 9, "--surgeons", 4, "--ors", 3, "--out", b)
        assert a.read_bytes() == b.read_bytes()

    def test_zero_patients_is_validation_error(self, tmp_path, capsys):
        assert run("generate", "--patients", 0, "--out", tmp_path / "x.json") == 2
        assert "error" in capsys.readouterr().err

    def test_spec_file_with_flag_overrides(self, tmp_path):
        spec_path = tmp_path / "spec.json"
        spec_path.write_text(json.dumps({
            "patient_count": 8, "surgeon_count": 4, "or_count": 2,
            "surgery_log_var": [0.1, 0.2], "seed": 1}))
        out = tmp_path / "from_spec.json"
        assert run("generate", "--spec", spec_path, "--patients", 6, "--out", out) == 0
        instance = io.read_instance(out)
        assert len(instance.patients) == 6  # flag wins over the spec file
        assert all(0.1 <= p.surgery.sigma2 <= 0.2 for p in instance.patients)


class TestForecast:
    def test_row_count_and_mean_column(self, tmp_path, small_instance_file, small_schedule_file):
        out = tmp_path / "occ.csv"
        assert run("forecast", small_instance_file, small_schedule_file,
                   "--grid-step", 0.1, "--out", out) == 0
        with open(out) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 241
        from pacuplan import expected_occupancy
        instance = io.read_instance(small_instance_file)
        schedule = io.read_schedule(small_schedule_file)
        starts = [schedule.starts[p.id] for p in instance.patients]
        for row in rows[::40]:
            expected = expected_occupancy(instance.patients, starts, float(row["time"]))
            assert float(row["mean"]) == pytest.approx(expected, abs=1e-12)

    def test_empty_instance_gives_zero_rows(self, tmp_path):
        instance_path = tmp_path / "empty.json"
        io.write_instance(Instance(surgeons=[], patients=[], or_count=0), instance_path)
        schedule_path = tmp_path / "empty_schedule.json"
        io.write_schedule(Schedule({}), schedule_path)
        out = tmp_path / "occ.csv"
        assert run("forecast", instance_path, schedule_path, "--out", out) == 0
        with open(out) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 241
        assert all(float(r["mean"]) == 0.0 and float(r["upper"]) == 0.0 for r in rows)

    def test_missing_patient_names_it(self, tmp_path, small_instance_file, capsys):
        schedule_path = tmp_path / "partial.json"
        io.write_schedule(Schedule({"p01": 0.0}), schedule_path)
        assert run("forecast", small_instance_file, schedule_path,
                   "--out", tmp_path / "x.csv") == 2
        assert "p02" in capsys.readouterr().err

    def test_missing_file_is_validation_error(self, tmp_path):
        assert run("forecast", tmp_path / "nope.json", tmp_path / "nope2.json",
                   "--out", tmp_path / "x.csv") == 2


class TestOptimize:
    def test_outputs_and_self_consistency(self, tmp_path, small_instance_file, capsys):
        out = tmp_path / "best.json"
        assert run("optimize", small_instance_file, "--iterations", 60, "--seed", 2,
                   "--out", out) == 0
        report = json.loads((tmp_path / "best.report.json").read_text())
        assert report["best_meo"] <= report["initial_meo"]
        assert len(report["meo_trace"]) == 60

        occ = tmp_path / "check.csv"
        run("forecast", small_instance_file, out, "--out", occ)
        with open(occ) as fh:
            peak = max(float(r["mean"]) for r in csv.DictReader(fh))
        assert peak == pytest.approx(report["best_meo"], abs=1e-12)

    def test_replicas_keep_best_seed(self, tmp_path, small_instance_file):
        multi = tmp_path / "multi.json"
        assert run("optimize", small_instance_file, "--iterations", 40, "--seed", 9,
                   "--replicas", 3, "--out", multi) == 0
        report = json.loads((tmp_path / "multi.report.json").read_text())
        assert [r["seed"] for r in report["replicas"]] == [9, 10, 11]
        best = min(report["replicas"], key=lambda r: r["best_meo"])
        assert report["best_meo"] == best["best_meo"]

        single = tmp_path / "single.json"
        assert run("optimize", small_instance_file, "--iterations", 40,
                   "--seed", best["seed"], "--out", single) == 0
        assert single.read_bytes() == multi.read_bytes()

    def test_deterministic_bytes(self, tmp_path, small_instance_file):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for out in (a, b):
            assert run("optimize", small_instance_file, "--iterations", 30, "--seed", 4,
                       "--out", out) == 0
        assert a.read_bytes() == b.read_bytes()
        assert (tmp_path / "a.report.json").read_bytes() == (tmp_path / "b.report.json").read_bytes()

    def test_bad_replicas(self, tmp_path, small_instance_file):
        assert run("optimize", small_instance_file, "--replicas", 0,
                   "--out", tmp_path / "x.json") == 2


class TestValidate:
    def test_report_fields_and_determinism(self, tmp_path, small_instance_file,
                                           small_schedule_file):
        out_a, out_b = tmp_path / "va.json", tmp_path / "vb.json"
        for out in (out_a, out_b):
            assert run("validate", small_instance_file, small_schedule_file,
                       "--samples", 2000, "--mode", "matched", "--seed", 12,
                       "--out", out) == 0
        assert out_a.read_bytes() == out_b.read_bytes()
        report = json.loads(out_a.read_text())
        assert report["n_samples"] == 2000
        assert report["fraction_above"] + report["fraction_below"] + \
            report["fraction_inside"] == pytest.approx(1.0, abs=1e-12)

    def test_zero_samples_rejected(self, tmp_path, small_instance_file, small_schedule_file):
        assert run("validate", small_instance_file, small_schedule_file,
                   "--samples", 0, "--out", tmp_path / "v.json") == 2

    def test_single_sample_warns(self, tmp_path, small_instance_file, small_schedule_file,
                                 capsys):
        assert run("validate", small_instance_file, small_schedule_file,
                   "--samples", 1, "--out", tmp_path / "v.json") == 0
        assert "degenerate" in capsys.readouterr().err


class TestSweep:
    def test_single_cell_matches_optimize(self, tmp_path, small_instance_file):
        sweep_dir = tmp_path / "instances"
        sweep_dir.mkdir()
        (sweep_dir / "one.json").write_bytes(small_instance_file.read_bytes())
        out = tmp_path / "sweep.csv"
        assert run("sweep", sweep_dir, "--iteration-grid", "50", "--factor-grid", "0.9",
                   "--period-grid", "10", "--reps", 1, "--seed", 6, "--out", out) == 0
        with open(out) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 1
        opt = tmp_path / "opt.json"
        assert run("optimize", small_instance_file, "--iterations", 50,
                   "--cooling-factor", 0.9, "--cooling-period", 10, "--seed", 6,
                   "--out", opt) == 0
        report = json.loads((tmp_path / "opt.report.json").read_text())
        assert float(rows[0]["mean_total_best_meo"]) == pytest.approx(
            report["best_meo"], abs=1e-12)

    def test_cell_count_and_argmin_mark(self, tmp_path, small_instance_file):
        sweep_dir = tmp_path / "instances"
        sweep_dir.mkdir()
        (sweep_dir / "one.json").write_bytes(small_instance_file.read_bytes())
        out = tmp_path / "sweep.csv"
        assert run("sweep", sweep_dir, "--iteration-grid", "10,20", "--factor-grid",
                   "0.85,0.95", "--period-grid", "5", "--reps", 1, "--seed", 0,
                   "--out", out) == 0
        with open(out) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 4
        marks = [int(r["best"]) for r in rows]
        assert sum(marks) == 1
        best_value = min(float(r["mean_total_best_meo"]) for r in rows)
        assert float(rows[marks.index(1)]["mean_total_best_meo"]) == best_value

    def test_empty_directory_rejected(self, tmp_path):
        empty = tmp_path / "none"
        empty.mkdir()
        assert run("sweep", empty, "--out", tmp_path / "s.csv") == 2


class TestVersionFlag:
    def test_version_exits_zero(self, capsys):
        with pytest.raises(SystemExit) as exc:
            run("--version")
        assert exc.value.code == 0
        assert "pacuplan" in capsys.readouterr().out
