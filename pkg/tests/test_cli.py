"""Command-line interface: subcommands, config precedence, exit codes."""

import json

import pytest

from it2garch.cli import main, parse_config_file


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def run(*argv):
    return main(list(argv))


def simulate_into(workdir, name="sim", n=400, seed=5, omega="0.05",
                  alpha="0.2", beta="0.7"):
    rc = run("simulate", "--omega", omega, "--alpha", alpha, "--beta", beta,
             "--mean", "5", "--n", str(n), "--seed", str(seed),
             "--out-dir", name)
    assert rc == 0
    return workdir / name / "simulated.csv"


class TestSimulate:
    def test_deterministic_output_files(self, workdir):
        a = simulate_into(workdir, "a")
        b = simulate_into(workdir, "b")
        assert a.read_text() == b.read_text()

    def test_constant_variance_summary(self, workdir, capsys):
        rc = run("simulate", "--omega", "1", "--alpha", "0", "--beta", "0",
                 "--n", "10000", "--seed", "1", "--out-dir", "c")
        assert rc == 0
        out = capsys.readouterr().out
        variance = float(out.split("sample variance")[1].strip().split()[0])
        assert abs(variance - 1.0) < 0.05

    def test_zero_n_is_usage_error(self, workdir):
        assert run("simulate", "--omega", "1", "--alpha", "0", "--beta", "0",
                   "--n", "0") == 1

    def test_run_config_written(self, workdir):
        simulate_into(workdir, "d")
        doc = json.loads((workdir / "d" / "run_config.json").read_text())
        assert doc["command"] == "simulate"
        assert doc["seed"] == 5


class TestTrain:
    def test_train_twice_byte_identical_models(self, workdir):
        data = simulate_into(workdir)
        for out in ("r1", "r2"):
            rc = run("train", "--data", str(data), "--value-column", "value",
                     "--iterations", "60", "--seed", "7", "--window", "4",
                     "--out-dir", out)
            assert rc == 0
        assert (workdir / "r1" / "model.json").read_bytes() == \
            (workdir / "r2" / "model.json").read_bytes()

    def test_missing_file_is_data_error(self, workdir):
        assert run("train", "--data", "missing.csv") == 2

    def test_truncated_data_names_file(self, workdir, capsys):
        bad = workdir / "tiny.csv"
        bad.write_text("v\n1.0\n2.0\n")
        assert run("train", "--data", str(bad), "--window", "5") == 2
        assert "tiny" in capsys.readouterr().err

    def test_constant_series_reports_tiny_mse(self, workdir):
        flat = workdir / "flat.csv"
        flat.write_text("v\n" + "\n".join(["3.25"] * 60) + "\n")
        rc = run("train", "--data", str(flat), "--iterations", "20",
                 "--out-dir", "flat_run")
        assert rc == 0
        report = json.loads((workdir / "flat_run" / "training_report.json").read_text())
        assert report["final_mse"] < 1e-4


class TestPredict:
    def test_rows_and_interval_ordering(self, workdir):
        data = simulate_into(workdir)
        assert run("train", "--data", str(data), "--value-column", "value",
                   "--iterations", "40", "--seed", "7", "--window", "4",
                   "--out-dir", "m") == 0
        assert run("predict", "--model", "m/model.json", "--data", str(data),
                   "--value-column", "value", "--steps", "2",
                   "--out-dir", "p") == 0
        lines = (workdir / "p" / "predictions.csv").read_text().splitlines()
        header = lines[0].split(",")
        assert header == ["origin_index", "step", "prediction", "interval_low",
                          "interval_high", "variance_low", "variance_point",
                          "variance_high"]
        # 400 points, window 4 -> origins 3..399, two steps each
        assert len(lines) - 1 == 397 * 2
        for line in lines[1:50]:
            cells = line.split(",")
            low, pred, high = float(cells[3]), float(cells[2]), float(cells[4])
            assert low <= pred <= high

    def test_rerun_identical(self, workdir):
        data = simulate_into(workdir)
        run("train", "--data", str(data), "--value-column", "value",
            "--iterations", "40", "--seed", "7", "--window", "4", "--out-dir", "m")
        for out in ("p1", "p2"):
            assert run("predict", "--model", "m/model.json", "--data", str(data),
                       "--value-column", "value", "--steps", "2",
                       "--out-dir", out) == 0
        assert (workdir / "p1" / "predictions.csv").read_bytes() == \
            (workdir / "p2" / "predictions.csv").read_bytes()

    def test_schema_mismatch_is_data_error(self, workdir):
        data = simulate_into(workdir)
        bogus = workdir / "bogus.json"
        bogus.write_text('{"schema": "other/1"}\n')
        assert run("predict", "--model", str(bogus), "--data", str(data),
                   "--value-column", "value") == 2


class TestBenchmarkCommand:
    def write_config(self, workdir, data):
        cfg = workdir / "bench.cfg"
        cfg.write_text(
            f"datasets = {data}:value\n"
            "models = garch, fixed\n"
            "window = 4\n"
            "steps = 2\n"
            "iterations = 40\n"
            "seed = 11\n"
            "outlier-k = 0\n"
            "out-dir = bench\n"
        )
        return cfg

    def test_grid_files_and_rerun_identical(self, workdir):
        data = simulate_into(workdir)
        cfg = self.write_config(workdir, data)
        assert run("benchmark", "--config", str(cfg)) == 0
        out = workdir / "bench"
        for metric in ("mse", "rmse", "mae", "mape", "r2"):
            grid = out / f"grid_{metric}.csv"
            lines = grid.read_text().splitlines()
            assert lines[0] == "dataset,garch,fixed"
            assert len(lines) == 2
        report1 = (out / "report.json").read_bytes()
        assert run("benchmark", "--config", str(cfg)) == 0
        assert (out / "report.json").read_bytes() == report1

    def test_flag_overrides_config(self, workdir):
        data = simulate_into(workdir)
        cfg = self.write_config(workdir, data)
        assert run("benchmark", "--config", str(cfg), "--out-dir", "bench2") == 0
        assert (workdir / "bench2" / "report.json").is_file()

    def test_missing_dataset_config_is_usage_error(self, workdir):
        assert run("benchmark") == 1

    def test_all_cells_failing_is_data_error(self, workdir):
        tiny = workdir / "tiny.csv"
        tiny.write_text("v\n" + "\n".join(str(float(i)) for i in range(8)) + "\n")
        cfg = workdir / "b.cfg"
        cfg.write_text(f"datasets = {tiny}:v\nmodels = garch\nwindow = 5\n"
                       "iterations = 10\nout-dir = failbench\n")
        assert run("benchmark", "--config", str(cfg)) == 2


class TestDiagnose:
    def test_white_noise_and_guards(self, workdir, capsys):
        data = simulate_into(workdir, n=1000, omega="1", alpha="0", beta="0")
        assert run("diagnose", "--residuals", str(data), "--value-column",
                   "value", "--lags", "10", "--out-dir", "diag") == 0
        out = capsys.readouterr().out
        assert "Ljung-Box Q" in out
        doc = json.loads((workdir / "diag" / "diagnosis.json").read_text())
        assert doc["h"] == 10 and len(doc["autocorrs"]) == 10

    def test_lag_must_be_below_length(self, workdir):
        tiny = workdir / "t.csv"
        tiny.write_text("v\n1.0\n2.0\n3.0\n")
        assert run("diagnose", "--residuals", str(tiny), "--lags", "5") == 1


class TestConfigFile:
    def test_typing_and_lists(self, workdir):
        cfg = workdir / "c.cfg"
        cfg.write_text(
            "window = 7\n"
            "confidence = 0.9  # trailing comment\n"
            "stochastic_innovations = true\n"
            "datasets = a.csv, b.csv\n"
            "name = plain-text\n"
        )
        doc = parse_config_file(cfg)
        assert doc["window"] == 7
        assert doc["confidence"] == 0.9
        assert doc["stochastic_innovations"] is True
        assert doc["datasets"] == ["a.csv", "b.csv"]
        assert doc["name"] == "plain-text"

    def test_malformed_line_rejected(self, workdir):
        cfg = workdir / "bad.cfg"
        cfg.write_text("this is not a key value pair\n")
        with pytest.raises(Exception):
            parse_config_file(cfg)
