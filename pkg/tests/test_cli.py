"""End-to-end tests of the command line: files, metadata and exit statuses."""
import json

from src.config import build_config, parse_config
from src.main import EXIT_ACCEPTANCE, EXIT_OK, EXIT_USAGE, execute, main

SMALL_RATE = """
[run]
subcommand = rate
problem = sign_drift
seed = 42

[rate]
n_list = 16, 32, 64
ref_level = 8
paths = 100
block_size = 32
"""


def _write_config(tmp_path, text, name="run.ini"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def _metadata(out):
    return json.loads((out / "metadata.json").read_text(encoding="utf-8"))


class TestSubcommands:
    def test_komatsu(self, tmp_path, capsys):
        out = tmp_path / "komatsu"
        assert main(["komatsu", "--out", str(out)]) == EXIT_OK
        lines = (out / "komatsu.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == "# irregular-sde v1 komatsu"
        assert lines[1] == "x,tail,bound,slack"
        assert len(lines) == 2 + 10_000
        assert (out / "komatsu.json").exists()
        assert "Komatsu" in capsys.readouterr().out

    def test_yw_writes_samples(self, tmp_path):
        out = tmp_path / "yw"
        assert main(["yw", "--out", str(out), "--format", "csv"]) == EXIT_OK
        assert (out / "yw.csv").exists()
        assert (out / "yw_samples.csv").exists()
        assert not (out / "yw.json").exists()
        assert _metadata(out)["files"] == ["yw.csv", "yw_samples.csv"]

    def test_verify_json_only(self, tmp_path):
        out = tmp_path / "verify"
        assert main(["verify", "--problem", "monotone_2d", "--out", str(out), "--format", "json"]) == EXIT_OK
        payload = json.loads((out / "verify.json").read_text(encoding="utf-8"))
        assert payload["total_violations"] == 0
        assert not (out / "verify.csv").exists()

    def test_rate_from_a_config_file(self, tmp_path):
        out = tmp_path / "rate"
        config = _write_config(tmp_path, SMALL_RATE)
        assert main(["--config", config, "--out", str(out)]) == EXIT_OK
        lines = (out / "rate.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == "# irregular-sde v1 rate-report"
        assert lines[1] == "n,error,stderr"
        assert [line.split(",")[0] for line in lines[2:]] == ["16", "32", "64"]
        report = json.loads((out / "rate.json").read_text(encoding="utf-8"))
        assert report["theory_slope"] == -0.5


class TestMetadata:
    def test_contents(self, tmp_path):
        out = tmp_path / "meta"
        assert main(["verify", "--seed", "9", "--out", str(out)]) == EXIT_OK
        metadata = _metadata(out)
        assert metadata["seed"] == 9
        assert metadata["exit_status"] == 0
        assert metadata["config"]["subcommand"] == "verify"
        assert metadata["config"]["verify"]["samples"] == 10_000
        assert metadata["version"]
        assert metadata["wall_time_seconds"] >= 0

    def test_rerun_from_the_metadata(self, tmp_path):
        first, second = tmp_path / "first", tmp_path / "second"
        assert main(["--config", _write_config(tmp_path, SMALL_RATE), "--out", str(first)]) == EXIT_OK
        document = _metadata(first)["config_document"]
        cfg = parse_config(document)
        assert execute(cfg.model_copy(update={"output_dir": str(second)})) == EXIT_OK
        assert (first / "rate.csv").read_bytes() == (second / "rate.csv").read_bytes()


class TestDeterminism:
    def test_repeated_runs_are_byte_identical(self, tmp_path):
        config = _write_config(tmp_path, SMALL_RATE)
        assert main(["--config", config, "--out", str(tmp_path / "a")]) == EXIT_OK
        assert main(["--config", config, "--out", str(tmp_path / "b")]) == EXIT_OK
        assert (tmp_path / "a" / "rate.csv").read_bytes() == (tmp_path / "b" / "rate.csv").read_bytes()

    def test_worker_count_does_not_change_the_output(self, tmp_path):
        config = _write_config(tmp_path, SMALL_RATE)
        assert main(["--config", config, "--workers", "1", "--out", str(tmp_path / "one")]) == EXIT_OK
        assert main(["--config", config, "--workers", "3", "--out", str(tmp_path / "three")]) == EXIT_OK
        assert (tmp_path / "one" / "rate.csv").read_bytes() == (tmp_path / "three" / "rate.csv").read_bytes()


class TestExitStatus:
    def test_violated_band(self, tmp_path):
        out = tmp_path / "band"
        config = _write_config(tmp_path, SMALL_RATE + "slope_lower = 5.0\n")
        assert main(["--config", config, "--out", str(out)]) == EXIT_ACCEPTANCE
        assert _metadata(out)["exit_status"] == EXIT_ACCEPTANCE
        assert (out / "rate.csv").exists()

    def test_no_arguments(self, capsys):
        assert main([]) == EXIT_USAGE
        assert "sign_drift" in capsys.readouterr().err

    def test_unknown_problem(self, tmp_path):
        assert main(["verify", "--problem", "nope", "--out", str(tmp_path)]) == EXIT_USAGE

    def test_unwritable_output_directory(self, tmp_path):
        blocker = tmp_path / "occupied"
        blocker.write_text("not a directory", encoding="utf-8")
        assert main(["komatsu", "--out", str(blocker)]) == EXIT_USAGE

    def test_missing_config_file(self, tmp_path):
        assert main(["--config", str(tmp_path / "missing.ini")]) == EXIT_USAGE

    def test_bad_config_value(self, tmp_path):
        config = _write_config(tmp_path, SMALL_RATE.replace("16, 32, 64", "16, 32, 100"))
        assert main(["--config", config, "--out", str(tmp_path / "x")]) == EXIT_USAGE

    def test_resource_limit(self, tmp_path):
        config = _write_config(tmp_path, SMALL_RATE + "budget = 10\n")
        assert main(["--config", config, "--out", str(tmp_path / "r")]) == EXIT_USAGE

    def test_execute_reports_a_path_error(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x", encoding="utf-8")
        cfg = build_config({"subcommand": "komatsu", "output_dir": str(blocker / "sub")})
        assert execute(cfg) == EXIT_USAGE

    def test_list_problems(self, capsys):
        assert main(["--list-problems"]) == EXIT_OK
        names = capsys.readouterr().out.split()
        assert "sign_drift" in names and "brownian" in names
