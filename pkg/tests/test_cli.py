import json
from pathlib import Path

import jsonschema
import pytest

import staleopt.cli as cli

SCHEMA = json.loads(
    (Path(__file__).resolve().parent.parent / "docs" / "cli_output.schema.json")
    .read_text())


def write_quad_config(path, T=300, algorithm="anytime-sgd", delay=10):
    path.write_text(f"""
[problem]
kind = "quadratic"
dimension = 5
smoothness = 3.0
strong_convexity = 0.5
b_scale = 0.8
structure_seed = 2

[problem.noise]
kind = "additive-gaussian"
sigma = 0.1

[domain]
kind = "ball"
radius = 1.0

[algorithm]
name = "{algorithm}"
weights = "linear"
learning_rate = 0.4

[delays]
kind = "constant"
value = {delay}

[run]
T = {T}
seed = 5
record_every = 20

[sweep]
delays = [0, 50]
""")
    return path


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def validate_json_line(line):
    payload = json.loads(line)
    jsonschema.validate(payload, SCHEMA)
    return payload


class TestRunCommand:
    def test_run_writes_outputs(self, tmp_path, capsys):
        cfg = write_quad_config(tmp_path / "quad.toml")
        out = tmp_path / "out"
        code, stdout, _ = run_cli(capsys, "run", "--config", str(cfg),
                                  "--out", str(out), "--json")
        assert code == 0
        payload = validate_json_line(stdout)
        assert Path(payload["outputs"]["csv"]).exists()
        assert Path(payload["outputs"]["summary"]).exists()
        assert payload["summary"]["algorithm"] == "anytime-sgd"

    def test_repeated_runs_byte_identical(self, tmp_path, capsys):
        cfg = write_quad_config(tmp_path / "quad.toml")
        outputs = []
        for sub in ("a", "b"):
            code, stdout, _ = run_cli(capsys, "run", "--config", str(cfg),
                                      "--out", str(tmp_path / sub), "--json")
            assert code == 0
            outputs.append(Path(json.loads(stdout)["outputs"]["csv"]).read_bytes())
        assert outputs[0] == outputs[1]

    def test_seed_flag_changes_output(self, tmp_path, capsys):
        cfg = write_quad_config(tmp_path / "quad.toml")
        bodies = []
        for seed, sub in ((5, "a"), (6, "b")):
            code, stdout, _ = run_cli(capsys, "run", "--config", str(cfg),
                                      "--out", str(tmp_path / sub),
                                      "--seed", str(seed), "--json")
            assert code == 0
            bodies.append(Path(json.loads(stdout)["outputs"]["csv"]).read_bytes())
        assert bodies[0] != bodies[1]

    def test_set_overrides(self, tmp_path, capsys):
        cfg = write_quad_config(tmp_path / "quad.toml")
        code, stdout, _ = run_cli(capsys, "run", "--config", str(cfg),
                                  "--out", str(tmp_path / "o"),
                                  "--set", "run.T=100",
                                  "--set", "delays.value=0", "--json")
        assert code == 0
        assert json.loads(stdout)["summary"]["T"] == 100

    def test_config_error_exit_code_and_message(self, tmp_path, capsys):
        cfg = write_quad_config(tmp_path / "quad.toml")
        code, _, stderr = run_cli(capsys, "run", "--config", str(cfg),
                                  "--out", str(tmp_path / "o"),
                                  "--set", "run.bogus=1")
        assert code == 1
        assert "run.bogus" in stderr

    def test_config_error_json_on_stderr(self, tmp_path, capsys):
        cfg = write_quad_config(tmp_path / "quad.toml")
        code, _, stderr = run_cli(capsys, "run", "--config", str(cfg),
                                  "--out", str(tmp_path / "o"),
                                  "--set", "run.bogus=1", "--json")
        assert code == 1
        payload = validate_json_line(stderr)
        assert "run.bogus" in payload["error"]["message"]

    def test_missing_required_param_names_key(self, tmp_path, capsys):
        cfg = tmp_path / "bad.toml"
        cfg.write_text("""
[problem]
kind = "quadratic"
dimension = 4
[domain]
kind = "ball"
radius = 1.0
[algorithm]
name = "sgd-constant"
[delays]
kind = "constant"
value = 0
[run]
T = 50
seed = 1
""")
        code, _, stderr = run_cli(capsys, "run", "--config", str(cfg),
                                  "--out", str(tmp_path / "o"))
        assert code == 1
        assert "learning_rate" in stderr


class TestSweepCommand:
    def test_two_point_delay_sweep(self, tmp_path, capsys):
        cfg = write_quad_config(tmp_path / "quad.toml", T=150)
        out = tmp_path / "sweep"
        code, stdout, _ = run_cli(capsys, "sweep", "--config", str(cfg),
                                  "--out", str(out), "--json")
        assert code == 0
        payload = validate_json_line(stdout)
        assert len(payload["table"]) == 2
        csvs = sorted(out.glob("run-*.csv"))
        assert len(csvs) == 2
        assert (out / "sweep.csv").exists()
        assert (out / "sweep.json").exists()


class TestAuditCommand:
    def test_clean_audit_exits_zero(self, tmp_path, capsys):
        cfg = write_quad_config(tmp_path / "quad.toml", T=500, delay=50)
        code, stdout, _ = run_cli(capsys, "audit", "--config", str(cfg),
                                  "--out", str(tmp_path / "o"), "--json")
        assert code == 0
        payload = validate_json_line(stdout)
        assert payload["command"] == "audit"


class TestCompareCommand:
    def test_compare_two_runs(self, tmp_path, capsys):
        cfg = write_quad_config(tmp_path / "quad.toml", T=150)
        summaries = []
        for delay, sub in ((0, "a"), (50, "b")):
            code, stdout, _ = run_cli(capsys, "run", "--config", str(cfg),
                                      "--out", str(tmp_path / sub),
                                      "--set", f"delays.value={delay}", "--json")
            assert code == 0
            summaries.append(json.loads(stdout)["outputs"]["summary"])
        code, stdout, _ = run_cli(capsys, "compare", summaries[1], summaries[0],
                                  "--metric", "excess_loss", "--json")
        assert code == 0
        payload = validate_json_line(stdout)
        assert payload["report"]["metric"] == "excess_loss"

    def test_mismatched_runs_exit_one(self, tmp_path, capsys):
        cfg = write_quad_config(tmp_path / "quad.toml", T=150)
        paths = []
        for T, sub in ((150, "a"), (100, "b")):
            code, stdout, _ = run_cli(capsys, "run", "--config", str(cfg),
                                      "--out", str(tmp_path / sub),
                                      "--set", f"run.T={T}", "--json")
            paths.append(json.loads(stdout)["outputs"]["summary"])
        code, _, stderr = run_cli(capsys, "compare", paths[0], paths[1], "--json")
        assert code == 1
        validate_json_line(stderr)


class TestDataTools:
    def test_gen_data_roundtrip(self, tmp_path, capsys):
        out_csv = tmp_path / "synth.csv"
        code, stdout, _ = run_cli(capsys, "gen-data", "--out", str(out_csv),
                                  "--dimension", "4", "--examples", "60",
                                  "--classes", "3", "--separation", "5.0",
                                  "--seed", "2", "--json")
        assert code == 0
        payload = validate_json_line(stdout)
        assert payload["examples"] == 60
        import staleopt as so
        ds = so.load_csv(out_csv)
        assert ds.example_count == 60
        assert ds.feature_count == 4

    def test_stats_reports_distribution(self, tmp_path, capsys):
        cfg = write_quad_config(tmp_path / "quad.toml")
        code, stdout, _ = run_cli(capsys, "stats", "--config", str(cfg),
                                  "--T", "200", "--json")
        assert code == 0
        payload = validate_json_line(stdout)
        # constant 10 with warm-up clamp
        assert payload["delay_stats"]["max"] == 10
        assert payload["delay_stats"]["mean"] == pytest.approx(
            (sum(range(10)) + (200 - 10) * 10) / 200)


class TestOutputContainment:
    def test_only_output_directory_is_touched(self, tmp_path, capsys):
        cfg = write_quad_config(tmp_path / "quad.toml")
        out = tmp_path / "only_here"
        before = {p for p in tmp_path.rglob("*")}
        code, _, _ = run_cli(capsys, "run", "--config", str(cfg),
                             "--out", str(out))
        assert code == 0
        created = {p for p in tmp_path.rglob("*")} - before
        assert created
        assert all(str(p).startswith(str(out)) for p in created)
