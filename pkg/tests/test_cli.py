"""
Tests for the CLI class.
"""
import json
import os
import sys
from io import StringIO
from unittest.mock import patch

import pandas as pd
import pytest

# Add the src directory to the path for testing
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.cli import CLI, EXIT_BLOWUP, EXIT_CONFIG, EXIT_OK, write_manifest
from src.errors import BlowUpError
from src.lemma_suite import InequalityReport

RUN_TOML = """
[grid]
n = 16

[time]
dt = 0.05
t_end = 0.2

[output]
plot = true
"""

SWEEP_TOML = """
[grid]
n = 16

[time]
dt = 0.05
t_end = 0.1

[sweep]
symbol = [{family = "constant"}, {family = "log", mu1 = 1.0}]
"""

RANDOM_TOML = """
seed = 11

[grid]
n = 16

[time]
dt = 0.05
t_end = 0.2

[initial]
kind = "random_band"
k_hi = 5
"""

# dt far above the CFL step with no dissipation: RK4 overflows within a few steps
BLOWUP_TOML = """
[grid]
n = 16

[time]
dt = 1.0
t_end = 50.0

[initial]
kind = "random_band"
amplitude = 1000.0
theta_amplitude = 1000.0
k_hi = 5

[physics]
dissipation = false

[output]
record_every = 1000
"""


class TestCLI:
    """Test cases for CLI class."""

    def setup_method(self):
        """Set up test fixtures."""
        self.cli = CLI(out_dir="unused", threads=1)

    def write(self, tmp_path, name, text):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    def test_init(self):
        """Test CLI initialization."""
        assert self.cli.threads == 1
        assert set(self.cli.commands) == {"run", "verify", "sweep", "help"}

    @patch('sys.stdout', new_callable=StringIO)
    def test_help(self, mock_stdout):
        """Test that help lists every command and is the default."""
        assert self.cli.run([]) == EXIT_OK
        output = mock_stdout.getvalue()
        assert "Available Commands:" in output
        for command in ("run", "verify", "sweep"):
            assert command in output

    @patch('sys.stderr', new_callable=StringIO)
    def test_unknown_command(self, mock_stderr):
        """Test that an unknown command exits 1."""
        assert self.cli.run(["simulate"]) == EXIT_CONFIG
        assert "Unknown command" in mock_stderr.getvalue()

    @patch('sys.stderr', new_callable=StringIO)
    def test_unknown_flag(self, mock_stderr):
        """Test that an unknown flag exits 1."""
        assert self.cli.run(["run", "--fast"]) == EXIT_CONFIG
        assert "--fast" in mock_stderr.getvalue()

    def test_parse_command(self):
        """Test parse_command method."""
        command, args = self.cli.parse_command(["run", "--config", "a.toml", "--seed", "3"])
        assert command == "run"
        assert args.config == "a.toml"
        assert args.seed == 3
        command, args = self.cli.parse_command([])
        assert command == "help"

    @patch('sys.stdout', new_callable=StringIO)
    def test_run_writes_outputs(self, mock_stdout, tmp_path):
        """Test a healthy run: exit 0, series, plot and manifest."""
        config = self.write(tmp_path, "run.toml", RUN_TOML)
        out = tmp_path / "out"
        assert self.cli.run(["run", "--config", config, "--out", str(out), "--seed", "9"]) == EXIT_OK

        series = pd.read_csv(out / "series.csv")
        assert len(series) == 5
        assert list(series.columns[:2]) == ["t", "u_L2"]
        assert (out / "series.html").exists()
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["exit_status"] == 0
        assert manifest["seed"] == 9
        assert manifest["config"]["grid"]["n"] == 16
        assert manifest["steps"] == 4
        assert "Run complete" in mock_stdout.getvalue()

    @patch('sys.stderr', new_callable=StringIO)
    def test_run_malformed_config(self, mock_stderr, tmp_path):
        """Test that a malformed configuration exits 1 without outputs."""
        config = self.write(tmp_path, "bad.toml", "[grid]\nn = 48\n")
        out = tmp_path / "out"
        assert self.cli.run(["run", "--config", config, "--out", str(out)]) == EXIT_CONFIG
        assert not out.exists()

    @patch('sys.stderr', new_callable=StringIO)
    def test_run_requires_config(self, mock_stderr):
        """Test that run without --config exits 1."""
        assert self.cli.run(["run"]) == EXIT_CONFIG

    @patch('sys.stdout', new_callable=StringIO)
    @patch('sys.stderr', new_callable=StringIO)
    def test_run_blow_up(self, mock_stderr, mock_stdout, tmp_path):
        """Test that a blow-up exits 2 and still writes the manifest."""
        config = self.write(tmp_path, "run.toml", RUN_TOML)
        out = tmp_path / "out"
        with patch('src.cli.record_run', side_effect=BlowUpError(0.1, None, "coefficients overflowed")):
            assert self.cli.run(["run", "--config", config, "--out", str(out)]) == EXIT_BLOWUP
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["exit_status"] == EXIT_BLOWUP
        assert "overflowed" in manifest["message"]
        assert (out / "series.csv").exists()

    @patch('sys.stdout', new_callable=StringIO)
    @patch('sys.stderr', new_callable=StringIO)
    def test_run_real_blow_up(self, mock_stderr, mock_stdout, tmp_path):
        """Test that an overflowing integration exits 2 with the partial series."""
        config = self.write(tmp_path, "blowup.toml", BLOWUP_TOML)
        out = tmp_path / "out"
        assert self.cli.run(["run", "--config", config, "--out", str(out)]) == EXIT_BLOWUP
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["exit_status"] == EXIT_BLOWUP
        assert manifest["records"] == 1
        series = pd.read_csv(out / "series.csv")
        assert list(series["t"]) == [0.0]
        assert "Blow-up" in mock_stderr.getvalue()

    @patch('sys.stdout', new_callable=StringIO)
    def test_run_is_deterministic(self, mock_stdout, tmp_path):
        """Test that the same configuration and seed give byte-identical series."""
        config = self.write(tmp_path, "run.toml", RANDOM_TOML)
        first, second = tmp_path / "first", tmp_path / "second"
        assert self.cli.run(["run", "--config", config, "--out", str(first)]) == EXIT_OK
        assert self.cli.run(["run", "--config", config, "--out", str(second)]) == EXIT_OK
        assert (first / "series.csv").read_bytes() == (second / "series.csv").read_bytes()

    @patch('sys.stdout', new_callable=StringIO)
    @patch('sys.stderr', new_callable=StringIO)
    def test_run_wrong_types_exit_1(self, mock_stderr, mock_stdout, tmp_path):
        """Test that wrongly typed values exit 1 instead of raising."""
        for text in ('[grid]\nn = "abc"\n', '[grid]\ndealias = "false"\n', '[time]\nt_end = "1.0"\n'):
            config = self.write(tmp_path, "typed.toml", text)
            out = tmp_path / "out"
            assert self.cli.run(["run", "--config", config, "--out", str(out)]) == EXIT_CONFIG
            assert not out.exists()
        assert "must be" in mock_stderr.getvalue()

    @patch('sys.stdout', new_callable=StringIO)
    @patch('sys.stderr', new_callable=StringIO)
    def test_run_config_error_during_run(self, mock_stderr, mock_stdout, tmp_path):
        """Test that a configuration error raised by the run leaves only the manifest."""
        missing = tmp_path / "missing.npz"
        config = self.write(tmp_path, "restart.toml", f'[grid]\nn = 16\n\n[initial]\nkind = "file"\npath = "{missing}"\n')
        out = tmp_path / "out"
        assert self.cli.run(["run", "--config", config, "--out", str(out)]) == EXIT_CONFIG
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["exit_status"] == EXIT_CONFIG
        assert "not found" in manifest["message"]
        assert "series" not in manifest["outputs"]
        assert not (out / "series.csv").exists()

    @patch('sys.stderr', new_callable=StringIO)
    @patch('sys.stdout', new_callable=StringIO)
    def test_verify_unknown_suite(self, mock_stdout, mock_stderr, tmp_path):
        """Test that an unknown suite exits 1."""
        assert self.cli.run(["verify", "--suite", "lemmas", "--out", str(tmp_path)]) == EXIT_CONFIG
        assert "unknown suite" in mock_stderr.getvalue()

    @patch('sys.stderr', new_callable=StringIO)
    @patch('sys.stdout', new_callable=StringIO)
    def test_verify_exit_codes(self, mock_stdout, mock_stderr, tmp_path):
        """Test exit 0 on zero violations and 1 otherwise."""
        clean = InequalityReport("bernstein", 1, 0.5, 0.5, 0, {})
        failing = InequalityReport("bernstein", 1, 0.5, 0.5, 2, {})
        with patch('src.cli.run_suite', return_value=[clean]):
            assert self.cli.run(["verify", "--suite", "bernstein", "--out", str(tmp_path)]) == EXIT_OK
        assert (tmp_path / "bernstein_report.txt").exists()
        with patch('src.cli.run_suite', return_value=[clean, failing]):
            assert self.cli.run(["verify", "--suite", "bernstein", "--out", str(tmp_path)]) == EXIT_CONFIG

    @patch('sys.stdout', new_callable=StringIO)
    def test_verify_passes_flags(self, mock_stdout, tmp_path):
        """Test that suite, seed and threads reach run_suite."""
        with patch('src.cli.run_suite') as run_suite:
            from src.lemma_suite import operator_algebra, symbol_validation

            run_suite.return_value = [operator_algebra(n=32), symbol_validation()]
            assert self.cli.run(["verify", "--suite", "operators", "--seed", "1", "--out", str(tmp_path)]) == EXIT_OK
            run_suite.assert_called_once_with("operators", seed=1, workers=1)
        assert "operator_algebra" in mock_stdout.getvalue()

    @patch('sys.stderr', new_callable=StringIO)
    @patch('sys.stdout', new_callable=StringIO)
    def test_sweep(self, mock_stdout, mock_stderr, tmp_path):
        """Test one subdirectory per point and a summary row per run."""
        config = self.write(tmp_path, "sweep.toml", SWEEP_TOML)
        out = tmp_path / "sweep"
        assert self.cli.run(["sweep", "--config", config, "--out", str(out)]) == EXIT_OK
        summary = pd.read_csv(out / "summary.csv")
        assert list(summary["run"]) == [0, 1]
        assert list(summary["exit_status"]) == [0, 0]
        assert summary["symbol"][0] == "family=constant"
        assert (out / "run_000" / "series.csv").exists()
        assert (out / "run_001" / "manifest.json").exists()

    @patch('sys.stderr', new_callable=StringIO)
    @patch('sys.stdout', new_callable=StringIO)
    def test_sweep_all_failed(self, mock_stdout, mock_stderr, tmp_path):
        """Test that a sweep whose every run blows up returns the child code."""
        config = self.write(tmp_path, "sweep.toml", SWEEP_TOML)
        with patch('src.cli.record_run', side_effect=BlowUpError(0.0, None)):
            assert self.cli.run(["sweep", "--config", config, "--out", str(tmp_path / "sweep")]) == EXIT_BLOWUP

    @patch('sys.stderr', new_callable=StringIO)
    def test_sweep_rejects_run_config(self, mock_stderr, tmp_path):
        """Test that a file without [sweep] exits 1."""
        config = self.write(tmp_path, "run.toml", RUN_TOML)
        assert self.cli.run(["sweep", "--config", config, "--out", str(tmp_path)]) == EXIT_CONFIG


class TestManifest:
    """Test cases for write_manifest."""

    def test_atomic_write(self, tmp_path):
        """Test sorted JSON output and that no temporary file remains."""
        path = write_manifest(str(tmp_path / "manifest.json"), {"b": 1, "a": float("inf")})
        text = open(path).read()
        assert text.index('"a"') < text.index('"b"')
        assert not os.path.exists(path + ".tmp")

    @pytest.mark.slow
    def test_sweep_in_parallel(self, tmp_path):
        """Test that --jobs 2 gives the same summary as a serial sweep."""
        config = tmp_path / "sweep.toml"
        config.write_text(SWEEP_TOML)
        cli = CLI(out_dir=str(tmp_path))
        with patch('sys.stdout', new_callable=StringIO):
            assert cli.run(["sweep", "--config", str(config), "--out", str(tmp_path / "a"), "--jobs", "2"]) == EXIT_OK
            assert cli.run(["sweep", "--config", str(config), "--out", str(tmp_path / "b")]) == EXIT_OK
        a = pd.read_csv(tmp_path / "a" / "summary.csv")
        b = pd.read_csv(tmp_path / "b" / "summary.csv")
        assert list(a["final_u_L2"]) == list(b["final_u_L2"])
