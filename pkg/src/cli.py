#!/usr/bin/env python3
"""
CLI module for the rb-lab application.
Provides the run, verify and sweep commands and their exit-code contract.
"""

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional, Tuple

import pandas as pd

from src import __version__
from src.checkpoint import CheckpointStore
from src.config import SolverConfig, load_config, load_sweep
from src.diagnostics import monitor_propositions, record_run
from src.errors import BlowUpError, ConfigError, RBError
from src.lemma_suite import SUITES, run_suite, write_reports
from src.series_plot import SeriesPlot
from src.trajectory import FLOAT_FORMAT, Trajectory

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_BLOWUP = 2

SERIES_FILE = "series.csv"
MANIFEST_FILE = "manifest.json"
PLOT_FILE = "series.html"
SUMMARY_FILE = "summary.csv"


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def write_manifest(path: str, manifest: Dict[str, Any]) -> str:
    """
    Write the run manifest atomically.

    Args:
        path (str): Destination
        manifest (dict): JSON-serialisable content

    Returns:
        str: The path written
    """
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, sort_keys=True, default=str)
    os.replace(tmp, path)
    return path


def _describe_point(point: Dict[str, Any]) -> Dict[str, Any]:
    row = {}
    for key, value in point.items():
        if isinstance(value, dict):
            row[key] = ",".join(f"{k}={v}" for k, v in value.items())
        else:
            row[key] = value
    return row


def execute_run(config: SolverConfig, out_dir: str) -> Tuple[int, Dict[str, Any]]:
    """
    Run one configuration with diagnostics and write its outputs.

    Module-level so that sweep workers can pickle it. Writes series.csv, manifest.json,
    checkpoints when enabled and series.html when plotting is on. A blow-up still flushes
    the records received up to the last healthy sample.

    Args:
        config (SolverConfig): Resolved configuration
        out_dir (str): Output directory, created if missing

    Returns:
        Tuple[int, dict]: Exit code and a summary row (status, terminal norms, violations)
    """
    os.makedirs(out_dir, exist_ok=True)
    started = _now()
    traj = Trajectory(store_fields=config.output.store_fields)
    checkpoints = None
    if config.output.checkpoint_every:
        checkpoints = CheckpointStore(os.path.join(out_dir, "checkpoints"))

    code = EXIT_OK
    message = ""
    result = None
    violations = 0
    try:
        traj, result = record_run(config, trajectory=traj, checkpoints=checkpoints)
    except BlowUpError as e:
        code = EXIT_BLOWUP
        message = str(e)
        logger.warning("run in %s blew up: %s", out_dir, e)
    except ConfigError as e:
        code = EXIT_CONFIG
        message = str(e)

    # a configuration error leaves only the manifest behind
    outputs: Dict[str, Any] = {}
    if code != EXIT_CONFIG:
        outputs["series"] = traj.to_csv(os.path.join(out_dir, SERIES_FILE))
    if code == EXIT_OK and len(traj):
        violations = len(monitor_propositions(traj, config.physics).violations)
    if checkpoints is not None and code != EXIT_CONFIG:
        outputs["checkpoints"] = checkpoints.list()
    if config.output.plot and code != EXIT_CONFIG and len(traj):
        plot = SeriesPlot.from_trajectory(traj, title=f"rb-lab n={config.n} g={config.symbol.family}")
        plot.create_figure()
        outputs["plot"] = plot.save_html(os.path.join(out_dir, PLOT_FILE))

    manifest = {
        "config": config.to_dict(),
        "version": __version__,
        "seed": config.seed,
        "started": started,
        "finished": _now(),
        "exit_status": code,
        "message": message,
        "outputs": outputs,
        "records": len(traj),
        "monitor_violations": violations,
    }
    if result is not None:
        manifest.update({"steps": result.steps, "dt": result.dt, "cfl_warnings": result.cfl_warnings})
    write_manifest(os.path.join(out_dir, MANIFEST_FILE), manifest)

    row = {"exit_status": code, "records": len(traj), "monitor_violations": violations}
    final = traj.final()
    if final is not None:
        row.update({f"final_{key}": value for key, value in final.get_data().items()})
    return code, row


def _sweep_worker(task: Tuple[int, SolverConfig, str]) -> Tuple[int, int, Dict[str, Any]]:
    index, config, out_dir = task
    try:
        code, row = execute_run(config, out_dir)
    except RBError as e:
        code, row = EXIT_CONFIG, {"exit_status": EXIT_CONFIG, "error": str(e)}
    return index, code, row


class CLI:
    """Command-line interface class for command-based operations."""

    def __init__(self, out_dir: str = "out", threads: int = 1):
        """
        Initialize the CLI with available commands.

        Args:
            out_dir (str): Output directory used when --out is not given
            threads (int): Worker threads for ensemble suites
        """
        self.out_dir = out_dir
        self.threads = max(1, int(threads))

        self.commands = {
            "run": {"function": self.cmd_run, "description": "Integrate one configuration and record diagnostics"},
            "verify": {"function": self.cmd_verify, "description": "Run an inequality verification suite"},
            "sweep": {"function": self.cmd_sweep, "description": "Run the Cartesian product of a sweep file"},
            "help": {"function": self.show_help, "description": "Show help information"},
        }
        self.parser = self.build_parser()

    def build_parser(self) -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(prog="rb", add_help=False)
        parser.add_argument("--config", help="TOML run or sweep configuration")
        parser.add_argument("--out", help="output directory")
        parser.add_argument("--seed", type=int, help="override the configured seed")
        parser.add_argument("--suite", help=f"verification suite: {', '.join([*SUITES, 'all'])}")
        parser.add_argument("--jobs", type=int, default=1, help="parallel sweep workers")
        return parser

    def parse_command(self, argv: List[str]) -> Tuple[str, Optional[argparse.Namespace]]:
        """
        Split argv into the command name and its parsed flags.

        Args:
            argv (List[str]): Arguments after the program name

        Returns:
            Tuple[str, argparse.Namespace]: Command and flags; flags are None when parsing failed
        """
        if not argv:
            return "help", self.parser.parse_args([])
        command, rest = argv[0], argv[1:]
        try:
            args, unknown = self.parser.parse_known_args(rest)
        except SystemExit:
            return command, None
        if unknown:
            print(f"❌ Unknown arguments: {' '.join(unknown)}", file=sys.stderr)
            return command, None
        return command, args

    def execute_command(self, command: str, args: Optional[argparse.Namespace]) -> int:
        """Execute a command and return its exit code."""
        if command not in self.commands:
            print(f"❌ Unknown command: {command}", file=sys.stderr)
            print("Type help for available commands.", file=sys.stderr)
            return EXIT_CONFIG
        if args is None:
            return EXIT_CONFIG
        return self.commands[command]["function"](args)

    def run(self, argv: List[str]) -> int:
        command, args = self.parse_command(argv)
        return self.execute_command(command, args)

    def show_help(self, args: argparse.Namespace) -> int:
        """Display help information."""
        print("\n❓ RB-LAB - HELP & INFORMATION")
        print("=" * 40)
        print()
        print("Available Commands:")
        print("-" * 20)
        for command, info in self.commands.items():
            print(f"  {command:<8} - {info['description']}")
        print()
        print("Flags:")
        print("  --config <file.toml>  run or sweep configuration")
        print("  --out <dir>           output directory (default from RB_OUT_DIR)")
        print("  --seed <int>          override the configured seed")
        print(f"  --suite <name>        one of {', '.join([*SUITES, 'all'])}")
        print("  --jobs <int>          parallel sweep workers")
        print()
        print("💡 Exit codes: 0 success, 1 configuration error or failed verification, 2 blow-up")
        print()
        return EXIT_OK

    def _out(self, args: argparse.Namespace) -> str:
        return args.out or self.out_dir

    def _load(self, args: argparse.Namespace) -> Optional[SolverConfig]:
        if not args.config:
            print("❌ Please provide a configuration with --config <file.toml>", file=sys.stderr)
            return None
        try:
            config = load_config(args.config)
            if args.seed is not None:
                config = config.with_overrides(seed=args.seed)
            return config
        except ConfigError as e:
            print(f"❌ {e}", file=sys.stderr)
            return None

    def cmd_run(self, args: argparse.Namespace) -> int:
        """Integrate one configuration; exit 0 healthy, 1 configuration error, 2 blow-up."""
        config = self._load(args)
        if config is None:
            return EXIT_CONFIG
        out_dir = self._out(args)
        print(f"🔄 Running n={config.n}, g={config.symbol.family}, t_end={config.t_end:g} -> {out_dir}")
        code, row = execute_run(config, out_dir)
        if code == EXIT_OK:
            print(f"✅ Run complete: {row['records']} records, {row['monitor_violations']} monitor violations")
        elif code == EXIT_BLOWUP:
            print(f"❌ Blow-up after {row['records']} records; partial series written to {out_dir}", file=sys.stderr)
        else:
            print(f"❌ Run failed with a configuration error; see {os.path.join(out_dir, MANIFEST_FILE)}", file=sys.stderr)
        return code

    def cmd_verify(self, args: argparse.Namespace) -> int:
        """
        Run a verification suite and write its reports.

        Args:
            args (argparse.Namespace): --suite (default all), --seed, --out

        Returns:
            int: 0 when every check has zero violations, else 1
        """
        suite = args.suite or "all"
        seed = args.seed if args.seed is not None else 0
        try:
            print(f"🔄 Verifying suite '{suite}' (seed {seed})")
            reports = run_suite(suite, seed=seed, workers=self.threads)
        except ConfigError as e:
            print(f"❌ {e}", file=sys.stderr)
            return EXIT_CONFIG

        total = 0
        for report in reports:
            mark = "✅" if report.passed else "❌"
            print(f"{mark} {report.lemma}: constant {report.empirical_constant:.4g}, {report.violations} violations")
            for line in report.to_lines():
                print(f"    {line}")
            total += report.violations
        paths = write_reports(reports, self._out(args), suite)
        print(f"Reports written to {paths[0]}")
        if total:
            print(f"❌ {total} violations", file=sys.stderr)
            return EXIT_CONFIG
        return EXIT_OK

    def cmd_sweep(self, args: argparse.Namespace) -> int:
        """
        Run every point of a sweep in its own subdirectory and write summary.csv.

        Returns:
            int: 0 unless every run failed; then the largest child exit code
        """
        if not args.config:
            print("❌ Please provide a sweep configuration with --config <file.toml>", file=sys.stderr)
            return EXIT_CONFIG
        try:
            sweep = load_sweep(args.config)
            points = sweep.expand()
        except ConfigError as e:
            print(f"❌ {e}", file=sys.stderr)
            return EXIT_CONFIG

        out_dir = self._out(args)
        tasks = []
        for index, (point, config) in enumerate(points):
            if args.seed is not None:
                config = config.with_overrides(seed=args.seed)
            tasks.append((index, config, os.path.join(out_dir, f"run_{index:03d}")))
        jobs = max(1, args.jobs or 1)
        print(f"🔄 Sweeping {len(tasks)} runs with {jobs} workers -> {out_dir}")

        if jobs == 1:
            results = [_sweep_worker(task) for task in tasks]
        else:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(_sweep_worker, tasks))

        rows = []
        codes = []
        for index, code, row in sorted(results, key=lambda r: r[0]):
            codes.append(code)
            rows.append({"run": index, "directory": f"run_{index:03d}", **_describe_point(points[index][0]), **row})
        os.makedirs(out_dir, exist_ok=True)
        pd.DataFrame(rows).to_csv(os.path.join(out_dir, SUMMARY_FILE), index=False, float_format=FLOAT_FORMAT)

        failed = sum(1 for code in codes if code != EXIT_OK)
        if failed:
            print(f"⚠️  {failed} of {len(codes)} runs did not finish healthy", file=sys.stderr)
        if codes and failed == len(codes):
            return max(codes)
        print(f"✅ Sweep complete: {len(codes) - failed} healthy runs")
        return EXIT_OK

