#!/usr/bin/env python3

import argparse
import logging
import os
import sys
from typing import Any, Dict, List, Optional

from ..core.manager import RunManager
from ..core.operations import bench_run, build_run, verify_run
from ..core.verification import SIZE_FORMS
from ..errors import SpanEmuError
from ..utils import console
from ..utils.config import (
    ALGORITHMS,
    DEFAULT_CONFIG_PATH,
    create_default_config,
    ensure_user_config_dir,
    merge_flags,
)

try:
    from version import __version__
except ImportError:
    __version__ = "0.0.0-unknown"

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INVALID = 2

OPTION_FLAGS = ("word_limit", "round_cap", "delta_cap", "workers", "allow_infeasible", "exhaustive_limit")


def _add_graph_flags(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--graph", metavar="FILE", help="Input graph file")
    source.add_argument(
        "--gen",
        metavar="SPEC",
        help="Generate a graph: path:N, cycle:N, star:LEAVES, grid:R[xC], erdos_renyi:N:P, hypercube:D",
    )
    parser.add_argument(
        "--format",
        choices=("edge-list", "dimacs"),
        help="Format of --graph (default: edge-list)",
    )
    parser.add_argument("--seed", type=int, help="Seed for graph generation and sampling (default: 0)")


def _add_option_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--word-limit", type=int, help="Words per CONGEST message (default: 4)")
    parser.add_argument("--round-cap", type=int, help="Abort a simulation beyond this many rounds")
    parser.add_argument("--delta-cap", type=int, help="Reject schedules whose last delta exceeds this")
    parser.add_argument("--workers", type=int, help="Thread pool size of the simulate mode (default: 4)")
    parser.add_argument(
        "--exhaustive-limit", type=int, help="Largest n checked exhaustively without --force (default: 1024)"
    )
    parser.add_argument(
        "--allow-infeasible",
        action="store_true",
        default=None,
        help="Run spanner schedules whose feasibility inequality fails",
    )


def build_parser() -> argparse.ArgumentParser:
    """Parse command-line arguments"""
    parser = argparse.ArgumentParser(
        prog="spanemu",
        description=f"spanemu v{__version__} - Ultra-sparse near-additive emulators and spanners",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument(
        "--config",
        help=f"Configuration file (default: search for {DEFAULT_CONFIG_PATH})",
    )
    parser.add_argument("--quiet", "-q", action="store_true", help="Only print errors")
    parser.add_argument(
        "--verbose", "-v", action="count", default=0, help="Log progress (-vv for per-phase detail)"
    )
    parser.add_argument("--version", action="store_true", help="Show the version and exit")
    commands = parser.add_subparsers(dest="command")

    build = commands.add_parser("build", help="Build an emulator or spanner")
    build.add_argument("--algo", choices=ALGORITHMS, help="Construction (default: centralized)")
    build.add_argument("--mode", choices=("sim", "seq"), help="Simulation mode of the CONGEST builders")
    _add_graph_flags(build)
    build.add_argument("--eps", help="Target epsilon in (0, 1)")
    build.add_argument("--kappa", help="Sparsity parameter (integer >= 2, or 'ultra')")
    build.add_argument("--rho", help="Round exponent in (1/kappa, 1/2); required for distributed and spanner")
    build.add_argument("--out", metavar="DIR", help="Output directory")
    _add_option_flags(build)

    verify = commands.add_parser("verify", help="Verify a built emulator or spanner")
    _add_graph_flags(verify)
    target = verify.add_mutually_exclusive_group()
    target.add_argument("--emulator", metavar="FILE", help="Emulator edge file")
    target.add_argument("--spanner", metavar="FILE", help="Spanner edge file")
    verify.add_argument("--schedule", metavar="FILE", help="schedule.json written by build")
    verify.add_argument("--transcript", metavar="FILE", help="Build transcript for the structural checks")
    verify.add_argument("--mode", help="exhaustive or sampled:K")
    verify.add_argument("--size-form", choices=SIZE_FORMS, help="Size bound to check (default: exact)")
    verify.add_argument("--size-constant", type=float, help="Constant c for the big_oh size form")
    verify.add_argument("--force", action="store_true", help="Allow exhaustive checks above the size guard")
    verify.add_argument("--out", metavar="DIR", help="Report directory (default: next to the edge file)")
    _add_option_flags(verify)

    bench = commands.add_parser("bench", help="Run a benchmark suite and write a CSV")
    bench.add_argument("--suite", metavar="FILE", help="Suite YAML file")
    bench.add_argument("--out", metavar="DIR", help="Output directory")
    _add_option_flags(bench)

    init = commands.add_parser("init", help="Create a default config file")
    init.add_argument("--path", help="Where to write it (default: ~/.config/spanemu/spanemu.yaml)")
    return parser


def configure_logging(verbosity: int) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity > 1:
        level = logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def handle_init_command(path: Optional[str]) -> int:
    """Create a default config file"""
    if path is None:
        path = os.path.join(ensure_user_config_dir(), DEFAULT_CONFIG_PATH)

    if os.path.isfile(path):
        console.warning(f"Config file already exists at {path}")
        return EXIT_OK

    try:
        create_default_config(path)
        console.success(f"Created default config file at {path}")
    except IOError as e:
        console.error(f"Failed to create config file: {e}")
        return EXIT_FAILED
    return EXIT_OK


def _flags(args: argparse.Namespace, names) -> Dict[str, Any]:
    return {name: getattr(args, name, None) for name in names}


def _apply_option_flags(manager: RunManager, args: argparse.Namespace) -> None:
    manager.options.update(merge_flags(manager.options, _flags(args, OPTION_FLAGS)))


def main(argv: Optional[List[str]] = None) -> int:
    """Run the command-line interface and return the exit code"""
    parser = build_parser()
    args = parser.parse_args(argv)
    console.set_quiet(args.quiet)
    configure_logging(args.verbose)

    if args.version:
        console.info(f"spanemu v{__version__}")
        return EXIT_OK

    if args.command is None:
        parser.print_help()
        return EXIT_INVALID

    if args.command == "init":
        return handle_init_command(args.path)

    try:
        manager = RunManager(args.config)
        if manager.config_path:
            console.info(f"Using configuration file: {manager.config_path}")
        _apply_option_flags(manager, args)

        if args.command == "build":
            params = merge_flags(
                manager.section("build"),
                _flags(args, ("algo", "mode", "graph", "gen", "format", "eps", "kappa", "rho", "seed", "out")),
            )
            build_run(manager, params)
            return EXIT_OK

        if args.command == "verify":
            params = merge_flags(
                manager.section("verify"),
                _flags(
                    args,
                    (
                        "graph",
                        "gen",
                        "format",
                        "seed",
                        "emulator",
                        "spanner",
                        "schedule",
                        "transcript",
                        "mode",
                        "size_form",
                        "size_constant",
                        "force",
                        "out",
                    ),
                ),
            )
            report = verify_run(manager, params)
            return EXIT_OK if report["passed"] else EXIT_FAILED

        if args.command == "bench":
            params = merge_flags(manager.section("bench"), _flags(args, ("suite", "out")))
            if not params.get("suite"):
                console.error("bench needs --suite FILE (or bench.suite in the config file)")
                return EXIT_INVALID
            bench_run(manager, params["suite"], params["out"])
            return EXIT_OK

    except SpanEmuError as e:
        console.error(str(e))
        return e.exit_code
    except FileNotFoundError as e:
        console.error(str(e))
        return EXIT_INVALID
    except Exception as e:
        console.error(f"Error: {e}")
        return EXIT_FAILED

    parser.print_help()
    return EXIT_INVALID


def run_cli(argv: Optional[List[str]] = None) -> None:
    """Entry point used by main.py"""
    sys.exit(main(argv))


if __name__ == "__main__":
    run_cli()
