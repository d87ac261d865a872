#!/usr/bin/env python3

"""
spanemu - Ultra-sparse near-additive emulators and spanners

Usage:
  spanemu [--config FILE] [--quiet] [-v] <command> [options]

Commands:
  build    Build an emulator or spanner
             --algo centralized|distributed|spanner  --mode sim|seq
             --graph FILE [--format edge-list|dimacs] | --gen SPEC
             --eps E --kappa K|ultra [--rho R] [--seed S] [--out DIR]
  verify   Check H against G and its schedule
             --graph FILE | --gen SPEC  --emulator FILE | --spanner FILE
             --schedule FILE [--transcript FILE] [--mode exhaustive|sampled:K]
  bench    Run a suite of builds and write bench.csv
             --suite FILE [--out DIR]
  init     Create a default config file in ~/.config/spanemu/

Exit codes:
  0 success, 1 verification failure or internal error,
  2 invalid configuration or input, 3 infeasible schedule

Configuration file is searched in the following locations:
1. Specified path via --config
2. Current directory (spanemu.yaml)
3. Same directory as the executable
4. User config directory (~/.config/spanemu/spanemu.yaml)
5. System-wide location (/etc/spanemu/spanemu.yaml)
"""

from spanemu import run_cli

if __name__ == "__main__":
    run_cli()
