#!/usr/bin/env python3

"""
spanemu - Ultra-sparse near-additive emulators and spanners
Features:
- Centralized superclustering-and-interconnection emulator with buffer sets
- CONGEST-model emulator and spanner on a bandwidth-enforcing round simulator
- Independent size, stretch, soundness and structure oracles
- Simple YAML configuration mirroring the command-line flags
"""

try:
    from version import __version__
except ImportError:
    __version__ = "0.0.0-unknown"

from .core.graph import Graph, WeightedEdgeSet, generate_graph, load_graph
from .core.schedule import Config, make_schedule, stretch_budget
from .core.centralized import build_emulator
from .congest.emulator import build_emulator_distributed
from .congest.spanner import build_spanner_distributed
from .core.verification import verify_size, verify_soundness, verify_stretch, verify_structure
from .cli.cli import run_cli
