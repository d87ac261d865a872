#!/usr/bin/env python3

import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional, Union

from ..congest.emulator import build_emulator_distributed
from ..congest.kernel import MODES, SimTranscript
from ..congest.spanner import build_spanner_distributed
from ..errors import InvalidConfigError
from ..utils import console
from ..utils.config import ConfigDict, find_config_file, load_config
from .centralized import build_emulator
from .graph import GRAPH_FORMATS, Graph, WeightedEdgeSet, generate_graph, load_graph, parse_gen_spec
from .schedule import (
    CENTRALIZED,
    DISTRIBUTED,
    SCHEDULE_KINDS,
    Config,
    Schedule,
    StretchBudget,
    make_schedule,
    stretch_budget,
    ultra_sparse_kappa,
)
from .transcript import BuildTranscript

logger = logging.getLogger(__name__)

ULTRA = "ultra"


@dataclass
class BuildResult:
    algo: str
    mode: Optional[str]
    graph: Graph
    schedule: Schedule
    budget: StretchBudget
    h: WeightedEdgeSet
    transcript: BuildTranscript
    sim: Optional[SimTranscript] = None


class RunManager:
    """Holds the run configuration and turns it into graphs, schedules and builds"""

    def __init__(self, config_path: Optional[str] = None):
        self.config_path = find_config_file(config_path)
        self.config = self._load_config()

    def _load_config(self) -> ConfigDict:
        """Load the configuration file, or the defaults when there is none"""
        try:
            return load_config(self.config_path)
        except FileNotFoundError as e:
            console.error(str(e))
            console.warning("Run 'spanemu init' to create a default config file")
            raise

    @property
    def options(self) -> Dict[str, Any]:
        return self.config["options"]

    def section(self, name: str) -> Dict[str, Any]:
        return self.config[name]

    def load_graph(
        self,
        graph_path: Optional[str] = None,
        fmt: str = "edge-list",
        gen: Optional[str] = None,
        seed: int = 0,
    ) -> Graph:
        """Read a graph file or generate one from a spec such as "grid:4x6" """
        if (graph_path is None) == (gen is None):
            raise InvalidConfigError("give exactly one of --graph and --gen")
        if gen is not None:
            family, params = parse_gen_spec(gen)
            logger.info("generating %s with seed %d", gen, seed)
            return generate_graph(family, params, seed)
        if fmt not in GRAPH_FORMATS:
            raise InvalidConfigError(f"unknown graph format: {fmt}")
        try:
            with open(graph_path, "rb") as f:
                return load_graph(f, fmt)
        except FileNotFoundError:
            raise FileNotFoundError(f"Graph file not found at: {graph_path}")

    def make_config(
        self,
        n: int,
        eps: Any,
        kappa: Union[int, str],
        rho: Any = None,
    ) -> Config:
        """Schedule configuration; kappa may be "ultra" for the n + o(n) regime"""
        if kappa == ULTRA:
            kappa = ultra_sparse_kappa(n)
            console.note(f"Ultra-sparse regime: kappa = {kappa}")
        else:
            try:
                kappa = int(kappa)
            except (TypeError, ValueError):
                raise InvalidConfigError(f"kappa must be an integer or '{ULTRA}', got {kappa!r}")
        return Config(
            n=n,
            eps_user=eps,
            kappa=kappa,
            rho=rho,
            delta_cap=self.options.get("delta_cap"),
            allow_infeasible=bool(self.options.get("allow_infeasible", False)),
        )

    def build(self, g: Graph, algo: str, cfg: Config, mode: Optional[str] = None) -> BuildResult:
        """Run one of the three constructions on g"""
        if algo not in SCHEDULE_KINDS:
            raise InvalidConfigError(f"unknown algorithm: {algo}")
        s = make_schedule(algo, cfg)
        budget = stretch_budget(s)
        if algo == CENTRALIZED:
            h, t = build_emulator(g, cfg, s)
            return BuildResult(algo, None, g, s, budget, h, t)

        if mode not in MODES:
            raise InvalidConfigError(f"unknown simulation mode: {mode}")
        kwargs = dict(
            mode=mode,
            schedule=s,
            word_limit=int(self.options["word_limit"]),
            round_cap=int(self.options["round_cap"]),
            workers=int(self.options["workers"]),
        )
        if algo == DISTRIBUTED:
            h, sim, t = build_emulator_distributed(g, cfg, **kwargs)
        else:
            if not s.feasible:
                console.warning(f"Spanner schedule is infeasible at this scale: {s.infeasibility}")
            h, sim, t = build_spanner_distributed(g, cfg, **kwargs)
        return BuildResult(algo, mode, g, s, budget, h, t, sim)

    def stretch_mode(self, n: int, requested: Optional[str] = None) -> str:
        """exhaustive up to exhaustive_limit vertices, sampled above unless asked otherwise"""
        if requested:
            return requested
        if n <= int(self.options["exhaustive_limit"]):
            return "exhaustive"
        return f"sampled:{int(self.options['sample_sources'])}"
