#!/usr/bin/env python3

import itertools
import os
from typing import Any, Dict, List, Optional, Tuple

import yaml

from ..errors import InvalidConfigError
from ..utils import console
from ..utils.output import (
    BENCH_FILE,
    BUILD_TRANSCRIPT_FILE,
    GRAPH_FILE,
    REPORT_FILE,
    SCHEDULE_FILE,
    SIM_TRANSCRIPT_FILE,
    SUMMARY_FILE,
    edge_file_name,
    read_json,
    read_text,
    write_csv,
    write_json,
    write_lines,
    write_text,
)
from .centralized import charge_report
from .graph import EMULATOR, SPANNER as SPANNER_MODE
from .graph import WeightedEdgeSet, write_graph
from .manager import BuildResult, RunManager
from .schedule import CENTRALIZED, SPANNER, Power, schedule_from_dict, stretch_budget
from .transcript import SCHEMA_VERSION, BuildTranscript, PhaseRecord
from .verification import (
    EXACT,
    EXHAUSTIVE,
    SAMPLED,
    build_report,
    ruling_round_constant,
    verify_bandwidth,
    verify_size,
    verify_soundness,
    verify_stretch,
    verify_structure,
)

BENCH_COLUMNS = (
    "graph",
    "algo",
    "mode",
    "seed",
    "n",
    "m",
    "kappa",
    "rho",
    "eps",
    "edges",
    "size_ratio",
    "rounds",
    "rounds_ratio",
    "max_ratio",
    "max_additive_slack",
    "violations",
)

# Suite keys that may hold a list of values; the grid is their product
SUITE_AXES = ("gen", "algo", "mode", "kappa", "eps", "rho", "seed")


def parse_stretch_mode(text: str) -> Tuple[str, Optional[int]]:
    """"exhaustive" or "sampled:K" """
    if text == EXHAUSTIVE:
        return EXHAUSTIVE, None
    name, _, count = text.partition(":")
    if name == SAMPLED:
        try:
            k = int(count) if count else None
        except ValueError:
            k = -1
        if k is None or k >= 1:
            return SAMPLED, k
    raise InvalidConfigError(f"invalid stretch mode {text!r} (expected exhaustive or sampled:K)")


def phase_stats(record: PhaseRecord) -> Dict[str, Any]:
    return {
        "phase": record.phase,
        "clusters": len(record.clusters),
        "unclustered": len(record.unclustered),
        "popular": len(record.popular),
        "ruling": len(record.ruling),
        "superclusters": len(record.superclusters),
        "hubs": record.hubs,
        "buffered": record.buffered,
        "forest_edges": record.forest_edges,
        "superclustering_edges": record.superclustering_edges,
        "interconnection_edges": record.interconnection_edges,
        "rounds": record.rounds,
    }


def rounds_ratio(result: BuildResult) -> Optional[float]:
    """rounds / (beta * n^rho)"""
    s = result.schedule
    if result.sim is None or s.rho is None or result.budget.beta_final == 0:
        return None
    return result.sim.rounds_executed / (result.budget.beta_final * Power(s.n, s.rho).value)


def build_summary(result: BuildResult, source: str, seed: int, word_limit: int) -> Dict[str, Any]:
    """The summary.json document of one build"""
    g, h, s = result.graph, result.h, result.schedule
    size = verify_size(len(h), g.n, s.kappa, EXACT)
    summary: Dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "algo": result.algo,
        "mode": result.mode,
        "graph": source,
        "seed": seed,
        "n": g.n,
        "m": g.m,
        "kappa": s.kappa,
        "eps": str(s.eps_user),
        "rho": None if s.rho is None else str(s.rho),
        "edges": len(h),
        "size": size.to_dict(),
        "stretch_budget": {**result.budget.to_dict(), "user_target_alpha": float(1 + s.eps_user)},
        "schedule_feasible": s.feasible,
        "phases": [phase_stats(record) for record in result.transcript.phases],
    }
    if result.sim is not None:
        summary["rounds"] = result.sim.rounds_executed
        summary["rounds_ratio"] = rounds_ratio(result)
        summary["bandwidth"] = verify_bandwidth(result.sim, word_limit).to_dict()
        summary["ruling_round_constant"] = ruling_round_constant(result.transcript, s)
    if result.algo == CENTRALIZED:
        charges = charge_report(result.transcript, s)
        summary["charges"] = {
            "total": charges.total,
            "edges": charges.edges,
            "overloaded": charges.overloaded,
            "balanced": charges.balanced,
        }
    if result.algo == SPANNER:
        summary["ledger"] = result.transcript.ledger.to_dict()
        summary["forest_bound"] = max(0, g.n - 1)
        if not s.feasible:
            summary["size_guarantee"] = "not covered: " + s.infeasibility
    return summary


def build_run(manager: RunManager, params: Dict[str, Any]) -> Dict[str, Any]:
    """Build H, write every artifact into params["out"] and return the summary"""
    g = manager.load_graph(params.get("graph"), params["format"], params.get("gen"), params["seed"])
    source = params.get("gen") or params.get("graph")
    cfg = manager.make_config(g.n, params["eps"], params["kappa"], params.get("rho"))
    algo = params["algo"]

    console.info(
        f"🔧 Building {console.highlight(algo)} on {source} (n={g.n}, m={g.m}, kappa={cfg.kappa})"
    )
    result = manager.build(g, algo, cfg, params.get("mode"))

    out = params["out"]
    write_text(out, GRAPH_FILE, write_graph(g))
    write_text(out, edge_file_name(result.h.mode), result.h.to_text(g.n))
    schedule_doc = result.schedule.to_dict()
    schedule_doc["lines"] = result.schedule.report_lines()
    schedule_doc["stretch_budget"] = result.budget.to_dict()
    write_json(out, SCHEDULE_FILE, schedule_doc)
    write_lines(out, BUILD_TRANSCRIPT_FILE, result.transcript.to_jsonl())
    if result.sim is not None:
        write_lines(out, SIM_TRANSCRIPT_FILE, result.sim.to_jsonl())
    summary = build_summary(result, source, params["seed"], int(manager.options["word_limit"]))
    write_json(out, SUMMARY_FILE, summary)

    size = summary["size"]
    console.success(
        f"|H| = {len(result.h)} edges (n^(1+1/kappa) = {size['bound']:.2f}, ratio {size['constant']:.3f})"
    )
    if result.sim is not None:
        console.info(
            f"   Rounds: {result.sim.rounds_executed}, messages: {result.sim.messages_total}, "
            f"max edge load: {result.sim.max_edge_load}"
        )
    console.info(
        f"   Stretch budget: alpha = {float(result.budget.alpha_final):.6g}, beta = {result.budget.beta_final}"
    )
    if not size["passed"]:
        console.warning("Edge count exceeds n^(1+1/kappa)")
    console.info(f"   Output written to {os.path.abspath(out)}")
    return summary


def _load_edge_set(params: Dict[str, Any]) -> Tuple[str, int, WeightedEdgeSet]:
    emulator, spanner = params.get("emulator"), params.get("spanner")
    if (emulator is None) == (spanner is None):
        raise InvalidConfigError("give exactly one of --emulator and --spanner")
    path = emulator or spanner
    n, h = WeightedEdgeSet.from_text(read_text(path))
    expected = EMULATOR if emulator else SPANNER_MODE
    if h.mode != expected:
        raise InvalidConfigError(f"{path} holds a {h.mode}, expected a {expected}")
    return path, n, h


def verify_run(manager: RunManager, params: Dict[str, Any]) -> Dict[str, Any]:
    """Check a built H against G and its schedule; returns the report"""
    g = manager.load_graph(params.get("graph"), params["format"], params.get("gen"), params["seed"])
    path, n, h = _load_edge_set(params)
    if n != g.n:
        raise InvalidConfigError(f"{path} is for n={n} but the graph has n={g.n}")
    if not params.get("schedule"):
        raise InvalidConfigError("--schedule is required")
    s = schedule_from_dict(read_json(params["schedule"]), manager.options.get("delta_cap"))
    if s.n != g.n:
        raise InvalidConfigError(f"schedule is for n={s.n} but the graph has n={g.n}")
    budget = stretch_budget(s)

    mode, samples = parse_stretch_mode(manager.stretch_mode(g.n, params.get("mode")))
    console.info(f"🔍 Verifying {path} ({len(h)} edges, {mode} stretch check)")
    stretch = verify_stretch(
        g,
        h,
        budget,
        mode,
        samples or int(manager.options["sample_sources"]),
        params["seed"],
        int(manager.options["exhaustive_limit"]),
        bool(params.get("force")),
    )
    size = verify_size(len(h), g.n, s.kappa, params.get("size_form") or EXACT, params.get("size_constant"))
    soundness = verify_soundness(g, h, exact=s.kind == CENTRALIZED)

    structure = None
    transcript_matches = None
    if params.get("transcript"):
        t = BuildTranscript.from_jsonl(read_text(params["transcript"]).splitlines())
        structure = verify_structure(t, g, s)
        transcript_matches = t.edge_set() == h

    report = build_report(size, stretch, structure, soundness, s, budget)
    if transcript_matches is not None:
        report["transcript_matches_h"] = transcript_matches
        report["passed"] = report["passed"] and transcript_matches
    out = params.get("out") or os.path.dirname(os.path.abspath(path))
    write_json(out, REPORT_FILE, report)
    _print_report(report, stretch, structure)
    console.info(f"   Report written to {os.path.join(os.path.abspath(out), REPORT_FILE)}")
    return report


def _print_report(report: Dict[str, Any], stretch, structure) -> None:
    size = report["size"]
    mark = console.success if size["passed"] else console.error
    mark(f"Size ({size['form']}): {size['edges']} edges, bound {size['bound']:.2f}")

    if stretch.passed:
        console.success(
            f"Stretch: {stretch.pairs} pairs, max ratio {stretch.max_ratio:.4f}, "
            f"max additive slack {stretch.max_additive_slack_used:.4g}"
        )
    else:
        console.error(f"Stretch: {stretch.violation_count} violating pairs")
        for v in stretch.violations[:5]:
            console.error(f"  witness ({v.u}, {v.v}): d_G = {v.d_g}, d_H = {v.d_h} [{v.kind}] path {v.path}")

    soundness = report.get("soundness")
    if soundness is not None:
        if soundness["passed"]:
            console.success(f"Soundness: {soundness['checked']} edges")
        else:
            console.error(f"Soundness: {len(soundness['failures'])} bad edges")
            for failure in soundness["failures"][:5]:
                console.error(f"  {failure}")

    if structure is not None:
        for name, check in structure.checks.items():
            if check.status == "pass":
                console.success(f"{name}")
            elif check.status == "skipped":
                console.info(f"   {name}: skipped")
            else:
                console.error(f"{name}: {check.details[0] if check.details else 'failed'}")
    if report.get("transcript_matches_h") is False:
        console.error("The transcript's edges differ from the given H")


def _as_list(value: Any) -> List[Any]:
    return list(value) if isinstance(value, (list, tuple)) else [value]


def expand_suite(suite: Dict[str, Any], defaults: Dict[str, Any]) -> List[Dict[str, Any]]:
    """One run per point of each entry's parameter grid, in declaration order"""
    runs = suite.get("runs") if isinstance(suite, dict) else None
    if not isinstance(runs, list) or not runs:
        raise InvalidConfigError("a bench suite needs a non-empty 'runs' list")
    expanded = []
    for entry in runs:
        if not isinstance(entry, dict) or "gen" not in entry:
            raise InvalidConfigError(f"bench entry needs a 'gen' spec: {entry!r}")
        unknown = sorted(set(entry) - set(SUITE_AXES))
        if unknown:
            raise InvalidConfigError(f"unknown bench keys: {', '.join(unknown)}")
        axes = [_as_list(entry.get(key, defaults.get(key))) for key in SUITE_AXES]
        for values in itertools.product(*axes):
            expanded.append(dict(zip(SUITE_AXES, values)))
    return expanded


def bench_run(manager: RunManager, suite_path: str, out: str) -> List[Dict[str, Any]]:
    """Run a suite and write one CSV row per run"""
    try:
        with open(suite_path, "r") as f:
            suite = yaml.safe_load(f)
    except FileNotFoundError:
        raise FileNotFoundError(f"Suite file not found at: {suite_path}")
    except yaml.YAMLError as e:
        raise InvalidConfigError(f"Error parsing YAML: {e}")

    rows = []
    runs = expand_suite(suite, manager.section("build"))
    console.info(f"📊 Running {len(runs)} bench configurations from {suite_path}")
    for run in runs:
        g = manager.load_graph(gen=run["gen"], seed=run["seed"])
        cfg = manager.make_config(g.n, run["eps"], run["kappa"], run["rho"])
        result = manager.build(g, run["algo"], cfg, run["mode"])
        mode, samples = parse_stretch_mode(manager.stretch_mode(g.n))
        stretch = verify_stretch(
            g,
            result.h,
            result.budget,
            mode,
            samples or int(manager.options["sample_sources"]),
            run["seed"],
            int(manager.options["exhaustive_limit"]),
        )
        size = verify_size(len(result.h), g.n, cfg.kappa, EXACT)
        row = {
            "graph": run["gen"],
            "algo": run["algo"],
            "mode": result.mode or "",
            "seed": run["seed"],
            "n": g.n,
            "m": g.m,
            "kappa": cfg.kappa,
            "rho": "" if cfg.rho is None else float(cfg.rho),
            "eps": float(cfg.eps_user),
            "edges": len(result.h),
            "size_ratio": round(size.constant, 6),
            "rounds": "" if result.sim is None else result.sim.rounds_executed,
            "rounds_ratio": "" if rounds_ratio(result) is None else round(rounds_ratio(result), 6),
            "max_ratio": round(stretch.max_ratio, 6),
            "max_additive_slack": round(stretch.max_additive_slack_used, 6),
            "violations": stretch.violation_count,
        }
        rows.append(row)
        mark = console.success if stretch.passed and size.passed else console.warning
        mark(f"{run['gen']} {run['algo']} kappa={cfg.kappa}: |H| = {len(result.h)}, ratio {row['size_ratio']}")

    path = write_csv(out, BENCH_FILE, BENCH_COLUMNS, rows)
    console.info(f"   CSV written to {os.path.abspath(path)}")
    return rows
