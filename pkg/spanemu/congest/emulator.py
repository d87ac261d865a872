#!/usr/bin/env python3

"""Distributed emulator construction on the CONGEST kernel"""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

from ..core.graph import EMULATOR, Edge, Graph, WeightedEdgeSet, normalize_edge
from ..core.schedule import DISTRIBUTED, Config, Power, Schedule, distributed_schedule
from ..core.transcript import (
    INTERCONNECT,
    SUPERCLUSTER,
    SUPERCLUSTER_EDGE,
    BuildEvent,
    BuildTranscript,
    PhaseRecord,
    insert_edge,
)
from ..errors import InvalidConfigError, InvariantError
from .exploration import ExplorationResult, detect_popular, popular_centers
from .forest import SuperclusterOutcome, grow_forest_and_supercluster
from .kernel import (
    DEFAULT_ROUND_CAP,
    DEFAULT_WORD_LIMIT,
    DEFAULT_WORKERS,
    SIMULATE,
    CongestRunner,
    SimTranscript,
)
from .ruling import compute_ruling_set

logger = logging.getLogger(__name__)

Knowledge = Dict[int, Dict[Edge, int]]


def interconnect(
    runner: CongestRunner,
    unclustered: Sequence[int],
    delta: int,
    deg: Power,
    first_run: Optional[Dict[int, ExplorationResult]] = None,
    centers: Sequence[int] = (),
    label: str = "interconnect",
) -> Knowledge:
    """
    Connect every unclustered center to all centers within delta

    Each unclustered center takes its edges from its complete table of the
    popularity run (first_run). A second exploration sourced at the
    unclustered centers alone tells the other endpoint. Without first_run
    the single exploration from the unclustered centers serves both sides;
    that is the last-phase variant, where every center is unclustered.
    """
    knowledge: Knowledge = {}
    if not unclustered:
        return knowledge
    second = detect_popular(runner, unclustered, delta, deg, label)
    popular = popular_centers(second)
    if popular:
        raise InvariantError(f"unclustered centers {popular[:5]} are popular")
    tables = first_run if first_run is not None else second

    for c in sorted(unclustered):
        for entry in tables[c].others():
            knowledge.setdefault(c, {})[normalize_edge(c, entry.origin)] = entry.distance
    for c in sorted(set(centers) | set(unclustered)):
        for entry in second[c].others():
            knowledge.setdefault(c, {})[normalize_edge(c, entry.origin)] = entry.distance

    for c in sorted(unclustered):
        for entry in tables[c].others():
            edge = normalize_edge(c, entry.origin)
            if knowledge.get(entry.origin, {}).get(edge) != entry.distance:
                raise InvariantError(
                    f"center {entry.origin} did not learn edge {edge} of weight {entry.distance}"
                )
    return knowledge


def _stage_rounds(runner: CongestRunner, first_stage: int) -> Dict[str, List[int]]:
    return {s.label: [s.rounds, s.budget] for s in runner.transcript.stages[first_stage:]}


def _record_interconnection(
    h: WeightedEdgeSet,
    t: BuildTranscript,
    phase: int,
    unclustered: Sequence[int],
    knowledge: Knowledge,
) -> int:
    added = 0
    for c in sorted(unclustered):
        for edge, weight in sorted(knowledge.get(c, {}).items()):
            other = edge[0] if edge[1] == c else edge[1]
            if h.weight(c, other) is not None:
                continue
            insert_edge(h, t, INTERCONNECT, phase, c, other, weight, charged=c)
            added += 1
    return added


def _record_superclusters(
    h: WeightedEdgeSet,
    t: BuildTranscript,
    phase: int,
    cluster_of: Dict[int, int],
    outcome: SuperclusterOutcome,
) -> Tuple[Dict[int, int], int]:
    """Create the next phase's clusters and their edges; returns center -> cluster id"""
    next_clusters: Dict[int, int] = {}
    added = 0
    for new_center, olds in sorted(outcome.absorbed_by().items()):
        children = [cluster_of[o] for o in olds]
        members = frozenset().union(*(t.clusters[c].members for c in children))
        cluster = t.new_cluster(new_center, members, phase + 1, children, kind=outcome.kinds[new_center])
        next_clusters[new_center] = cluster.id
        absorbed = tuple(o for o in olds if o != new_center)
        t.record(BuildEvent(SUPERCLUSTER, phase, new_center, cluster=cluster.id, members=absorbed))
        for o in absorbed:
            weight = outcome.knowledge.get(new_center, {}).get(normalize_edge(new_center, o))
            if weight is None:
                raise InvariantError(f"center {new_center} does not know its edge to {o}")
            insert_edge(h, t, SUPERCLUSTER_EDGE, phase, new_center, o, weight, charged=o)
            added += 1
    return next_clusters, added


def _learn_all(t: BuildTranscript, knowledge: Knowledge) -> None:
    for vertex, known in knowledge.items():
        for (u, v), weight in known.items():
            t.learn(vertex, u, v, weight)


def build_emulator_distributed(
    g: Graph,
    cfg: Config,
    mode: str = SIMULATE,
    schedule: Optional[Schedule] = None,
    word_limit: int = DEFAULT_WORD_LIMIT,
    round_cap: int = DEFAULT_ROUND_CAP,
    workers: int = DEFAULT_WORKERS,
) -> Tuple[WeightedEdgeSet, SimTranscript, BuildTranscript]:
    """Build the emulator of g with node programs only; every edge is known to both endpoints"""
    if cfg.n != g.n:
        raise InvalidConfigError(f"config is for n={cfg.n} but the graph has n={g.n}")
    s = schedule or distributed_schedule(cfg)
    runner = CongestRunner(g, mode, word_limit, round_cap, workers)
    t = BuildTranscript(DISTRIBUTED, g.n, s.to_dict())
    h = WeightedEdgeSet(EMULATOR)
    cluster_of = {t.clusters[c].center: c for c in t.singletons()}

    for i in s.phases():
        first_stage = len(runner.transcript.stages)
        centers = sorted(cluster_of)
        record = PhaseRecord(phase=i, clusters=sorted(cluster_of.values()))
        deg, delta = s.deg[i], s.delta[i]
        logger.debug("phase %d: %d clusters, deg=%s, delta=%d", i, len(centers), deg, delta)

        if i < s.ell:
            explored = detect_popular(runner, centers, delta, deg, f"phase{i}/explore")
            record.popular = popular_centers(explored)
            record.ruling = compute_ruling_set(
                runner, record.popular, 2 * delta, s.ruling_stages, f"phase{i}/ruling"
            )
            outcome = grow_forest_and_supercluster(
                runner, record.ruling, centers, s.forest_depth(i), s.degree_ceil(i), f"phase{i}"
            )
            record.hubs = outcome.hubs
            record.forest_edges = outcome.forest_edges
            _learn_all(t, outcome.knowledge)
            next_clusters, record.superclustering_edges = _record_superclusters(
                h, t, i, cluster_of, outcome
            )
            unclustered = [c for c in centers if c not in outcome.new_center_of]
            knowledge = interconnect(
                runner, unclustered, delta, deg, explored, centers, f"phase{i}/interconnect"
            )
        else:
            next_clusters = {}
            unclustered = centers
            knowledge = interconnect(runner, centers, delta, deg, None, centers, f"phase{i}/interconnect")

        _learn_all(t, knowledge)
        record.unclustered = sorted(cluster_of[c] for c in unclustered)
        record.interconnection_edges = _record_interconnection(h, t, i, unclustered, knowledge)
        record.superclusters = sorted(next_clusters.values())
        record.rounds = _stage_rounds(runner, first_stage)
        t.phases.append(record)
        cluster_of = next_clusters

    if cluster_of:
        raise InvariantError(f"{len(cluster_of)} clusters survive the last phase")
    if len(h) ** cfg.kappa > g.n ** (cfg.kappa + 1):
        raise InvariantError(f"|H| = {len(h)} exceeds n^(1+1/kappa)")
    logger.info("distributed emulator: %d edges in %d rounds", len(h), runner.rounds)
    return h, runner.transcript, t
