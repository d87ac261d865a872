#!/usr/bin/env python3

"""
Distributed near-additive spanner

Same phase structure as the emulator build, but every logical edge is
realized by a path of G: superclustering keeps the forest paths from the
absorbed centers to their root, and interconnection traces each shortest
path back along the exploration predecessors.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

from ..core.graph import SPANNER as SPANNER_MODE
from ..core.graph import Edge, Graph, WeightedEdgeSet, normalize_edge
from ..core.schedule import SPANNER, Config, Schedule, spanner_schedule
from ..core.transcript import (
    INTERCONNECTION,
    PATH,
    SUPERCLUSTER,
    SUPERCLUSTERING,
    TREE,
    BuildEvent,
    BuildTranscript,
    PhaseRecord,
)
from ..errors import InvalidConfigError, InvariantError
from .exploration import ExplorationResult, detect_popular, popular_centers
from .forest import ForestNode, grow_forest_and_count
from .kernel import (
    DEFAULT_ROUND_CAP,
    DEFAULT_WORD_LIMIT,
    DEFAULT_WORKERS,
    SIMULATE,
    CongestRunner,
    Inbox,
    Message,
    NodeProgram,
    Outbox,
    SimTranscript,
)
from .ruling import compute_ruling_set

logger = logging.getLogger(__name__)

TRACE = 9


@dataclass(frozen=True)
class PathTrace:
    vertices: Tuple[int, ...]
    purpose: str
    phase: int

    def edges(self) -> List[Edge]:
        return [normalize_edge(a, b) for a, b in zip(self.vertices, self.vertices[1:])]

    def __len__(self) -> int:
        return max(0, len(self.vertices) - 1)

    def validate(self, g: Graph, limit: Optional[int] = None) -> None:
        """Every step must be an edge of g and the path at most limit hops long"""
        for a, b in zip(self.vertices, self.vertices[1:]):
            if not g.has_edge(a, b):
                raise InvariantError(f"trace step ({a}, {b}) is not an edge of G")
        if limit is not None and len(self) > limit:
            raise InvariantError(
                f"phase {self.phase}: {self.purpose} path of {len(self)} hops exceeds {limit}"
            )


@dataclass
class SpannerLedger:
    """New edges each phase contributed, split by purpose"""

    inserted: Dict[int, Counter] = field(default_factory=dict)

    def charge(self, phase: int, purpose: str, count: int) -> None:
        self.inserted.setdefault(phase, Counter())[purpose] += count

    def superclustering(self, phase: int) -> int:
        return self.inserted.get(phase, Counter())[SUPERCLUSTERING]

    def interconnection(self, phase: int) -> int:
        return self.inserted.get(phase, Counter())[INTERCONNECTION]

    def to_dict(self) -> Dict[str, Dict[str, int]]:
        return {str(p): dict(c) for p, c in sorted(self.inserted.items())}


def add_path(
    trace: PathTrace, h: WeightedEdgeSet, ledger: Optional[SpannerLedger] = None
) -> WeightedEdgeSet:
    """Insert every edge of the trace with weight 1; edges already present are skipped"""
    added = sum(1 for a, b in trace.edges() if h.add(a, b, 1))
    if ledger is not None:
        ledger.charge(trace.phase, trace.purpose, added)
    return h


def trace_budget(delta: int, degree_ceil: int) -> int:
    return delta * (degree_ceil + 1)


class TraceProgram(NodeProgram):
    """
    Walks tokens back along exploration predecessors

    A token for origin o held at distance k from o moves during stride
    delta - k, so all tokens advance one hop per stride. Every hop is
    recorded by both of its endpoints.
    """

    def __init__(
        self,
        vertex: int,
        neighbors: Sequence[int],
        explored: ExplorationResult,
        initiate: bool,
        delta: int,
        degree_ceil: int,
    ):
        super().__init__(vertex, neighbors)
        self.table = explored.table
        self.delta = delta
        self.stride = degree_ceil + 1
        self.pending: Dict[int, List[int]] = {}
        self.forwarded: Set[int] = set()
        self.edges: Set[Edge] = set()
        if initiate:
            for entry in explored.others():
                self._enqueue(entry.origin)

    def _enqueue(self, origin: int) -> None:
        if origin in self.forwarded:
            return
        entry = self.table.get(origin)
        if entry is None or entry.pred is None:
            raise InvariantError(f"vertex {self.vertex} has no route towards {origin}")
        self.forwarded.add(origin)
        self.pending.setdefault(entry.distance, []).append(origin)

    def _record(self, outbox: Outbox, a: int, b: int) -> None:
        edge = normalize_edge(a, b)
        self.edges.add(edge)
        outbox.insert(edge[0], edge[1])

    def on_round(self, round_no: int, inbox: Inbox) -> Outbox:
        outbox = Outbox()
        for sender, message in inbox:
            origin = message.words[0]
            self._record(outbox, sender, self.vertex)
            if origin != self.vertex:
                self._enqueue(origin)
        s, offset = divmod(round_no, self.stride)
        k = self.delta - s
        queue = self.pending.get(k)
        if queue:
            queue.sort()
            origin = queue.pop(0)
            pred = self.table[origin].pred
            self._record(outbox, self.vertex, pred)
            outbox.send(pred, Message(TRACE, (origin,)))
            if queue and offset == self.stride - 1:
                raise InvariantError(f"vertex {self.vertex} could not forward {len(queue)} tokens in time")
        return outbox

    def next_wakeup(self, after: int) -> Optional[int]:
        best = None
        for k, queue in self.pending.items():
            if not queue:
                continue
            start = (self.delta - k) * self.stride
            nxt = start if start > after else after + 1
            if best is None or nxt < best:
                best = nxt
        return best

    def result(self) -> Set[Edge]:
        return self.edges


def trace_paths(
    runner: CongestRunner,
    explored: Dict[int, ExplorationResult],
    initiators: Sequence[int],
    delta: int,
    degree_ceil: int,
    label: str = "trace",
) -> Dict[int, Set[Edge]]:
    initiator_set = frozenset(initiators)

    def factory(v: int, neighbors: Sequence[int]) -> TraceProgram:
        return TraceProgram(v, neighbors, explored[v], v in initiator_set, delta, degree_ceil)

    return runner.run(label, factory, trace_budget(delta, degree_ceil))


def interconnection_traces(
    explored: Dict[int, ExplorationResult], initiators: Sequence[int], phase: int
) -> List[PathTrace]:
    """Replay the predecessor chains the trace tokens follow"""
    traces = []
    for c in sorted(initiators):
        for entry in explored[c].others():
            path = [c]
            while path[-1] != entry.origin:
                path.append(explored[path[-1]].table[entry.origin].pred)
            traces.append(PathTrace(tuple(path), INTERCONNECTION, phase))
    return traces


def forest_traces(
    forest: Dict[int, ForestNode], absorbed: Sequence[int], phase: int
) -> List[PathTrace]:
    """Tree paths from each absorbed center up to its root"""
    traces = []
    for c in sorted(absorbed):
        path = [c]
        while forest[path[-1]].parent is not None:
            path.append(forest[path[-1]].parent)
        if len(path) > 1:
            traces.append(PathTrace(tuple(path), SUPERCLUSTERING, phase))
    return traces


def _apply(
    g: Graph,
    h: WeightedEdgeSet,
    t: BuildTranscript,
    ledger: SpannerLedger,
    traces: List[PathTrace],
    local_edges: Set[Edge],
    limit: int,
) -> None:
    traced: Set[Edge] = set()
    for trace in traces:
        trace.validate(g, limit)
        before = len(h)
        add_path(trace, h, ledger)
        traced.update(trace.edges())
        t.record(
            BuildEvent(
                PATH,
                trace.phase,
                trace.vertices[0],
                target=trace.vertices[-1],
                weight=len(trace),
                members=trace.vertices,
                purpose=trace.purpose,
                inserted=len(h) - before,
            )
        )
    if traced != local_edges:
        raise InvariantError(
            f"traced paths and node-local insertions disagree on {len(traced ^ local_edges)} edges"
        )


def _knowledge(t: BuildTranscript, outputs: Dict[int, Set[Edge]]) -> Set[Edge]:
    edges: Set[Edge] = set()
    for vertex, known in outputs.items():
        for u, v in known:
            t.learn(vertex, u, v, 1)
        edges.update(known)
    return edges


def build_spanner_distributed(
    g: Graph,
    cfg: Config,
    mode: str = SIMULATE,
    schedule: Optional[Schedule] = None,
    word_limit: int = DEFAULT_WORD_LIMIT,
    round_cap: int = DEFAULT_ROUND_CAP,
    workers: int = DEFAULT_WORKERS,
) -> Tuple[WeightedEdgeSet, SimTranscript, BuildTranscript]:
    """Build a spanner of g; returns H, the round transcript and the build transcript (with a ledger)"""
    if cfg.n != g.n:
        raise InvalidConfigError(f"config is for n={cfg.n} but the graph has n={g.n}")
    s = schedule or spanner_schedule(cfg)
    if not s.feasible:
        logger.warning("spanner schedule is infeasible, size bound does not apply: %s", s.infeasibility)
    runner = CongestRunner(g, mode, word_limit, round_cap, workers)
    t = BuildTranscript(SPANNER, g.n, s.to_dict())
    t.ledger = SpannerLedger()
    h = WeightedEdgeSet(SPANNER_MODE, g)
    cluster_of = {t.clusters[c].center: c for c in t.singletons()}

    for i in s.phases():
        first_stage = len(runner.transcript.stages)
        centers = sorted(cluster_of)
        record = PhaseRecord(phase=i, clusters=sorted(cluster_of.values()))
        deg, delta, dc = s.deg[i], s.delta[i], s.degree_ceil(i)
        logger.debug("phase %d: %d clusters, deg=%s, delta=%d", i, len(centers), deg, delta)
        explored = detect_popular(runner, centers, delta, deg, f"phase{i}/explore")
        record.popular = popular_centers(explored)
        next_clusters: Dict[int, int] = {}

        if i < s.ell:
            record.ruling = compute_ruling_set(
                runner, record.popular, 2 * delta, s.ruling_stages, f"phase{i}/ruling"
            )
            forest, counted = grow_forest_and_count(
                runner, record.ruling, centers, s.forest_depth(i), f"phase{i}"
            )
            record.forest_edges = sum(1 for node in forest.values() if node.parent is not None)
            trees: Dict[int, List[int]] = {}
            for c in centers:
                if forest[c].in_forest:
                    trees.setdefault(forest[c].root, []).append(c)
            for root, olds in sorted(trees.items()):
                children = [cluster_of[o] for o in olds]
                members = frozenset().union(*(t.clusters[x].members for x in children))
                cluster = t.new_cluster(root, members, i + 1, children, kind=TREE)
                next_clusters[root] = cluster.id
                t.record(
                    BuildEvent(SUPERCLUSTER, i, root, cluster=cluster.id, members=tuple(o for o in olds if o != root))
                )
            local = _knowledge(t, {v: edges for v, (_, edges) in counted.items()})
            absorbed = [c for c in centers if forest[c].in_forest]
            before = len(h)
            _apply(g, h, t, t.ledger, forest_traces(forest, absorbed, i), local, s.forest_depth(i))
            record.superclustering_edges = len(h) - before
            unclustered = [c for c in centers if not forest[c].in_forest]
        else:
            if record.popular:
                raise InvariantError(f"centers {record.popular[:5]} are popular in the last phase")
            unclustered = centers

        if any(explored[c].popular for c in unclustered):
            raise InvariantError("an unclustered center is popular")
        traced = trace_paths(runner, explored, unclustered, delta, dc, f"phase{i}/trace")
        local = _knowledge(t, traced)
        before = len(h)
        _apply(g, h, t, t.ledger, interconnection_traces(explored, unclustered, i), local, delta)
        record.interconnection_edges = len(h) - before

        record.unclustered = sorted(cluster_of[c] for c in unclustered)
        record.superclusters = sorted(next_clusters.values())
        record.rounds = {st.label: [st.rounds, st.budget] for st in runner.transcript.stages[first_stage:]}
        t.phases.append(record)
        cluster_of = next_clusters

    if cluster_of:
        raise InvariantError(f"{len(cluster_of)} clusters survive the last phase")
    for phase in s.phases():
        if t.ledger.superclustering(phase) > max(0, g.n - 1):
            raise InvariantError(f"phase {phase} added more than n - 1 superclustering edges")
    logger.info("distributed spanner: %d edges in %d rounds", len(h), runner.rounds)
    return h, runner.transcript, t
