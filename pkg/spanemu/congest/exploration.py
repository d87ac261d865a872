#!/usr/bin/env python3

"""
Bounded-degree exploration from cluster centers

Runs delta strides of D + 1 rounds. In stride k every vertex forwards, one
per round, the (at most D + 1 lowest-ID) centers it first heard of at
distance k. A center that hears of at least deg other centers is popular;
any vertex that ends with fewer than deg entries knows every source within
delta, at its exact distance.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from ..core.graph import Graph, bfs_distances
from ..core.schedule import Power
from .kernel import CongestRunner, Inbox, Message, NodeProgram, Outbox

EXPLORE = 1


@dataclass(frozen=True)
class ExplorationEntry:
    origin: int
    distance: int
    pred: Optional[int]


@dataclass
class ExplorationResult:
    """What one vertex knows after an exploration run"""

    vertex: int
    is_source: bool
    popular: bool
    table: Dict[int, ExplorationEntry] = field(default_factory=dict)

    def others(self) -> List[ExplorationEntry]:
        """Entries for sources other than the vertex itself, by origin"""
        return [self.table[o] for o in sorted(self.table) if o != self.vertex]


def exploration_budget(delta: int, degree_ceil: int) -> int:
    return delta * (degree_ceil + 1)


class ExplorerProgram(NodeProgram):
    def __init__(
        self,
        vertex: int,
        neighbors: Sequence[int],
        is_source: bool,
        delta: int,
        deg: Power,
    ):
        super().__init__(vertex, neighbors)
        self.is_source = is_source
        self.delta = delta
        self.deg = deg
        self.stride = deg.ceil() + 1
        self.table: Dict[int, ExplorationEntry] = {}
        self.queue: List[int] = []
        if is_source:
            self.table[vertex] = ExplorationEntry(vertex, 0, None)

    def _learn(self, inbox: Inbox) -> None:
        for sender, message in sorted(inbox, key=lambda item: item[0]):
            origin, distance = message.words
            if origin not in self.table:
                self.table[origin] = ExplorationEntry(origin, distance + 1, sender)

    def _layer(self, k: int) -> List[int]:
        return sorted(o for o, e in self.table.items() if e.distance == k)

    def on_round(self, round_no: int, inbox: Inbox) -> Outbox:
        outbox = Outbox()
        self._learn(inbox)
        k, offset = divmod(round_no, self.stride)
        if offset == 0 and k < self.delta:
            self.queue = self._layer(k)[: self.stride]
        if self.queue and k < self.delta:
            origin = self.queue.pop(0)
            self.send_to_all_neighbors(outbox, Message(EXPLORE, (origin, k)))
        return outbox

    def next_wakeup(self, after: int) -> Optional[int]:
        if self.queue:
            return after + 1
        k = after // self.stride + 1
        if k < self.delta and self._layer(k):
            return k * self.stride
        return None

    def result(self) -> ExplorationResult:
        others = len(self.table) - (1 if self.is_source else 0)
        popular = self.is_source and self.deg.reached_by(others)
        return ExplorationResult(self.vertex, self.is_source, popular, dict(self.table))


def detect_popular(
    runner: CongestRunner,
    sources: Sequence[int],
    delta: int,
    deg: Power,
    label: str = "explore",
) -> Dict[int, ExplorationResult]:
    """
    Run one exploration from the given centers

    Returns every vertex's table; result.popular is set on sources that
    heard of at least deg other sources.
    """
    source_set = frozenset(sources)

    def factory(v: int, neighbors: Sequence[int]) -> ExplorerProgram:
        return ExplorerProgram(v, neighbors, v in source_set, delta, deg)

    return runner.run(label, factory, exploration_budget(delta, deg.ceil()))


def popular_centers(results: Dict[int, ExplorationResult]) -> List[int]:
    return sorted(v for v, r in results.items() if r.popular)


def exploration_oracle(g: Graph, sources: Sequence[int], delta: int) -> Dict[int, Dict[int, int]]:
    """Per vertex, the exact distances to all sources within delta (reference for tests)"""
    found: Dict[int, Dict[int, int]] = {v: {} for v in g.vertices()}
    for s in sources:
        dist = bfs_distances(g, s, delta).dist
        for v in g.vertices():
            if dist[v] is not None:
                found[v][s] = dist[v]
    return found
