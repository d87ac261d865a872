#!/usr/bin/env python3

"""Build transcripts: cluster hierarchy, per-phase snapshots and construction events."""

import json
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Tuple

from ..errors import GraphFormatError, InvariantError
from .graph import EMULATOR, SPANNER, Edge, WeightedEdgeSet, normalize_edge

SCHEMA_VERSION = 1

# Event kinds
INTERCONNECT = "interconnect"
SUPERCLUSTER = "supercluster"
SUPERCLUSTER_EDGE = "supercluster_edge"
BUFFER_ADMIT = "buffer_admit"
BUFFER_ABSORB = "buffer_absorb"
PATH = "path"
EDGE_EVENTS = (INTERCONNECT, SUPERCLUSTER_EDGE, BUFFER_ABSORB)

# Cluster kinds
SINGLETON = "singleton"
POPULAR = "popular"
ROOT = "root"
HUB = "hub"
BUCKET = "bucket"
TREE = "tree"

# Path purposes
SUPERCLUSTERING = "superclustering"
INTERCONNECTION = "interconnection"


@dataclass
class Cluster:
    """A cluster of some phase: a center, its members and the clusters it absorbed"""

    id: int
    center: int
    members: FrozenSet[int]
    formed_in_phase: int
    children: Tuple[int, ...] = ()
    kind: str = SINGLETON

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["members"] = sorted(self.members)
        data["children"] = list(self.children)
        return data


@dataclass
class PhaseRecord:
    """Snapshot of one phase"""

    phase: int
    clusters: List[int] = field(default_factory=list)
    unclustered: List[int] = field(default_factory=list)
    superclusters: List[int] = field(default_factory=list)
    buffered: int = 0
    popular: List[int] = field(default_factory=list)
    ruling: List[int] = field(default_factory=list)
    hubs: int = 0
    forest_edges: int = 0
    superclustering_edges: int = 0
    interconnection_edges: int = 0
    rounds: Dict[str, List[int]] = field(default_factory=dict)


@dataclass
class BuildEvent:
    """One construction step; edge events carry (actor, target, weight)"""

    kind: str
    phase: int
    actor: int
    target: Optional[int] = None
    weight: Optional[int] = None
    charged: Optional[int] = None
    cluster: Optional[int] = None
    members: Tuple[int, ...] = ()
    purpose: Optional[str] = None
    inserted: int = 0

    @property
    def edge(self) -> Optional[Edge]:
        if self.kind not in EDGE_EVENTS:
            return None
        return normalize_edge(self.actor, self.target)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["members"] = list(self.members)
        return data


class BuildTranscript:
    """Everything a builder did, in a form the verifier can re-check"""

    def __init__(self, kind: str, n: int, schedule: Optional[Dict[str, Any]] = None):
        self.kind = kind
        self.n = n
        self.schedule = schedule
        self.clusters: Dict[int, Cluster] = {}
        self.phases: List[PhaseRecord] = []
        self.events: List[BuildEvent] = []
        self.charges: Counter = Counter()
        self.knowledge: Dict[int, Dict[Edge, int]] = {}
        self.ledger: Any = None

    @property
    def mode(self) -> str:
        return SPANNER if self.kind == "spanner" else EMULATOR

    def new_cluster(
        self,
        center: int,
        members: Iterable[int],
        phase: int,
        children: Iterable[int] = (),
        kind: str = SINGLETON,
    ) -> Cluster:
        cluster = Cluster(
            id=len(self.clusters),
            center=center,
            members=frozenset(members),
            formed_in_phase=phase,
            children=tuple(sorted(children)),
            kind=kind,
        )
        self.clusters[cluster.id] = cluster
        return cluster

    def singletons(self) -> List[int]:
        """Create the phase-0 partition into single vertices"""
        return [self.new_cluster(v, (v,), 0).id for v in range(self.n)]

    def record(self, event: BuildEvent) -> BuildEvent:
        if event.charged is not None:
            self.charges[event.charged] += 1
        self.events.append(event)
        return event

    def learn(self, vertex: int, u: int, v: int, weight: int) -> None:
        """Note that vertex holds edge (u, v) with the given weight in its local state"""
        self.knowledge.setdefault(vertex, {})[normalize_edge(u, v)] = weight

    def phase(self, i: int) -> PhaseRecord:
        return self.phases[i]

    def edge_set(self) -> WeightedEdgeSet:
        """Rebuild H from the recorded events alone"""
        h = WeightedEdgeSet(self.mode)
        for event in self.events:
            if event.kind in EDGE_EVENTS:
                h.add(event.actor, event.target, event.weight)
            elif event.kind == PATH:
                for a, b in zip(event.members, event.members[1:]):
                    h.add(a, b, 1)
        return h

    def to_jsonl(self) -> List[str]:
        """One JSON document per line; header first"""
        lines = [
            _dumps(
                {
                    "record": "header",
                    "schema_version": SCHEMA_VERSION,
                    "kind": self.kind,
                    "n": self.n,
                    "schedule": self.schedule,
                }
            )
        ]
        lines.extend(_dumps({"record": "cluster", **c.to_dict()}) for c in self.clusters.values())
        lines.extend(_dumps({"record": "phase", **asdict(p)}) for p in self.phases)
        lines.extend(_dumps({"record": "event", **e.to_dict()}) for e in self.events)
        for vertex in sorted(self.knowledge):
            for (u, v), w in sorted(self.knowledge[vertex].items()):
                lines.append(_dumps({"record": "knowledge", "vertex": vertex, "u": u, "v": v, "weight": w}))
        return lines

    @classmethod
    def from_jsonl(cls, lines: Iterable[str]) -> "BuildTranscript":
        transcript = None
        for lineno, raw in enumerate(lines, 1):
            if not raw.strip():
                continue
            try:
                data = json.loads(raw)
                record = data.pop("record")
            except (ValueError, KeyError, AttributeError):
                raise GraphFormatError("malformed transcript line", lineno)
            if record == "header":
                if data.get("schema_version") != SCHEMA_VERSION:
                    raise GraphFormatError(f"unsupported schema version {data.get('schema_version')}", lineno)
                transcript = cls(data["kind"], data["n"], data.get("schedule"))
                continue
            if transcript is None:
                raise GraphFormatError("transcript does not start with a header", lineno)
            if record == "cluster":
                data["members"] = frozenset(data["members"])
                data["children"] = tuple(data["children"])
                cluster = Cluster(**data)
                transcript.clusters[cluster.id] = cluster
            elif record == "phase":
                transcript.phases.append(PhaseRecord(**data))
            elif record == "event":
                data["members"] = tuple(data["members"])
                transcript.record(BuildEvent(**data))
            elif record == "knowledge":
                transcript.learn(data["vertex"], data["u"], data["v"], data["weight"])
            else:
                raise GraphFormatError(f"unknown record type {record!r}", lineno)
        if transcript is None:
            raise GraphFormatError("empty transcript")
        return transcript


def insert_edge(
    h: WeightedEdgeSet,
    t: BuildTranscript,
    kind: str,
    phase: int,
    actor: int,
    target: int,
    weight: int,
    charged: Optional[int],
) -> BuildEvent:
    """Add an emulator edge to H together with its single transcript event"""
    if h.weight(actor, target) is not None:
        raise InvariantError(f"phase {phase}: edge ({actor}, {target}) inserted twice")
    h.add(actor, target, weight)
    return t.record(
        BuildEvent(kind, phase, actor, target=target, weight=weight, charged=charged)
    )


def _dumps(data: Dict[str, Any]) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"))
