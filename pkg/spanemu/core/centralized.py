#!/usr/bin/env python3

"""Sequential superclustering-and-interconnection emulator with buffer sets."""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

from ..errors import InvalidConfigError, InvariantError
from .graph import EMULATOR, Graph, WeightedEdgeSet, bfs_distances
from .schedule import CENTRALIZED, Config, Power, Schedule, centralized_schedule
from .transcript import (
    BUFFER_ABSORB,
    BUFFER_ADMIT,
    INTERCONNECT,
    POPULAR,
    SUPERCLUSTER,
    SUPERCLUSTER_EDGE,
    BuildEvent,
    BuildTranscript,
    PhaseRecord,
    insert_edge,
)


@dataclass
class PhaseState:
    """
    Working sets of one phase

    S holds the active centers, N the buffered centers mapped to
    (supercluster id, distance to its center), U the clusters left
    unclustered and P_next the superclusters formed so far.
    """

    phase: int
    P: List[int]
    S: Set[int] = field(default_factory=set)
    N: Dict[int, Tuple[int, int]] = field(default_factory=dict)
    U: List[int] = field(default_factory=list)
    P_next: List[int] = field(default_factory=list)


def initial_state(t: BuildTranscript) -> PhaseState:
    return PhaseState(phase=0, P=t.singletons())


def run_phase(
    g: Graph, s: Schedule, st: PhaseState, h: WeightedEdgeSet, t: BuildTranscript
) -> PhaseState:
    """Run phase st.phase and return the state for the next phase"""
    i = st.phase
    if i > s.ell:
        raise InvariantError(f"phase {i} is beyond ell = {s.ell}")
    deg: Power = s.deg[i]
    delta = s.delta[i]
    cluster_of = {t.clusters[c].center: c for c in st.P}
    st.S = set(cluster_of)
    st.N = {}
    record = PhaseRecord(phase=i, clusters=sorted(st.P))
    absorbed: Dict[int, List[int]] = {}

    for center in sorted(cluster_of):
        if center not in st.S:
            continue
        st.S.discard(center)
        reach = bfs_distances(g, center, 2 * delta).dist
        gamma = sorted(
            c for c in st.S.union(st.N) if reach[c] is not None and reach[c] <= delta
        )

        if not deg.reached_by(len(gamma)):
            st.U.append(cluster_of[center])
            for other in gamma:
                insert_edge(h, t, INTERCONNECT, i, center, other, reach[other], charged=center)
            continue

        if i == s.ell:
            raise InvariantError(
                f"center {center} is popular in the last phase ({len(gamma)} >= {deg})"
            )
        supercluster = t.new_cluster(center, (), i + 1, kind=POPULAR)
        st.P_next.append(supercluster.id)
        absorbed[supercluster.id] = [cluster_of[center]] + [cluster_of[c] for c in gamma]
        t.record(
            BuildEvent(SUPERCLUSTER, i, center, cluster=supercluster.id, members=tuple(gamma))
        )
        for other in gamma:
            st.S.discard(other)
            st.N.pop(other, None)
            insert_edge(h, t, SUPERCLUSTER_EDGE, i, center, other, reach[other], charged=other)
        for other in sorted(st.S):
            if reach[other] is not None and delta < reach[other] <= 2 * delta:
                st.S.discard(other)
                st.N[other] = (supercluster.id, reach[other])
                t.record(
                    BuildEvent(BUFFER_ADMIT, i, center, target=other, cluster=supercluster.id)
                )

    record.buffered = len(st.N)
    for other in sorted(st.N):
        supercluster_id, distance = st.N[other]
        owner = t.clusters[supercluster_id].center
        insert_edge(h, t, BUFFER_ABSORB, i, owner, other, distance, charged=other)
        absorbed[supercluster_id].append(cluster_of[other])

    for supercluster_id, children in absorbed.items():
        cluster = t.clusters[supercluster_id]
        cluster.children = tuple(sorted(children))
        cluster.members = frozenset().union(*(t.clusters[c].members for c in children))

    record.unclustered = sorted(st.U)
    record.superclusters = list(st.P_next)
    t.phases.append(record)
    return PhaseState(phase=i + 1, P=list(st.P_next))


def build_emulator(
    g: Graph, cfg: Config, schedule: Optional[Schedule] = None
) -> Tuple[WeightedEdgeSet, BuildTranscript]:
    """Build the emulator H of g and the transcript of its construction"""
    if cfg.n != g.n:
        raise InvalidConfigError(f"config is for n={cfg.n} but the graph has n={g.n}")
    s = schedule or centralized_schedule(cfg)
    h = WeightedEdgeSet(EMULATOR)
    t = BuildTranscript(CENTRALIZED, g.n, s.to_dict())
    st = initial_state(t)
    for _ in s.phases():
        st = run_phase(g, s, st, h, t)
    if st.P:
        raise InvariantError(f"{len(st.P)} clusters survive the last phase")
    if len(h) ** cfg.kappa > g.n ** (cfg.kappa + 1):
        raise InvariantError(f"|H| = {len(h)} exceeds n^(1+1/kappa)")
    return h, t


@dataclass
class VertexCharge:
    vertex: int
    total: int
    phase: int
    role: str
    within_limit: bool


@dataclass
class ChargeReport:
    entries: Dict[int, VertexCharge]
    total: int
    edges: int

    @property
    def overloaded(self) -> List[int]:
        return sorted(v for v, e in self.entries.items() if not e.within_limit)

    @property
    def balanced(self) -> bool:
        return not self.overloaded and self.total == self.edges

    def charges(self, n: int) -> List[int]:
        return [self.entries[v].total if v in self.entries else 0 for v in range(n)]


def charge_report(t: BuildTranscript, s: Schedule) -> ChargeReport:
    """
    Per-vertex charges of the centralized build

    An unpopular center pays for its interconnection edges and must stay
    below deg_i of its phase; an absorbed or buffered center pays for the
    single edge that attached it.
    """
    totals: Dict[int, int] = {}
    roles: Dict[int, Set[Tuple[str, int]]] = {}
    edges = 0
    for event in t.events:
        if event.edge is None:
            continue
        edges += 1
        if event.charged is None:
            continue
        role = "unpopular" if event.kind == INTERCONNECT else "absorbed"
        totals[event.charged] = totals.get(event.charged, 0) + 1
        roles.setdefault(event.charged, set()).add((role, event.phase))

    entries = {}
    for vertex, total in totals.items():
        kinds = roles[vertex]
        role, phase = min(kinds)
        if len(kinds) > 1:
            ok = False
        elif role == "unpopular":
            ok = s.deg[phase].bounds(total)
        else:
            ok = total <= 1
        entries[vertex] = VertexCharge(vertex, total, phase, role, ok)
    return ChargeReport(entries, sum(totals.values()), edges)
