#!/usr/bin/env python3

"""
Independent checks of a finished build

Everything here is recomputed from G, H and the transcript: distances
come from fresh BFS runs on G and Dijkstra runs on H, never from the
builders' own tables.
"""

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Tuple

from ..congest.kernel import SimTranscript
from ..congest.ruling import check_ruling_set
from ..errors import InvalidConfigError, InvariantError
from .graph import SPANNER as SPANNER_MODE
from .graph import Graph, WeightedEdgeSet, bfs_distances, dijkstra_distances, normalize_edge
from .schedule import CENTRALIZED, DISTRIBUTED, SPANNER, Power, Schedule, StretchBudget
from .transcript import (
    BUCKET,
    HUB,
    INTERCONNECT,
    INTERCONNECTION,
    PATH,
    ROOT,
    SCHEMA_VERSION,
    SUPERCLUSTERING,
    BuildTranscript,
)

EXHAUSTIVE = "exhaustive"
SAMPLED = "sampled"

EXACT = "exact"
BIG_OH = "big_oh"
ULTRA_SPARSE = "ultra_sparse"
SIZE_FORMS = (EXACT, BIG_OH, ULTRA_SPARSE)

PASS = "pass"
FAIL = "fail"
SKIPPED = "skipped"

DEFAULT_EXHAUSTIVE_LIMIT = 1024
DEFAULT_SAMPLE_SOURCES = 64
MAX_LISTED = 100


@dataclass
class StretchViolation:
    u: int
    v: int
    d_g: int
    d_h: Optional[int]
    kind: str
    path: List[int] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {"u": self.u, "v": self.v, "d_g": self.d_g, "d_h": self.d_h, "kind": self.kind, "path": self.path}


@dataclass
class StretchReport:
    mode: str
    sources: int
    pairs: int = 0
    max_ratio: float = 1.0
    max_multiplicative_excess: float = 0.0
    max_additive_slack_used: float = 0.0
    violation_count: int = 0
    violations: List[StretchViolation] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.violation_count == 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mode": self.mode,
            "sources": self.sources,
            "pairs": self.pairs,
            "max_ratio": self.max_ratio,
            "max_multiplicative_excess": self.max_multiplicative_excess,
            "max_additive_slack_used": self.max_additive_slack_used,
            "violation_count": self.violation_count,
            "violations": [v.to_dict() for v in self.violations],
        }


def verify_stretch(
    g: Graph,
    h: WeightedEdgeSet,
    budget: StretchBudget,
    mode: str = EXHAUSTIVE,
    samples: int = DEFAULT_SAMPLE_SOURCES,
    seed: int = 0,
    exhaustive_limit: int = DEFAULT_EXHAUSTIVE_LIMIT,
    force: bool = False,
) -> StretchReport:
    """
    Compare d_H against alpha * d_G + beta over same-component pairs

    Exhaustive mode runs one BFS and one Dijkstra per vertex and refuses
    graphs above exhaustive_limit vertices unless forced.
    """
    n = g.n
    if mode == EXHAUSTIVE:
        if n > exhaustive_limit and not force:
            raise InvalidConfigError(
                f"exhaustive stretch check on n={n} exceeds the limit of {exhaustive_limit}; "
                "use sampled mode or raise exhaustive_limit"
            )
        sources = list(range(n))
    elif mode == SAMPLED:
        rng = random.Random(seed)
        sources = sorted(rng.sample(range(n), min(samples, n)))
    else:
        raise InvalidConfigError(f"unknown stretch mode: {mode}")

    alpha, beta = budget.alpha_final, budget.beta_final
    report = StretchReport(mode, len(sources))
    adjacency = h.adjacency(n)
    best_ratio = Fraction(1)
    best_excess: Optional[Fraction] = None
    best_slack: Optional[Fraction] = None

    for s in sources:
        d_g = bfs_distances(g, s).dist
        h_map = dijkstra_distances(h, n, s, adjacency)
        d_h = h_map.dist
        for t in range(n):
            if t == s or d_g[t] is None or (mode == EXHAUSTIVE and t < s):
                continue
            report.pairs += 1
            kind = None
            if d_h[t] is None:
                kind = "disconnected"
            elif d_h[t] < d_g[t]:
                kind = "shortcut"
            elif d_h[t] > alpha * d_g[t] + beta:
                kind = "stretch"
            if d_h[t] is not None:
                ratio = Fraction(d_h[t], d_g[t])
                excess = Fraction(d_h[t] - beta, d_g[t])
                slack = d_h[t] - alpha * d_g[t]
                best_ratio = max(best_ratio, ratio)
                best_excess = excess if best_excess is None else max(best_excess, excess)
                best_slack = slack if best_slack is None else max(best_slack, slack)
            if kind is not None:
                report.violation_count += 1
                if len(report.violations) < MAX_LISTED:
                    report.violations.append(StretchViolation(s, t, d_g[t], d_h[t], kind, h_map.path_to(t)))

    report.max_ratio = float(best_ratio)
    report.max_multiplicative_excess = float(best_excess) if best_excess is not None else 0.0
    report.max_additive_slack_used = float(best_slack) if best_slack is not None else 0.0
    return report


@dataclass
class SizeReport:
    form: str
    edges: int
    n: int
    kappa: int
    bound: float
    constant: float
    passed: bool
    excess_over_n: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        return dict(self.__dict__)


def verify_size(
    edges: int, n: int, kappa: int, form: str = EXACT, c: Optional[float] = None
) -> SizeReport:
    """
    Size bounds: exact |H| <= n^(1+1/kappa), big_oh reports |H| / n^(1+1/kappa)
    (and checks it against c when given), ultra_sparse |H| <= n * 2^(1/log log n)
    """
    if form not in SIZE_FORMS:
        raise InvalidConfigError(f"unknown size form: {form}")
    if n < 1 or kappa < 1:
        raise InvalidConfigError(f"need n >= 1 and kappa >= 1, got n={n}, kappa={kappa}")
    bound = n ** (1 + 1 / kappa)
    constant = edges / bound
    if form == EXACT:
        return SizeReport(form, edges, n, kappa, bound, constant, edges ** kappa <= n ** (kappa + 1))
    if form == BIG_OH:
        return SizeReport(form, edges, n, kappa, bound, constant, c is None or constant <= c)
    if n < 4:
        raise InvalidConfigError("the ultra-sparse bound needs n >= 4")
    f = math.log2(math.log2(n))
    bound = n * 2 ** (1 / f)
    return SizeReport(form, edges, n, kappa, bound, edges / n, edges <= bound, edges - n)


@dataclass
class SoundnessReport:
    mode: str
    exact: bool
    checked: int = 0
    failures: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> Dict[str, Any]:
        return {"mode": self.mode, "exact": self.exact, "checked": self.checked,
                "passed": self.passed, "failures": self.failures[:MAX_LISTED]}


def verify_soundness(g: Graph, h: WeightedEdgeSet, exact: bool = False) -> SoundnessReport:
    """
    Emulator edges must never shorten G distances (and match them when exact);
    spanner edges must be edges of G
    """
    report = SoundnessReport(h.mode, exact)
    if h.mode == SPANNER_MODE:
        for (u, v), w in h.items():
            report.checked += 1
            if not g.has_edge(u, v):
                report.failures.append(f"({u}, {v}) is not an edge of G")
            elif w != 1:
                report.failures.append(f"({u}, {v}) has weight {w}")
        return report

    by_source: Dict[int, List[Tuple[int, int]]] = {}
    for (u, v), w in h.items():
        by_source.setdefault(u, []).append((v, w))
    for u in sorted(by_source):
        dist = bfs_distances(g, u).dist
        for v, w in by_source[u]:
            report.checked += 1
            if dist[v] is None:
                report.failures.append(f"({u}, {v}) joins different components")
            elif w < dist[v]:
                report.failures.append(f"({u}, {v}) weight {w} < d_G = {dist[v]}")
            elif exact and w != dist[v]:
                report.failures.append(f"({u}, {v}) weight {w} != d_G = {dist[v]}")
    return report


@dataclass
class StructureCheck:
    name: str
    status: str = PASS
    details: List[str] = field(default_factory=list)

    def fail(self, detail: str) -> None:
        self.status = FAIL
        if len(self.details) < MAX_LISTED:
            self.details.append(detail)

    def to_dict(self) -> Dict[str, Any]:
        return {"status": self.status, "details": self.details}


@dataclass
class StructureReport:
    checks: Dict[str, StructureCheck] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.status != FAIL for c in self.checks.values())

    @property
    def failed(self) -> List[str]:
        return [name for name, c in self.checks.items() if c.status == FAIL]

    def to_dict(self) -> Dict[str, Any]:
        return {name: c.to_dict() for name, c in self.checks.items()}


def _ratio_reaches(numerator: int, denominator: int, power: Power) -> bool:
    """numerator / denominator >= power"""
    if power.exact:
        p, q = power.exponent.numerator, power.exponent.denominator
        return Fraction(numerator, denominator) ** q >= Fraction(power.base) ** p
    return numerator / denominator >= power.value


def _exponent_sum(exponents: Iterable) -> Any:
    total: Any = Fraction(0)
    for e in exponents:
        total = total + e
    return total


class _StructureChecker:
    def __init__(self, t: BuildTranscript, g: Graph, s: Schedule):
        self.t = t
        self.g = g
        self.s = s
        self.h = t.edge_set()
        self.adjacency = self.h.adjacency(g.n)
        self._dijkstra: Dict[int, List[Optional[int]]] = {}
        self._bfs: Dict[Tuple[int, Optional[int]], List[Optional[int]]] = {}

    def d_h(self, source: int) -> List[Optional[int]]:
        if source not in self._dijkstra:
            self._dijkstra[source] = dijkstra_distances(self.h, self.g.n, source, self.adjacency).dist
        return self._dijkstra[source]

    def d_g(self, source: int, cap: Optional[int] = None) -> List[Optional[int]]:
        key = (source, cap)
        if key not in self._bfs:
            self._bfs[key] = bfs_distances(self.g, source, cap).dist
        return self._bfs[key]

    def centers(self, ids: Iterable[int]) -> List[int]:
        return sorted(self.t.clusters[c].center for c in ids)

    def supercluster_size(self) -> StructureCheck:
        check = StructureCheck("supercluster_size")
        for record in self.t.phases:
            i = record.phase
            if i >= self.s.ell:
                continue
            deg = self.s.deg[i]
            hub_size = 2 * self.s.degree_ceil(i) + 2
            for sc in record.superclusters:
                cluster = self.t.clusters[sc]
                size = len(cluster.children)
                if cluster.kind in (HUB, BUCKET):
                    if size < hub_size:
                        check.fail(f"phase {i}: {cluster.kind} supercluster {sc} has {size} < {hub_size} clusters")
                elif cluster.kind == ROOT and record.hubs:
                    # hubs below a root take their share first; only the phase total is bounded
                    continue
                elif not deg.reached_by(size - 1):
                    check.fail(f"phase {i}: supercluster {sc} has {size} clusters, needs deg+1 > {deg.value:.4g}")
            if record.superclusters and not _ratio_reaches(
                len(record.clusters), len(record.superclusters), deg
            ):
                check.fail(
                    f"phase {i}: |P_i| = {len(record.clusters)} < {len(record.superclusters)} * deg_i"
                )
        return check

    def disjointness(self) -> StructureCheck:
        check = StructureCheck("disjointness")
        for record in self.t.phases:
            seen: Dict[int, int] = {}
            for c in record.clusters:
                for v in self.t.clusters[c].members:
                    if v in seen:
                        check.fail(f"phase {record.phase}: vertex {v} in clusters {seen[v]} and {c}")
                    seen[v] = c
        return check

    def cluster_count_decay(self) -> StructureCheck:
        check = StructureCheck("cluster_count_decay")
        n = self.g.n
        for record in self.t.phases:
            i = record.phase
            bound = Power(n, 1 - _exponent_sum(self.s.deg[j].exponent for j in range(i)))
            if not bound.bounds(len(record.clusters)):
                check.fail(f"|P_{i}| = {len(record.clusters)} exceeds {bound}")
        if self.s.kind == CENTRALIZED:
            return check
        by_phase = {record.phase: record for record in self.t.phases}
        last = by_phase.get(self.s.ell)
        if last is not None and not Power(n, self.s.rho).bounds(len(last.clusters)):
            check.fail(f"|P_ell| = {len(last.clusters)} exceeds n^rho")
        if self.s.kind == SPANNER:
            # the transition phase starts from at most n^(1-rho) clusters
            transition = by_phase.get(self.s.i0 + 1)
            if transition is not None and not Power(n, 1 - self.s.rho).bounds(len(transition.clusters)):
                check.fail(f"|P_(i0+1)| = {len(transition.clusters)} exceeds n^(1-rho)")
        return check

    def radii(self) -> StructureCheck:
        check = StructureCheck("radii")
        for record in self.t.phases:
            limit = self.s.radius[record.phase]
            for c in record.clusters:
                cluster = self.t.clusters[c]
                dist = self.d_h(cluster.center)
                for v in sorted(cluster.members):
                    if dist[v] is None or dist[v] > limit:
                        check.fail(
                            f"phase {record.phase}: d_H({cluster.center}, {v}) = {dist[v]} > R = {limit}"
                        )
        return check

    def partition(self) -> StructureCheck:
        check = StructureCheck("partition")
        everyone = set(self.g.vertices())
        retired: List[int] = []
        for record in self.t.phases + [None]:
            live = record.clusters if record is not None else []
            covered: List[int] = []
            for c in list(live) + retired:
                covered.extend(self.t.clusters[c].members)
            label = f"phase {record.phase}" if record is not None else "after the last phase"
            if len(covered) != len(set(covered)) or set(covered) != everyone:
                check.fail(f"{label}: live and retired clusters do not partition V")
            if record is not None:
                retired.extend(record.unclustered)
        return check

    def laminarity(self) -> StructureCheck:
        check = StructureCheck("laminarity")
        for cluster in self.t.clusters.values():
            if not cluster.children:
                continue
            union = set()
            for child_id in cluster.children:
                child = self.t.clusters[child_id]
                if child.formed_in_phase != cluster.formed_in_phase - 1:
                    check.fail(f"cluster {cluster.id}: child {child_id} is from phase {child.formed_in_phase}")
                if union & child.members:
                    check.fail(f"cluster {cluster.id}: children overlap")
                union |= child.members
            if union != set(cluster.members):
                check.fail(f"cluster {cluster.id}: members differ from the union of its children")
        chains: Dict[int, List[int]] = {}
        for cluster in sorted(self.t.clusters.values(), key=lambda c: (c.formed_in_phase, c.id)):
            for v in cluster.members:
                chains.setdefault(v, []).append(cluster.id)
        for v, chain in chains.items():
            for a, b in zip(chain, chain[1:]):
                if not self.t.clusters[a].members <= self.t.clusters[b].members:
                    check.fail(f"vertex {v}: cluster {a} is not nested in cluster {b}")
        return check

    def _interconnections(self) -> List[Tuple[int, int, int, int]]:
        """(phase, actor, target, weight) of every interconnection"""
        found = []
        for event in self.t.events:
            if event.kind == INTERCONNECT:
                found.append((event.phase, event.actor, event.target, event.weight))
            elif event.kind == PATH and event.purpose == INTERCONNECTION:
                found.append((event.phase, event.actor, event.target, event.weight))
        return found

    def neighbor_distances(self) -> StructureCheck:
        check = StructureCheck("neighbor_distances")
        links = self._interconnections()
        for phase, actor, target, weight in links:
            exact = self.d_g(actor)[target]
            if weight != exact:
                check.fail(f"phase {phase}: ({actor}, {target}) has weight {weight}, d_G = {exact}")
        linked = {(p, normalize_edge(a, b)) for p, a, b, _ in links}
        for record in self.t.phases:
            delta = self.s.delta[record.phase]
            centers = self.centers(record.clusters)
            for c in self.centers(record.unclustered):
                dist = self.d_g(c, delta)
                for other in centers:
                    if other != c and dist[other] is not None:
                        if (record.phase, normalize_edge(c, other)) not in linked:
                            check.fail(f"phase {record.phase}: unclustered {c} is not linked to {other}")
        return check

    def endpoint_knowledge(self) -> StructureCheck:
        check = StructureCheck("endpoint_knowledge")
        if self.s.kind == CENTRALIZED:
            check.status = SKIPPED
            return check
        for (u, v), w in self.h.items():
            for end in (u, v):
                known = self.t.knowledge.get(end, {}).get((u, v))
                if known is None:
                    check.fail(f"vertex {end} does not know edge ({u}, {v})")
                elif self.s.kind != SPANNER and known != w:
                    check.fail(f"vertex {end} holds weight {known} for ({u}, {v}), H has {w}")
        return check

    def spanner_forest_bound(self) -> StructureCheck:
        check = StructureCheck("spanner_forest_bound")
        if self.s.kind != SPANNER:
            check.status = SKIPPED
            return check
        per_phase: Dict[int, int] = {}
        for event in self.t.events:
            if event.kind == PATH and event.purpose == SUPERCLUSTERING:
                per_phase[event.phase] = per_phase.get(event.phase, 0) + event.inserted
        for phase, count in sorted(per_phase.items()):
            if count > max(0, self.g.n - 1):
                check.fail(f"phase {phase}: {count} superclustering edges > n - 1")
        return check

    def popular_superclustered(self) -> StructureCheck:
        check = StructureCheck("popular_superclustered")
        if self.s.kind == CENTRALIZED:
            check.status = SKIPPED
            return check
        for record in self.t.phases:
            i = record.phase
            delta, deg = self.s.delta[i], self.s.deg[i]
            centers = self.centers(record.clusters)
            near: Dict[int, List[int]] = {}
            for c in centers:
                dist = self.d_g(c, delta)
                near[c] = [o for o in centers if o != c and dist[o] is not None]
            popular = sorted(c for c in centers if deg.reached_by(len(near[c])))
            if popular != sorted(record.popular):
                check.fail(f"phase {i}: detected popular {sorted(record.popular)[:5]}, brute force {popular[:5]}")
            if i == self.s.ell:
                continue
            unclustered = set(self.centers(record.unclustered))
            popular_set = set(popular)
            for c in centers:
                if c in unclustered and (c in popular_set or popular_set.intersection(near[c])):
                    check.fail(f"phase {i}: center {c} is popular or next to one but unclustered")
        return check

    def ruling_set(self) -> StructureCheck:
        check = StructureCheck("ruling_set")
        if self.s.kind == CENTRALIZED:
            check.status = SKIPPED
            return check
        for record in self.t.phases:
            if record.phase == self.s.ell:
                continue
            try:
                check_ruling_set(
                    self.g, record.popular, record.ruling, self.s.sep[record.phase], self.s.rul[record.phase]
                )
            except InvariantError as e:
                check.fail(f"phase {record.phase}: {e}")
        return check


def verify_structure(t: BuildTranscript, g: Graph, s: Schedule) -> StructureReport:
    """Re-check the per-phase invariants of a build transcript"""
    if t.n != g.n:
        raise InvalidConfigError(f"transcript is for n={t.n} but the graph has n={g.n}")
    checker = _StructureChecker(t, g, s)
    report = StructureReport()
    for run in (
        checker.supercluster_size,
        checker.disjointness,
        checker.cluster_count_decay,
        checker.radii,
        checker.partition,
        checker.laminarity,
        checker.neighbor_distances,
        checker.endpoint_knowledge,
        checker.spanner_forest_bound,
        checker.popular_superclustered,
        checker.ruling_set,
    ):
        result = run()
        report.checks[result.name] = result
    return report


def build_report(
    size: SizeReport,
    stretch: StretchReport,
    structure: Optional[StructureReport] = None,
    soundness: Optional[SoundnessReport] = None,
    schedule: Optional[Schedule] = None,
    budget: Optional[StretchBudget] = None,
) -> Dict[str, Any]:
    """The JSON document written by `spanemu verify`"""
    report: Dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "size": size.to_dict(),
        "stretch": stretch.to_dict(),
        "lemma_checklist": structure.to_dict() if structure is not None else {},
    }
    if soundness is not None:
        report["soundness"] = soundness.to_dict()
    if budget is not None:
        report["budget"] = budget.to_dict()
        if schedule is not None:
            report["budget"]["user_target_alpha"] = float(1 + schedule.eps_user)
    if schedule is not None:
        report["schedule_feasible"] = schedule.feasible
        if not schedule.feasible:
            report["size_guarantee"] = "not covered: " + schedule.infeasibility
    report["passed"] = (
        size.passed
        and stretch.passed
        and (structure is None or structure.passed)
        and (soundness is None or soundness.passed)
    )
    return report


@dataclass
class BandwidthReport:
    rounds: int
    messages: int
    max_edge_load: int
    max_words: int
    word_limit: int

    @property
    def passed(self) -> bool:
        return self.max_edge_load <= 1 and self.max_words <= self.word_limit

    def to_dict(self) -> Dict[str, Any]:
        return {**self.__dict__, "passed": self.passed}


def verify_bandwidth(sim: SimTranscript, word_limit: int) -> BandwidthReport:
    """At most one message of at most word_limit words per directed edge and round"""
    return BandwidthReport(
        sim.rounds_executed, sim.messages_total, sim.max_edge_load, sim.max_words, word_limit
    )


RULING_STAGE = "/ruling"


def ruling_round_constant(t: BuildTranscript, s: Schedule) -> Optional[float]:
    """
    Measured c_r: the largest rounds / (delta_i * (1/rho) * n^rho) over the
    ruling-set stages of a distributed build

    None for centralized builds and for builds where no phase had a
    popular center.
    """
    if s.rho is None:
        return None
    scale = Power(s.n, s.rho).value / float(s.rho)
    measured = [
        rounds / (s.delta[record.phase] * scale)
        for record in t.phases
        for label, (rounds, _) in record.rounds.items()
        if label.endswith(RULING_STAGE)
    ]
    return max(measured, default=None)
