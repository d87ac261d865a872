#!/usr/bin/env python3

"""
Ruling forests and superclustering

A BFS forest is grown from the ruling set to depth L = rul + delta. The
emulator build then backtracks it in strides of K = 2D + 2 rounds: every
vertex forwards the (origin, depth) pairs of the centers below it to its
parent unless it holds at least K of them, in which case it becomes a hub
and forms superclusters on the spot. Confirmations travel back down the
recorded routes so that both endpoints of every new edge learn it. The
spanner build only counts centers per subtree and keeps one supercluster
per tree.
"""

from collections import deque
from dataclasses import dataclass, field
from typing import Deque, Dict, List, Optional, Sequence, Set, Tuple

from ..core.graph import Edge, normalize_edge
from ..core.transcript import BUCKET, HUB, ROOT
from ..errors import InvariantError
from .kernel import CongestRunner, Inbox, Message, NodeProgram, Outbox

GROW = 3
CHILD = 4
CARRY = 5
CONFIRM = 6
ASSIGN = 7
COUNT = 8

# Roles a vertex can take during backtracking
ROOT_ROLE = "root"
HUB_CENTER = "hub_center"
HUB_SPLIT = "hub_split"


@dataclass(frozen=True)
class ForestNode:
    vertex: int
    root: Optional[int] = None
    parent: Optional[int] = None
    depth: Optional[int] = None
    children: Tuple[int, ...] = ()

    @property
    def in_forest(self) -> bool:
        return self.root is not None


class GrowProgram(NodeProgram):
    """Joins the first tree to reach it: lowest root ID, then lowest parent ID"""

    def __init__(self, vertex: int, neighbors: Sequence[int], is_root: bool, depth_limit: int):
        super().__init__(vertex, neighbors)
        self.is_root = is_root
        self.depth_limit = depth_limit
        self.root: Optional[int] = vertex if is_root else None
        self.parent: Optional[int] = None
        self.depth: Optional[int] = 0 if is_root else None
        self.children: Set[int] = set()
        self.joined_at: Optional[int] = None
        self.reported = False

    def on_round(self, round_no: int, inbox: Inbox) -> Outbox:
        outbox = Outbox()
        offers = []
        for sender, message in inbox:
            if message.tag == CHILD:
                self.children.add(sender)
            elif message.tag == GROW:
                offers.append((message.words[0], sender, message.words[1]))

        if self.is_root and round_no == 0:
            if self.depth_limit >= 1:
                self.send_to_all_neighbors(outbox, Message(GROW, (self.vertex, 1)))
        elif self.root is None and offers:
            self.root, self.parent, self.depth = min(offers)
            self.joined_at = round_no
            if self.depth < self.depth_limit:
                self.send_to_all_neighbors(outbox, Message(GROW, (self.root, self.depth + 1)))
        elif self.parent is not None and not self.reported and round_no == self.joined_at + 1:
            self.reported = True
            outbox.send(self.parent, Message(CHILD, (self.vertex,)))
        return outbox

    def next_wakeup(self, after: int) -> Optional[int]:
        if self.is_root and after < 0:
            return 0
        if self.parent is not None and not self.reported:
            return self.joined_at + 1
        return None

    def result(self) -> ForestNode:
        return ForestNode(self.vertex, self.root, self.parent, self.depth, tuple(sorted(self.children)))


def grow_budget(depth_limit: int) -> int:
    return depth_limit + 2


def grow_forest(
    runner: CongestRunner, roots: Sequence[int], depth_limit: int, label: str = "forest"
) -> Dict[int, ForestNode]:
    root_set = frozenset(roots)

    def factory(v: int, neighbors: Sequence[int]) -> GrowProgram:
        return GrowProgram(v, neighbors, v in root_set, depth_limit)

    return runner.run(label, factory, grow_budget(depth_limit))


@dataclass
class Notice:
    """A superclustering edge on its way to the endpoints that still have to learn it"""

    tag: int
    center: int
    target: int
    weight: int

    def message(self) -> Message:
        return Message(self.tag, (self.center, self.target, self.weight))


@dataclass
class Bucket:
    representative: int
    children: Tuple[int, ...]
    origins: Tuple[int, ...]


@dataclass
class BacktrackResult:
    vertex: int
    role: Optional[str] = None
    routes: Dict[int, int] = field(default_factory=dict)
    notices: List[Notice] = field(default_factory=list)
    buckets: List[Bucket] = field(default_factory=list)
    absorbed: Tuple[int, ...] = ()
    edges: Dict[Edge, int] = field(default_factory=dict)


def backtrack_stride(degree_ceil: int) -> int:
    return 2 * degree_ceil + 2


def split_into_buckets(
    carried: Dict[int, List[Tuple[int, int]]], threshold: int
) -> List[List[int]]:
    """Group children (by ID) so every group carries at least threshold pairs

    A trailing group that stays below the threshold is merged into the one
    before it.
    """
    groups: List[List[int]] = []
    current: List[int] = []
    load = 0
    for child in sorted(carried):
        current.append(child)
        load += len(carried[child])
        if load >= threshold:
            groups.append(current)
            current, load = [], 0
    if current:
        if groups:
            groups[-1].extend(current)
        else:
            groups.append(current)
    return groups


class BacktrackProgram(NodeProgram):
    def __init__(
        self,
        vertex: int,
        neighbors: Sequence[int],
        node: ForestNode,
        is_center: bool,
        depth_limit: int,
        stride: int,
    ):
        super().__init__(vertex, neighbors)
        self.node = node
        self.is_center = is_center
        self.stride = stride
        self.act_round = None if not node.in_forest else (depth_limit - node.depth) * stride
        self.carried: Dict[int, List[Tuple[int, int]]] = {}
        self.outgoing: Deque[Tuple[int, int]] = deque()
        self.out = BacktrackResult(vertex)

    def _receive(self, inbox: Inbox) -> None:
        for sender, message in inbox:
            if message.tag != CARRY:
                raise InvariantError(f"unexpected message tag {message.tag} while backtracking")
            origin, dist = message.words
            self.carried.setdefault(sender, []).append((origin, dist))
            self.out.routes[origin] = sender

    def _confirm_all(self, pairs: List[Tuple[int, int]]) -> None:
        v, depth = self.vertex, self.node.depth
        absorbed = []
        for origin, dist in sorted(pairs):
            if origin == v:
                continue
            weight = dist - depth
            self.out.notices.append(Notice(CONFIRM, v, origin, weight))
            self.out.edges[normalize_edge(v, origin)] = weight
            absorbed.append(origin)
        self.out.absorbed = tuple(absorbed)

    def _split(self) -> None:
        depth = self.node.depth
        for group in split_into_buckets(self.carried, self.stride):
            pairs = sorted(p for child in group for p in self.carried[child])
            rep, rep_dist = pairs[0]
            for origin, dist in pairs[1:]:
                weight = (dist - depth) + (rep_dist - depth)
                self.out.notices.append(Notice(ASSIGN, rep, origin, weight))
            self.out.buckets.append(Bucket(rep, tuple(group), tuple(o for o, _ in pairs)))

    def _decide(self, outbox: Outbox) -> None:
        pairs = [p for child in sorted(self.carried) for p in self.carried[child]]
        if self.is_center:
            pairs.append((self.vertex, self.node.depth))
        if self.node.depth == 0:
            self.out.role = ROOT_ROLE
            self._confirm_all(pairs)
        elif len(pairs) >= self.stride:
            if self.is_center:
                self.out.role = HUB_CENTER
                self._confirm_all(pairs)
            else:
                self.out.role = HUB_SPLIT
                self._split()
        else:
            self.outgoing.extend(sorted(pairs))
        for (a, b), weight in sorted(self.out.edges.items()):
            outbox.insert(a, b, weight)

    def on_round(self, round_no: int, inbox: Inbox) -> Outbox:
        outbox = Outbox()
        self._receive(inbox)
        if round_no == self.act_round:
            self._decide(outbox)
        if self.outgoing and round_no >= self.act_round:
            origin, dist = self.outgoing.popleft()
            outbox.send(self.node.parent, Message(CARRY, (origin, dist)))
        return outbox

    def next_wakeup(self, after: int) -> Optional[int]:
        if self.act_round is None:
            return None
        if after < self.act_round:
            return self.act_round
        if self.outgoing:
            return after + 1
        return None

    def result(self) -> BacktrackResult:
        return self.out


def backtrack_budget(depth_limit: int, stride: int) -> int:
    return depth_limit * stride


@dataclass
class NotifyResult:
    vertex: int
    new_center: Optional[int] = None
    edges: Dict[Edge, int] = field(default_factory=dict)


class NotifyProgram(NodeProgram):
    """Routes confirmations down the forest, one message per child edge per round"""

    def __init__(self, vertex: int, neighbors: Sequence[int], backtracked: BacktrackResult):
        super().__init__(vertex, neighbors)
        self.routes = backtracked.routes
        self.queues: Dict[int, Deque[Notice]] = {}
        self.out = NotifyResult(vertex)
        if backtracked.role in (ROOT_ROLE, HUB_CENTER):
            self.out.new_center = vertex
        for notice in backtracked.notices:
            missing = {notice.target, notice.center} - set(self.routes) - {vertex}
            if missing:
                raise InvariantError(f"vertex {vertex} has no route to {sorted(missing)}")
            self._route(notice)

    def _route(self, notice: Notice) -> None:
        # an ASSIGN notice forks where the paths to its two endpoints part
        targets = {notice.target}
        if notice.tag == ASSIGN:
            targets.add(notice.center)
        targets.discard(self.vertex)
        for child in sorted({self.routes[t] for t in targets if t in self.routes}):
            self.queues.setdefault(child, deque()).append(notice)

    def on_round(self, round_no: int, inbox: Inbox) -> Outbox:
        outbox = Outbox()
        for _, message in inbox:
            notice = Notice(message.tag, *message.words)
            v = self.vertex
            if v in (notice.target, notice.center):
                edge = normalize_edge(notice.center, notice.target)
                self.out.edges[edge] = notice.weight
                self.out.new_center = notice.center
                outbox.insert(edge[0], edge[1], notice.weight)
            self._route(notice)
        for child in sorted(self.queues):
            queue = self.queues[child]
            if queue:
                outbox.send(child, queue.popleft().message())
        return outbox

    def next_wakeup(self, after: int) -> Optional[int]:
        if any(self.queues.values()):
            return after + 1
        return None

    def result(self) -> NotifyResult:
        return self.out


def notify_budget(depth_limit: int, stride: int) -> int:
    return depth_limit + 3 * stride


@dataclass
class SuperclusterOutcome:
    """New centers, what each absorbed and the edges every vertex learned"""

    forest: Dict[int, ForestNode]
    new_center_of: Dict[int, int]
    kinds: Dict[int, str]
    knowledge: Dict[int, Dict[Edge, int]]
    hubs: int = 0

    @property
    def forest_edges(self) -> int:
        return sum(1 for node in self.forest.values() if node.parent is not None)

    def absorbed_by(self) -> Dict[int, List[int]]:
        groups: Dict[int, List[int]] = {}
        for old, new in sorted(self.new_center_of.items()):
            groups.setdefault(new, []).append(old)
        return groups


def grow_forest_and_supercluster(
    runner: CongestRunner,
    ruling: Sequence[int],
    centers: Sequence[int],
    depth_limit: int,
    degree_ceil: int,
    label: str = "supercluster",
) -> SuperclusterOutcome:
    """Hub-splitting superclustering around the ruling set"""
    center_set = frozenset(centers)
    stride = backtrack_stride(degree_ceil)
    forest = grow_forest(runner, ruling, depth_limit, f"{label}/forest")

    def backtrack(v: int, neighbors: Sequence[int]) -> BacktrackProgram:
        return BacktrackProgram(v, neighbors, forest[v], v in center_set, depth_limit, stride)

    backtracked: Dict[int, BacktrackResult] = runner.run(
        f"{label}/backtrack", backtrack, backtrack_budget(depth_limit, stride)
    )

    def notify(v: int, neighbors: Sequence[int]) -> NotifyProgram:
        return NotifyProgram(v, neighbors, backtracked[v])

    notified: Dict[int, NotifyResult] = runner.run(
        f"{label}/notify", notify, notify_budget(depth_limit, stride)
    )

    kinds: Dict[int, str] = {}
    hubs = 0
    for v, result in backtracked.items():
        if result.role is not None and result.role != ROOT_ROLE:
            hubs += 1
        if result.role == ROOT_ROLE:
            kinds[v] = ROOT
        elif result.role == HUB_CENTER:
            kinds[v] = HUB
        for bucket in result.buckets:
            kinds[bucket.representative] = BUCKET

    new_center_of: Dict[int, int] = {}
    knowledge: Dict[int, Dict[Edge, int]] = {}
    for v in sorted(center_set):
        center = notified[v].new_center
        if center is not None:
            new_center_of[v] = center
    for v in runner.g.vertices():
        known = dict(backtracked[v].edges)
        known.update(notified[v].edges)
        if known:
            knowledge[v] = known
    for v in center_set:
        if forest[v].in_forest and v not in new_center_of:
            raise InvariantError(f"center {v} is in the forest but was never absorbed")
    return SuperclusterOutcome(forest, new_center_of, kinds, knowledge, hubs)


class CountProgram(NodeProgram):
    """Backtracks center counts one tree level per round, keeping the edges that carry a center"""

    def __init__(self, vertex: int, neighbors: Sequence[int], node: ForestNode, is_center: bool, depth_limit: int):
        super().__init__(vertex, neighbors)
        self.node = node
        self.count = 1 if is_center else 0
        self.act_round = None if not node.in_forest else depth_limit - node.depth
        self.edges: Set[Edge] = set()

    def on_round(self, round_no: int, inbox: Inbox) -> Outbox:
        outbox = Outbox()
        for sender, message in inbox:
            self.count += message.words[0]
            edge = normalize_edge(sender, self.vertex)
            self.edges.add(edge)
            outbox.insert(edge[0], edge[1])
        if round_no == self.act_round and self.count > 0 and self.node.parent is not None:
            edge = normalize_edge(self.vertex, self.node.parent)
            self.edges.add(edge)
            outbox.insert(edge[0], edge[1])
            outbox.send(self.node.parent, Message(COUNT, (self.count,)))
        return outbox

    def next_wakeup(self, after: int) -> Optional[int]:
        if self.act_round is not None and after < self.act_round:
            return self.act_round
        return None

    def result(self) -> Tuple[int, Set[Edge]]:
        return self.count, self.edges


def count_budget(depth_limit: int) -> int:
    return depth_limit


def grow_forest_and_count(
    runner: CongestRunner,
    ruling: Sequence[int],
    centers: Sequence[int],
    depth_limit: int,
    label: str = "supercluster",
) -> Tuple[Dict[int, ForestNode], Dict[int, Tuple[int, Set[Edge]]]]:
    """One supercluster per tree; returns the forest and per-vertex (count, kept edges)"""
    center_set = frozenset(centers)
    forest = grow_forest(runner, ruling, depth_limit, f"{label}/forest")

    def factory(v: int, neighbors: Sequence[int]) -> CountProgram:
        return CountProgram(v, neighbors, forest[v], v in center_set, depth_limit)

    counted = runner.run(f"{label}/count", factory, count_budget(depth_limit))
    return forest, counted
