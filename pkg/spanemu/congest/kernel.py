#!/usr/bin/env python3

"""
Round-synchronous CONGEST simulator

Every node runs a NodeProgram. A message sent in round r crosses its edge
during round r and is handed to the receiver's handler at round r + 1, so
a run lasts one round more than the last round in which anything was
sent. Each node may send at most one message of at most word_limit words
over each incident edge per round. Rounds in which no node has mail or a
scheduled wake-up are skipped without running any handler.
"""

import heapq
import json
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from ..core.graph import Graph
from ..errors import BandwidthViolation, InvariantError, RoundCapExceeded

DEFAULT_WORD_LIMIT = 4
DEFAULT_ROUND_CAP = 10 ** 18
DEFAULT_WORKERS = 4

SIMULATE = "sim"
SEQUENTIAL = "seq"
MODES = (SIMULATE, SEQUENTIAL)


@dataclass(frozen=True)
class Message:
    """A protocol message: a small tag plus a few machine words"""

    tag: int
    words: Tuple[int, ...]


Inbox = List[Tuple[int, Message]]


@dataclass
class Outbox:
    """What a node hands back after one round"""

    messages: List[Tuple[int, Message]] = field(default_factory=list)
    edges: List[Tuple[int, int, int]] = field(default_factory=list)

    def send(self, neighbor: int, message: Message) -> None:
        self.messages.append((neighbor, message))

    def insert(self, u: int, v: int, weight: int = 1) -> None:
        """Record a local emulator or spanner edge insertion"""
        self.edges.append((u, v, weight))


class NodeProgram:
    """Per-node protocol state

    Subclasses override on_round and, unless they only react to mail,
    next_wakeup. A handler must read nothing but its own state and inbox.
    """

    def __init__(self, vertex: int, neighbors: Sequence[int]):
        self.vertex = vertex
        self.neighbors = tuple(neighbors)
        self.halted = False

    def vote_to_halt(self) -> None:
        self.halted = True

    def send_to_all_neighbors(self, outbox: Outbox, message: Message) -> None:
        for neighbor in self.neighbors:
            outbox.send(neighbor, message)

    def on_round(self, round_no: int, inbox: Inbox) -> Outbox:
        raise NotImplementedError

    def next_wakeup(self, after: int) -> Optional[int]:
        """First round > after in which the node must run without mail; None if never"""
        return None

    def result(self) -> Any:
        return None


ProgramFactory = Callable[[int, Sequence[int]], NodeProgram]


@dataclass
class RoundLoad:
    round: int
    messages: int
    words: int
    max_edge_load: int
    max_words: int
    histogram: Dict[int, int] = field(default_factory=dict)


@dataclass
class SimEvent:
    round: int
    vertex: int
    u: int
    v: int
    weight: int
    stage: str


@dataclass
class StageRecord:
    label: str
    start: int
    rounds: int
    budget: Optional[int]
    messages: int


@dataclass
class SimTranscript:
    """Round and bandwidth accounting of one or more simulated stages"""

    rounds_executed: int = 0
    loads: List[RoundLoad] = field(default_factory=list)
    events: List[SimEvent] = field(default_factory=list)
    stages: List[StageRecord] = field(default_factory=list)

    @property
    def messages_total(self) -> int:
        return sum(load.messages for load in self.loads)

    @property
    def max_edge_load(self) -> int:
        return max((load.max_edge_load for load in self.loads), default=0)

    @property
    def max_words(self) -> int:
        return max((load.max_words for load in self.loads), default=0)

    def append_stage(self, label: str, stage: "SimTranscript", budget: Optional[int] = None) -> None:
        """Append a stage's transcript, shifting its rounds onto the global clock

        With a budget the clock advances by the whole budget: nodes idle
        until the stage boundary whether or not they had anything to send.
        """
        offset = self.rounds_executed
        for load in stage.loads:
            self.loads.append(RoundLoad(load.round + offset, load.messages, load.words,
                                        load.max_edge_load, load.max_words, dict(load.histogram)))
        for event in stage.events:
            self.events.append(SimEvent(event.round + offset, event.vertex, event.u, event.v,
                                        event.weight, label))
        self.stages.append(StageRecord(label, offset, stage.rounds_executed, budget, stage.messages_total))
        self.rounds_executed += stage.rounds_executed if budget is None else budget

    def to_jsonl(self) -> List[str]:
        lines = [json.dumps({"record": "summary", "schema_version": 1,
                             "rounds_executed": self.rounds_executed,
                             "messages": self.messages_total,
                             "max_edge_load": self.max_edge_load,
                             "max_words": self.max_words}, sort_keys=True)]
        lines.extend(json.dumps({"record": "stage", **asdict(s)}, sort_keys=True) for s in self.stages)
        for load in self.loads:
            histogram = {str(k): c for k, c in sorted(load.histogram.items())}
            data = {"record": "round", **asdict(load), "histogram": histogram}
            lines.append(json.dumps(data, sort_keys=True))
        lines.extend(json.dumps({"record": "event", **asdict(e)}, sort_keys=True) for e in self.events)
        return lines


def _execute(
    g: Graph,
    factory: ProgramFactory,
    round_cap: int,
    word_limit: int,
    pool: Optional[ThreadPoolExecutor],
) -> Tuple[Dict[int, Any], SimTranscript]:
    if round_cap <= 0:
        raise InvariantError(f"round cap must be positive, got {round_cap}")
    programs = [factory(v, g.neighbors(v)) for v in g.vertices()]
    neighbor_sets = [frozenset(g.neighbors(v)) for v in g.vertices()]
    transcript = SimTranscript()
    wake: Dict[int, int] = {}
    heap: List[Tuple[int, int]] = []

    def schedule(v: int, after: int) -> None:
        wake.pop(v, None)
        nxt = programs[v].next_wakeup(after)
        if nxt is None:
            return
        if nxt <= after:
            raise InvariantError(f"node {v} asked to wake at round {nxt} after round {after}")
        wake[v] = nxt
        heapq.heappush(heap, (nxt, v))

    for v in g.vertices():
        schedule(v, -1)

    pending: Dict[int, Inbox] = {}
    last_round = -1
    last_send = -1
    while True:
        if pending:
            r = last_round + 1
        else:
            while heap and wake.get(heap[0][1]) != heap[0][0]:
                heapq.heappop(heap)
            if not heap:
                break
            r = heap[0][0]
        if r > round_cap:
            transcript.rounds_executed = last_send + 1
            raise RoundCapExceeded(round_cap, transcript)

        due = set(pending)
        while heap and heap[0][0] <= r:
            w, v = heapq.heappop(heap)
            if wake.get(v) == w:
                due.add(v)
                del wake[v]
        order = sorted(due)
        inboxes, pending = pending, {}

        def step(v: int) -> Outbox:
            return programs[v].on_round(r, inboxes.get(v, []))

        if pool is not None and len(order) > 1:
            outboxes = list(pool.map(step, order))
        else:
            outboxes = [step(v) for v in order]

        messages = words = max_words = 0
        edge_load: Counter = Counter()
        for v, outbox in zip(order, outboxes):
            for neighbor, message in outbox.messages:
                if neighbor not in neighbor_sets[v]:
                    raise BandwidthViolation("message to a non-neighbor", r, (v, neighbor))
                if len(message.words) > word_limit:
                    raise BandwidthViolation(
                        f"message of {len(message.words)} words exceeds the limit of {word_limit}",
                        r,
                        (v, neighbor),
                    )
                edge_load[(v, neighbor)] += 1
                pending.setdefault(neighbor, []).append((v, message))
                messages += 1
                words += len(message.words)
                max_words = max(max_words, len(message.words))
            for a, b, weight in outbox.edges:
                transcript.events.append(SimEvent(r, v, a, b, weight, ""))
        if messages:
            histogram = Counter(edge_load.values())
            busiest = max(histogram)
            if busiest > 1:
                edge = min(e for e, load in edge_load.items() if load == busiest)
                raise BandwidthViolation(f"{busiest} messages on one edge in one round", r, edge)
            if r >= round_cap:
                transcript.rounds_executed = last_send + 1
                raise RoundCapExceeded(round_cap, transcript)
            transcript.loads.append(RoundLoad(r, messages, words, busiest, max_words, dict(histogram)))
            last_send = r

        for v in order:
            if programs[v].halted:
                wake.pop(v, None)
            else:
                schedule(v, r)
        last_round = r

    transcript.rounds_executed = last_send + 1
    return {v: programs[v].result() for v in g.vertices()}, transcript


def simulate(
    g: Graph,
    factory: ProgramFactory,
    round_cap: int = DEFAULT_ROUND_CAP,
    word_limit: int = DEFAULT_WORD_LIMIT,
    workers: int = DEFAULT_WORKERS,
) -> Tuple[Dict[int, Any], SimTranscript]:
    """Run one program per node, handlers of a round on a thread pool"""
    if workers <= 1:
        return _execute(g, factory, round_cap, word_limit, None)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return _execute(g, factory, round_cap, word_limit, pool)


def run_sequentially(
    g: Graph,
    factory: ProgramFactory,
    round_cap: int = DEFAULT_ROUND_CAP,
    word_limit: int = DEFAULT_WORD_LIMIT,
) -> Tuple[Dict[int, Any], SimTranscript]:
    """Same scheduler as simulate, all handlers on the calling thread"""
    return _execute(g, factory, round_cap, word_limit, None)


class CongestRunner:
    """Runs protocol stages back to back on one global clock"""

    def __init__(
        self,
        g: Graph,
        mode: str = SIMULATE,
        word_limit: int = DEFAULT_WORD_LIMIT,
        round_cap: int = DEFAULT_ROUND_CAP,
        workers: int = DEFAULT_WORKERS,
    ):
        if mode not in MODES:
            raise InvariantError(f"unknown simulation mode: {mode}")
        self.g = g
        self.mode = mode
        self.word_limit = word_limit
        self.round_cap = round_cap
        self.workers = workers
        self.transcript = SimTranscript()

    def run(self, label: str, factory: ProgramFactory, budget: int) -> Dict[int, Any]:
        """Run one stage; its programs must stop sending by round budget - 1"""
        if self.transcript.rounds_executed + budget > self.round_cap:
            raise RoundCapExceeded(self.round_cap, self.transcript)
        try:
            if self.mode == SIMULATE:
                outputs, stage = simulate(self.g, factory, budget, self.word_limit, self.workers)
            else:
                outputs, stage = run_sequentially(self.g, factory, budget, self.word_limit)
        except RoundCapExceeded as e:
            raise InvariantError(f"stage {label} overran its budget of {budget} rounds") from e
        self.transcript.append_stage(label, stage, budget)
        return outputs

    @property
    def rounds(self) -> int:
        return self.transcript.rounds_executed
