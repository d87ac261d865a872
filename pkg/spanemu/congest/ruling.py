#!/usr/bin/env python3

"""
Deterministic ruling sets by ID digits

IDs are written with t digits in base B (B ** t >= n). Level k merges the
groups of candidates that agree on digits k.. and above: for each digit
value b in turn, candidates whose k-th digit is b and that no accepted
candidate of this level has covered are accepted, and each accepted
candidate covers every vertex within q hops. Covered candidates drop out.
After t levels the survivors are pairwise more than q apart and every
candidate is within t * q of one.
"""

from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence

from ..core.graph import Graph, bfs_distances
from ..errors import InvariantError
from .kernel import CongestRunner, Inbox, Message, NodeProgram, Outbox

COVER = 2


def digit_base(n: int, digits: int) -> int:
    """Smallest B >= 2 with B ** digits >= n"""
    if digits < 1:
        raise InvariantError(f"need at least one digit, got {digits}")
    base = 2
    while base ** digits < n:
        base += 1
    return base


@dataclass
class RulingState:
    vertex: int
    candidate: bool
    selected: bool
    dropped_at_level: Optional[int] = None


def ruling_budget(n: int, digits: int, q: int) -> int:
    return digits * digit_base(n, digits) * q


class RulingProgram(NodeProgram):
    def __init__(
        self, vertex: int, neighbors: Sequence[int], candidate: bool, n: int, digits: int, q: int
    ):
        super().__init__(vertex, neighbors)
        if q < 1:
            raise InvariantError(f"cover radius must be positive, got {q}")
        self.candidate = candidate
        self.alive = candidate
        self.digits = digits
        self.base = digit_base(n, digits)
        self.q = q
        self.covered_level = -1
        self.forwarded_step = -1
        self.dropped_at_level: Optional[int] = None

    def _digit(self, k: int) -> int:
        return (self.vertex // self.base ** k) % self.base

    def _start(self, k: int) -> int:
        return (k * self.base + self._digit(k)) * self.q

    def on_round(self, round_no: int, inbox: Inbox) -> Outbox:
        outbox = Outbox()
        if inbox:
            step = (round_no - 1) // self.q
            self.covered_level = max(self.covered_level, step // self.base)
            remaining = max(message.words[0] for _, message in inbox)
            if remaining > 0 and self.forwarded_step != step:
                self.forwarded_step = step
                self.send_to_all_neighbors(outbox, Message(COVER, (remaining - 1,)))

        if self.alive and round_no % self.q == 0:
            k = round_no // self.q // self.base
            if k < self.digits and round_no == self._start(k):
                if self.covered_level == k:
                    self.alive = False
                    self.dropped_at_level = k
                elif self.forwarded_step != round_no // self.q:
                    self.forwarded_step = round_no // self.q
                    self.send_to_all_neighbors(outbox, Message(COVER, (self.q - 1,)))
        return outbox

    def next_wakeup(self, after: int) -> Optional[int]:
        if not self.alive:
            return None
        for k in range(self.digits):
            start = self._start(k)
            if start > after:
                return start
        return None

    def result(self) -> RulingState:
        return RulingState(self.vertex, self.candidate, self.alive, self.dropped_at_level)


def compute_ruling_set(
    runner: CongestRunner,
    candidates: Iterable[int],
    q: int,
    digits: int,
    label: str = "ruling",
) -> List[int]:
    """Select a subset of candidates pairwise more than q apart, each candidate within digits * q of it"""
    candidate_set: FrozenSet[int] = frozenset(candidates)
    n = runner.g.n

    def factory(v: int, neighbors: Sequence[int]) -> RulingProgram:
        return RulingProgram(v, neighbors, v in candidate_set, n, digits, q)

    if not candidate_set:
        return []
    states: Dict[int, RulingState] = runner.run(label, factory, ruling_budget(n, digits, q))
    return sorted(v for v, st in states.items() if st.selected)


def check_ruling_set(g: Graph, candidates: Iterable[int], selected: Iterable[int], sep: int, rul: int) -> None:
    """Brute-force separation and domination check"""
    chosen = sorted(selected)
    candidate_set = set(candidates)
    if not set(chosen) <= candidate_set:
        raise InvariantError("ruling set contains a non-candidate")
    covered = set()
    for s in chosen:
        dist = bfs_distances(g, s, max(rul, sep)).dist
        for other in chosen:
            if other != s and dist[other] is not None and dist[other] < sep:
                raise InvariantError(f"ruling vertices {s} and {other} are closer than {sep}")
        covered.update(w for w in candidate_set if dist[w] is not None and dist[w] <= rul)
    missing = sorted(candidate_set - covered)
    if missing:
        raise InvariantError(f"candidates {missing[:5]} are farther than {rul} from the ruling set")
