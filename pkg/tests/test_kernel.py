import pytest

from spanemu.congest.kernel import (
    SEQUENTIAL,
    SIMULATE,
    CongestRunner,
    Message,
    NodeProgram,
    Outbox,
    RoundLoad,
    SimTranscript,
    run_sequentially,
    simulate,
)
from spanemu.core.graph import Graph, generate_graph
from spanemu.core.verification import verify_bandwidth
from spanemu.errors import BandwidthViolation, InvariantError, RoundCapExceeded


class Flood(NodeProgram):
    """BFS flood from vertex 0; each node remembers the round it was reached"""

    def __init__(self, vertex, neighbors):
        super().__init__(vertex, neighbors)
        self.reached = 0 if vertex == 0 else None

    def on_round(self, round_no, inbox):
        outbox = Outbox()
        if self.vertex == 0 and round_no == 0:
            self.send_to_all_neighbors(outbox, Message(1, (0,)))
        elif inbox and self.reached is None:
            self.reached = round_no
            self.send_to_all_neighbors(outbox, Message(1, (round_no,)))
        self.vote_to_halt()
        return outbox

    def next_wakeup(self, after):
        return 0 if self.vertex == 0 and after < 0 else None

    def result(self):
        return self.reached


class FloodEcho(NodeProgram):
    """Flood a tree from vertex 0, then echo back once every child has answered"""

    def __init__(self, vertex, neighbors):
        super().__init__(vertex, neighbors)
        self.parent = None
        self.waiting = None
        self.done = False

    def on_round(self, round_no, inbox):
        outbox = Outbox()
        if self.vertex == 0 and round_no == 0:
            self.waiting = set(self.neighbors)
            self.send_to_all_neighbors(outbox, Message(1, ()))
        for sender, message in inbox:
            if message.tag == 1 and self.waiting is None:
                self.parent = sender
                self.waiting = set(self.neighbors) - {sender}
                for w in sorted(self.waiting):
                    outbox.send(w, Message(1, ()))
            elif message.tag == 2 or (message.tag == 1 and sender in (self.waiting or ())):
                self.waiting.discard(sender)
        if self.waiting is not None and not self.waiting and not self.done:
            self.done = True
            if self.parent is not None:
                outbox.send(self.parent, Message(2, ()))
        return outbox

    def next_wakeup(self, after):
        return 0 if self.vertex == 0 and after < 0 else None

    def result(self):
        return self.done


class Sender(NodeProgram):
    """Vertex 0 sends the given messages at round 0"""

    messages = ()

    def on_round(self, round_no, inbox):
        outbox = Outbox()
        if self.vertex == 0 and round_no == 0:
            for neighbor, message in self.messages:
                outbox.send(neighbor, message)
        return outbox

    def next_wakeup(self, after):
        return 0 if self.vertex == 0 and after < 0 else None


def sender(messages):
    return type("ScriptedSender", (Sender,), {"messages": tuple(messages)})


def test_single_message_takes_one_round():
    g = Graph(2, [(0, 1)])
    _, sim = run_sequentially(g, sender([(1, Message(0, (7,)))]))
    assert sim.rounds_executed == 1
    assert sim.messages_total == 1


def test_no_messages_no_rounds():
    _, sim = run_sequentially(Graph(3, [(0, 1)]), sender([]))
    assert sim.rounds_executed == 0


def test_two_messages_on_one_edge():
    g = Graph(2, [(0, 1)])
    with pytest.raises(BandwidthViolation) as e:
        run_sequentially(g, sender([(1, Message(0, (1,))), (1, Message(0, (2,)))]))
    assert e.value.round_no == 0
    assert e.value.edge == (0, 1)


def test_message_to_non_neighbor():
    g = Graph(3, [(0, 1), (1, 2)])
    with pytest.raises(BandwidthViolation, match="non-neighbor"):
        run_sequentially(g, sender([(2, Message(0, ()))]))


def test_word_limit():
    g = Graph(2, [(0, 1)])
    with pytest.raises(BandwidthViolation, match="words"):
        run_sequentially(g, sender([(1, Message(0, (1, 2, 3, 4, 5)))]))
    _, sim = run_sequentially(g, sender([(1, Message(0, (1, 2, 3, 4, 5)))]), word_limit=5)
    assert sim.max_words == 5


def test_cycle_flood(c5):
    reached, sim = run_sequentially(c5, Flood)
    assert reached == {0: 0, 1: 1, 2: 2, 3: 2, 4: 1}
    assert sim.rounds_executed == 3


def test_path_flood_echo():
    g = generate_graph("path", {"n": 5})
    done, sim = run_sequentially(g, FloodEcho)
    assert all(done.values())
    # four rounds out, four rounds back
    assert sim.rounds_executed == 8


def test_simulate_matches_sequential():
    g = generate_graph("erdos_renyi", {"n": 40, "p": 0.1}, seed=3)
    seq_out, seq_sim = run_sequentially(g, Flood)
    sim_out, sim_sim = simulate(g, Flood, workers=4)
    assert seq_out == sim_out
    assert seq_sim == sim_sim


def test_round_cap():
    g = generate_graph("path", {"n": 5})
    with pytest.raises(RoundCapExceeded):
        run_sequentially(g, Flood, round_cap=2)


def test_runner_advances_by_budget(c5):
    runner = CongestRunner(c5, SEQUENTIAL)
    runner.run("first", Flood, 5)
    runner.run("second", Flood, 4)
    assert runner.rounds == 9
    first, second = runner.transcript.stages
    assert (first.start, first.rounds, first.budget) == (0, 3, 5)
    assert (second.start, second.rounds, second.budget) == (5, 3, 4)
    assert [load.round for load in runner.transcript.loads] == [0, 1, 2, 5, 6, 7]


def test_runner_rejects_overrun(c5):
    runner = CongestRunner(c5, SIMULATE, workers=2)
    with pytest.raises(InvariantError, match="overran"):
        runner.run("short", Flood, 2)


def test_runner_round_cap(c5):
    runner = CongestRunner(c5, SEQUENTIAL, round_cap=6)
    runner.run("first", Flood, 5)
    with pytest.raises(RoundCapExceeded):
        runner.run("second", Flood, 5)


def test_bandwidth_report(c5):
    _, sim = run_sequentially(c5, Flood)
    report = verify_bandwidth(sim, 4)
    assert report.passed
    assert report.rounds == 3
    assert report.max_words == 1

    broken = SimTranscript(rounds_executed=1, loads=[RoundLoad(0, 2, 2, 2, 1)])
    assert not verify_bandwidth(broken, 4).passed


def test_transcript_lines(c5):
    runner = CongestRunner(c5, SEQUENTIAL)
    runner.run("flood", Flood, 4)
    lines = runner.transcript.to_jsonl()
    assert '"rounds_executed": 4' in lines[0]
    assert '"label": "flood"' in lines[1]


def test_edge_loads_are_measured():
    g = generate_graph("star", {"leaves": 3})
    _, sim = run_sequentially(g, sender([(v, Message(0, (v,))) for v in (1, 2, 3)]))
    load = sim.loads[0]
    assert (load.messages, load.max_edge_load, load.histogram) == (3, 1, {1: 3})
    assert sim.max_edge_load == 1
    line = next(text for text in sim.to_jsonl() if '"record": "round"' in text)
    assert '"histogram": {"1": 3}' in line


def test_edge_load_in_violation_message():
    g = Graph(2, [(0, 1)])
    messages = [(1, Message(0, (k,))) for k in range(3)]
    with pytest.raises(BandwidthViolation, match="3 messages on one edge"):
        run_sequentially(g, sender(messages))
