import pytest
from hypothesis import given, settings, strategies as st

from spanemu.core.centralized import build_emulator, charge_report, initial_state, run_phase
from spanemu.core.graph import EMULATOR, Graph, WeightedEdgeSet, bfs_distances, generate_graph
from spanemu.core.schedule import CENTRALIZED, Config, centralized_schedule
from spanemu.core.transcript import INTERCONNECT, SUPERCLUSTER_EDGE, BuildTranscript
from spanemu.errors import InvalidConfigError, InvariantError


def build(g, kappa=2, eps=0.5):
    cfg = Config(n=g.n, eps_user=eps, kappa=kappa)
    h, t = build_emulator(g, cfg)
    return h, t, centralized_schedule(cfg)


def test_cycle_keeps_every_edge(c5):
    h, t, s = build(c5)
    assert sorted(e for e, _ in h.items()) == sorted(c5.edges)
    assert all(w == 1 for _, w in h.items())
    assert t.phases[0].superclusters == []
    assert len(t.phases[0].unclustered) == 5


def test_cycle_charges(c5):
    _, t, s = build(c5)
    report = charge_report(t, s)
    assert report.charges(5) == [2, 1, 1, 1, 0]
    assert report.total == 5
    assert report.balanced


def test_star_center_first(star8):
    h, t, s = build(star8)
    assert len(h) == 8
    assert all(w == 1 for _, w in h.items())
    first = t.phases[0]
    assert first.unclustered == []
    assert len(first.superclusters) == 1
    supercluster = t.clusters[first.superclusters[0]]
    assert supercluster.center == 0
    assert supercluster.members == frozenset(range(9))
    assert len(supercluster.children) == 9
    assert {e.kind for e in t.events if e.edge is not None} == {SUPERCLUSTER_EDGE}

    report = charge_report(t, s)
    assert report.charges(9) == [0] + [1] * 8
    assert report.balanced


def test_star_center_last():
    # relabel so that the center has the largest id
    g = Graph(9, [(v, 8) for v in range(8)])
    h, t, s = build(g)
    assert t.phases[0].superclusters == []
    assert len(t.phases[0].unclustered) == 9
    assert len(h) == 8
    center_events = [e for e in t.events if e.kind == INTERCONNECT and e.charged == 8]
    assert center_events == []


def test_edgeless_graph():
    h, t, _ = build(Graph(6))
    assert len(h) == 0
    assert len(t.phases[0].unclustered) == 6


def test_buffered_centers_join():
    # deg_0 = 5^(1/3) < 3, so center 0 is popular; 4 hangs off leaf 3
    g = Graph(5, [(0, 1), (0, 2), (0, 3), (3, 4)])
    h, t, s = build(g, kappa=3)
    first = t.phases[0]
    assert len(first.superclusters) == 1
    supercluster = t.clusters[first.superclusters[0]]
    assert supercluster.members == frozenset(range(5))
    assert first.buffered == 1
    assert h.weight(0, 4) == 2


def test_rejects_mismatched_config(c5):
    with pytest.raises(InvalidConfigError):
        build_emulator(c5, Config(n=6, eps_user=0.5, kappa=2))


def test_transcript_round_trip(star8):
    h, t, _ = build(star8)
    again = BuildTranscript.from_jsonl(t.to_jsonl())
    assert again.edge_set() == h
    assert again.to_jsonl() == t.to_jsonl()


@settings(max_examples=30, deadline=None)
@given(
    n=st.integers(min_value=1, max_value=30),
    p=st.floats(min_value=0.0, max_value=0.6),
    seed=st.integers(0, 10 ** 6),
    kappa=st.integers(min_value=2, max_value=5),
)
def test_emulator_properties(n, p, seed, kappa):
    g = generate_graph("erdos_renyi", {"n": n, "p": p}, seed=seed)
    h, t, s = build(g, kappa=kappa)
    assert len(h) ** kappa <= n ** (kappa + 1)
    for (u, v), w in h.items():
        assert w == bfs_distances(g, u).dist[v]
    report = charge_report(t, s)
    assert report.total == len(h)
    assert report.balanced
    assert t.edge_set() == h


def test_run_phase_step_by_step(star8):
    s = centralized_schedule(Config(n=9, eps_user=0.5, kappa=2))
    t = BuildTranscript(CENTRALIZED, 9, s.to_dict())
    h = WeightedEdgeSet(EMULATOR)
    st = run_phase(star8, s, initial_state(t), h, t)
    assert st.phase == 1
    assert len(st.P) == 1
    assert t.clusters[st.P[0]].members == frozenset(range(9))
    assert len(h) == 8

    st = run_phase(star8, s, st, h, t)
    assert (st.phase, st.P) == (2, [])
    assert len(t.phases[1].unclustered) == 1
    assert len(h) == 8
    with pytest.raises(InvariantError):
        run_phase(star8, s, st, h, t)
