import pytest

from spanemu.congest.kernel import SEQUENTIAL, SIMULATE
from spanemu.congest.spanner import PathTrace, SpannerLedger, add_path, build_spanner_distributed
from spanemu.core.graph import SPANNER, Graph, WeightedEdgeSet, generate_graph
from spanemu.core.schedule import Config, spanner_schedule, stretch_budget
from spanemu.core.transcript import INTERCONNECTION, SUPERCLUSTERING
from spanemu.core.verification import verify_bandwidth, verify_soundness, verify_stretch, verify_structure
from spanemu.errors import InfeasibleScheduleError, InvariantError

GRAPHS = [
    ("grid", {"rows": 4, "cols": 4}, 0),
    ("star", {"leaves": 12}, 0),
    ("erdos_renyi", {"n": 24, "p": 0.2}, 5),
    ("hypercube", {"dim": 4}, 0),
]


def config(g, kappa=3, rho=0.45):
    return Config(n=g.n, eps_user=0.5, kappa=kappa, rho=rho, allow_infeasible=True)


def build(g, mode=SEQUENTIAL):
    cfg = config(g)
    s = spanner_schedule(cfg)
    h, sim, t = build_spanner_distributed(g, cfg, mode, s, workers=2)
    return h, sim, t, s


@pytest.mark.parametrize("family,params,seed", GRAPHS)
def test_spanner_guarantees(family, params, seed):
    g = generate_graph(family, params, seed)
    h, sim, t, s = build(g)
    assert h.mode == SPANNER
    assert all(g.has_edge(u, v) and w == 1 for (u, v), w in h.items())
    assert verify_soundness(g, h).passed
    assert verify_stretch(g, h, stretch_budget(s)).passed
    assert verify_bandwidth(sim, 4).passed
    structure = verify_structure(t, g, s)
    assert structure.passed, structure.failed
    assert t.edge_set() == h


def test_superclustering_edges_form_a_forest():
    g = generate_graph("grid", {"rows": 4, "cols": 4})
    _, _, t, s = build(g)
    for phase in s.phases():
        assert t.ledger.superclustering(phase) <= g.n - 1
    assert sum(t.ledger.superclustering(p) + t.ledger.interconnection(p) for p in s.phases()) == len(
        t.edge_set()
    )


def test_modes_agree():
    g = generate_graph("erdos_renyi", {"n": 24, "p": 0.2}, seed=5)
    h_seq, sim_seq, t_seq, _ = build(g, SEQUENTIAL)
    h_sim, sim_sim, t_sim, _ = build(g, SIMULATE)
    assert h_seq == h_sim
    assert sim_seq.to_jsonl() == sim_sim.to_jsonl()
    assert t_seq.to_jsonl() == t_sim.to_jsonl()


def test_strict_schedule_is_rejected():
    g = generate_graph("grid", {"rows": 4, "cols": 4})
    with pytest.raises(InfeasibleScheduleError):
        build_spanner_distributed(g, Config(n=g.n, eps_user=0.5, kappa=3, rho=0.45))


def test_path_trace_validation():
    g = Graph(3, [(0, 1), (1, 2)])
    PathTrace((0, 1, 2), SUPERCLUSTERING, 0).validate(g)
    with pytest.raises(InvariantError):
        PathTrace((0, 2), SUPERCLUSTERING, 0).validate(g)
    PathTrace((0, 1, 2), INTERCONNECTION, 1).validate(g, 2)
    with pytest.raises(InvariantError, match="2 hops exceeds 1"):
        PathTrace((0, 1, 2), INTERCONNECTION, 1).validate(g, 1)


def test_ledger_counts():
    ledger = SpannerLedger()
    ledger.charge(0, SUPERCLUSTERING, 3)
    ledger.charge(0, SUPERCLUSTERING, 2)
    assert ledger.superclustering(0) == 5
    assert ledger.interconnection(0) == 0


def test_add_path_skips_present_edges():
    g = generate_graph("path", {"n": 5})
    h = WeightedEdgeSet(SPANNER, graph=g)
    ledger = SpannerLedger()
    add_path(PathTrace((0, 1, 2), SUPERCLUSTERING, 0), h, ledger)
    add_path(PathTrace((4, 3, 2, 1), INTERCONNECTION, 0), h, ledger)
    assert sorted(e for e, _ in h.items()) == [(0, 1), (1, 2), (2, 3), (3, 4)]
    assert ledger.superclustering(0) == 2
    assert ledger.interconnection(0) == 2


def test_add_path_refuses_non_edges():
    g = generate_graph("path", {"n": 3})
    with pytest.raises(InvariantError):
        add_path(PathTrace((0, 2), INTERCONNECTION, 1), WeightedEdgeSet(SPANNER, graph=g))
