from hypothesis import given, strategies as st

from spanemu.congest.forest import (
    backtrack_stride,
    grow_forest,
    grow_forest_and_count,
    grow_forest_and_supercluster,
    split_into_buckets,
)
from spanemu.congest.kernel import SEQUENTIAL, CongestRunner
from spanemu.core.graph import Graph, bfs_distances, generate_graph
from spanemu.core.transcript import BUCKET, HUB, ROOT


def pairs(count, origin=0):
    return [(origin + k, 1) for k in range(count)]


def test_split_groups_children_in_id_order():
    carried = {1: pairs(2), 2: pairs(1), 3: pairs(3)}
    assert split_into_buckets(carried, 3) == [[1, 2], [3]]


def test_split_merges_a_light_tail():
    carried = {1: pairs(3), 2: pairs(1)}
    assert split_into_buckets(carried, 3) == [[1, 2]]


def test_split_below_threshold_keeps_one_group():
    assert split_into_buckets({5: pairs(1)}, 4) == [[5]]


@given(
    loads=st.dictionaries(st.integers(0, 50), st.integers(1, 6), min_size=1, max_size=12),
    threshold=st.integers(1, 10),
)
def test_split_properties(loads, threshold):
    carried = {child: pairs(count) for child, count in loads.items()}
    groups = split_into_buckets(carried, threshold)
    flat = [child for group in groups for child in group]
    assert flat == sorted(carried)
    total = sum(loads.values())
    if total >= threshold:
        assert all(sum(loads[c] for c in group) >= threshold for group in groups)
    else:
        assert len(groups) == 1


def test_backtrack_stride():
    assert backtrack_stride(3) == 8


def test_grow_forest_depth_limit():
    g = generate_graph("path", {"n": 6})
    forest = grow_forest(CongestRunner(g, SEQUENTIAL), [0], 3)
    assert [forest[v].depth for v in range(4)] == [0, 1, 2, 3]
    assert forest[3].parent == 2
    assert forest[0].children == (1,)
    assert not forest[4].in_forest
    assert not forest[5].in_forest


def test_grow_forest_prefers_lower_root():
    g = generate_graph("path", {"n": 5})
    forest = grow_forest(CongestRunner(g, SEQUENTIAL), [0, 4], 2)
    assert (forest[2].root, forest[2].parent) == (0, 1)
    assert forest[3].root == 4
    assert forest[1].children == (2,)
    assert forest[3].children == ()


def test_forest_depths_are_distances():
    g = generate_graph("grid", {"rows": 5, "cols": 5})
    roots = [0, 24]
    forest = grow_forest(CongestRunner(g, SEQUENTIAL), roots, 4)
    for v in g.vertices():
        node = forest[v]
        nearest = min(bfs_distances(g, r).dist[v] for r in roots)
        if nearest <= 4:
            assert node.depth == nearest
            if node.parent is not None:
                assert g.has_edge(v, node.parent)
                assert forest[node.parent].depth == node.depth - 1
        else:
            assert not node.in_forest


def test_count_keeps_one_tree_per_root():
    g = generate_graph("path", {"n": 7})
    centers = list(range(7))
    forest, counted = grow_forest_and_count(CongestRunner(g, SEQUENTIAL), [3], centers, 3)
    assert all(forest[v].root == 3 for v in centers)
    count, edges = counted[3]
    assert count == 7
    assert edges == {(2, 3), (3, 4)}
    assert counted[0] == (1, {(0, 1)})


def test_star_supercluster_at_the_root(star8):
    centers = list(range(9))
    outcome = grow_forest_and_supercluster(CongestRunner(star8, SEQUENTIAL), [0], centers, 2, 3)
    assert outcome.new_center_of == {v: 0 for v in centers}
    assert outcome.kinds.get(0) == ROOT
    assert outcome.hubs == 0
    assert outcome.forest_edges == 8
    for leaf in range(1, 9):
        assert outcome.knowledge[leaf][(0, leaf)] == 1
        assert outcome.knowledge[0][(0, leaf)] == 1


def test_hub_splitting_on_a_broom():
    # a long handle 0..3 and 10 bristles on vertex 3; the root sits at the end of the handle
    edges = [(0, 1), (1, 2), (2, 3)] + [(3, b) for b in range(4, 14)]
    g = Graph(14, edges)
    centers = list(range(3, 14))
    outcome = grow_forest_and_supercluster(CongestRunner(g, SEQUENTIAL), [0], centers, 4, 2)
    assert set(outcome.new_center_of) == set(centers)
    assert outcome.kinds[3] == HUB
    assert outcome.hubs == 1
    groups = outcome.absorbed_by()
    assert sum(len(olds) for olds in groups.values()) == len(centers)
    for new_center, olds in groups.items():
        kind = outcome.kinds.get(new_center)
        if kind in (HUB, BUCKET):
            assert len(olds) >= backtrack_stride(2)


def test_hub_split_into_one_bucket():
    # same broom, but the hub vertex 3 is not a center and must split
    edges = [(0, 1), (1, 2), (2, 3)] + [(3, b) for b in range(4, 14)]
    g = Graph(14, edges)
    centers = list(range(4, 14))
    outcome = grow_forest_and_supercluster(CongestRunner(g, SEQUENTIAL), [0], centers, 4, 2)
    assert outcome.new_center_of == {v: 4 for v in centers}
    assert outcome.kinds == {0: ROOT, 4: BUCKET}
    assert outcome.hubs == 1
    for bristle in range(5, 14):
        assert outcome.knowledge[4][(4, bristle)] == 2
        assert outcome.knowledge[bristle][(4, bristle)] == 2
    assert 3 not in outcome.knowledge
