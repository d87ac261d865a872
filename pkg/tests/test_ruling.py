import random

import pytest

from spanemu.congest.kernel import SEQUENTIAL, SIMULATE, CongestRunner
from spanemu.congest.ruling import check_ruling_set, compute_ruling_set, digit_base, ruling_budget
from spanemu.core.graph import generate_graph
from spanemu.errors import InvariantError


def test_digit_base():
    assert digit_base(8, 1) == 8
    assert digit_base(64, 2) == 8
    assert digit_base(65, 2) == 9
    assert digit_base(1, 3) == 2
    with pytest.raises(InvariantError):
        digit_base(8, 0)


def test_cycle_one_digit():
    g = generate_graph("cycle", {"n": 8})
    runner = CongestRunner(g, SEQUENTIAL)
    selected = compute_ruling_set(runner, range(8), 2, 1)
    assert selected == [0, 3]
    check_ruling_set(g, range(8), selected, 3, 2)
    assert runner.rounds == ruling_budget(8, 1, 2)


def test_no_candidates(c5):
    runner = CongestRunner(c5, SEQUENTIAL)
    assert compute_ruling_set(runner, [], 2, 1) == []
    assert runner.rounds == 0


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("q,digits", [(1, 1), (2, 2), (3, 2), (4, 3)])
def test_random_candidates(seed, q, digits):
    g = generate_graph("erdos_renyi", {"n": 30, "p": 0.12}, seed=seed)
    rng = random.Random(seed)
    candidates = sorted(rng.sample(range(30), 12))
    runner = CongestRunner(g, SIMULATE, workers=2)
    selected = compute_ruling_set(runner, candidates, q, digits)
    assert selected
    check_ruling_set(g, candidates, selected, q + 1, digits * q)


def test_check_ruling_set_rejects_close_pair():
    g = generate_graph("path", {"n": 4})
    with pytest.raises(InvariantError, match="closer"):
        check_ruling_set(g, [0, 1, 3], [0, 1], 2, 2)


def test_check_ruling_set_rejects_uncovered_candidate():
    g = generate_graph("path", {"n": 6})
    with pytest.raises(InvariantError, match="farther"):
        check_ruling_set(g, [0, 5], [0], 2, 3)


def test_check_ruling_set_rejects_non_candidate():
    g = generate_graph("path", {"n": 4})
    with pytest.raises(InvariantError, match="non-candidate"):
        check_ruling_set(g, [0], [2], 2, 3)


@pytest.mark.parametrize("seed", range(50))
def test_random_candidates_on_larger_graphs(seed):
    n = 64 + 9 * seed
    g = generate_graph("erdos_renyi", {"n": n, "p": 3 / n}, seed=seed)
    rng = random.Random(1000 + seed)
    candidates = sorted(rng.sample(range(n), rng.randint(1, n // 3)))
    q, digits = 1 + seed % 4, 1 + seed % 3
    runner = CongestRunner(g, SEQUENTIAL)
    selected = compute_ruling_set(runner, candidates, q, digits)
    assert n <= 512
    assert selected
    check_ruling_set(g, candidates, selected, q + 1, digits * q)
    assert runner.rounds == ruling_budget(n, digits, q)
