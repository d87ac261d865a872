from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from spanemu.core.schedule import (
    CENTRALIZED,
    DISTRIBUTED,
    SPANNER,
    Config,
    Power,
    centralized_schedule,
    distributed_schedule,
    make_schedule,
    schedule_from_dict,
    spanner_gamma,
    spanner_schedule,
    stretch_budget,
    ultra_sparse_kappa,
)
from spanemu.errors import InfeasibleScheduleError, InvalidConfigError


def test_config_rejects_bad_values():
    with pytest.raises(InvalidConfigError):
        Config(n=10, eps_user=1, kappa=2)
    with pytest.raises(InvalidConfigError):
        Config(n=10, eps_user=0.5, kappa=1)
    with pytest.raises(InvalidConfigError):
        Config(n=10, eps_user=0.5, kappa=3, rho=0.3)
    with pytest.raises(InvalidConfigError):
        Config(n=10, eps_user=0.5, kappa=3, rho=0.5)


def test_config_keeps_exact_rationals():
    cfg = Config(n=10, eps_user="0.5", kappa=3, rho=0.45)
    assert cfg.eps_user == Fraction(1, 2)
    assert cfg.rho == Fraction(9, 20)


def test_power_comparisons_are_exact():
    root = Power(25, Fraction(1, 2))
    assert root.reached_by(5)
    assert not root.reached_by(4)
    assert root.bounds(5)
    assert root.ceil() == 5
    assert Power(5, Fraction(1, 2)).ceil() == 3
    assert Power(8, Fraction(1, 3)).ceil() == 2
    assert Power(10, Fraction(-1, 2)).bounds(0)


def test_centralized_kappa_two():
    s = centralized_schedule(Config(n=25, eps_user=0.5, kappa=2))
    assert s.ell == 1
    assert [d.value for d in s.deg] == pytest.approx([5.0, 25.0])
    assert s.eps_internal == Fraction(1, 68)
    assert s.delta[0] == 1
    assert s.radius == (0, 2)


def test_centralized_kappa_four():
    s = centralized_schedule(Config(n=100, eps_user=0.5, kappa=4))
    assert s.ell == 2
    assert s.eps_internal == Fraction(1, 136)
    # delta_i = ceil(eps^-i) + 2 R_i, R_(i+1) = 2 delta_i + R_i
    assert s.delta == (1, 140, 18496 + 2 * 282)
    assert s.radius == (0, 2, 282)


def test_centralized_phase_count():
    for kappa, ell in [(2, 1), (3, 1), (4, 2), (7, 2), (8, 3), (15, 3), (16, 4)]:
        assert centralized_schedule(Config(n=50, eps_user=0.5, kappa=kappa)).ell == ell


def test_distributed_schedule():
    s = distributed_schedule(Config(n=1000, eps_user=0.5, kappa=8, rho=0.499))
    assert s.i0 == 1
    assert s.ell == 3
    assert s.eps_internal == Fraction(1, 2) * Fraction(499, 1000) / 270
    assert s.rho >= 25 * s.eps_internal
    assert s.deg[0].exponent == Fraction(1, 8)
    assert s.deg[1].exponent == Fraction(1, 4)
    assert s.deg[2].exponent == s.rho
    assert s.sep == tuple(2 * d + 1 for d in s.delta)


def test_distributed_small_kappa_rho_product():
    # kappa * rho < 2 leaves no exponential-growth phase beyond phase 0
    s = distributed_schedule(Config(n=1000, eps_user=0.5, kappa=4, rho=0.499))
    assert s.i0 == 0
    assert s.ell == 2


def test_distributed_ruling_radius():
    s = distributed_schedule(Config(n=64, eps_user=0.5, kappa=3, rho=0.45))
    assert s.ell == 2
    assert s.rul[0] == 5
    assert s.radius[1] == 2 * (5 + 1)
    assert s.ruling_stages == 2


def test_distributed_needs_rho():
    with pytest.raises(InvalidConfigError):
        distributed_schedule(Config(n=64, eps_user=0.5, kappa=3))


def test_spanner_gamma():
    assert spanner_gamma(4) == 2
    assert spanner_gamma(16) == 2
    assert spanner_gamma(256) == 3.0


def test_spanner_schedule_shape():
    s = spanner_schedule(Config(n=64, eps_user=0.5, kappa=4, rho=0.45, allow_infeasible=True))
    assert s.gamma == 2
    assert s.i0 == 1
    assert s.ell == 3
    assert s.deg[0].exponent == Fraction(1, 4)
    assert s.deg[1].exponent == Fraction(1, 8) + Fraction(1, 4)
    assert s.deg[2].exponent == s.rho / 2
    assert s.deg[3].exponent == s.rho
    assert not s.feasible
    assert "exceeds" in s.infeasibility


def test_spanner_infeasible_at_small_n():
    with pytest.raises(InfeasibleScheduleError):
        spanner_schedule(Config(n=64, eps_user=0.5, kappa=4, rho=0.45))


def test_delta_cap():
    with pytest.raises(InfeasibleScheduleError):
        centralized_schedule(Config(n=100, eps_user=0.5, kappa=4, delta_cap=1000))


def test_stretch_budget_one_phase():
    s = centralized_schedule(Config(n=25, eps_user=0.5, kappa=2))
    budget = stretch_budget(s)
    assert budget.beta == (0, 12)
    assert budget.alpha_final == 1 + Fraction(12, 67)
    assert budget.allows(1, 13)
    assert not budget.allows(1, 14)


def test_stretch_budget_grows():
    budget = stretch_budget(distributed_schedule(Config(n=500, eps_user=0.5, kappa=8, rho=0.45)))
    assert budget.alpha[0] == 1
    assert budget.beta[0] == 0
    assert all(a < b for a, b in zip(budget.beta[1:], budget.beta[2:]))


def test_ultra_sparse_kappa():
    assert ultra_sparse_kappa(16) == 8
    with pytest.raises(InvalidConfigError):
        ultra_sparse_kappa(3)


def test_schedule_document_round_trip():
    s = make_schedule(DISTRIBUTED, Config(n=64, eps_user=0.5, kappa=3, rho=0.45))
    assert schedule_from_dict(s.to_dict()) == s


def test_schedule_document_mismatch():
    data = make_schedule(CENTRALIZED, Config(n=25, eps_user=0.5, kappa=2)).to_dict()
    data["phases"][1]["delta"] += 1
    with pytest.raises(InvalidConfigError):
        schedule_from_dict(data)


def test_report_lines():
    s = make_schedule(SPANNER, Config(n=64, eps_user=0.5, kappa=3, rho=0.45, allow_infeasible=True))
    lines = s.report_lines()
    assert len(lines) == s.ell + 1
    assert all("sep=" in line for line in lines)


@settings(max_examples=40, deadline=None)
@given(
    n=st.integers(min_value=4, max_value=10 ** 6),
    kappa=st.integers(min_value=2, max_value=40),
    eps=st.fractions(min_value=Fraction(1, 100), max_value=Fraction(99, 100)),
)
def test_centralized_invariants(n, kappa, eps):
    s = centralized_schedule(Config(n=n, eps_user=eps, kappa=kappa))
    assert 2 ** (s.ell + 1) >= kappa + 1
    assert 2 ** s.ell < kappa + 1
    for prev, nxt in zip(s.deg, s.deg[1:]):
        assert nxt.at_most(prev.squared())
    assert Power(n, 1 - Fraction(2 ** s.ell - 1, kappa)).at_most(s.deg[s.ell])
    for i in s.phases():
        assert s.delta[i] >= (1 / s.eps_internal) ** i + 2 * s.radius[i]


@settings(max_examples=40, deadline=None)
@given(
    n=st.integers(min_value=4, max_value=10 ** 6),
    kappa=st.integers(min_value=3, max_value=40),
    numerator=st.integers(min_value=1, max_value=999),
)
def test_distributed_invariants(n, kappa, numerator):
    low = Fraction(1, kappa)
    rho = low + (Fraction(1, 2) - low) * Fraction(numerator, 1000)
    s = distributed_schedule(Config(n=n, eps_user=0.5, kappa=kappa, rho=rho))
    assert s.ell > s.i0
    assert s.rho >= 25 * s.eps_internal
    cap = Power(n, rho)
    assert all(d.at_most(cap) for d in s.deg)
    assert all(b > a for a, b in zip(s.delta, s.delta[1:]))
