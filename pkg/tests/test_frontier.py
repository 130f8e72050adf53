import numpy as np
import pytest

import isackit as ik
from conftest import (
    make_uninformative_echo_instance,
    make_xor_zs_instance,
    make_zs_instance,
    random_instance,
)

from isackit.frontier import (
    InfeasibleError,
    SolverConfig,
    _hypothesis_tables,
    capacity_under_cost,
    capacity_under_exponent,
    grid_oracle,
    rd_frontier,
    re_frontier,
)
from isackit.sensing import per_input_cost


def test_solver_config_rejects_nonpositive():
    with pytest.raises(ValueError):
        SolverConfig(max_iterations=0)
    with pytest.raises(ValueError):
        SolverConfig(convergence_tol=-1.0)


def test_capacity_free_sensing_is_unconstrained_bsc():
    inst = make_xor_zs_instance(p1=0.1)  # cost identically zero
    for cap in (0.0, 0.2, 1.0):
        pt = capacity_under_cost(inst, cap)
        assert pt.rate == pytest.approx(0.53100, abs=1e-3)
        np.testing.assert_allclose(pt.p_x, 0.5, atol=1e-3)
        assert pt.achieved == 0.0


def test_capacity_sc1_binding_constraint(sc1):
    pt = capacity_under_cost(sc1, 0.1)
    assert pt.rate == pytest.approx(0.35775, abs=1e-3)
    assert pt.p_x[0] == pytest.approx(0.200, abs=1e-3)
    assert pt.achieved <= 0.1 + 1e-9


def test_capacity_infeasible_distortion(sc1):
    with pytest.raises(InfeasibleError, match="below minimum"):
        capacity_under_cost(sc1, -0.01)


def test_capacity_requires_distortion_spec():
    inst = make_zs_instance(p1=0.2)
    stripped = ik.ProblemInstance(channel=inst.channel, p_s=inst.p_s)
    with pytest.raises(InfeasibleError, match="distortion"):
        capacity_under_cost(stripped, 0.5)


def test_zero_cost_consistency():
    # when the cost vector vanishes, any cap reproduces plain capacity
    inst = make_xor_zs_instance(p1=0.25)
    rates = {capacity_under_cost(inst, cap).rate for cap in (0.0, 0.5)}
    assert max(rates) - min(rates) <= 1e-9


def test_rd_frontier_flat_for_free_sensing():
    inst = make_xor_zs_instance(p1=0.1)
    pts = rd_frontier(inst, 4)
    rates = [p.rate for p in pts]
    assert max(rates) - min(rates) <= 1e-9


def test_rd_frontier_sc1(sc1):
    pts = rd_frontier(sc1, 5)
    rates = [p.rate for p in pts]
    assert all(b >= a - 1e-6 for a, b in zip(rates, rates[1:]))
    assert rates[-1] == pytest.approx(0.53100, abs=1e-3)
    assert rates[0] == pytest.approx(0.0, abs=1e-6)
    caps = [p.objective for p in pts]
    np.testing.assert_allclose(caps, np.linspace(caps[0], caps[-1], 5), atol=1e-12)


def test_rd_frontier_two_points_are_endpoints(sc1):
    pts = rd_frontier(sc1, 2)
    c = per_input_cost(sc1.channel, sc1.p_s, sc1.distortion)
    assert pts[0].objective == pytest.approx(float(c.min()), abs=1e-12)
    assert pts[1].rate == pytest.approx(0.53100, abs=1e-3)


def test_rd_frontier_requires_two_points(sc1):
    with pytest.raises(ValueError):
        rd_frontier(sc1, 1)


def test_re_point_sc1ht(sc1ht):
    pt = capacity_under_exponent(sc1ht, 0.5)
    assert pt.rate == pytest.approx(0.47131, abs=2e-3)
    assert pt.p_x[1] == pytest.approx(0.6785, abs=2e-3)
    assert pt.achieved >= 0.5 - 1e-9


def test_re_frontier_equal_priors_degenerates_to_capacity():
    inst = make_zs_instance(p1=0.2, q1=0.2)
    pts = re_frontier(inst, 3)
    for pt in pts:
        assert pt.objective == 0.0
        assert pt.achieved == 0.0
        assert pt.rate == pytest.approx(1.0, abs=1e-6)  # noiseless Y = X


def test_re_frontier_echo_independent_of_input():
    inst = make_uninformative_echo_instance(p1=0.1, q1=0.4)
    # echo carries no information at all, so both e(x) vanish
    pts = re_frontier(inst, 3)
    for pt in pts:
        assert pt.rate == pytest.approx(1.0, abs=1e-6)


def test_re_frontier_constant_positive_divergence():
    inst = make_zs_instance(p1=0.1, q1=0.4)  # e(x) = 0.32647 for every x
    pts = re_frontier(inst, 3)
    for pt in pts:
        assert pt.rate == pytest.approx(1.0, abs=1e-6)
        assert pt.achieved == pytest.approx(0.32647, abs=1e-4)
    assert pts[-1].objective == pytest.approx(0.32647, abs=1e-4)


def test_re_requires_alternative_prior(sc1):
    with pytest.raises(InfeasibleError, match="alternative hypothesis"):
        re_frontier(sc1, 3)
    with pytest.raises(InfeasibleError, match="alternative hypothesis"):
        capacity_under_exponent(sc1, 0.1)


def test_re_exponent_above_max_infeasible(sc1ht):
    with pytest.raises(InfeasibleError, match="above maximum"):
        capacity_under_exponent(sc1ht, 10.0)


def test_re_infinite_divergence_clamped_and_flagged():
    # under the alternative the state is stuck at 1, so echo symbol 0 is
    # impossible there and the per-input divergence is infinite
    inst = make_zs_instance(p1=0.5, q1=1.0)
    cfg = SolverConfig()
    _, e, clamped = _hypothesis_tables(inst, cfg)
    assert clamped
    np.testing.assert_allclose(e, cfg.kl_clamp)
    pts = re_frontier(inst, 2)
    assert all(p.clamped for p in pts)
    assert all(np.isfinite(p.rate) and np.isfinite(p.achieved) for p in pts)


def test_grid_oracle_step_half_enumerates_three_points(sc1):
    pt = grid_oracle(sc1, "cost", 1.0, step=0.5)
    assert pt.iterations == 3
    assert set(np.round(pt.p_x * 2).astype(int)) <= {0, 1, 2}


def test_grid_oracle_zero_cost_picks_max_mi_grid_point():
    inst = make_xor_zs_instance(p1=0.1)
    pt = grid_oracle(inst, "cost", 0.0, step=1 / 200)
    np.testing.assert_allclose(pt.p_x, [0.5, 0.5], atol=1e-12)
    assert pt.rate == pytest.approx(0.53100, abs=1e-3)


def test_grid_oracle_matches_solver_on_sc1(sc1):
    pt = capacity_under_cost(sc1, 0.1)
    orc = grid_oracle(sc1, "cost", 0.1, step=1 / 500)
    assert abs(pt.rate - orc.rate) <= 2e-3


def test_grid_oracle_guards():
    rng = np.random.default_rng(0)
    big = random_instance(rng, nx=5)
    with pytest.raises(ValueError, match="small alphabets"):
        grid_oracle(big, "cost", 1.0, step=0.5)
    inst = make_zs_instance(p1=0.1)
    with pytest.raises(ValueError, match="constraint"):
        grid_oracle(inst, "nonsense", 1.0)
    with pytest.raises(InfeasibleError, match="no feasible"):
        grid_oracle(inst, "cost", -1.0, step=0.5)


def test_oracle_agreement_random_instances_exponent_side():
    rng = np.random.default_rng(321)
    for _ in range(20):
        inst = random_instance(rng, with_q=True)
        _, e, _ = _hypothesis_tables(inst, SolverConfig())
        floor = 0.5 * float(e.max())
        pt = capacity_under_exponent(inst, floor)
        orc = grid_oracle(inst, "exponent", floor, step=1 / 200)
        assert abs(pt.rate - orc.rate) <= 2e-3
        assert pt.achieved >= floor - 1e-6
        assert pt.p_x.sum() == pytest.approx(1.0, abs=1e-9)


def test_rd_feasibility_and_monotonicity_random():
    rng = np.random.default_rng(654)
    for _ in range(5):
        inst = random_instance(rng)
        pts = rd_frontier(inst, 4)
        rates = [p.rate for p in pts]
        assert all(b >= a - 1e-6 for a, b in zip(rates, rates[1:]))
        for p in pts:
            assert p.achieved <= p.objective + 1e-6
            assert p.p_x.sum() == pytest.approx(1.0, abs=1e-9)
            assert (p.p_x >= -1e-15).all()


def test_re_monotonicity_random():
    rng = np.random.default_rng(987)
    inst = random_instance(rng, with_q=True)
    pts = re_frontier(inst, 4)
    rates = [p.rate for p in pts]
    assert all(b <= a + 1e-6 for a, b in zip(rates, rates[1:]))
    for p in pts:
        assert p.achieved >= p.objective - 1e-6
