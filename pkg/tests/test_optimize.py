import dataclasses

import numpy as np
import pytest

from idlewage import (
    BlockConstraint,
    DayScenario,
    GridSpec,
    InfeasibleError,
    Objective,
    PolicyPoint,
    SolverConfig,
    admissible_blocks,
    block_wage_max,
    builtin_day,
    find_equilibria,
    optimize_day_fixed,
    optimize_day_flexible,
    optimize_min_wage,
    optimize_single_period,
    period_for_hour,
    select_equilibrium,
    sweep_idle_wage,
    two_period_day,
    value_vs_tau,
)
from idlewage.objectives import evaluate

H19 = period_for_hour(19)

# coarse but structurally faithful grid for fast optimizer tests
COARSE = GridSpec(p_step=0.1, j_step=0.2, tau_step=0.25)
FAST_SOLVER = SolverConfig(scan_points=1024)


def zero_lambda_period():
    s = period_for_hour(19)
    return dataclasses.replace(s, demand=dataclasses.replace(s.demand, lambda_max=0.0))


class TestGridSpec:
    def test_default_grid_sizes(self):
        g = GridSpec()
        assert g.p_values().size == 501
        assert g.j_values().size == 57
        assert g.tau_values().size == 21

    def test_canonical_decimal_values(self):
        g = GridSpec()
        assert 1.1 in g.j_values()
        assert 0.9 in g.tau_values()
        assert 3.13 in g.p_values()
        assert g.tau_values()[0] == 0.0 and g.tau_values()[-1] == 1.0

    def test_tau_grid_must_reach_one(self):
        with pytest.raises(ValueError):
            GridSpec(tau_step=0.3)

    def test_steps_positive(self):
        with pytest.raises(ValueError):
            GridSpec(p_step=0.0)


class TestSinglePeriod:
    def test_no_riders_means_shutdown_policy(self):
        res = optimize_single_period(zero_lambda_period(), Objective.PROFIT, COARSE, FAST_SOLVER)
        assert res.value == 0.0
        pol = res.best_schedule
        assert (pol.price, pol.idle_wage, pol.commission) == (0.0, 0.0, 0.0)

    def test_profit_maximum_sits_at_full_commission(self):
        res = optimize_single_period(H19, Objective.PROFIT, COARSE, FAST_SOLVER)
        assert res.best_schedule.commission == 1.0
        assert res.value > 0

    def test_coarse_rescan_brackets_fine_maximizer(self):
        fine = GridSpec(p_step=0.05, j_step=0.2, tau_step=0.25)
        coarse = GridSpec(p_step=0.1, j_step=0.4, tau_step=0.5)
        rf = optimize_single_period(H19, Objective.PROFIT, fine, FAST_SOLVER)
        rc = optimize_single_period(H19, Objective.PROFIT, coarse, FAST_SOLVER)
        assert abs(rc.best_schedule.price - rf.best_schedule.price) <= 0.1
        assert abs(rc.best_schedule.idle_wage - rf.best_schedule.idle_wage) <= 0.4
        assert rc.value <= rf.value

    def test_winner_cell_matches_scalar_path(self):
        res = optimize_single_period(H19, Objective.PROFIT, COARSE, FAST_SOLVER)
        pol = res.best_schedule
        eqs = find_equilibria(H19, pol, FAST_SOLVER)
        best = select_equilibrium(eqs, Objective.PROFIT, H19)
        assert evaluate(Objective.PROFIT, H19, best) == pytest.approx(res.value, rel=1e-12)

    def test_value_equals_stored_equilibrium_objective(self):
        res = optimize_single_period(H19, Objective.WELFARE, COARSE, FAST_SOLVER)
        assert res.value == sum(evaluate(Objective.WELFARE, H19, eq) for eq in res.equilibria)


class TestSweep:
    def test_zero_population_market_burns_the_wage_bill(self):
        # With no riders the only equilibrium at J > 0 is an all-idle pool
        # of supply(0, J) drivers, so the best value is exactly -J*L for
        # profit (the shutdown tuple is feasible only at J = 0).
        from idlewage import supply

        s = zero_lambda_period()
        pts = sweep_idle_wage(s, Objective.PROFIT, [0.0, 0.4, 0.8], COARSE, FAST_SOLVER)
        assert pts[0].value == 0.0
        for pt in pts[1:]:
            expected = -pt.idle_wage * supply(s.supply, 0.0, pt.idle_wage)
            assert pt.value == pytest.approx(expected, rel=1e-9)
            assert pt.value < 0

    def test_out_of_range_wages_rejected(self):
        with pytest.raises(ValueError):
            sweep_idle_wage(H19, Objective.PROFIT, [99.0], COARSE, FAST_SOLVER)

    def test_inverted_u_for_risk_averse_drivers(self):
        s = period_for_hour(19, risk_beta=0.2)
        g = GridSpec(j_step=0.2, tau_step=0.25, p_step=0.05)
        pts = sweep_idle_wage(s, Objective.PROFIT, g.j_values(), g, FAST_SOLVER)
        vals = np.array([pt.value for pt in pts])
        k = int(np.argmax(vals))
        assert 0 < k < vals.size - 1
        rising, falling = vals[: k + 1], vals[k:]
        assert np.all(np.diff(rising) >= -1e-9)
        assert np.all(np.diff(falling) <= 1e-9)

    def test_spot_cells_match_scalar_path(self):
        g = COARSE
        pts = sweep_idle_wage(H19, Objective.PROFIT, [0.4, 1.2], g, FAST_SOLVER)
        for pt in pts:
            pol = PolicyPoint(pt.best_price, pt.idle_wage, pt.best_tau)
            eqs = find_equilibria(H19, pol, FAST_SOLVER)
            best = select_equilibrium(eqs, Objective.PROFIT, H19)
            assert evaluate(Objective.PROFIT, H19, best) == pytest.approx(pt.value, rel=1e-12)


class TestDayFlexible:
    def test_zero_day_worth_nothing(self):
        day = DayScenario((zero_lambda_period(),) * 3)
        res = optimize_day_flexible(day, Objective.WELFARE, COARSE, FAST_SOLVER)
        assert res.value == 0.0

    def test_high_demand_hours_pay_higher_wages(self):
        day = DayScenario((period_for_hour(4), period_for_hour(19)))
        res = optimize_day_flexible(day, Objective.WELFARE, COARSE, FAST_SOLVER)
        w_low, w_high = res.best_schedule.idle_wages
        assert w_high > w_low

    def test_welfare_wages_dominate_profit_wages(self):
        day = DayScenario(tuple(period_for_hour(h) for h in (4, 9, 19)))
        rw = optimize_day_flexible(day, Objective.WELFARE, COARSE, FAST_SOLVER)
        rp = optimize_day_flexible(day, Objective.PROFIT, COARSE, FAST_SOLVER)
        for jw, jp in zip(rw.best_schedule.idle_wages, rp.best_schedule.idle_wages):
            assert jw >= jp

    def test_commission_pinned_at_one(self):
        day = DayScenario((H19,))
        res = optimize_day_flexible(day, Objective.PROFIT, COARSE, FAST_SOLVER)
        assert res.best_schedule.commission == 1.0


class TestValueVsTau:
    def test_zero_day(self):
        day = DayScenario((zero_lambda_period(),) * 2)
        curve = value_vs_tau(day, Objective.PROFIT, COARSE, FAST_SOLVER)
        assert all(v == 0.0 for _, v in curve)

    def test_replicated_day_scales_single_period(self):
        day1 = DayScenario((H19,))
        day3 = DayScenario((H19,) * 3)
        c1 = value_vs_tau(day1, Objective.PROFIT, COARSE, FAST_SOLVER)
        c3 = value_vs_tau(day3, Objective.PROFIT, COARSE, FAST_SOLVER)
        for (t1, v1), (t3, v3) in zip(c1, c3):
            assert t1 == t3
            assert v3 == pytest.approx(3 * v1, rel=1e-12)

    def test_profit_curve_nondecreasing_single_period(self):
        curve = value_vs_tau(DayScenario((H19,)), Objective.PROFIT, COARSE, FAST_SOLVER)
        vals = [v for _, v in curve]
        assert all(b >= a - 1e-9 for a, b in zip(vals, vals[1:]))


class TestDayFixed:
    def test_shared_cell_and_free_prices(self):
        day = two_period_day(0.2, 3.5, 44.0)
        res = optimize_day_fixed(day, Objective.PROFIT, COARSE, FAST_SOLVER)
        sch = res.best_schedule
        assert len(set(sch.idle_wages)) == 1
        assert res.value == sum(
            evaluate(Objective.PROFIT, s, eq) for s, eq in zip(day.periods, res.equilibria)
        )

    def test_dominated_by_flexible(self):
        day = two_period_day(0.2, 3.5, 44.0)
        g = GridSpec(p_step=0.05, j_step=0.1, tau_step=0.25)
        vfix = optimize_day_fixed(day, Objective.PROFIT, g, FAST_SOLVER).value
        vflex = optimize_day_flexible(day, Objective.PROFIT, g, FAST_SOLVER).value
        assert vflex >= vfix - 1e-9

    def test_dominates_no_idle_wage_restriction(self):
        day = two_period_day(0.2, 3.5, 44.0)
        g = GridSpec(p_step=0.05, j_step=0.1, tau_step=0.25)
        g0 = dataclasses.replace(g, j_max=0.0)
        vfix = optimize_day_fixed(day, Objective.PROFIT, g, FAST_SOLVER).value
        v0 = optimize_day_fixed(day, Objective.PROFIT, g0, FAST_SOLVER).value
        assert vfix >= v0 - 1e-9


class TestDeterminism:
    def test_threads_do_not_change_results(self):
        day = two_period_day(0.5, 4.0, 44.5)
        a = optimize_day_fixed(day, Objective.WELFARE, COARSE, FAST_SOLVER, threads=1)
        b = optimize_day_fixed(day, Objective.WELFARE, COARSE, FAST_SOLVER, threads=4)
        assert a.best_schedule == b.best_schedule
        assert a.value == b.value
        ra = optimize_single_period(H19, Objective.PROFIT, COARSE, FAST_SOLVER, threads=1)
        rb = optimize_single_period(H19, Objective.PROFIT, COARSE, FAST_SOLVER, threads=3)
        assert ra.best_schedule == rb.best_schedule and ra.value == rb.value


class TestAdmissibleBlocks:
    @staticmethod
    def hours_of(h, b):
        return {((h - 1 + k) % 24) + 1 for k in range(b)}

    def test_full_day_block_leaves_no_room(self):
        assert admissible_blocks(24, 1) == set()

    def test_brute_force_oracle_four_four(self):
        got = admissible_blocks(4, 4)
        want = {
            (h1, h2)
            for h1 in range(1, 25)
            for h2 in range(1, 25)
            if not (self.hours_of(h1, 4) & self.hours_of(h2, 4))
        }
        assert got == want

    def test_membership_of_adjacent_windows(self):
        pairs = admissible_blocks(4, 4)
        assert (1, 5) in pairs       # 1-4 and 5-8 are disjoint
        assert (1, 4) not in pairs   # 1-4 and 4-7 share hour 4
        assert (23, 3) in pairs      # 23-2 wraps; 3-6 is clear

    def test_no_pair_overlaps(self):
        for b1, b2 in [(4, 4), (3, 5), (1, 1), (12, 12)]:
            for h1, h2 in admissible_blocks(b1, b2):
                assert not (self.hours_of(h1, b1) & self.hours_of(h2, b2))


class TestBlockWageMax:
    def test_zero_vector(self):
        val, pair = block_wage_max(np.zeros(24))
        assert val == 0.0
        assert pair == min(admissible_blocks(4, 4))

    def test_constant_vector(self):
        val, pair = block_wage_max(np.full(24, 0.3))
        assert val == pytest.approx(8 * 0.3, abs=1e-12)
        assert pair == min(admissible_blocks(4, 4))

    def test_exhaustive_enumeration_oracle(self):
        rng = np.random.default_rng(3)
        J = rng.uniform(0, 2, size=24)
        val, pair = block_wage_max(J)
        best = -1.0
        for h1, h2 in admissible_blocks(4, 4):
            tot = sum(J[(h1 - 1 + k) % 24] for k in range(4)) + sum(
                J[(h2 - 1 + k) % 24] for k in range(4)
            )
            best = max(best, tot)
        assert val == pytest.approx(best, rel=1e-12)

    def test_flexible_welfare_wages_match_enumeration_oracle(self):
        day = builtin_day()
        res = optimize_day_flexible(day, Objective.WELFARE, COARSE, FAST_SOLVER, threads=2)
        J = np.array(res.best_schedule.idle_wages)
        val, pair = block_wage_max(J)
        best = max(
            sum(J[(h1 - 1 + k) % 24] for k in range(4))
            + sum(J[(h2 - 1 + k) % 24] for k in range(4))
            for h1, h2 in admissible_blocks(4, 4)
        )
        assert val == pytest.approx(best, rel=1e-12)

    def test_wrong_length_rejected(self):
        with pytest.raises(ValueError):
            block_wage_max(np.zeros(23))


class TestMinWage:
    def test_zero_floor_equals_flexible(self):
        day = builtin_day()
        flex = optimize_day_flexible(day, Objective.PROFIT, COARSE, FAST_SOLVER, threads=2)
        res = optimize_min_wage(
            day, Objective.PROFIT, COARSE, BlockConstraint(j_min=0.0), FAST_SOLVER, threads=2
        )
        assert res.best_schedule == flex.best_schedule
        assert res.value == flex.value

    def test_binding_floor_is_certified(self):
        day = builtin_day()
        flex = optimize_day_flexible(day, Objective.PROFIT, COARSE, FAST_SOLVER, threads=2)
        m0, _ = block_wage_max(np.array(flex.best_schedule.idle_wages))
        c = BlockConstraint(j_min=m0 + 2.0)
        res = optimize_min_wage(day, Objective.PROFIT, COARSE, c, FAST_SOLVER, threads=2)
        m1, _ = block_wage_max(np.array(res.best_schedule.idle_wages))
        assert m1 >= c.j_min
        assert res.value <= flex.value + 1e-9

    def test_value_weakly_decreasing_in_floor(self):
        day = builtin_day()
        vals = []
        for jm in (0.0, 6.0, 12.0):
            res = optimize_min_wage(
                day, Objective.PROFIT, COARSE, BlockConstraint(j_min=jm), FAST_SOLVER, threads=2
            )
            vals.append(res.value)
        assert vals[0] >= vals[1] - 1e-9 >= vals[2] - 2e-9

    def test_hopeless_floor_reports_infeasible(self):
        day = builtin_day()
        with pytest.raises(InfeasibleError):
            optimize_min_wage(
                day, Objective.PROFIT, COARSE, BlockConstraint(j_min=1e5), FAST_SOLVER, threads=2
            )

    def test_needs_full_day(self):
        with pytest.raises(ValueError):
            optimize_min_wage(
                two_period_day(0.2, 3.5, 44.0), Objective.PROFIT, COARSE,
                BlockConstraint(j_min=1.0), FAST_SOLVER,
            )


class TestBlockConstraintValidation:
    def test_invariants(self):
        with pytest.raises(ValueError):
            BlockConstraint(b1=0)
        with pytest.raises(ValueError):
            BlockConstraint(b1=13, b2=12)
        with pytest.raises(ValueError):
            BlockConstraint(j_min=-1.0)
