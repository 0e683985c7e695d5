"""Monte-Carlo value estimates, wealth simulation, paired comparisons,
and the nested consistency check.

The no-jump reference value was computed by deterministic quadrature:
the growth integrand is piecewise quadratic in the price, its expectation
under the analytic Gaussian law is closed-form in Phi/phi, and the outer
time integral was evaluated to 1e-13 — fully independent of the path
simulator under test.
"""

import math

import numpy as np
import pytest

from levyou import valuation as vl
from levyou.errors import ConfigError, DomainError
from levyou.jumps import ConstantJump, NoJumps, ParetoJump
from levyou.market import MarketCoefficients, SimConfig, simulate_paths
from levyou.strategy import constant_fraction_table

LAM = 0.3333 / 24
ETA = 3.7249 / 24

# growth integral of the no-jump market below, from (t=0, s=0.1) to T=2
# on the fraction interval [-2, 2]
GAUSSIAN_VALUE = 0.23216774648954533


def gaussian_market():
    return MarketCoefficients(
        lam=0.5, b=0.2, sigma=0.3, psi=0.0, measure=NoJumps(),
    )


def pareto_market(b_frac=0.8):
    meas = ParetoJump(alpha=2.5406, scale=0.3648, rate=ETA)
    return MarketCoefficients(
        lam=LAM, b=b_frac * ETA * meas.mean_size, sigma=0.0, psi=1.0,
        measure=meas,
    )


class TestValueEstimate:
    def test_terminal_time_is_exactly_zero(self):
        est = vl.estimate_value(
            gaussian_market(), 2.0, 0.7, 2.0, -2.0, 2.0,
            SimConfig(n_paths=10, n_steps=4, seed=1),
        )
        assert est == vl.ValueEstimate(0.0, 0.0, 0, 1)

    def test_start_past_horizon_rejected(self):
        with pytest.raises(DomainError):
            vl.estimate_value(
                gaussian_market(), 3.0, 0.7, 2.0, -2.0, 2.0,
                SimConfig(n_paths=10, n_steps=4, seed=1),
            )

    def test_matches_deterministic_quadrature(self):
        est = vl.estimate_value(
            gaussian_market(), 0.0, 0.1, 2.0, -2.0, 2.0,
            SimConfig(n_paths=20_000, n_steps=64, seed=20120808),
            backend="numpy",
        )
        assert est.std_err < 2e-3
        assert est.g_hat == pytest.approx(
            GAUSSIAN_VALUE, abs=3.0 * est.std_err
        )

    def test_zero_position_regime_is_exactly_zero(self):
        # drift at or below zero with positive jumps keeps the drift gap
        # negative along every path, so the integrand vanishes identically
        meas = ParetoJump(alpha=2.5406, scale=0.3648, rate=ETA)
        m = MarketCoefficients(
            lam=LAM, b=-0.01, sigma=0.0, psi=1.0, measure=meas,
        )
        est = vl.estimate_value(
            m, 0.0, 5.0, 24.0, 0.0, 0.2,
            SimConfig(n_paths=500, n_steps=48, seed=3), backend="numpy",
        )
        assert est.g_hat == 0.0
        assert est.std_err == 0.0

    def test_deterministic_given_seed(self):
        cfg = SimConfig(n_paths=400, n_steps=24, seed=99)
        a = vl.estimate_value(
            pareto_market(), 0.0, 5.0, 24.0, 0.0, 0.2, cfg, backend="numpy"
        )
        b = vl.estimate_value(
            pareto_market(), 0.0, 5.0, 24.0, 0.0, 0.2, cfg, backend="numpy"
        )
        assert a == b
        c = vl.estimate_value(
            pareto_market(), 0.0, 5.0, 24.0, 0.0, 0.2,
            SimConfig(n_paths=400, n_steps=24, seed=100), backend="numpy",
        )
        assert c.g_hat != a.g_hat

    def test_backends_agree(self):
        cfg = SimConfig(n_paths=64, n_steps=24, seed=5)
        a = vl.estimate_value(
            pareto_market(), 0.0, 5.0, 24.0, 0.0, 0.2, cfg, backend="numpy"
        )
        b = vl.estimate_value(
            pareto_market(), 0.0, 5.0, 24.0, 0.0, 0.2, cfg, backend="numba"
        )
        assert a.g_hat == pytest.approx(b.g_hat, rel=1e-12)
        assert a.std_err == pytest.approx(b.std_err, rel=1e-12)

    def test_price_slope_is_lipschitz(self):
        # common random numbers make the finite-difference slope of the
        # estimate obey the pathwise bound max|pi| * (1 - e^{-lam*tau})
        m = pareto_market()
        cfg = SimConfig(n_paths=4_000, n_steps=96, seed=21)
        tau = 24.0
        cap = 0.2 * (-math.expm1(-m.lam * tau))
        prev = vl.estimate_value(
            m, 0.0, 4.0, tau, 0.0, 0.2, cfg, backend="numpy"
        )
        for s in (4.5, 5.0, 5.5, 6.0):
            cur = vl.estimate_value(
                m, 0.0, s, tau, 0.0, 0.2, cfg, backend="numpy"
            )
            slope = abs(cur.g_hat - prev.g_hat) / 0.5
            assert slope <= cap + 1e-3
            prev = cur


class TestTotalValue:
    def test_requires_positive_wealth(self):
        with pytest.raises(DomainError):
            vl.total_value(
                gaussian_market(), 0.0, 0.1, 0.0, 2.0, -2.0, 2.0,
                SimConfig(n_paths=10, n_steps=4, seed=1),
            )

    def test_terminal_is_log_wealth(self):
        v = vl.total_value(
            gaussian_market(), 2.0, 0.1, 3.0, 2.0, -2.0, 2.0,
            SimConfig(n_paths=10, n_steps=4, seed=1),
        )
        assert v == math.log(3.0)

    def test_wealth_enters_additively(self):
        cfg = SimConfig(n_paths=200, n_steps=16, seed=8)
        args = (gaussian_market(), 0.0, 0.1)
        tail = (2.0, -2.0, 2.0, cfg, "numpy")
        v1 = vl.total_value(*args, 1.0, *tail)
        v7 = vl.total_value(*args, 7.0, *tail)
        assert v7 - v1 == pytest.approx(math.log(7.0), rel=1e-14)


class TestWealthSimulate:
    def test_zero_strategy_keeps_wealth_constant(self):
        m = pareto_market()
        cfg = SimConfig(n_paths=300, n_steps=24, seed=4)
        times = np.linspace(0.0, 24.0, 25)
        run = vl.wealth_simulate(
            m, constant_fraction_table(times, 0.0), 0.0, 5.0, 2.5, 24.0,
            cfg, backend="numpy", label="zero",
        )
        assert np.all(run.terminal_log_wealth == math.log(2.5))
        assert run.positivity_violations == 0
        assert run.label == "zero"
        assert run.std_err <= 1e-16

    def test_pure_jump_compounding_is_exact(self):
        # no decay, no drift, no diffusion: wealth is exactly the product
        # of the per-jump factors, and the jump count can be read off the
        # price change
        y0, rate, frac = 0.6, 2.0, 0.3
        m = MarketCoefficients(
            lam=0.0, b=0.0, sigma=0.0, psi=1.0,
            measure=ConstantJump(size=y0, rate=rate), compensated=False,
        )
        cfg = SimConfig(n_paths=500, n_steps=12, seed=6)
        times = np.linspace(0.0, 3.0, 13)
        run = vl.wealth_simulate(
            m, constant_fraction_table(times, frac), 0.0, 1.0, 1.0, 3.0,
            cfg, backend="numpy",
        )
        bundle = simulate_paths(m, 0.0, 1.0, 3.0, cfg, backend="numpy")
        counts = (bundle.prices[:, -1] - 1.0) / y0
        assert np.allclose(counts, np.round(counts), atol=1e-9)
        expect = np.round(counts) * math.log1p(frac * y0)
        np.testing.assert_allclose(
            run.terminal_log_wealth, expect, rtol=1e-12, atol=1e-12
        )

    def test_positivity_across_many_paths(self):
        m = pareto_market()
        cfg = SimConfig(n_paths=100_000, n_steps=96, seed=12)
        times = np.linspace(0.0, 24.0, 97)
        table = vl.strategy_table(m, "exact", times, 0.0, 0.2)
        run = vl.wealth_simulate(
            m, table, 0.0, 5.0, 1.0, 24.0, cfg, backend="numba",
        )
        assert run.positivity_violations == 0
        assert np.all(np.isfinite(run.terminal_log_wealth))

    def test_initial_wealth_shifts_log_terminal(self):
        m = pareto_market()
        cfg = SimConfig(n_paths=100, n_steps=24, seed=9)
        times = np.linspace(0.0, 24.0, 25)
        table = vl.strategy_table(m, "exact", times, 0.0, 0.2)
        one = vl.wealth_simulate(
            m, table, 0.0, 5.0, 1.0, 24.0, cfg, backend="numpy"
        )
        five = vl.wealth_simulate(
            m, table, 0.0, 5.0, 5.0, 24.0, cfg, backend="numpy"
        )
        np.testing.assert_allclose(
            five.terminal_log_wealth - one.terminal_log_wealth,
            math.log(5.0), rtol=1e-12,
        )

    def test_requires_positive_wealth(self):
        m = pareto_market()
        times = np.linspace(0.0, 24.0, 25)
        with pytest.raises(DomainError):
            vl.wealth_simulate(
                m, constant_fraction_table(times, 0.0), 0.0, 5.0, -1.0,
                24.0, SimConfig(n_paths=10, n_steps=24, seed=1),
            )

    def test_table_rows_must_match_grid(self):
        m = pareto_market()
        times = np.linspace(0.0, 24.0, 25)
        with pytest.raises(ConfigError):
            vl.wealth_simulate(
                m, constant_fraction_table(times, 0.0), 0.0, 5.0, 1.0,
                24.0, SimConfig(n_paths=10, n_steps=48, seed=1),
            )

    def test_csv_round_trip(self, tmp_path):
        m = pareto_market()
        cfg = SimConfig(n_paths=40, n_steps=24, seed=14, path_offset=7)
        times = np.linspace(0.0, 24.0, 25)
        table = vl.strategy_table(m, "merton", times, 0.0, 0.2)
        run = vl.wealth_simulate(
            m, table, 0.0, 5.0, 2.0, 24.0, cfg, backend="numpy",
            label="merton",
        )
        path = tmp_path / "wealth.csv"
        run.to_csv(path)
        back = vl.WealthRun.from_csv(path)
        assert back.label == "merton"
        assert back.x0 == 2.0
        assert back.seed == 14
        assert back.path_offset == 7
        assert back.positivity_violations == 0
        np.testing.assert_array_equal(
            back.terminal_log_wealth, run.terminal_log_wealth
        )

    def test_csv_requires_rows(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("# levyou wealth run\npath_id,log_terminal_wealth\n")
        with pytest.raises(ConfigError):
            vl.WealthRun.from_csv(path)


class TestStrategyTable:
    def test_unknown_kind_rejected(self):
        with pytest.raises(ConfigError):
            vl.strategy_table(
                pareto_market(), "martingale", np.linspace(0, 24, 25),
                0.0, 0.2,
            )

    def test_zero_kind_is_constant_zero(self):
        tab = vl.strategy_table(
            pareto_market(), "zero", np.linspace(0, 24, 25), 0.0, 0.2
        )
        assert np.all(tab.values == 0.0)


class TestCompareStrategies:
    def test_exact_dominates_on_paired_paths(self):
        rep = vl.compare_strategies(
            pareto_market(), 0.0, 5.0, 1.0, 24.0, 0.0, 0.2,
            SimConfig(n_paths=10_000, n_steps=96, seed=1), backend="numba",
        )
        assert rep.reference == "exact"
        exact = rep.score("exact")
        assert exact.gap_to_ref == 0.0
        assert exact.gap_std_err == 0.0
        for label in ("merton", "jump_mean", "zero"):
            row = rep.score(label)
            assert row.gap_to_ref >= -3.0 * row.gap_std_err

    def test_zero_strategy_scores_zero(self):
        rep = vl.compare_strategies(
            pareto_market(), 0.0, 5.0, 1.0, 24.0, 0.0, 0.2,
            SimConfig(n_paths=500, n_steps=24, seed=2), backend="numpy",
        )
        zero = rep.score("zero")
        assert zero.mean_log_wealth == 0.0
        assert zero.std_err == 0.0

    def test_growth_estimate_matches_realized_log_wealth(self):
        # the growth-integral route and the compounded-wealth route are
        # two independent estimators of the same expectation
        cfg = SimConfig(n_paths=10_000, n_steps=96, seed=17)
        m = pareto_market()
        est = vl.estimate_value(
            m, 0.0, 5.0, 24.0, 0.0, 0.2, cfg, backend="numba"
        )
        times = np.linspace(0.0, 24.0, 97)
        table = vl.strategy_table(m, "exact", times, 0.0, 0.2)
        run = vl.wealth_simulate(
            m, table, 0.0, 5.0, 1.0, 24.0, cfg, backend="numba"
        )
        z = (est.g_hat - run.mean_log_wealth) / math.hypot(
            est.std_err, run.std_err
        )
        assert abs(z) <= 3.0

    def test_unknown_reference_rejected(self):
        with pytest.raises(ConfigError):
            vl.compare_strategies(
                pareto_market(), 0.0, 5.0, 1.0, 24.0, 0.0, 0.2,
                SimConfig(n_paths=10, n_steps=8, seed=1),
                kinds=("exact", "zero"), reference="merton",
            )

    def test_unknown_score_rejected(self):
        rep = vl.compare_strategies(
            pareto_market(), 0.0, 5.0, 1.0, 24.0, 0.0, 0.2,
            SimConfig(n_paths=50, n_steps=8, seed=1), backend="numpy",
            kinds=("exact", "zero"),
        )
        with pytest.raises(ConfigError):
            rep.score("martingale")


class TestTowerCheck:
    def test_full_horizon_split_is_exactly_zero(self):
        tw = vl.tower_check(
            gaussian_market(), 0.0, 0.1, 2.0, 2.0, -2.0, 2.0,
            SimConfig(n_paths=50, n_steps=16, seed=1), backend="numpy",
        )
        assert tw.discrepancy == 0.0
        assert tw.std_err == 0.0
        assert tw.z_score == 0.0

    def test_midpoint_split_is_consistent(self):
        tw = vl.tower_check(
            gaussian_market(), 0.0, 0.1, 1.0, 2.0, -2.0, 2.0,
            SimConfig(n_paths=800, n_steps=32, seed=13), backend="numba",
        )
        assert abs(tw.z_score) <= 3.0
        assert tw.n_inner == max(2, math.isqrt(800))

    def test_sides_reconcile_with_discrepancy(self):
        tw = vl.tower_check(
            gaussian_market(), 0.0, 0.1, 0.5, 2.0, -2.0, 2.0,
            SimConfig(n_paths=64, n_steps=16, seed=5), backend="numpy",
        )
        assert tw.lhs - tw.rhs == pytest.approx(
            tw.discrepancy, rel=1e-10, abs=1e-15
        )

    def test_zero_position_regime_both_sides_zero(self):
        meas = ParetoJump(alpha=2.5406, scale=0.3648, rate=ETA)
        m = MarketCoefficients(
            lam=LAM, b=-0.01, sigma=0.0, psi=1.0, measure=meas,
        )
        tw = vl.tower_check(
            m, 0.0, 5.0, 12.0, 24.0, 0.0, 0.2,
            SimConfig(n_paths=100, n_steps=16, seed=2), backend="numpy",
        )
        assert tw.lhs == 0.0
        assert tw.rhs == 0.0
        assert tw.discrepancy == 0.0

    def test_bad_split_rejected(self):
        cfg = SimConfig(n_paths=10, n_steps=8, seed=1)
        with pytest.raises(DomainError):
            vl.tower_check(
                gaussian_market(), 0.0, 0.1, 0.0, 2.0, -2.0, 2.0, cfg
            )
        with pytest.raises(DomainError):
            vl.tower_check(
                gaussian_market(), 0.0, 0.1, 2.5, 2.0, -2.0, 2.0, cfg
            )


class TestValueGrid:
    def test_matches_scalar_estimates_exactly(self):
        m = pareto_market()
        cfg = SimConfig(n_paths=300, n_steps=24, seed=30)
        grid = vl.value_grid(
            m, [0.0, 12.0], [4.5, 5.0, 5.5], 24.0, 0.0, 0.2, cfg,
            backend="numpy",
        )
        assert grid.g_hat.shape == (2, 3)
        for i, tv in enumerate((0.0, 12.0)):
            for j, sv in enumerate((4.5, 5.0, 5.5)):
                one = vl.estimate_value(
                    m, tv, sv, 24.0, 0.0, 0.2, cfg, backend="numpy"
                )
                assert grid.g_hat[i, j] == one.g_hat
                assert grid.std_err[i, j] == one.std_err

    def test_terminal_row_is_zero(self):
        m = gaussian_market()
        cfg = SimConfig(n_paths=50, n_steps=8, seed=3)
        grid = vl.value_grid(
            m, [0.0, 2.0], [0.1], 2.0, -2.0, 2.0, cfg, backend="numpy"
        )
        assert grid.g_hat[1, 0] == 0.0
        assert grid.std_err[1, 0] == 0.0

    def test_past_horizon_rejected(self):
        with pytest.raises(DomainError):
            vl.value_grid(
                gaussian_market(), [0.0, 3.0], [0.1], 2.0, -2.0, 2.0,
                SimConfig(n_paths=10, n_steps=8, seed=1), backend="numpy",
            )

    def test_csv_columns(self, tmp_path):
        m = gaussian_market()
        cfg = SimConfig(n_paths=40, n_steps=8, seed=3)
        grid = vl.value_grid(
            m, [0.0, 1.0], [0.0, 0.2], 2.0, -2.0, 2.0, cfg,
            backend="numpy",
        )
        path = tmp_path / "value.csv"
        grid.to_csv(path)
        lines = path.read_text().strip().splitlines()
        assert lines[2] == "t,s,g_hat,std_err"
        assert len(lines) == 3 + 4
        first = lines[3].split(",")
        assert float(first[0]) == 0.0
        assert float(first[1]) == 0.0
        assert float(first[2]) == grid.g_hat[0, 0]
