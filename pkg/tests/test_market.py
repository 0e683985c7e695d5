"""Market model: case classification, admissible sets, coefficient
validation, analytic moments, and the path simulator (both backends).

Frozen reference values were computed with mpmath (40 digits) from the
closed-form mean/variance integrals; they are independent of the
quadrature route used by the implementation.
"""

import math
import os

import numpy as np
import pytest

from levyou import market as mk
from levyou._backend import HAVE_NUMBA
from levyou.errors import (
    AdmissibilityError,
    CaseError,
    ConfigError,
    DomainError,
)
from levyou.jumps import (
    CompoundPoisson,
    LevyDensity,
    NoJumps,
    ParetoJump,
    UniformJump,
)

BACKENDS = ["numpy"] + (["numba"] if HAVE_NUMBA else [])

# calibrated example used throughout: hourly mean reversion and jump rate,
# Pareto jump sizes, no Brownian part
LAM = 0.3333 / 24
ETA = 3.7249 / 24
PARETO = dict(alpha=2.5406, scale=0.3648, rate=ETA)
B_CAL = 0.074695526567830715  # 0.8 * eta * mean jump size


def calibrated_market():
    return mk.MarketCoefficients(
        lam=LAM, b=B_CAL, sigma=0.0, psi=1.0,
        measure=ParetoJump(**PARETO), compensated=True,
    )


class TestCaseClassification:
    def test_positive_support(self):
        assert mk.classify_case(ParetoJump(**PARETO)) is mk.CaseTag.POSITIVE
        assert mk.classify_case(UniformJump(0.1, 0.5, 1.0)) is mk.CaseTag.POSITIVE

    def test_two_sided_support(self):
        assert mk.classify_case(UniformJump(-0.5, 1.0, 1.0)) is mk.CaseTag.TWO_SIDED

    def test_negative_support(self):
        assert mk.classify_case(UniformJump(-0.5, -0.1, 1.0)) is mk.CaseTag.NEGATIVE

    def test_no_jumps(self):
        assert mk.classify_case(NoJumps()) is mk.CaseTag.CONTINUOUS

    def test_zero_rate_counts_as_continuous(self):
        assert mk.classify_case(UniformJump(-0.5, 1.0, 0.0)) is mk.CaseTag.CONTINUOUS


class TestAdmissibleSet:
    def test_two_sided(self):
        adm = mk.admissible_set(UniformJump(-0.5, 1.0, 1.0), 1.0)
        assert adm.lo == -1.0 and adm.hi == 2.0
        assert adm.lo_open and adm.hi_open
        assert adm.case is mk.CaseTag.TWO_SIDED

    def test_two_sided_scales_with_impact(self):
        adm = mk.admissible_set(UniformJump(-0.5, 1.0, 1.0), 2.0)
        assert adm.lo == -0.5 and adm.hi == 1.0

    def test_positive_unbounded_sizes(self):
        # unbounded positive jumps: only nonnegative fractions, 0 included
        adm = mk.admissible_set(ParetoJump(**PARETO), 1.0)
        assert adm.lo == 0.0 and not adm.lo_open
        assert math.isinf(adm.hi) and adm.hi_open

    def test_positive_bounded_sizes(self):
        adm = mk.admissible_set(UniformJump(0.1, 0.5, 1.0), 1.0)
        assert adm.lo == -2.0 and adm.lo_open
        assert math.isinf(adm.hi)

    def test_negative_bounded_sizes(self):
        adm = mk.admissible_set(UniformJump(-0.5, -0.1, 1.0), 1.0)
        assert math.isinf(adm.lo) and adm.lo < 0
        assert adm.hi == 2.0 and adm.hi_open

    def test_negative_unbounded_sizes(self):
        meas = CompoundPoisson(
            rate=1.0,
            size_density=lambda y: np.exp(y),
            support=(-math.inf, -0.0),
        )
        adm = mk.admissible_set(meas, 1.0)
        assert math.isinf(adm.lo)
        assert adm.hi == 0.0 and not adm.hi_open

    def test_no_jumps_whole_line(self):
        adm = mk.admissible_set(NoJumps(), 1.0)
        assert math.isinf(adm.lo) and math.isinf(adm.hi)

    def test_zero_impact_whole_line(self):
        adm = mk.admissible_set(UniformJump(-0.5, 1.0, 1.0), 0.0)
        assert math.isinf(adm.lo) and math.isinf(adm.hi)

    def test_boundary_distance_two_sided(self):
        adm = mk.admissible_set(UniformJump(-0.5, 1.0, 1.0), 1.0)
        assert adm.boundary_distance(-0.5, 1.0) == pytest.approx(0.5)
        assert adm.boundary_distance(0.0, 1.5) == pytest.approx(0.5)

    def test_boundary_distance_ignores_infinite_and_closed_ends(self):
        adm = mk.admissible_set(ParetoJump(**PARETO), 1.0)
        assert math.isinf(adm.boundary_distance(0.0, 0.2))
        adm2 = mk.admissible_set(UniformJump(0.1, 0.5, 1.0), 1.0)
        assert adm2.boundary_distance(-1.0, 5.0) == pytest.approx(1.0)

    def test_contains_interval_respects_closed_zero(self):
        adm = mk.admissible_set(ParetoJump(**PARETO), 1.0)
        assert adm.contains_interval(0.0, 0.2)
        assert not adm.contains_interval(-0.01, 0.2)


class TestMarketValidation:
    def test_negative_mean_reversion_rejected(self):
        with pytest.raises(ConfigError):
            mk.MarketCoefficients(lam=-0.1, b=0.0, sigma=0.1, psi=1.0,
                                  measure=NoJumps())

    def test_negative_sigma_rejected(self):
        with pytest.raises(ConfigError):
            mk.MarketCoefficients(lam=0.1, b=0.0, sigma=-0.1, psi=1.0,
                                  measure=NoJumps())

    def test_negative_psi_rejected(self):
        with pytest.raises(ConfigError):
            mk.MarketCoefficients(lam=0.1, b=0.0, sigma=0.1, psi=-1.0,
                                  measure=NoJumps())

    def test_infinite_second_moment_rejected(self):
        heavy = ParetoJump(alpha=1.8, scale=0.3, rate=1.0)
        with pytest.raises(ConfigError):
            mk.MarketCoefficients(lam=0.1, b=0.0, sigma=0.0, psi=1.0,
                                  measure=heavy)

    def test_time_varying_needs_ranges(self):
        with pytest.raises(ConfigError):
            mk.MarketCoefficients(lam=0.1, b=0.0, sigma=lambda t: 0.1,
                                  psi=1.0, measure=NoJumps())

    def test_interval_must_contain_zero(self):
        with pytest.raises(AdmissibilityError):
            calibrated_market().validate_interval(0.1, 0.2)

    def test_interval_must_be_ordered(self):
        with pytest.raises(AdmissibilityError):
            calibrated_market().validate_interval(0.2, 0.2)

    def test_interval_must_be_admissible(self):
        with pytest.raises(AdmissibilityError):
            calibrated_market().validate_interval(-0.1, 0.2)
        m = mk.MarketCoefficients(
            lam=0.3, b=0.1, sigma=0.3, psi=1.0,
            measure=UniformJump(-0.5, 1.0, 1.0),
        )
        with pytest.raises(AdmissibilityError):
            m.validate_interval(-0.5, 2.5)

    def test_valid_interval_returns_distance(self):
        m = mk.MarketCoefficients(
            lam=0.3, b=0.1, sigma=0.3, psi=1.0,
            measure=UniformJump(-0.5, 1.0, 1.0),
        )
        adm, dist = m.validate_interval(-0.5, 1.0)
        assert dist == pytest.approx(0.5)


class TestDriftSemantics:
    def test_compensated_drift_is_b(self):
        m = calibrated_market()
        assert m.foc_drift(3.0) == B_CAL

    def test_uncompensated_drift_adds_jump_flow(self):
        meas = UniformJump(-0.5, 1.0, 2.0)
        m = mk.MarketCoefficients(lam=0.3, b=0.1, sigma=0.3, psi=0.5,
                                  measure=meas, compensated=False)
        # mean jump flow: rate * E[size] = 2 * 0.25
        assert m.foc_drift(0.0) == pytest.approx(0.1 + 0.5 * 0.5, rel=1e-15)

    def test_time_varying_impact_scales_flow(self):
        meas = UniformJump(-0.5, 1.0, 2.0)
        m = mk.MarketCoefficients(
            lam=0.3, b=0.1, sigma=0.3, psi=lambda t: 0.5 + 0.1 * t,
            psi_range=(0.5, 2.9), measure=meas, compensated=False,
        )
        assert m.foc_drift(2.0) == pytest.approx(0.1 + 0.7 * 0.5, rel=1e-14)


class TestAnalyticMoments:
    def test_constant_mean_reference(self):
        m = calibrated_market()
        assert mk.analytic_mean(m, 0.0, 5.0, 24.0) == pytest.approx(
            5.1073166742300015, rel=1e-14
        )

    def test_constant_variance_reference(self):
        m = calibrated_market()
        assert mk.analytic_variance(m, 0.0, 24.0) == pytest.approx(
            1.7003780656881345, rel=1e-14
        )

    def test_time_varying_mean_reference(self):
        m = mk.MarketCoefficients(
            lam=0.3, b=lambda v: 0.1 + 0.05 * math.sin(v), sigma=0.1,
            psi=0.0, measure=NoJumps(),
        )
        assert mk.analytic_mean(m, 0.0, 5.0, 24.0) == pytest.approx(
            0.30493180731383395, rel=1e-12
        )

    def test_time_varying_variance_reference(self):
        m = mk.MarketCoefficients(
            lam=0.3, b=0.0,
            sigma=lambda v: 0.1 + 0.05 * math.sin(v),
            psi=lambda v: 0.5 + 0.1 * math.cos(v),
            sigma_range=(0.05, 0.15), psi_range=(0.4, 0.6),
            measure=UniformJump(-0.5, 1.0, 1.0),
        )
        assert mk.analytic_variance(m, 0.0, 24.0) == pytest.approx(
            0.10591755019938605, rel=1e-12
        )

    def test_zero_reversion_limits(self):
        m = mk.MarketCoefficients(lam=0.0, b=0.2, sigma=0.3, psi=0.0,
                                  measure=NoJumps())
        assert mk.analytic_mean(m, 0.0, 1.0, 3.0) == pytest.approx(1.0 + 0.6)
        assert mk.analytic_variance(m, 0.0, 3.0) == pytest.approx(0.27)

    def test_horizon_before_start_rejected(self):
        with pytest.raises(DomainError):
            mk.analytic_mean(calibrated_market(), 2.0, 5.0, 1.0)


class TestSimulatedMoments:
    @pytest.mark.parametrize("backend", BACKENDS)
    def test_calibrated_mean(self, backend):
        m = calibrated_market()
        pb = mk.simulate_paths(m, 0.0, 5.0, 24.0,
                               mk.SimConfig(8000, 48, 42), backend=backend)
        st = pb.prices[:, -1]
        se = st.std(ddof=1) / math.sqrt(len(st))
        assert abs(st.mean() - 5.1073166742300015) < 5 * se

    def test_mixed_uncompensated_mean_and_variance(self):
        meas = UniformJump(-0.5, 1.0, 1.0)
        m = mk.MarketCoefficients(lam=0.3, b=0.1, sigma=0.3, psi=0.7,
                                  measure=meas, compensated=False)
        pb = mk.simulate_paths(m, 0.0, 5.0, 12.0, mk.SimConfig(8000, 48, 43))
        st = pb.prices[:, -1]
        am = mk.analytic_mean(m, 0.0, 5.0, 12.0)
        av = mk.analytic_variance(m, 0.0, 12.0)
        se = st.std(ddof=1) / math.sqrt(len(st))
        assert abs(st.mean() - am) < 5 * se
        v = st.var(ddof=1)
        m4 = np.mean((st - st.mean()) ** 4)
        se_v = math.sqrt((m4 - v * v) / len(st))
        assert abs(v - av) < 5 * se_v

    def test_gaussian_exact_distribution(self):
        # constant coefficients use exact transition sampling: a single
        # step and many steps give the same terminal law
        m = mk.MarketCoefficients(lam=0.5, b=0.2, sigma=0.3, psi=0.0,
                                  measure=NoJumps())
        one = mk.simulate_paths(m, 0.0, 1.0, 2.0, mk.SimConfig(6000, 1, 7))
        many = mk.simulate_paths(m, 0.0, 1.0, 2.0, mk.SimConfig(6000, 64, 8))
        am = mk.analytic_mean(m, 0.0, 1.0, 2.0)
        av = mk.analytic_variance(m, 0.0, 2.0)
        for pb in (one, many):
            st = pb.prices[:, -1]
            se = st.std(ddof=1) / math.sqrt(len(st))
            assert abs(st.mean() - am) < 5 * se
            assert abs(st.var(ddof=1) - av) < 5 * av * math.sqrt(2 / len(st))

    def test_time_varying_coefficients_converge(self):
        m = mk.MarketCoefficients(
            lam=0.3, b=lambda v: 0.1 + 0.05 * math.sin(v),
            sigma=lambda v: 0.1 + 0.05 * math.sin(v),
            psi=lambda v: 0.5 + 0.1 * math.cos(v),
            sigma_range=(0.05, 0.15), psi_range=(0.4, 0.6),
            measure=UniformJump(-0.5, 1.0, 1.0),
        )
        pb = mk.simulate_paths(m, 0.0, 5.0, 24.0, mk.SimConfig(8000, 192, 44))
        st = pb.prices[:, -1]
        am = mk.analytic_mean(m, 0.0, 5.0, 24.0)
        se = st.std(ddof=1) / math.sqrt(len(st))
        # left-node coefficient freezing adds O(dt) bias; budget for it
        assert abs(st.mean() - am) < 5 * se + 2e-3
        assert st.var(ddof=1) == pytest.approx(
            mk.analytic_variance(m, 0.0, 24.0), rel=0.05
        )


class TestDeterminism:
    def test_snapshot(self):
        # regression guard: any change to the sampling scheme shows up here
        m = calibrated_market()
        pb = mk.simulate_paths(m, 0.0, 5.0, 24.0,
                               mk.SimConfig(4, 24, 20120808), backend="numpy")
        expect = [3.9850746526414373, 4.335327235148279,
                  4.325567225850992, 4.935340109590326]
        assert pb.prices[:, -1].tolist() == expect
        assert pb.prices[2, 5] == 4.574390709234927

    @pytest.mark.parametrize("backend", BACKENDS)
    def test_bitwise_repeatable(self, backend):
        m = calibrated_market()
        cfg = mk.SimConfig(32, 24, 5)
        a = mk.simulate_paths(m, 0.0, 5.0, 24.0, cfg, backend=backend)
        b = mk.simulate_paths(m, 0.0, 5.0, 24.0, cfg, backend=backend)
        assert np.array_equal(a.prices, b.prices)

    @pytest.mark.skipif(not HAVE_NUMBA, reason="numba unavailable")
    def test_backends_agree(self):
        meas = UniformJump(-0.5, 1.0, 1.0)
        m = mk.MarketCoefficients(lam=0.3, b=0.1, sigma=0.3, psi=0.7,
                                  measure=meas)
        cfg = mk.SimConfig(256, 48, 9)
        a = mk.simulate_paths(m, 0.0, 5.0, 12.0, cfg, backend="numpy")
        b = mk.simulate_paths(m, 0.0, 5.0, 12.0, cfg, backend="numba")
        assert np.allclose(a.prices, b.prices, rtol=1e-13, atol=1e-13)

    @pytest.mark.parametrize("backend", BACKENDS)
    def test_batching_invariance(self, backend):
        m = calibrated_market()
        whole = mk.simulate_paths(
            m, 0.0, 5.0, 24.0, mk.SimConfig(50, 24, 6), backend=backend
        )
        first = mk.simulate_paths(
            m, 0.0, 5.0, 24.0, mk.SimConfig(17, 24, 6, path_offset=0),
            backend=backend,
        )
        rest = mk.simulate_paths(
            m, 0.0, 5.0, 24.0, mk.SimConfig(33, 24, 6, path_offset=17),
            backend=backend,
        )
        stitched = np.vstack([first.prices, rest.prices])
        assert np.array_equal(stitched, whole.prices)

    def test_env_flag_selects_backend(self, monkeypatch):
        from levyou import _backend
        monkeypatch.setenv("LEVYOU_BACKEND", "numpy")
        kern = _backend.get_kernels()
        assert "np" in kern.__name__


class TestSimulationInputs:
    def test_bad_horizon_rejected(self):
        with pytest.raises(DomainError):
            mk.simulate_paths(calibrated_market(), 5.0, 5.0, 5.0,
                              mk.SimConfig(4, 4, 1))

    def test_infinite_activity_rejected(self):
        dens = LevyDensity(
            density=lambda y: y**-1.5,
            support=(0.0, 1.0),
            small_order=0.5,
        )
        m = mk.MarketCoefficients(lam=0.1, b=0.0, sigma=0.1, psi=1.0,
                                  measure=dens)
        with pytest.raises(CaseError):
            mk.simulate_paths(m, 0.0, 5.0, 24.0, mk.SimConfig(4, 4, 1))

    def test_bad_config_rejected(self):
        with pytest.raises(ConfigError):
            mk.SimConfig(0, 4, 1)
        with pytest.raises(ConfigError):
            mk.SimConfig(4, 0, 1)

    def test_grid_endpoints(self):
        pb = mk.simulate_paths(calibrated_market(), 1.0, 5.0, 24.0,
                               mk.SimConfig(2, 10, 1))
        assert pb.times[0] == 1.0 and pb.times[-1] == 24.0
        assert len(pb.times) == 11
        assert np.all(pb.prices[:, 0] == 5.0)


class TestCSV:
    def test_round_trip(self, tmp_path):
        m = calibrated_market()
        pb = mk.simulate_paths(m, 0.0, 5.0, 24.0,
                               mk.SimConfig(5, 6, 77, path_offset=3))
        f = tmp_path / "paths.csv"
        pb.to_csv(f)
        back = mk.PathBundle.from_csv(f)
        assert np.array_equal(back.prices, pb.prices)
        assert np.array_equal(back.times, pb.times)
        assert back.seed == 77
        assert back.path_offset == 3

    def test_empty_file_rejected(self, tmp_path):
        f = tmp_path / "empty.csv"
        f.write_text("path_id,time,price\n")
        with pytest.raises(ConfigError):
            mk.PathBundle.from_csv(f)
