import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import erfc
from scipy.stats import ks_2samp

from stable_ddsde.errors import ParameterError
from stable_ddsde.rng import RngStream
from stable_ddsde.stable_process import (
    StableParams,
    build_kernel_table,
    ck_defect,
    grad_p_alpha,
    heat_equation_residual,
    kernel_bound_report,
    kernel_profile_quadrature,
    load_kernel_table,
    p_alpha,
    rho_alpha,
    sample_increment,
    sample_one_sided_stable,
    save_kernel_table,
    stable_tail_constant,
)

# Closed forms, frozen: Gamma(1+1/1.5)/pi and the alpha=2 Gaussian value.
ORIGIN_15 = 0.2873527514521640
ORIGIN_GAUSS = 0.2820947917738781


class TestRngStream:
    def test_same_stream_replays(self):
        a = RngStream(42, 3).normal(0.0, 1.0, 64)
        b = RngStream(42, 3).normal(0.0, 1.0, 64)
        assert np.array_equal(a, b)

    @given(st.integers(0, 2**32), st.integers(0, 2**16))
    def test_streams_deterministic(self, seed, stream):
        a = RngStream(seed, stream).uniform(0.0, 1.0, 8)
        b = RngStream(seed, stream).uniform(0.0, 1.0, 8)
        assert np.array_equal(a, b)

    def test_distinct_streams_differ(self):
        a = RngStream(42, 0).normal(0.0, 1.0, 64)
        b = RngStream(42, 1).normal(0.0, 1.0, 64)
        assert not np.array_equal(a, b)


class TestOneSidedSampler:
    def test_laplace_transform(self):
        s = sample_one_sided_stable(0.5, RngStream(1, 2), size=1_000_000)
        assert abs(np.mean(np.exp(-s)) - math.exp(-1.0)) <= 3e-3

    def test_half_stable_cdf(self):
        # S ~ Levy(c=1/2): P(S <= s) = erfc(1/(2 sqrt(s))).
        s = sample_one_sided_stable(0.5, RngStream(2, 2), size=1_000_000)
        for point in (0.5, 1.0, 4.0):
            emp = np.mean(s <= point)
            assert abs(emp - erfc(0.5 / math.sqrt(point))) <= 3e-3

    def test_repeat_bit_for_bit(self):
        a = sample_one_sided_stable(0.75, RngStream(5, 0), size=128)
        b = sample_one_sided_stable(0.75, RngStream(5, 0), size=128)
        assert np.array_equal(a, b)

    @pytest.mark.parametrize("index", [0.0, 1.0, -0.2, 1.7])
    def test_rejects_bad_index(self, index):
        with pytest.raises(ParameterError):
            sample_one_sided_stable(index, RngStream(0, 0))


class TestIncrementSampler:
    def test_characteristic_function(self):
        n = 1_000_000
        xi = np.array([0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0])
        dl = sample_increment(1.0, StableParams(1.5, 1), RngStream(1, 2), size=(n,))
        emp = np.mean(np.cos(np.outer(xi, dl[:, 0])), axis=1)
        assert np.max(np.abs(emp - np.exp(-xi**1.5))) <= 4.0 / math.sqrt(n)

    def test_scaling_law_ks(self):
        n, lam, alpha = 100_000, 8.0, 1.5
        a = sample_increment(1.0, StableParams(alpha, 1), RngStream(3, 2), size=(n,))[:, 0]
        b = sample_increment(lam, StableParams(alpha, 1), RngStream(4, 2), size=(n,))[:, 0]
        stat = ks_2samp(a, lam ** (-1.0 / alpha) * b).statistic
        # 1% two-sample critical value: 1.628 sqrt(2/n).
        assert stat <= 1.628 * math.sqrt(2.0 / n)

    def test_first_moment_scaling(self):
        params = StableParams(1.5, 1)
        ratios = []
        for i, t in enumerate((0.1, 1.0, 10.0)):
            dl = sample_increment(t, params, RngStream(6 + i, 2), size=(200_000,))
            ratios.append(np.mean(np.abs(dl[:, 0])) / t ** (1.0 / 1.5))
        assert max(ratios) / min(ratios) <= 1.1

    def test_dim_shapes(self):
        dl = sample_increment(0.5, StableParams(1.5, 2), RngStream(0, 2), size=(16,))
        assert dl.shape == (16, 2)

    def test_rejects_bad_dt(self):
        with pytest.raises(ParameterError):
            sample_increment(0.0, StableParams(1.5, 1), RngStream(0, 0))


class TestKernelTable:
    def test_origin_golden(self, table15):
        assert abs(p_alpha(1.0, 0.0, table15) - ORIGIN_15) <= 1e-6

    def test_gaussian_golden(self):
        table = build_kernel_table(2.0, n_radii=1024, extended=True)
        assert abs(p_alpha(1.0, 0.0, table) - ORIGIN_GAUSS) <= 1e-6

    def test_profile_monotone(self, table15):
        assert np.all(np.diff(table15.values) <= 0.0)
        assert np.all(table15.values > 0.0)

    def test_rejects_alpha_outside_range(self):
        with pytest.raises(ParameterError):
            build_kernel_table(2.5)
        with pytest.raises(ParameterError):
            build_kernel_table(0.8)

    def test_extended_flag_admits_gaussian(self):
        build_kernel_table(2.0, n_radii=256, extended=True)

    def test_persistence_roundtrip(self, table15, tmp_path):
        path = tmp_path / "kernel.skt"
        save_kernel_table(table15, path)
        assert path.read_bytes()[:4] == b"SKT1"
        back = load_kernel_table(path)
        assert back.params == table15.params
        assert np.array_equal(back.radii, table15.radii)
        assert np.array_equal(back.values, table15.values)

    def test_persistence_rejects_foreign_file(self, tmp_path):
        path = tmp_path / "junk.skt"
        path.write_bytes(b"NOPE" + bytes(64))
        with pytest.raises(Exception):
            load_kernel_table(path)


class TestPointEvaluation:
    def test_scaling_at_origin(self, table15):
        p1 = p_alpha(1.0, 0.0, table15)
        for t in (0.0625, 3.0, 16.0):
            assert p_alpha(t, 0.0, table15) == pytest.approx(
                t ** (-1.0 / 1.5) * p1, rel=1e-13)

    @given(t=st.floats(0.01, 100.0), x=st.floats(-50.0, 50.0))
    def test_scaling_identity(self, t, x, table15):
        lhs = p_alpha(t, x, table15)
        rhs = t ** (-1.0 / 1.5) * p_alpha(1.0, t ** (-1.0 / 1.5) * x, table15)
        assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_matches_direct_quadrature_at_t16(self, table15):
        xs = np.array([0.0, 0.5, 1.0, 2.5, 5.0, 10.0])
        direct = kernel_profile_quadrature(1.5, 1, xs, t=16.0)
        assert np.max(np.abs(p_alpha(16.0, xs, table15) / direct - 1.0)) <= 1e-5

    def test_tail_slope(self, table15):
        rs = np.geomspace(100.0, 10_000.0, 40)
        slope = np.polyfit(np.log(rs), np.log(p_alpha(1.0, rs, table15)), 1)[0]
        assert abs(slope + 2.5) <= 0.02 * 2.5

    def test_mass_under_scaling(self, table15):
        # Grid quadrature plus the exact first-order tail integral.
        x = np.arange(-300.0, 300.0, 0.05)
        c = stable_tail_constant(1.5, 1)
        for t in (0.1, 1.0, 10.0):
            mass = np.sum(p_alpha(t, x, table15)) * 0.05
            tail = 2.0 * t * c / 1.5 * 300.0 ** (-1.5)
            assert abs(mass + tail - 1.0) <= 1e-5

    def test_rejects_nonpositive_time(self, table15):
        with pytest.raises(ParameterError):
            p_alpha(0.0, 0.0, table15)
        with pytest.raises(ParameterError):
            p_alpha(-1.0, 0.0, table15)


class TestComparisonProfile:
    def test_unit_at_origin(self):
        assert rho_alpha(1.0, 0.0, 1.5) == 1.0

    def test_direct_substitution(self):
        assert rho_alpha(1.0, 1.0, 1.5) == pytest.approx(2.0 ** (-2.5), rel=1e-15)

    @given(st.floats(0.001, 1000.0))
    def test_origin_scaling(self, t):
        assert rho_alpha(t, 0.0, 1.5) == pytest.approx(t ** (-1.0 / 1.5), rel=1e-12)

    @given(st.floats(0.01, 100.0), st.floats(-100.0, 100.0))
    def test_formula(self, t, x):
        expect = t / (t ** (1.0 / 1.5) + abs(x)) ** 2.5
        assert rho_alpha(t, x, 1.5) == pytest.approx(expect, rel=1e-12)

    def test_rejects_nonpositive_time(self):
        with pytest.raises(ParameterError):
            rho_alpha(0.0, 1.0, 1.5)


class TestGradient:
    def test_zero_at_origin(self, table15):
        assert grad_p_alpha(1.0, 0.0, table15) == pytest.approx(0.0, abs=1e-15)

    def test_finite_difference(self, table15):
        h = 1e-4
        fd = (p_alpha(1.0, 0.5 + h, table15) - p_alpha(1.0, 0.5 - h, table15)) / (2 * h)
        assert grad_p_alpha(1.0, 0.5, table15) == pytest.approx(fd, rel=1e-5)

    def test_bound_stable_across_times(self, table15):
        xs = np.linspace(-20.0, 20.0, 401)
        sups = []
        for t in (0.1, 1.0, 10.0):
            g = np.abs(grad_p_alpha(t, xs, table15))
            sups.append(np.max(g * t ** (1.0 / 1.5) / rho_alpha(t, xs, 1.5)))
        assert all(np.isfinite(sups))
        assert max(sups) / min(sups) <= 2.0


@pytest.fixture(scope="module")
def report(table15):
    return kernel_bound_report(table15, doubling_pairs=4000)


class TestBoundReport:
    def test_ratio_at_unit_origin(self, table15, report):
        # rho(1, 0) = 1, so the two-sided ratio includes p(1,0) itself.
        assert report.ratio_min <= p_alpha(1.0, 0.0, table15) <= report.ratio_max

    def test_two_sided_positive_finite(self, report):
        assert 0.0 < report.ratio_min <= report.ratio_max < math.inf

    def test_doubling_within_theoretical_cap(self, report):
        assert report.doubling_max <= report.doubling_bound == 4.0 ** 2.5

    def test_regularity_constants_finite(self, report):
        assert np.isfinite(report.gradient_ratio_max)
        assert np.isfinite(report.space_holder_max)
        assert np.isfinite(report.time_holder_max)
        assert np.isfinite(report.generator_ratio_max)

    def test_holder_scan_over_betas(self, table15):
        for beta in (0.25, 0.5, 0.75):
            rep = kernel_bound_report(table15, t_points=10, x_points=24,
                                      beta=beta, doubling_pairs=500,
                                      with_generator=False)
            assert np.isfinite(rep.space_holder_max)

    def test_refinement_stability(self, table15, report):
        fine = kernel_bound_report(table15, doubling_pairs=4000, refine=2)
        assert abs(fine.ratio_min / report.ratio_min - 1.0) <= 0.2
        assert abs(fine.ratio_max / report.ratio_max - 1.0) <= 0.2
        assert fine.gradient_ratio_max / report.gradient_ratio_max <= 2.0
        assert fine.space_holder_max / report.space_holder_max <= 2.0
        assert fine.time_holder_max / report.time_holder_max <= 2.0


class TestConvolutionIdentity:
    def test_defect_small_at_unit_times(self, table15):
        assert ck_defect(table15, 1.0, 1.0) <= 1e-3

    def test_symmetric_in_arguments(self, table15):
        assert ck_defect(table15, 0.5, 2.0) == pytest.approx(
            ck_defect(table15, 2.0, 0.5), rel=1e-9)

    def test_rejects_coarse_grid(self, table15):
        with pytest.raises(ParameterError):
            ck_defect(table15, 1.0, 1.0, step=0.2)

    def test_defect_bounded_across_steps(self, table15):
        # The defect is dominated by tail truncation and table accuracy, so
        # step refinement keeps it at the floor rather than shrinking it.
        defects = [ck_defect(table15, 1.0, 1.0, step=s) for s in (0.1, 0.05, 0.025)]
        assert max(defects) <= 1e-3


class TestHeatEquation:
    def test_spectral_residual(self, table15):
        assert heat_equation_residual(table15, t=1.0) <= 1e-3
