import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stable_ddsde.besov_lp import (
    GridFunction,
    TorusGrid,
    besov_norm,
    block,
    build_partition,
    frac_laplacian,
    heat_propagate,
    holder_norm,
    holder_quotient,
    load_grid_function,
    load_grid_function_csv,
    log_lipschitz_constant,
    lp_decay_profile,
    lp_heat_integral,
    random_band_limited,
    save_grid_function,
    save_grid_function_csv,
    schauder_constant,
    spectral_gradient,
)
from stable_ddsde.errors import ParameterError
from stable_ddsde.rng import RngStream

# Direct singular-integral value of the generator at 0 for exp(-x^2/2),
# alpha = 1.5: graded quadrature of the second-difference form with the
# multiplier normalization 2^a Gamma((1+a)/2) / (sqrt(pi) |Gamma(-a/2)|).
GENERATOR_AT_ZERO = -0.8600399919


class TestTorusGrid:
    def test_rejects_non_power_of_two(self):
        with pytest.raises(ParameterError):
            TorusGrid(80.0, 3000)

    def test_rejects_too_few_points(self):
        with pytest.raises(ParameterError):
            TorusGrid(80.0, 128, 1)

    def test_two_dim_minimum_is_lower(self):
        TorusGrid(20.0, 128, 2)

    def test_rejects_bad_extent(self):
        with pytest.raises(ParameterError):
            TorusGrid(0.0, 512)

    def test_rejects_unsupported_dim(self):
        with pytest.raises(ParameterError):
            TorusGrid(80.0, 512, 3)

    def test_nyquist(self, grid80):
        assert grid80.nyquist == pytest.approx(math.pi * 4096 / 80.0)


class TestPartition:
    def test_chi_plateau_and_cutoff(self, part80):
        assert part80.multiplier(-1, np.array([0.5])) == pytest.approx(1.0)
        assert part80.multiplier(-1, np.array([2.0])) == pytest.approx(0.0)

    def test_psi_supported_on_annulus(self, part80):
        xi = np.linspace(0.0, 200.0, 2001)
        for j in range(0, 7):
            psi = part80.multiplier(j, xi)
            live = xi[psi > 1e-15]
            assert live.min() >= 0.5 * 2**j
            assert live.max() <= 1.5 * 2**j

    @given(j=st.integers(0, 6), mag=st.floats(0.01, 150.0))
    def test_psi_is_rescaled_base_profile(self, j, mag, part80):
        base = part80.multiplier(0, np.array([mag * 2.0**-j]))
        assert part80.multiplier(j, np.array([mag])) == pytest.approx(
            float(base), abs=1e-12)

    def test_partition_of_unity(self, part80):
        xi = np.abs(part80.grid.freq_norm())
        total = part80.multiplier(-1, 2.0 * xi)
        for j in range(0, part80.j_max + 1):
            total = total + part80.multiplier(j, xi)
        expect = part80.multiplier(-1, 2.0**-part80.j_max * xi)
        assert np.max(np.abs(total - expect)) <= 1e-12

    def test_rejects_nyquist_violation(self, grid80):
        with pytest.raises(ParameterError):
            build_partition(grid80, 12)


class TestBlocks:
    def test_pure_mode_passthrough(self, grid80, part80):
        # k = 4 pi sits where psi_4 = 1 and neighboring blocks vanish.
        x = grid80.axis()
        f = GridFunction(grid80, np.cos(4.0 * math.pi * x))
        out = block(f, 4, part80)
        assert np.max(np.abs(out.values - f.values)) <= 1e-12

    def test_constant_lives_in_low_block(self, grid80, part80):
        f = GridFunction(grid80, np.full(grid80.points, 2.5))
        assert np.max(np.abs(block(f, -1, part80).values - 2.5)) <= 1e-12
        for j in range(0, 5):
            assert np.max(np.abs(block(f, j, part80).values)) <= 1e-12

    def test_block_idempotent_against_widened(self, grid80, part80):
        f = random_band_limited(part80, RngStream(9, 2))
        for j in range(1, 6):
            widened = GridFunction(grid80, sum(
                block(f, i, part80).values for i in (j - 1, j, j + 1)
                if i <= part80.j_max))
            direct = block(f, j, part80)
            again = block(widened, j, part80)
            assert np.max(np.abs(direct.values - again.values)) <= 1e-12

    def test_self_adjoint(self, grid80, part80):
        f = random_band_limited(part80, RngStream(10, 2))
        g = random_band_limited(part80, RngStream(11, 2))
        for j in range(-1, part80.j_max + 1):
            lhs = np.sum(block(f, j, part80).values * g.values)
            rhs = np.sum(f.values * block(g, j, part80).values)
            assert abs(lhs - rhs) * grid80.spacing <= 1e-10

    def test_reconstruction(self, grid80, part80):
        f = random_band_limited(part80, RngStream(12, 2))
        total = sum(block(f, j, part80).values
                    for j in range(-1, part80.j_max + 1))
        assert np.max(np.abs(total - f.values)) <= 1e-10

    def test_rejects_block_beyond_partition(self, grid80, part80):
        f = GridFunction(grid80, np.zeros(grid80.points))
        with pytest.raises(ParameterError):
            block(f, part80.j_max + 1, part80)

    @given(a=st.floats(-3.0, 3.0), b=st.floats(-3.0, 3.0))
    def test_linearity(self, a, b, grid80, part80):
        f = random_band_limited(part80, RngStream(13, 2))
        g = random_band_limited(part80, RngStream(14, 2))
        combo = GridFunction(grid80, a * f.values + b * g.values)
        lhs = block(combo, 3, part80).values
        rhs = a * block(f, 3, part80).values + b * block(g, 3, part80).values
        assert np.max(np.abs(lhs - rhs)) <= 1e-10


class TestBesovNorm:
    def test_constant_function(self, grid80, part80):
        f = GridFunction(grid80, np.ones(grid80.points))
        prof = besov_norm(f, 0.7, np.inf, np.inf, part80)
        assert prof.total == pytest.approx(2.0 ** (-0.7), rel=1e-12)

    def test_single_mode(self, grid80, part80):
        x = grid80.axis()
        f = GridFunction(grid80, np.cos(4.0 * math.pi * x))
        prof = besov_norm(f, 0.45, np.inf, np.inf, part80)
        assert prof.total == pytest.approx(2.0 ** (0.45 * 4), rel=1e-10)

    @given(beta=st.floats(0.1, 1.4),
           p=st.sampled_from([1.0, 2.0, math.inf]),
           q=st.sampled_from([1.0, 2.0, math.inf]))
    def test_total_is_weighted_aggregation(self, beta, p, q, grid80, part80):
        f = random_band_limited(part80, RngStream(15, 2))
        prof = besov_norm(f, beta, p, q, part80)
        weights = 2.0 ** (beta * np.asarray(prof.js, dtype=float))
        weighted = weights * np.asarray(prof.block_norms)
        if q == math.inf:
            expect = float(np.max(weighted))
        else:
            expect = float(np.sum(weighted**q) ** (1.0 / q))
        assert prof.total == pytest.approx(expect, rel=1e-12)

    def test_holder_equivalence_on_cusp(self, grid80, part80):
        x = grid80.axis()
        window = np.exp(-((x / 18.0) ** 4))
        f = GridFunction(grid80, np.abs(np.sin(x)) ** 0.6 * window)
        ratio = besov_norm(f, 0.6, np.inf, np.inf, part80).total / holder_norm(f, 0.6)
        assert 0.2 <= ratio <= 5.0

    def test_rejects_unsupported_exponent(self, grid80, part80):
        f = GridFunction(grid80, np.ones(grid80.points))
        with pytest.raises(ParameterError):
            besov_norm(f, 0.5, 3.0, np.inf, part80)


class TestHolderNorm:
    def test_constant(self):
        grid = TorusGrid(8.0, 256)
        f = GridFunction(grid, np.full(256, -3.0))
        assert holder_norm(f, 0.5) == pytest.approx(3.0)

    def test_matches_exhaustive_pair_scan(self):
        grid = TorusGrid(8.0, 256)
        x = grid.axis()
        vals = x * np.exp(-((x / 2.5) ** 4))
        f = GridFunction(grid, vals)
        pair_diff = np.abs(vals[:, None] - vals[None, :])
        dist = np.abs(x[:, None] - x[None, :])
        mask = dist > 0
        brute = float(np.max(pair_diff[mask] / dist[mask] ** 0.5))
        assert holder_quotient(f, 0.5) == pytest.approx(brute, rel=1e-12)
        assert holder_norm(f, 0.5) == pytest.approx(brute + np.max(np.abs(vals)),
                                                    rel=1e-12)

    def test_rejects_beta_outside_range(self, grid80):
        f = GridFunction(grid80, np.zeros(grid80.points))
        for beta in (0.0, 1.0, 1.3):
            with pytest.raises(ParameterError):
                holder_norm(f, beta)


class TestBernstein:
    def test_gradient_of_blocks(self, part80):
        worst = 0.0
        for s in range(20):
            f = random_band_limited(part80, RngStream(80 + s, 2))
            for j in range(0, part80.j_max + 1):
                bj = block(f, j, part80)
                sup = float(np.max(np.abs(bj.values)))
                if sup < 1e-12:
                    continue
                g1 = float(np.max(np.abs(spectral_gradient(bj).values)))
                worst = max(worst, g1 / (2.0**j * sup))
        assert worst <= 1.5

    def test_second_derivative_of_blocks(self, part80):
        worst = 0.0
        for s in range(20):
            f = random_band_limited(part80, RngStream(180 + s, 2))
            for j in range(0, part80.j_max + 1):
                bj = block(f, j, part80)
                sup = float(np.max(np.abs(bj.values)))
                if sup < 1e-12:
                    continue
                g2 = float(np.max(np.abs(
                    spectral_gradient(spectral_gradient(bj)).values)))
                worst = max(worst, g2 / (4.0**j * sup))
        assert worst <= 1.5


class TestEmbeddings:
    def test_log_lipschitz_bounded(self, part80):
        consts = [log_lipschitz_constant(random_band_limited(part80, RngStream(s, 2)),
                                         part80)
                  for s in range(50)]
        assert all(np.isfinite(consts))
        assert max(consts) <= 10.0

    def test_first_order_norm_controlled_by_lipschitz(self, part80):
        # one-sided comparison: a C^1-type seminorm dominates B^1 uniformly
        worst = 0.0
        for s in range(20):
            f = random_band_limited(part80, RngStream(50 + s, 2))
            lip = float(np.max(np.abs(spectral_gradient(f).values)))
            worst = max(worst, besov_norm(f, 1.0, np.inf, np.inf, part80).total / lip)
        assert worst <= 1.5


class TestFracLaplacian:
    def test_annihilates_constants(self, grid80):
        f = GridFunction(grid80, np.full(grid80.points, 4.2))
        assert np.max(np.abs(frac_laplacian(f, 1.5).values)) <= 1e-12

    def test_eigenmode(self, grid80):
        x = grid80.axis()
        k = 4.0 * math.pi
        f = GridFunction(grid80, np.cos(k * x))
        out = frac_laplacian(f, 1.5)
        assert np.max(np.abs(out.values + k**1.5 * f.values)) <= 1e-9

    def test_symmetric(self, grid80, part80):
        f = random_band_limited(part80, RngStream(21, 2))
        g = random_band_limited(part80, RngStream(22, 2))
        lhs = np.sum(frac_laplacian(f, 1.5).values * g.values)
        rhs = np.sum(f.values * frac_laplacian(g, 1.5).values)
        assert abs(lhs - rhs) * grid80.spacing <= 1e-10

    def test_matches_singular_integral_at_origin(self, grid80):
        x = grid80.axis()
        f = GridFunction(grid80, np.exp(-0.5 * x**2))
        spec = frac_laplacian(f, 1.5).values[int(np.argmin(np.abs(x)))]
        assert spec == pytest.approx(GENERATOR_AT_ZERO, rel=1e-3)


class TestHeatIntegral:
    def test_block_decay_slope(self, part20):
        _, slope = lp_decay_profile(list(range(2, 8)), 1.0, 1.5, part20)
        assert abs(slope + 1.5) <= 0.15

    def test_low_block_finite(self, part20):
        assert np.isfinite(lp_heat_integral(-1, 1.0, 1.5, part20))

    def test_doubling_horizon_ratio(self, part20):
        for j in (4, 5, 6):
            one = lp_heat_integral(j, 1.0, 1.5, part20)
            two = lp_heat_integral(j, 2.0, 1.5, part20)
            assert 1.0 <= two / one <= 2.2


class TestHeatPropagate:
    def test_eigenmode_decay(self, grid80):
        x = grid80.axis()
        k = 4.0 * math.pi
        u0 = GridFunction(grid80, np.cos(k * x))
        snaps = heat_propagate(u0, None, 1.5, 1.0, 16)
        expect = math.exp(-(k**1.5)) * u0.values
        assert np.max(np.abs(snaps[-1].values - expect)) <= 1e-10

    def test_constant_source_integrates(self, grid80):
        u0 = GridFunction(grid80, np.zeros(grid80.points))
        ones = GridFunction(grid80, np.ones(grid80.points))
        snaps = heat_propagate(u0, ones, 1.5, 1.0, 8)
        assert np.max(np.abs(snaps[-1].values - 1.0)) <= 1e-10

    def test_stationary_pair(self, grid80, part80):
        g = random_band_limited(part80, RngStream(23, 2))
        forcing = frac_laplacian(g, 1.5)
        neg = GridFunction(grid80, -forcing.values)
        snaps = heat_propagate(g, neg, 1.5, 1.0, 32)
        assert np.max(np.abs(snaps[-1].values - g.values)) <= 1e-10


class TestSchauder:
    def test_constant_finite_and_stable(self, part20):
        base = schauder_constant(10, 1.5, 0.6, 1.0, part20, RngStream(7, 2))
        double = schauder_constant(20, 1.5, 0.6, 1.0, part20, RngStream(7, 2))
        assert np.isfinite(base.constant)
        assert abs(double.constant / base.constant - 1.0) <= 0.25

    def test_single_mode_never_amplified(self, grid80, part80):
        # semigroup decay keeps every weighted block below its initial size
        x = grid80.axis()
        u0 = GridFunction(grid80, np.cos(4.0 * math.pi * x))
        denom = besov_norm(u0, 2.1, np.inf, np.inf, part80).total
        snaps = heat_propagate(u0, None, 1.5, 1.0, 16)
        worst = max(besov_norm(u, 2.1, np.inf, np.inf, part80).total
                    for u in snaps)
        assert worst / denom <= 1.0 + 1e-12


class TestPersistence:
    def test_binary_roundtrip(self, grid80, part80, tmp_path):
        f = random_band_limited(part80, RngStream(33, 2))
        path = tmp_path / "field.sgf"
        save_grid_function(f, path)
        assert path.read_bytes()[:4] == b"SGF1"
        back = load_grid_function(path)
        assert back.grid == f.grid
        assert np.array_equal(back.values, f.values)

    def test_csv_roundtrip(self, grid80, part80, tmp_path):
        f = random_band_limited(part80, RngStream(34, 2))
        path = tmp_path / "field.csv"
        save_grid_function_csv(f, path)
        back = load_grid_function_csv(path)
        assert back.grid.points == f.grid.points
        assert np.max(np.abs(back.values - f.values)) <= 1e-12

    def test_band_limited_draws_replay(self, part80):
        a = random_band_limited(part80, RngStream(35, 2))
        b = random_band_limited(part80, RngStream(35, 2))
        assert np.array_equal(a.values, b.values)
