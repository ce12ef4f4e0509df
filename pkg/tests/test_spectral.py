"""Transforms, projections, norms and band changes."""

import math

import numpy as np
import pytest

import stochwave as sw
from stochwave.spectral import band_mask, collocation_nodes, lambda_sq, mode_indices


def random_state(grid, seed=0, band=None):
    """Hermitian state from random real fields."""
    rng = np.random.default_rng(seed)
    band = grid.n_high if band is None else band
    shape = (2 * band,) * grid.dim
    return sw.state_from_fields(grid, rng.standard_normal(shape),
                                rng.standard_normal(shape), band=band)


class TestMakeGrid:
    def test_scaling_exponent_two(self):
        grid = sw.make_grid(1, 1024, 2)
        assert grid.n_high == 1048576

    def test_identity_exponent(self):
        grid = sw.make_grid(1, 8, 1)
        assert grid.n_high == 8
        assert grid.points_per_dim == 16

    def test_fractional_exponent_2d(self):
        # independent integer route: floor(128^1.5) = floor(sqrt(128^3))
        expected = math.isqrt(128**3)
        grid = sw.make_grid(2, 128, 1.5)
        assert grid.n_high == expected == 1448

    @pytest.mark.parametrize("args", [(3, 8, 1.0), (0, 8, 1.0), (1, 8, 0.5), (1, 0, 1.0)])
    def test_rejects_bad_arguments(self, args):
        with pytest.raises(ValueError):
            sw.make_grid(*args)


class TestTransforms:
    def test_constant_field_is_dc_mode(self):
        samples = np.full(16, 3.25)
        coeffs = sw.forward(samples)
        assert coeffs[0] == pytest.approx(3.25, abs=1e-14)
        assert np.abs(coeffs[1:]).max() < 1e-14

    def test_single_harmonic(self):
        x = collocation_nodes(8)
        coeffs = sw.forward(np.cos(2 * np.pi * x))
        assert coeffs[1] == pytest.approx(0.5, abs=1e-14)
        assert coeffs[-1] == pytest.approx(0.5, abs=1e-14)
        rest = coeffs.copy()
        rest[[1, -1]] = 0
        assert np.abs(rest).max() < 1e-14

    @pytest.mark.parametrize("dim,band", [(1, 8), (1, 64), (2, 8), (2, 16)])
    def test_round_trip(self, dim, band):
        rng = np.random.default_rng(42 + band + dim)
        samples = rng.standard_normal((2 * band,) * dim)
        back = sw.inverse(sw.forward(samples))
        rel = np.abs(back - samples).max() / np.abs(samples).max()
        assert rel < 1e-12

    def test_parseval(self):
        rng = np.random.default_rng(7)
        samples = rng.standard_normal((32, 32))
        coeffs = sw.forward(samples)
        lhs = np.sum(samples**2) / samples.size
        rhs = np.sum(np.abs(coeffs) ** 2)
        assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_size_mismatch_rejected(self):
        with pytest.raises(ValueError):
            sw.forward(np.zeros(15))
        with pytest.raises(ValueError):
            sw.forward(np.zeros((16, 8)))

    def test_state_from_fields_is_hermitian(self):
        grid = sw.make_grid(2, 8, 1.5)
        state = random_state(grid, seed=3)
        u = sw.inverse(state.u_hat)
        assert np.abs(u.imag).max() < 1e-12 * max(np.abs(u.real).max(), 1)


class TestProjections:
    def test_full_band_projection_is_identity(self):
        grid = sw.make_grid(1, 8, 1.5)
        state = random_state(grid)
        out = sw.project_low(state, grid.n_high)
        np.testing.assert_array_equal(out.u_hat, state.u_hat)
        np.testing.assert_array_equal(out.v_hat, state.v_hat)

    def test_idempotent(self):
        grid = sw.make_grid(1, 16, 1.0)
        state = random_state(grid)
        once = sw.project_low(state, 5)
        twice = sw.project_low(once, 5)
        np.testing.assert_array_equal(once.u_hat, twice.u_hat)

    def test_mode_survival(self):
        grid = sw.make_grid(1, 16, 1.0)
        state = sw.zero_state(grid)
        u = state.u_hat.copy()
        for k in (0, 3, -3, 9, -9):
            u[k] = 1.0
        state = sw.SpectralState(grid, 16, u, state.v_hat)
        kept = sw.project_low(state, 4)
        idx = mode_indices(16)
        # oracle: direct mask enumeration over every mode
        for i, k in enumerate(idx):
            expect = 1.0 if k in (0, 3, -3) else 0.0
            assert kept.u_hat[i] == expect

    def test_band_selects_annulus(self):
        grid = sw.make_grid(1, 16, 1.0)
        u = np.zeros(32, dtype=np.complex128)
        for k in (0, 3, -3, 9, -9):
            u[k] = 1.0
        state = sw.SpectralState(grid, 16, u, np.zeros_like(u))
        band = sw.project_band(state, 3, 9)
        idx = mode_indices(16)
        for i, k in enumerate(idx):
            expect = 1.0 if k in (9, -9) else 0.0
            assert band.u_hat[i] == expect

    def test_partition_of_unity(self):
        grid = sw.make_grid(1, 8, 2.0)
        state = random_state(grid)
        low = sw.project_low(state, 3)
        mid = sw.project_band(state, 3, 20)
        high = sw.project_band(state, 20, grid.n_high)
        total = low.u_hat + mid.u_hat + high.u_hat
        np.testing.assert_array_equal(total, state.u_hat)

    def test_band_of_everything_drops_dc(self):
        grid = sw.make_grid(1, 8, 1.0)
        state = random_state(grid)
        out = sw.project_band(state, 0, grid.n_high)
        expect = state.u_hat.copy()
        expect[0] = 0
        np.testing.assert_array_equal(out.u_hat, expect)

    def test_band_requires_ordered_cuts(self):
        grid = sw.make_grid(1, 8, 1.0)
        state = random_state(grid)
        with pytest.raises(ValueError):
            sw.project_band(state, 5, 5)
        with pytest.raises(ValueError):
            sw.project_low(state, grid.n_high + 1)

    def test_projection_composition(self):
        grid = sw.make_grid(2, 8, 1.0)
        state = random_state(grid, seed=11)
        a = sw.project_low(sw.project_low(state, 6), 3)
        b = sw.project_low(state, 3)
        np.testing.assert_array_equal(a.u_hat, b.u_hat)
        c = sw.project_band(state, 2, 6)
        d = sw.project_low(state, 2)
        np.testing.assert_array_equal(c.u_hat + d.u_hat, sw.project_low(state, 6).u_hat)


class TestSobolevNorm:
    def test_single_mode_multiplier(self):
        grid = sw.make_grid(1, 8, 1.0)
        u = np.zeros(16, dtype=np.complex128)
        u[1] = 1.0  # exp(2 pi i x)
        state = sw.SpectralState(grid, 8, u, np.zeros_like(u))
        assert sw.sobolev_norm(state, 1.0) == pytest.approx(
            math.sqrt(1 + 4 * math.pi**2), rel=1e-13)

    def test_constant_velocity(self):
        grid = sw.make_grid(1, 8, 1.0)
        v = np.zeros(16, dtype=np.complex128)
        v[0] = -2.5
        state = sw.SpectralState(grid, 8, np.zeros_like(v), v)
        for gamma in (-1.0, 0.0, 0.5, 2.0):
            assert sw.sobolev_norm(state, gamma) == pytest.approx(2.5, rel=1e-13)

    def test_matches_independent_mode_loop(self):
        grid = sw.make_grid(2, 6, 1.5)
        state = random_state(grid, seed=5)
        idx = mode_indices(state.band)
        acc = 0.0
        for i, ki in enumerate(idx):
            for j, kj in enumerate(idx):
                lam2 = (2 * np.pi) ** 2 * (ki**2 + kj**2)
                acc += abs(state.u_hat[i, j]) ** 2
                acc += abs(state.v_hat[i, j]) ** 2 / (1 + lam2)
        assert sw.sobolev_norm(state, 0.0) == pytest.approx(math.sqrt(acc), rel=1e-12)

    @pytest.mark.parametrize("gamma", [0.0, 0.5, 1.0, 2.0])
    def test_bernstein_multiplier_bound(self, gamma):
        grid = sw.make_grid(2, 16, 1.0)
        m = 5
        state = sw.project_low(random_state(grid, seed=int(gamma * 10) + 1), m)
        bound = (1 + 4 * np.pi**2 * grid.dim * m**2) ** (gamma / 2)
        assert sw.sobolev_norm(state, gamma) <= bound * sw.sobolev_norm(state, 0.0) * (1 + 1e-12)


class TestPseudospectral:
    def test_identity_reproduces_band_limited(self):
        grid = sw.make_grid(1, 16, 1.0)
        state = random_state(grid)
        out = sw.pseudospectral_apply(lambda u: u, state.u_hat, 7)
        np.testing.assert_allclose(out, sw.project_low(state, 7).u_hat, atol=1e-13)

    def test_constant_maps_to_dc(self):
        grid = sw.make_grid(1, 8, 1.0)
        state = random_state(grid)
        out = sw.pseudospectral_apply(lambda u: np.full_like(u, 4.0), state.u_hat, 8)
        assert out[0] == pytest.approx(4.0, abs=1e-13)
        assert np.abs(out[1:]).max() < 1e-13

    def test_square_of_cosine(self):
        # cos^2(2 pi x) = 1/2 + cos(4 pi x)/2, exactly representable at band 8
        grid = sw.make_grid(1, 8, 1.0)
        x = collocation_nodes(8)
        state = sw.state_from_fields(grid, np.cos(2 * np.pi * x), np.zeros(16))
        out = sw.pseudospectral_apply(lambda u: u * u, state.u_hat, 8)
        expect = np.zeros(16, dtype=np.complex128)
        expect[0] = 0.5
        expect[2] = expect[-2] = 0.25
        np.testing.assert_allclose(out, expect, atol=1e-14)

    def test_rejects_non_finite(self):
        grid = sw.make_grid(1, 8, 1.0)
        state = random_state(grid)
        with pytest.raises(FloatingPointError), np.errstate(invalid="ignore"):
            sw.pseudospectral_apply(lambda u: np.log(u - 100.0), state.u_hat, 8)

    def test_oversampled_identity_matches(self):
        grid = sw.make_grid(1, 8, 1.0)
        state = random_state(grid)
        plain = sw.pseudospectral_apply(lambda u: 2 * u, state.u_hat, 8)
        over = sw.pseudospectral_apply(lambda u: 2 * u, state.u_hat, 8, oversample=1.5)
        np.testing.assert_allclose(plain, over, atol=1e-13)


class TestBandChanges:
    def test_embed_same_grid_is_identity(self):
        grid = sw.make_grid(1, 8, 1.0)
        state = random_state(grid)
        out = sw.embed(state, grid)
        np.testing.assert_array_equal(out.u_hat, state.u_hat)

    def test_restrict_left_inverse_of_embed(self):
        coarse = sw.make_grid(1, 8, 1.0)
        fine = sw.make_grid(1, 8, 2.0)
        state = random_state(coarse)
        back = sw.restrict(sw.embed(state, fine), coarse)
        np.testing.assert_array_equal(back.u_hat, state.u_hat)
        np.testing.assert_array_equal(back.v_hat, state.v_hat)

    def test_embed_2d_round_trip(self):
        coarse = sw.make_grid(2, 4, 1.0)
        fine = sw.make_grid(2, 4, 2.0)
        state = random_state(coarse)
        back = sw.restrict(sw.embed(state, fine), coarse)
        np.testing.assert_array_equal(back.u_hat, state.u_hat)

    @pytest.mark.parametrize("gamma", [0.0, 0.5, 1.5])
    def test_norm_preserved_by_embedding(self, gamma):
        coarse = sw.make_grid(2, 6, 1.0)
        fine = sw.make_grid(2, 6, 1.7)
        state = random_state(coarse)
        assert sw.sobolev_norm(sw.embed(state, fine), gamma) == pytest.approx(
            sw.sobolev_norm(state, gamma), rel=1e-12)

    def test_dimension_mismatch_rejected(self):
        state = random_state(sw.make_grid(1, 8, 1.0))
        with pytest.raises(ValueError):
            sw.embed(state, sw.make_grid(2, 8, 2.0))

    def test_hermitian_preserved_through_pipeline(self):
        grid = sw.make_grid(1, 16, 1.5)
        state = random_state(grid)
        out = sw.project_band(sw.project_low(state, 20), 2, 14)
        out = sw.restrict(out, sw.make_grid(1, 16, 1.0))
        u = sw.inverse(out.u_hat)
        assert np.abs(u.imag).max() < 1e-12 * max(np.abs(u.real).max(), 1e-9)


class TestSnapshotFormat:
    def test_round_trip_bits(self, tmp_path):
        grid = sw.make_grid(2, 4, 1.5)
        state = random_state(grid, seed=9)
        path = tmp_path / "state.swv"
        sw.save_snapshot(path, state, 0.125)
        dim, points, t, u, v = sw.load_snapshot(path)
        assert (dim, points, t) == (2, grid.points_per_dim, 0.125)
        u0, v0 = sw.state_to_fields(state)
        np.testing.assert_array_equal(u, u0)
        np.testing.assert_array_equal(v, v0)

    def test_header_layout(self, tmp_path):
        grid = sw.make_grid(1, 4, 1.0)
        state = random_state(grid)
        path = tmp_path / "state.swv"
        sw.save_snapshot(path, state, 1.0)
        blob = path.read_bytes()
        assert blob[:4] == b"SWV1"
        assert len(blob) == 4 + 4 + 4 + 8 + 2 * 8 * grid.points_per_dim

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "bogus.swv"
        path.write_bytes(b"NOPE" + b"\0" * 32)
        with pytest.raises(ValueError):
            sw.load_snapshot(path)


def test_nyquist_slot_stays_empty():
    """Band changes and projections keep the unpaired slot at zero."""
    grid = sw.make_grid(1, 8, 1.0)
    state = random_state(grid)
    assert state.u_hat[8] == 0
    fine = sw.make_grid(1, 8, 2.0)
    assert sw.embed(state, fine).u_hat[16] == 0
    assert sw.with_band(sw.embed(state, fine), 8).u_hat[8] == 0


def test_mode_frequency():
    assert sw.mode_frequency(0).lam == 0.0
    assert sw.mode_frequency(3).lam == pytest.approx(6 * np.pi)
    mf = sw.mode_frequency(3, -4)
    assert mf.k == (3, -4)
    assert mf.lam == pytest.approx(10 * np.pi)
    assert mf.lam > 0  # zero only at the origin


def test_lambda_grid_matches_definition():
    lam2 = lambda_sq(2, 4)
    idx = mode_indices(4)
    for i, ki in enumerate(idx):
        for j, kj in enumerate(idx):
            assert lam2[i, j] == pytest.approx((2 * np.pi) ** 2 * (ki**2 + kj**2))


def test_band_mask_range_check():
    with pytest.raises(ValueError):
        band_mask(1, 8, 9)
