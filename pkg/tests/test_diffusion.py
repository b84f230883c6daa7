"""Noise schedule, v-parameterization, and DDIM sampler tests."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from splatforge.diffusion import (
    NoiseSchedule,
    ddim_step,
    delta_data_oracle,
    eps_from_v,
    forward_diffuse,
    gaussian_mixture_oracle,
    gm_posterior_v,
    make_schedule,
    rescale_zero_terminal_snr,
    sample,
    sample_trajectory,
    timestep_sequence,
    v_from,
    x0_from_v,
)

KINDS = ("linear-beta", "cosine")


def equal_coeff_schedule() -> NoiseSchedule:
    """Two-step schedule whose noisy endpoint has alpha = sigma = 1/sqrt(2)."""

    r = 1.0 / np.sqrt(2.0)
    return NoiseSchedule(alphas=np.array([1.0, r]), sigmas=np.array([0.0, r]))


class TestSchedules:
    @pytest.mark.parametrize("kind", KINDS)
    @pytest.mark.parametrize("total", [1, 10, 1000])
    def test_starts_clean(self, kind, total):
        sched = make_schedule(kind, total)
        assert sched.alphas[0] == 1.0
        assert sched.sigmas[0] == 0.0
        assert sched.num_steps == total

    @pytest.mark.parametrize("kind", KINDS)
    @pytest.mark.parametrize("total", [1, 10, 1000])
    def test_variance_preserving(self, kind, total):
        sched = make_schedule(kind, total)
        vp = sched.alphas**2 + sched.sigmas**2
        assert np.abs(vp - 1.0).max() <= 1e-9

    @pytest.mark.parametrize("kind", KINDS)
    def test_alphas_non_increasing(self, kind):
        sched = make_schedule(kind, 500)
        assert (np.diff(sched.alphas) <= 0).all()

    def test_cosine_strictly_decreasing(self):
        sched = make_schedule("cosine", 1000)
        assert (np.diff(sched.alphas) < 0).all()

    def test_linear_beta_ends_noisy(self):
        sched = make_schedule("linear-beta", 1000)
        assert sched.alphas[-1] < 0.1
        assert sched.sigmas[-1] > 0.99

    def test_invalid_kind(self):
        with pytest.raises(ValueError, match="kind"):
            make_schedule("quadratic", 100)

    @pytest.mark.parametrize("total", [0, -3])
    def test_invalid_total_steps(self, total):
        with pytest.raises(ValueError, match="total_steps"):
            make_schedule("cosine", total)

    def test_rejects_dirty_start(self):
        with pytest.raises(ValueError, match="start clean"):
            NoiseSchedule(alphas=np.array([0.9, 0.5]), sigmas=np.array([0.0, 0.5]))

    def test_rejects_non_variance_preserving(self):
        with pytest.raises(ValueError, match="variance preserving"):
            NoiseSchedule(alphas=np.array([1.0, 0.5]), sigmas=np.array([0.0, 0.5]))

    def test_rejects_increasing_alphas(self):
        with pytest.raises(ValueError, match="non-increasing"):
            NoiseSchedule(
                alphas=np.array([1.0, 0.6, 0.8]),
                sigmas=np.array([0.0, 0.8, 0.6]),
            )

    def test_coeffs_range_checked(self):
        sched = make_schedule("cosine", 10)
        assert sched.coeffs(0) == (1.0, 0.0)
        with pytest.raises(ValueError, match="t must lie"):
            sched.coeffs(11)
        with pytest.raises(ValueError, match="t must lie"):
            sched.coeffs(-1)

    def test_arrays_frozen(self):
        sched = make_schedule("cosine", 10)
        with pytest.raises(ValueError):
            sched.alphas[3] = 0.5


class TestZeroTerminalSnr:
    @pytest.mark.parametrize("kind", KINDS)
    def test_terminal_exact(self, kind):
        sched = rescale_zero_terminal_snr(make_schedule(kind, 1000))
        assert sched.alphas[-1] == 0.0
        assert sched.sigmas[-1] == 1.0
        assert sched.alphas[0] == 1.0
        assert sched.sigmas[0] == 0.0

    @pytest.mark.parametrize("kind", KINDS)
    def test_interior_snr_strictly_decreasing(self, kind):
        sched = rescale_zero_terminal_snr(make_schedule(kind, 1000))
        snr = sched.alphas[1:-1] ** 2 / sched.sigmas[1:-1] ** 2
        assert (np.diff(snr) < 0).all()

    def test_still_variance_preserving(self):
        sched = rescale_zero_terminal_snr(make_schedule("linear-beta", 200))
        vp = sched.alphas**2 + sched.sigmas**2
        assert np.abs(vp - 1.0).max() <= 1e-9
        assert (np.diff(sched.alphas) <= 0).all()

    def test_degenerate_input_raises(self):
        flat = NoiseSchedule(alphas=np.ones(3), sigmas=np.zeros(3))
        with pytest.raises(ValueError, match="degenerate"):
            rescale_zero_terminal_snr(flat)

    def test_idempotent_when_already_zero(self):
        sched = rescale_zero_terminal_snr(make_schedule("cosine", 100))
        again = rescale_zero_terminal_snr(sched)
        np.testing.assert_array_equal(again.alphas, sched.alphas)
        np.testing.assert_array_equal(again.sigmas, sched.sigmas)


class TestForwardDiffuse:
    def setup_method(self):
        self.sched = rescale_zero_terminal_snr(make_schedule("cosine", 1000))
        rng = np.random.default_rng(11)
        self.x0 = rng.standard_normal((5, 3))
        self.eps = rng.standard_normal((5, 3))

    def test_t0_returns_clean_exactly(self):
        out = forward_diffuse(self.x0, 0, self.eps, self.sched)
        np.testing.assert_array_equal(out, self.x0)

    def test_terminal_returns_noise_exactly(self):
        out = forward_diffuse(self.x0, 1000, self.eps, self.sched)
        np.testing.assert_array_equal(out, self.eps)

    @pytest.mark.parametrize("t", [-1, 1001])
    def test_out_of_range_t(self, t):
        with pytest.raises(ValueError, match="t must lie"):
            forward_diffuse(self.x0, t, self.eps, self.sched)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="shapes differ"):
            forward_diffuse(self.x0, 5, self.eps[:2], self.sched)

    def test_monte_carlo_moments(self):
        # Sample mean of x_t must sit within 4 standard errors of alpha*x0,
        # and the sample std within 1% of sigma (estimator error ~0.2%).
        t = 500
        alpha, sigma = self.sched.coeffs(t)
        n = 100_000
        x0 = np.full((n,), 0.7)
        eps = np.random.default_rng(123).standard_normal((n,))
        x_t = forward_diffuse(x0, t, eps, self.sched)
        assert abs(x_t.mean() - alpha * 0.7) <= 4.0 * sigma / np.sqrt(n)
        assert abs(x_t.std() - sigma) <= 0.01 * sigma


class TestVAlgebra:
    def setup_method(self):
        self.sched = rescale_zero_terminal_snr(make_schedule("cosine", 1000))
        rng = np.random.default_rng(21)
        self.x0 = rng.standard_normal((4, 2))
        self.eps = rng.standard_normal((4, 2))

    def test_t0_v_equals_eps(self):
        v = v_from(self.x0, self.eps, 0, self.sched)
        np.testing.assert_array_equal(v, self.eps)

    def test_t0_x0_from_v_is_xt(self):
        x_t = forward_diffuse(self.x0, 0, self.eps, self.sched)
        v = v_from(self.x0, self.eps, 0, self.sched)
        np.testing.assert_array_equal(x0_from_v(x_t, v, 0, self.sched), x_t)

    def test_terminal_v_is_minus_clean(self):
        v = v_from(self.x0, self.eps, 1000, self.sched)
        np.testing.assert_array_equal(v, -self.x0)

    def test_hand_case_equal_coefficients(self):
        # alpha = sigma = 1/sqrt(2), x0 = 1, eps = 0: the state is 1/sqrt(2),
        # the v-target is -1/sqrt(2), and both inversions recover the inputs.
        sched = equal_coeff_schedule()
        x0 = np.array([1.0])
        eps = np.array([0.0])
        x_t = forward_diffuse(x0, 1, eps, sched)
        v = v_from(x0, eps, 1, sched)
        assert x_t[0] == pytest.approx(1.0 / np.sqrt(2.0), abs=1e-15)
        assert v[0] == pytest.approx(-1.0 / np.sqrt(2.0), abs=1e-15)
        assert x0_from_v(x_t, v, 1, sched)[0] == pytest.approx(1.0, abs=1e-9)
        assert eps_from_v(x_t, v, 1, sched)[0] == pytest.approx(0.0, abs=1e-12)

    def test_round_trip_random(self):
        rng = np.random.default_rng(31)
        for _ in range(20):
            t = int(rng.integers(0, 1001))
            x0 = rng.standard_normal((3, 4))
            eps = rng.standard_normal((3, 4))
            x_t = forward_diffuse(x0, t, eps, self.sched)
            v = v_from(x0, eps, t, self.sched)
            np.testing.assert_allclose(
                x0_from_v(x_t, v, t, self.sched), x0, atol=1e-9
            )
            if t > 0:
                np.testing.assert_allclose(
                    eps_from_v(x_t, v, t, self.sched), eps, atol=1e-9
                )

    @settings(max_examples=60, deadline=None)
    @given(
        x0=st.floats(-100.0, 100.0),
        eps=st.floats(-100.0, 100.0),
        t=st.integers(0, 1000),
    )
    def test_round_trip_property(self, x0, eps, t):
        sched = rescale_zero_terminal_snr(make_schedule("linear-beta", 1000))
        x0a = np.array([x0])
        epsa = np.array([eps])
        x_t = forward_diffuse(x0a, t, epsa, sched)
        v = v_from(x0a, epsa, t, sched)
        assert x0_from_v(x_t, v, t, sched)[0] == pytest.approx(x0, abs=1e-9)
        assert eps_from_v(x_t, v, t, sched)[0] == pytest.approx(eps, abs=1e-9)


class TestTimestepSequence:
    def test_uniform_stride(self):
        ts = timestep_sequence(1000, 50)
        assert ts == [1000 - 20 * i for i in range(51)]

    @pytest.mark.parametrize("total,num", [(1000, 7), (100, 100), (17, 5)])
    def test_endpoints_and_strict_decrease(self, total, num):
        ts = timestep_sequence(total, num)
        assert ts[0] == total
        assert ts[-1] == 0
        assert all(a > b for a, b in zip(ts, ts[1:]))

    def test_more_steps_than_schedule_collapses(self):
        assert timestep_sequence(10, 50) == list(range(10, -1, -1))

    def test_single_step(self):
        assert timestep_sequence(1000, 1) == [1000, 0]

    def test_invalid_args(self):
        with pytest.raises(ValueError, match="num_steps"):
            timestep_sequence(100, 0)
        with pytest.raises(ValueError, match="total_steps"):
            timestep_sequence(0, 10)


class TestDdimStep:
    def setup_method(self):
        self.sched = rescale_zero_terminal_snr(make_schedule("cosine", 1000))
        rng = np.random.default_rng(41)
        self.x = rng.standard_normal((6, 2))
        self.v = rng.standard_normal((6, 2))

    @pytest.mark.parametrize("t,s", [(5, 5), (5, 7), (1001, 0), (5, -1)])
    def test_bad_timesteps(self, t, s):
        with pytest.raises(ValueError, match="s < t"):
            ddim_step(self.x, self.v, t, s, 0.0, self.sched)

    @pytest.mark.parametrize("eta", [-0.1, 1.5])
    def test_bad_eta(self, eta):
        with pytest.raises(ValueError, match="eta"):
            ddim_step(self.x, self.v, 10, 5, eta, self.sched)

    def test_noise_required_when_stochastic(self):
        with pytest.raises(ValueError, match="noise is required"):
            ddim_step(self.x, self.v, 10, 5, 0.5, self.sched)
        with pytest.raises(ValueError, match="noise shape"):
            ddim_step(
                self.x, self.v, 10, 5, 0.5, self.sched, noise=np.zeros((2, 2))
            )

    def test_one_step_recovers_delta_data(self):
        # With an exact delta-data predictor, a single eta=0 step from any t
        # straight to 0 lands on the data point.
        star = np.array([0.4, -1.3])
        oracle = delta_data_oracle(star, self.sched)
        for t in (1, 250, 1000):
            x_t = np.random.default_rng(t).standard_normal((3, 2))
            v_hat = oracle(x_t, t)
            x_0 = ddim_step(x_t, v_hat, t, 0, 0.0, self.sched)
            np.testing.assert_allclose(x_0, np.broadcast_to(star, (3, 2)), atol=1e-6)

    def test_eta_zero_ignores_noise_argument(self):
        a = ddim_step(self.x, self.v, 10, 5, 0.0, self.sched)
        b = ddim_step(self.x, self.v, 10, 5, 0.0, self.sched, noise=None)
        np.testing.assert_array_equal(a, b)


class TestGmPosterior:
    def setup_method(self):
        self.sched = rescale_zero_terminal_snr(make_schedule("cosine", 1000))

    def test_single_delta_component_returns_mean(self):
        m = np.array([0.9, -0.2, 1.4])
        mixture = [(1.0, m, np.zeros((3, 3)))]
        x_t = np.random.default_rng(5).standard_normal((4, 3))
        for t in (1, 400, 999):
            v = gm_posterior_v(x_t, t, mixture, self.sched)
            np.testing.assert_allclose(
                x0_from_v(x_t, v, t, self.sched),
                np.broadcast_to(m, x_t.shape),
                atol=1e-9,
            )

    def test_symmetric_deltas_cancel_at_origin(self):
        m = np.array([2.0, -1.0])
        mixture = [(0.5, m, np.zeros((2, 2))), (0.5, -m, np.zeros((2, 2)))]
        v = gm_posterior_v(np.zeros((1, 2)), 500, mixture, self.sched)
        x0_hat = x0_from_v(np.zeros((1, 2)), v, 500, self.sched)
        np.testing.assert_allclose(x0_hat, np.zeros((1, 2)), atol=1e-12)

    def test_matches_quadrature_1d(self):
        # Independent oracle: dense trapezoid quadrature of the posterior
        # mean integral for a two-component 1-D mixture.
        mixture = [
            (0.3, np.array([-1.2]), np.array([[0.4]])),
            (0.7, np.array([0.8]), np.array([[0.09]])),
        ]
        t = 600
        alpha, sigma = self.sched.coeffs(t)
        grid = np.linspace(-12.0, 12.0, 240_001)
        p0 = 0.3 * np.exp(-0.5 * (grid + 1.2) ** 2 / 0.4) / np.sqrt(
            2 * np.pi * 0.4
        ) + 0.7 * np.exp(-0.5 * (grid - 0.8) ** 2 / 0.09) / np.sqrt(2 * np.pi * 0.09)
        for xt in (-2.0, -0.3, 0.0, 0.7, 2.5):
            lik = np.exp(-0.5 * (xt - alpha * grid) ** 2 / sigma**2)
            want = np.trapezoid(grid * p0 * lik, grid) / np.trapezoid(p0 * lik, grid)
            v = gm_posterior_v(np.array([xt]), t, mixture, self.sched)
            got = x0_from_v(np.array([xt]), v, t, self.sched)[0]
            assert got == pytest.approx(want, abs=1e-6)

    def test_batch_shapes(self):
        mixture = [(1.0, np.zeros(2), 0.5)]
        x_t = np.random.default_rng(6).standard_normal((5, 4, 2))
        v = gm_posterior_v(x_t, 300, mixture, self.sched)
        assert v.shape == x_t.shape

    def test_covariance_forms_agree(self):
        x_t = np.random.default_rng(7).standard_normal((3, 2))
        forms = [0.25, np.array([0.25, 0.25]), 0.25 * np.eye(2)]
        vs = [
            gm_posterior_v(x_t, 200, [(1.0, np.ones(2), c)], self.sched)
            for c in forms
        ]
        np.testing.assert_allclose(vs[0], vs[1], atol=1e-12)
        np.testing.assert_allclose(vs[0], vs[2], atol=1e-12)

    def test_validation(self):
        x = np.zeros(2)
        with pytest.raises(ValueError, match="at least one"):
            gm_posterior_v(x, 100, [], self.sched)
        with pytest.raises(ValueError, match="sum to 1"):
            gm_posterior_v(x, 100, [(0.9, np.zeros(2), 0.1)], self.sched)
        with pytest.raises(ValueError, match="non-negative"):
            gm_posterior_v(
                x,
                100,
                [(-0.5, np.zeros(2), 0.1), (1.5, np.ones(2), 0.1)],
                self.sched,
            )
        with pytest.raises(ValueError, match="positive semi-definite"):
            gm_posterior_v(
                x, 100, [(1.0, np.zeros(2), np.array([[1.0, 2.0], [2.0, 1.0]]))],
                self.sched,
            )
        with pytest.raises(ValueError, match="symmetric"):
            gm_posterior_v(
                x, 100, [(1.0, np.zeros(2), np.array([[1.0, 0.5], [0.0, 1.0]]))],
                self.sched,
            )
        with pytest.raises(ValueError, match="does not match dim"):
            gm_posterior_v(np.zeros(3), 100, [(1.0, np.zeros(2), 0.1)], self.sched)
        with pytest.raises(ValueError, match="noiseless"):
            gm_posterior_v(x, 0, [(1.0, np.zeros(2), 0.1)], self.sched)


class TestSample:
    def setup_method(self):
        self.sched = rescale_zero_terminal_snr(make_schedule("cosine", 1000))

    @pytest.mark.parametrize("num_steps", [1, 3, 17, 50])
    def test_delta_recovery_any_step_count(self, num_steps):
        star = np.array([0.3, -1.1, 2.0])
        oracle = delta_data_oracle(star, self.sched)
        out = sample(oracle, self.sched, num_steps, eta=0.0, seed=3, shape=(4, 3))
        assert np.abs(out - star).max() <= 1e-6

    def test_same_seed_reproduces_bitwise(self):
        oracle = delta_data_oracle(np.zeros(2), self.sched)
        a = sample(oracle, self.sched, 25, eta=1.0, seed=9, shape=(6, 2))
        b = sample(oracle, self.sched, 25, eta=1.0, seed=9, shape=(6, 2))
        np.testing.assert_array_equal(a, b)
        c = sample(oracle, self.sched, 25, eta=1.0, seed=10, shape=(6, 2))
        assert not np.array_equal(a, c)

    def test_eta_one_gaussian_moments(self):
        # With the exact posterior predictor for Gaussian data, eta=1
        # sampling reproduces the data distribution up to discretization
        # bias that shrinks with step count; 400 steps keeps it near 1%.
        mean = np.array([1.5, -0.75])
        var = 0.64
        oracle = gaussian_mixture_oracle([(1.0, mean, var * np.eye(2))], self.sched)
        xs = sample(oracle, self.sched, 400, eta=1.0, seed=7, shape=(10_000, 2))
        assert np.abs(xs.mean(axis=0) - mean).max() <= 0.05 * np.abs(mean).min()
        assert np.abs(xs.var(axis=0) / var - 1.0).max() <= 0.05

    def test_invalid_eta(self):
        oracle = delta_data_oracle(np.zeros(2), self.sched)
        with pytest.raises(ValueError, match="eta"):
            sample(oracle, self.sched, 10, eta=2.0, seed=0, shape=(1, 2))

    def test_trajectory_matches_sample(self):
        star = np.array([0.5, 0.5])
        oracle = delta_data_oracle(star, self.sched)
        ts, states = sample_trajectory(
            oracle, self.sched, 10, eta=0.0, seed=4, shape=(2, 2)
        )
        assert ts[0] == 1000 and ts[-1] == 0
        assert states.shape == (len(ts), 2, 2)
        end = sample(oracle, self.sched, 10, eta=0.0, seed=4, shape=(2, 2))
        np.testing.assert_array_equal(states[-1], end)
        start = np.random.default_rng(4).standard_normal((2, 2))
        np.testing.assert_array_equal(states[0], start)
