import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from phonoprint import Config, DiagonalGmm, PreconditionError, fit, fit_em, log_density

CFG = Config()


def single_gaussian(mean, var):
    mean = np.atleast_1d(np.asarray(mean, dtype=np.float64))
    var = np.atleast_1d(np.asarray(var, dtype=np.float64))
    return DiagonalGmm(weights=np.array([1.0]), means=mean[None, :], variances=var[None, :])


class TestLogDensity:
    def test_standard_normal_at_mean(self):
        # closed form: -0.5 * ln(2 pi)
        m = single_gaussian([0.0], [1.0])
        assert log_density(m, np.array([0.0])) == pytest.approx(-0.9189385332046727, abs=1e-9)

    def test_duplicated_component_is_identical(self):
        m = DiagonalGmm(
            weights=np.array([0.5, 0.5]),
            means=np.zeros((2, 1)),
            variances=np.ones((2, 1)),
        )
        assert log_density(m, np.array([0.0])) == pytest.approx(-0.9189385332046727, abs=1e-9)

    def test_standard_normal_2d_at_mean(self):
        # closed form: -ln(2 pi)
        m = single_gaussian([0.0, 0.0], [1.0, 1.0])
        assert log_density(m, np.array([0.0, 0.0])) == pytest.approx(-1.8378770664093453, abs=1e-9)

    def test_dimension_mismatch(self):
        m = single_gaussian([0.0, 0.0], [1.0, 1.0])
        with pytest.raises(PreconditionError):
            log_density(m, np.array([0.0]))

    def test_far_point_stays_finite(self):
        m = single_gaussian([0.0], [1e-3])
        assert np.isfinite(log_density(m, np.array([1e6])))


class TestGmmInvariants:
    def test_weights_must_sum_to_one(self):
        with pytest.raises(PreconditionError, match="sum to 1"):
            DiagonalGmm(weights=np.array([0.6, 0.6]), means=np.zeros((2, 1)), variances=np.ones((2, 1)))

    def test_nonpositive_variance_rejected(self):
        with pytest.raises(PreconditionError, match="positive"):
            single_gaussian([0.0], [0.0])


class TestFit:
    def test_degenerate_single_point(self):
        samples = np.tile([2.0, 3.0], (10, 1))
        model = fit(samples, 5, CFG)
        assert model.n_components == 1
        np.testing.assert_array_equal(model.means, [[2.0, 3.0]])
        np.testing.assert_array_equal(model.variances, [[1e-3, 1e-3]])

    def test_single_component_closed_form(self):
        # biased MLE: mean 1, variance 1, plus the additive floor
        result = fit_em(np.array([[0.0], [2.0]]), 1, CFG)
        np.testing.assert_allclose(result.model.means, [[1.0]], atol=1e-12)
        np.testing.assert_allclose(result.model.variances, [[1.0 + 1e-3]], atol=1e-12)

    def test_component_count_capped_by_distinct_samples(self):
        samples = np.array([[0.0], [0.0], [1.0], [1.0]])
        assert fit(samples, 4, CFG).n_components == 2

    def test_two_component_recovery(self):
        rng = np.random.default_rng(123)
        n = 5000
        labels = rng.integers(0, 2, size=n)
        means = np.array([[-3.0] * 4, [3.0] * 4])
        x = means[labels] + rng.standard_normal((n, 4))
        model = fit(x, 2, CFG)
        order = np.argsort(model.means[:, 0])
        np.testing.assert_allclose(model.means[order], means, atol=0.05)
        np.testing.assert_allclose(np.sort(model.weights), np.sort(np.bincount(labels) / n), atol=0.02)

    def test_monotone_log_likelihood(self):
        rng = np.random.default_rng(5)
        x = np.concatenate([rng.normal(-2, 1, (60, 3)), rng.normal(2, 0.5, (60, 3))])
        result = fit_em(x, 3, CFG)
        lls = np.asarray(result.log_likelihoods)
        assert (np.diff(lls) >= -1e-9).all()

    def test_empty_samples_rejected(self):
        with pytest.raises(PreconditionError):
            fit(np.zeros((0, 2)), 1, CFG)

    def test_non_finite_sample_rejected(self):
        with pytest.raises(PreconditionError):
            fit(np.array([[np.inf]]), 1, CFG)

    def test_determinism(self):
        rng = np.random.default_rng(9)
        x = rng.normal(0, 1, (200, 4))
        a = fit(x, 3, CFG)
        b = fit(x, 3, CFG)
        assert a == b

    def test_seed_changes_init(self):
        rng = np.random.default_rng(9)
        x = rng.normal(0, 1, (50, 2))
        a = fit(x, 3, Config(rng_seed=0, em_max_iterations=1))
        b = fit(x, 3, Config(rng_seed=1, em_max_iterations=1))
        assert not np.array_equal(a.means, b.means)

    @settings(deadline=None, max_examples=20)
    @given(
        seed=st.integers(min_value=0, max_value=1000),
        shift=st.lists(st.integers(min_value=-50, max_value=50), min_size=2, max_size=2),
    )
    def test_translation_equivariance(self, seed, shift):
        # Integer-valued samples and shifts keep every fp operation exact,
        # so the equivariance holds bit-for-bit.
        rng = np.random.default_rng(seed)
        x = rng.integers(-8, 9, size=(40, 2)).astype(np.float64)
        c = np.asarray(shift, dtype=np.float64)
        base = fit(x, 2, CFG)
        moved = fit(x + c, 2, CFG)
        assert moved.n_components == base.n_components
        np.testing.assert_allclose(moved.means, base.means + c, atol=1e-9)
        np.testing.assert_allclose(moved.variances, base.variances, atol=1e-9)
        np.testing.assert_allclose(moved.weights, base.weights, atol=1e-12)

    def test_floor_enforced_everywhere(self):
        rng = np.random.default_rng(17)
        x = np.round(rng.normal(0, 0.001, (30, 2)), 6)
        model = fit(x, 3, CFG)
        assert (model.variances >= CFG.covariance_regularization).all()

    def test_density_integrates_to_one_1d(self):
        rng = np.random.default_rng(2)
        x = np.concatenate([rng.normal(-4, 0.5, 40), rng.normal(3, 2.0, 60)])[:, None]
        model = fit(x, 2, CFG)
        total, err = quad(lambda t: np.exp(log_density(model, np.array([t]))), -50.0, 50.0, limit=200)
        assert total == pytest.approx(1.0, abs=1e-6)
