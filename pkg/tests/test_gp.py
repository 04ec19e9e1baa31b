"""Tests for GP regression: kernels, conditioning, and lengthscale fitting."""

import math

import numpy as np
import pytest

from paretosearch.errors import InvalidSpec, SingularCovariance
from paretosearch.gp import (
    FAMILIES,
    KernelSpec,
    fit,
    kernel_value,
    log_marginal_likelihood,
    predict,
)

RNG_SEED = 11


def random_design(rng, n=8):
    return rng.uniform(0.0, 1.0, size=(n, 2))


class TestKernelSpec:
    def test_rejects_nonpositive_lengthscale(self):
        with pytest.raises(InvalidSpec):
            KernelSpec(family="SE", lengthscale=0.0)
        with pytest.raises(InvalidSpec):
            KernelSpec(family="SE", lengthscale=-1.0)

    def test_rejects_unknown_family(self):
        with pytest.raises(InvalidSpec):
            KernelSpec(family="RBFX", lengthscale=1.0)

    def test_pe_power_bounds(self):
        with pytest.raises(InvalidSpec):
            KernelSpec(family="PE", lengthscale=1.0, power=0.0)
        with pytest.raises(InvalidSpec):
            KernelSpec(family="PE", lengthscale=1.0, power=2.5)
        KernelSpec(family="PE", lengthscale=1.0, power=2.0)

    def test_power_only_for_pe(self):
        with pytest.raises(InvalidSpec):
            KernelSpec(family="SE", lengthscale=1.0, power=1.5)


class TestKernelValue:
    @pytest.mark.parametrize("family", FAMILIES)
    def test_unit_value_at_zero_distance(self, family):
        spec = KernelSpec(family=family, lengthscale=0.7, power=1.5 if family == "PE" else None)
        x = np.array([0.3, 0.4])
        assert kernel_value(spec, x, x) == pytest.approx(1.0, abs=1e-15)

    def test_se_reference_value(self):
        spec = KernelSpec(family="SE", lengthscale=1.0)
        got = kernel_value(spec, np.array([0.0, 0.0]), np.array([1.0, 0.0]))
        assert got == pytest.approx(math.exp(-0.5), abs=1e-12)

    def test_exp_reference_value(self):
        spec = KernelSpec(family="EXP", lengthscale=2.0)
        got = kernel_value(spec, np.array([0.0, 0.0]), np.array([2.0, 0.0]))
        assert got == pytest.approx(math.exp(-1.0), abs=1e-12)

    @pytest.mark.parametrize("family", FAMILIES)
    def test_symmetry(self, family):
        spec = KernelSpec(family=family, lengthscale=0.5, power=1.2 if family == "PE" else None)
        rng = np.random.default_rng(RNG_SEED)
        for _ in range(5):
            a, b = rng.uniform(-3, 3, size=(2, 2))
            assert kernel_value(spec, a, b) == pytest.approx(
                kernel_value(spec, b, a), abs=1e-15
            )

    @pytest.mark.parametrize("family", FAMILIES)
    def test_values_in_unit_interval(self, family):
        spec = KernelSpec(family=family, lengthscale=0.3, power=0.8 if family == "PE" else None)
        rng = np.random.default_rng(RNG_SEED)
        for _ in range(20):
            a, b = rng.uniform(-5, 5, size=(2, 2))
            v = kernel_value(spec, a, b)
            assert 0.0 < v <= 1.0


class TestFitAndPredict:
    def test_single_point_posterior_mean(self):
        gp = fit(np.array([[0.5, 0.5]]), np.array([3.0]), family="SE")
        mu, var = gp.predict(np.array([0.5, 0.5]))
        assert mu == pytest.approx(3.0, abs=1e-6)
        assert var >= 0.0

    @pytest.mark.parametrize("family", FAMILIES)
    def test_interpolation_all_families(self, family):
        rng = np.random.default_rng(RNG_SEED)
        X = random_design(rng)
        y = np.sin(3 * X[:, 0]) + X[:, 1] ** 2
        gp = fit(X, y, family=family, noise=1e-8)
        mu, var = gp.predict(X)
        # interpolation measured in standardized output units
        assert np.max(np.abs((mu - y) / gp.y_scale)) <= 1e-4
        assert np.all(np.sqrt(var) / gp.y_scale <= 1e-3)

    def test_far_point_reverts_to_prior_variance(self):
        X = np.array([[0.1, 0.1], [0.15, 0.12], [0.2, 0.18]])
        y = np.array([1.0, 2.0, 1.5])
        gp = fit(X, y, family="SE", noise=1e-8, bounds=((0.0, 100.0), (0.0, 100.0)))
        _, var = gp.predict(np.array([100.0, 100.0]))
        assert var >= 0.99 * gp.prior_variance

    def test_batch_matches_single(self):
        rng = np.random.default_rng(RNG_SEED)
        X = random_design(rng, 6)
        y = rng.normal(size=6)
        gp = fit(X, y, family="M52")
        queries = rng.uniform(0, 1, size=(25, 2))
        mu_b, var_b = gp.predict(queries)
        for i, q in enumerate(queries):
            mu_s, var_s = gp.predict(q)
            assert mu_s == pytest.approx(mu_b[i], abs=1e-12)
            assert var_s == pytest.approx(var_b[i], abs=1e-12)

    def test_variance_nonnegative_everywhere(self):
        rng = np.random.default_rng(RNG_SEED)
        X = random_design(rng, 10)
        y = rng.normal(size=10)
        for family in FAMILIES:
            gp = fit(X, y, family=family)
            _, var = gp.predict(rng.uniform(0, 1, size=(200, 2)))
            assert np.all(var >= 0.0)

    def test_conflicting_duplicates_resolved_or_flagged(self):
        X = np.array([[0.5, 0.5], [0.5, 0.5], [0.2, 0.2]])
        y = np.array([1.0, -1.0, 0.0])
        try:
            gp = fit(X, y, family="SE", noise=0.0)
        except SingularCovariance:
            return
        # jitter-resolved: the posterior stays finite
        mu, var = gp.predict(np.array([0.5, 0.5]))
        assert np.isfinite(mu) and np.isfinite(var)

    def test_constant_targets_guard(self):
        X = np.array([[0.1, 0.1], [0.5, 0.5], [0.9, 0.9]])
        y = np.array([2.0, 2.0, 2.0])
        gp = fit(X, y, family="SE")
        mu, _ = gp.predict(np.array([0.3, 0.3]))
        assert mu == pytest.approx(2.0, abs=1e-6)

    def test_bounds_map_inputs_to_unit_square(self):
        X = np.array([[-400.0, -400.0], [0.0, 0.0], [400.0, 300.0]])
        y = np.array([1.0, 2.0, 3.0])
        gp = fit(X, y, family="SE", bounds=((-500.0, 500.0), (-500.0, 500.0)))
        unit = gp.to_unit(X)
        assert np.all(unit >= 0.0) and np.all(unit <= 1.0)
        assert gp.kernel.lengthscale <= 2.0


class TestPsd:
    @pytest.mark.parametrize("family", FAMILIES)
    def test_gram_matrices_psd(self, family):
        rng = np.random.default_rng(RNG_SEED)
        spec = KernelSpec(
            family=family, lengthscale=0.4, power=1.7 if family == "PE" else None
        )
        for _ in range(20):
            X = random_design(rng)
            K = np.array([[kernel_value(spec, a, b) for b in X] for a in X])
            eig = np.linalg.eigvalsh(K + 1e-8 * np.eye(len(X)))
            assert eig.min() >= -1e-9


class TestLikelihood:
    def test_finite_for_fitted_gp(self):
        rng = np.random.default_rng(RNG_SEED)
        X = random_design(rng)
        y = rng.normal(size=8)
        for family in FAMILIES:
            gp = fit(X, y, family=family)
            assert np.isfinite(log_marginal_likelihood(gp))

    def test_noise_helps_conflicting_duplicates(self):
        X = np.array([[0.5, 0.5], [0.5, 0.5], [0.1, 0.9], [0.9, 0.1]])
        y = np.array([1.0, -1.0, 0.3, -0.2])
        low = fit(X, y, family="SE", noise=1e-8, lengthscale=0.5)
        high = fit(X, y, family="SE", noise=0.5, lengthscale=0.5)
        assert log_marginal_likelihood(high) > log_marginal_likelihood(low)

    @pytest.mark.parametrize("family", FAMILIES)
    def test_mle_lengthscale_locally_optimal(self, family):
        rng = np.random.default_rng(3)
        X = random_design(rng, 10)
        y = np.cos(4 * X[:, 0]) * X[:, 1]
        gp = fit(X, y, family=family)
        best = log_marginal_likelihood(gp)
        for factor in (0.5, 2.0):
            ell = gp.kernel.lengthscale * factor
            if not 1e-2 <= ell <= 2.0:
                continue
            alt = fit(X, y, family=family, lengthscale=ell, power=gp.kernel.power)
            assert best >= log_marginal_likelihood(alt) - 1e-6

    def test_module_level_predict_alias(self):
        gp = fit(np.array([[0.2, 0.2], [0.8, 0.8]]), np.array([1.0, 2.0]), family="EXP")
        mu_a, var_a = predict(gp, np.array([0.4, 0.4]))
        mu_b, var_b = gp.predict(np.array([0.4, 0.4]))
        assert mu_a == mu_b and var_a == var_b


class TestSigmaOrdering:
    def test_adding_training_point_reduces_variance_there(self):
        rng = np.random.default_rng(RNG_SEED)
        X = random_design(rng, 5)
        y = rng.normal(size=5)
        target = np.array([0.42, 0.58])
        gp_before = fit(X, y, family="SE", lengthscale=0.3)
        _, var_before = gp_before.predict(target)
        X2 = np.vstack([X, target])
        y2 = np.append(y, 0.0)
        gp_after = fit(X2, y2, family="SE", lengthscale=0.3)
        _, var_after = gp_after.predict(target)
        assert var_after <= var_before + 1e-9
