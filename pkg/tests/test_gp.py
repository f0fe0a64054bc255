import math

import numpy as np
import pytest
from scipy import stats

from humankernel import gp
from humankernel.kernels import (RBF, SpectralMixture, flatten_params,
                                 kernel_matrix, n_params, unflatten_params)


def make_model(noise_var=0.05, frozen=False):
    spec = RBF(log_lengthscale=math.log(0.8), log_signal_var=math.log(1.3))
    return gp.GPModel(spec, log_noise_var=math.log(noise_var),
                      noise_frozen=frozen)


def test_lml_matches_multivariate_normal_oracle():
    model = make_model()
    rng = np.random.default_rng(0)
    X = np.sort(rng.uniform(0, 5, 12))
    y = rng.standard_normal(12)
    C = kernel_matrix(model.kernel, X) + model.noise_var * np.eye(12)
    expected = stats.multivariate_normal(mean=np.zeros(12), cov=C).logpdf(y)
    assert gp.log_marginal_likelihood(model, X, y) == pytest.approx(
        expected, rel=1e-10)


def test_lml_grad_matches_finite_differences():
    model = make_model()
    rng = np.random.default_rng(1)
    X = np.sort(rng.uniform(0, 4, 9))
    y = rng.standard_normal(9)
    g = gp.lml_grad(model, X, y)
    theta = np.append(flatten_params(model.kernel), model.log_noise_var)
    eps = 1e-6
    for i in range(len(theta)):
        tp, tm = theta.copy(), theta.copy()
        tp[i] += eps
        tm[i] -= eps

        def val(t):
            spec = unflatten_params(model.kernel, t[:-1])
            m = gp.GPModel(spec, log_noise_var=t[-1])
            return gp.log_marginal_likelihood(m, X, y)

        fd = (val(tp) - val(tm)) / (2 * eps)
        assert g[i] == pytest.approx(fd, rel=1e-4, abs=1e-8)


def test_frozen_noise_excluded_from_grad():
    model = make_model(frozen=True)
    rng = np.random.default_rng(2)
    X = np.sort(rng.uniform(0, 4, 6))
    y = rng.standard_normal(6)
    assert len(gp.lml_grad(model, X, y)) == n_params(model.kernel)


def test_posterior_predictive_oracle():
    """Direct Gaussian-conditioning formulas, computed independently."""
    model = make_model()
    rng = np.random.default_rng(3)
    X = np.sort(rng.uniform(0, 5, 8))
    Xs = np.array([1.3, 6.0])
    y = rng.standard_normal(8)
    Kxx = kernel_matrix(model.kernel, X) + model.noise_var * np.eye(8)
    Ksx = kernel_matrix(model.kernel, Xs, X)
    Kss = kernel_matrix(model.kernel, Xs)
    inv = np.linalg.inv(Kxx)
    mean_o = Ksx @ inv @ y
    cov_o = Kss - Ksx @ inv @ Ksx.T
    mean, cov = gp.posterior_predictive(model, X, y, Xs)
    assert np.allclose(mean, mean_o, atol=1e-9)
    assert np.allclose(cov, cov_o, atol=1e-9)
    _, cov_n = gp.posterior_predictive(model, X, y, Xs, include_noise=True)
    assert np.allclose(cov_n, cov_o + model.noise_var * np.eye(2), atol=1e-9)


def test_conditional_identity_against_posterior_density():
    """log p(y*|y) computed two ways: joint-minus-marginal vs the posterior
    predictive Gaussian density."""
    model = make_model()
    rng = np.random.default_rng(4)
    for trial in range(20):
        X = np.sort(rng.uniform(0, 5, 7))
        Xs = np.sort(rng.uniform(5.5, 8, 4))
        y = rng.standard_normal(7)
        Y = rng.standard_normal((4, 3))
        draws = gp.DrawSet(X, y, Xs, Y)
        via_stack = gp.predictive_conditional_lml(model, draws)
        mean, cov = gp.posterior_predictive(model, X, y, Xs,
                                            include_noise=True)
        mvn = stats.multivariate_normal(mean=mean, cov=cov)
        direct = float(sum(mvn.logpdf(Y[:, j]) for j in range(3)))
        assert abs(via_stack - direct) < 1e-8


def test_conditional_grad_matches_finite_differences():
    model = make_model()
    rng = np.random.default_rng(5)
    X = np.sort(rng.uniform(0, 5, 6))
    Xs = np.sort(rng.uniform(6, 9, 3))
    draws = gp.DrawSet(X, rng.standard_normal(6), Xs,
                       rng.standard_normal((3, 4)))
    g = gp.predictive_conditional_lml_grad(model, draws)
    theta = np.append(flatten_params(model.kernel), model.log_noise_var)
    eps = 1e-6
    for i in range(len(theta)):
        tp, tm = theta.copy(), theta.copy()
        tp[i] += eps
        tm[i] -= eps

        def val(t):
            m = gp.GPModel(unflatten_params(model.kernel, t[:-1]),
                           log_noise_var=t[-1])
            return gp.predictive_conditional_lml(m, draws)

        fd = (val(tp) - val(tm)) / (2 * eps)
        assert g[i] == pytest.approx(fd, rel=1e-4, abs=1e-8)


def test_sample_prior_moments():
    model = make_model(noise_var=1e-12, frozen=True)
    X = np.array([0.0, 0.5, 2.0])
    Y = gp.sample_prior(model, X, 40_000, seed=7)
    C = kernel_matrix(model.kernel, X)
    assert np.allclose(Y.mean(axis=1), 0.0, atol=0.03)
    assert np.allclose(np.cov(Y, ddof=0), C, atol=0.05)


def test_sample_posterior_deterministic_and_shaped():
    model = make_model()
    rng = np.random.default_rng(8)
    X = np.sort(rng.uniform(0, 3, 5))
    y = rng.standard_normal(5)
    Xs = np.array([4.0, 5.0])
    a = gp.sample_posterior(model, X, y, Xs, W=6, seed=3)
    b = gp.sample_posterior(model, X, y, Xs, W=6, seed=3)
    assert np.array_equal(a.Y_test, b.Y_test)
    assert a.Y_test.shape == (2, 6)
    assert a.n_draws == 6


def test_chol_with_jitter_escalates():
    # rank-deficient PSD matrix: succeeds only after jitter
    A = np.ones((4, 4))
    L, jit = gp.chol_with_jitter(A)
    assert jit > 0
    assert np.allclose(L @ L.T, A + jit * np.mean(np.diag(A)) * np.eye(4),
                       atol=1e-10)


def test_chol_with_jitter_gives_up():
    B = -np.eye(3)
    with pytest.raises(gp.CholeskyError):
        gp.chol_with_jitter(B)


def test_drawset_validation():
    X = np.array([0.0, 1.0])
    with pytest.raises(ValueError):
        gp.DrawSet(X, np.array([0.0, np.nan]), np.array([2.0]),
                   np.zeros((1, 1)))
    with pytest.raises(ValueError):
        gp.DrawSet(np.array([0.0, 0.0]), np.zeros(2), np.array([2.0]),
                   np.zeros((1, 1)))


def test_sm_model_lml_finite_at_extremes():
    spec = SpectralMixture(components=((5.0, -8.0, -20.0),))
    model = gp.GPModel(spec, log_noise_var=-2.0)
    X = np.linspace(0, 1, 5)
    val = gp.log_marginal_likelihood(model, X, np.zeros(5))
    assert np.isfinite(val)
