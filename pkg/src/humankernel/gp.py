"""Zero-mean Gaussian process machinery.

Covariance factorizations go through one jitter policy: on Cholesky failure
we add eps * mean(diag) to the diagonal, with eps escalating from 1e-8 by
factors of 10 up to 1e-2, then fail loudly.  All sampling takes an explicit
seed; nothing touches a global generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular

from .kernels import KernelSpec, kernel_grads, kernel_matrix, n_params

__all__ = [
    "GPModel",
    "DrawSet",
    "CholeskyError",
    "chol_with_jitter",
    "sample_prior",
    "log_marginal_likelihood",
    "lml_grad",
    "posterior_predictive",
    "sample_posterior",
    "predictive_conditional_lml",
    "predictive_conditional_lml_grad",
]

_LOG_2PI = math.log(2.0 * math.pi)


class CholeskyError(np.linalg.LinAlgError):
    """Covariance stayed indefinite after the full jitter escalation."""


@dataclass(frozen=True)
class GPModel:
    kernel: KernelSpec
    log_noise_var: float
    noise_frozen: bool = False
    # additive noise floor; effective noise = noise_floor + exp(log_noise_var)
    noise_floor: float = 0.0

    @property
    def noise_var(self) -> float:
        return self.noise_floor + np.exp(self.log_noise_var)

    def with_kernel(self, kernel: KernelSpec) -> "GPModel":
        return replace(self, kernel=kernel)


@dataclass(frozen=True)
class DrawSet:
    X_train: np.ndarray
    y_train: np.ndarray
    X_test: np.ndarray
    Y_test: np.ndarray  # N* x W, column j = draw j

    def __post_init__(self):
        X = np.asarray(self.X_train, dtype=float).ravel()
        y = np.asarray(self.y_train, dtype=float).ravel()
        Xs = np.asarray(self.X_test, dtype=float).ravel()
        Ys = np.atleast_2d(np.asarray(self.Y_test, dtype=float))
        if y.size != X.size:
            raise ValueError("X_train and y_train length mismatch")
        if Ys.shape[0] != Xs.size:
            raise ValueError("Y_test row count must equal |X_test|")
        if Ys.shape[1] < 1:
            raise ValueError("need at least one draw (W >= 1)")
        for arr, name in ((X, "X_train"), (y, "y_train"), (Xs, "X_test"), (Ys, "Y_test")):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"non-finite entries in {name}")
        for arr, name in ((X, "X_train"), (Xs, "X_test")):
            if arr.size and np.unique(arr).size != arr.size:
                raise ValueError(f"{name} entries must be pairwise distinct")
        object.__setattr__(self, "X_train", X)
        object.__setattr__(self, "y_train", y)
        object.__setattr__(self, "X_test", Xs)
        object.__setattr__(self, "Y_test", Ys)

    @property
    def n_draws(self) -> int:
        return self.Y_test.shape[1]


def chol_with_jitter(C: np.ndarray) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor of C, adding escalating diagonal jitter on
    failure.  Returns (L, jitter_added)."""
    C = np.asarray(C, dtype=float)
    scale = float(np.mean(np.diag(C)))
    if scale <= 0 or not np.isfinite(scale):
        scale = 1.0
    try:
        return cholesky(C, lower=True), 0.0
    except np.linalg.LinAlgError:
        pass
    eps = 1e-8
    eye = np.eye(C.shape[0])
    while eps <= 1e-2:
        try:
            return cholesky(C + eps * scale * eye, lower=True), eps * scale
        except np.linalg.LinAlgError:
            eps *= 10.0
    raise CholeskyError("covariance not positive definite after jitter up to 1e-2 * mean(diag)")


def _train_cov(model: GPModel, X: np.ndarray) -> np.ndarray:
    K = kernel_matrix(model.kernel, X)
    return K + model.noise_var * np.eye(len(K))


def sample_prior(model: GPModel, X, n_draws: int, seed: int) -> np.ndarray:
    """Columns are independent draws from N(0, K + noise_var * I)."""
    if n_draws < 1:
        raise ValueError("n_draws must be >= 1")
    X = np.asarray(X, dtype=float).ravel()
    L, _ = chol_with_jitter(_train_cov(model, X))
    rng = np.random.default_rng(seed)
    return L @ rng.standard_normal((X.size, n_draws))


def log_marginal_likelihood(model: GPModel, X, y) -> float:
    X = np.asarray(X, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if X.size != y.size or X.size < 1:
        raise ValueError("need |X| = |y| >= 1")
    L, _ = chol_with_jitter(_train_cov(model, X))
    a = solve_triangular(L, y, lower=True)
    logdet = 2.0 * float(np.sum(np.log(np.diag(L))))
    return -0.5 * float(a @ a) - 0.5 * logdet - 0.5 * X.size * _LOG_2PI


def _grad_mats(model: GPModel, X: np.ndarray) -> list[np.ndarray]:
    """dC/dθ for each free parameter: kernel params, then log noise var
    unless frozen."""
    mats = kernel_grads(model.kernel, X)
    if not model.noise_frozen:
        mats.append(np.exp(model.log_noise_var) * np.eye(X.size))
    return mats


def lml_grad(model: GPModel, X, y) -> np.ndarray:
    """Gradient of the log marginal likelihood wrt the free hyperparameters
    (flattened kernel params, then log noise variance unless frozen)."""
    X = np.asarray(X, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    L, _ = chol_with_jitter(_train_cov(model, X))
    alpha = cho_solve((L, True), y)
    Cinv = cho_solve((L, True), np.eye(X.size))
    out = []
    for dC in _grad_mats(model, X):
        out.append(0.5 * float(alpha @ dC @ alpha) - 0.5 * float(np.sum(Cinv * dC)))
    return np.asarray(out)


def posterior_predictive(
    model: GPModel, X, y, X_star, include_noise: bool = False
) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and covariance at X_star given (X, y)."""
    X = np.asarray(X, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    Xs = np.asarray(X_star, dtype=float).ravel()
    if X.size < 1 or Xs.size < 1:
        raise ValueError("training set and X_star must be nonempty")
    L, _ = chol_with_jitter(_train_cov(model, X))
    Ks = kernel_matrix(model.kernel, X, Xs)          # N x N*
    Kss = kernel_matrix(model.kernel, Xs)
    alpha = cho_solve((L, True), y)
    mean = Ks.T @ alpha
    V = solve_triangular(L, Ks, lower=True)
    cov = Kss - V.T @ V
    if include_noise:
        cov = cov + model.noise_var * np.eye(Xs.size)
    cov = 0.5 * (cov + cov.T)
    return mean, cov


def sample_posterior(model: GPModel, X, y, X_star, W: int, seed: int,
                     include_noise: bool = False) -> DrawSet:
    """W i.i.d. draws from the posterior predictive at X_star (noise-free by
    default; include_noise adds observation noise to each draw)."""
    if W < 1:
        raise ValueError("W must be >= 1")
    mean, cov = posterior_predictive(model, X, y, X_star, include_noise=include_noise)
    L, _ = chol_with_jitter(cov)
    rng = np.random.default_rng(seed)
    Y = mean[:, None] + L @ rng.standard_normal((len(mean), W))
    return DrawSet(np.asarray(X, dtype=float).ravel(),
                   np.asarray(y, dtype=float).ravel(),
                   np.asarray(X_star, dtype=float).ravel(), Y)


def _stacked_factor(model: GPModel, draws: DrawSet):
    Xall = np.concatenate([draws.X_train, draws.X_test])
    L_all, _ = chol_with_jitter(_train_cov(model, Xall))
    L_tr, _ = chol_with_jitter(_train_cov(model, draws.X_train))
    return Xall, L_all, L_tr


def predictive_conditional_lml(model: GPModel, draws: DrawSet) -> float:
    """Sum over draws of log p(y*_j | y, kernel).

    Computed as sum_j log p(y, y*_j) - W * log p(y), both joint marginal
    likelihoods over the stacked inputs, so one factorization serves every
    draw."""
    if draws.X_test.size == 0:
        return 0.0
    Xall, L_all, L_tr = _stacked_factor(model, draws)
    n = Xall.size
    W = draws.n_draws
    logdet_all = 2.0 * float(np.sum(np.log(np.diag(L_all))))
    Yfull = np.vstack([np.repeat(draws.y_train[:, None], W, axis=1), draws.Y_test])
    A = solve_triangular(L_all, Yfull, lower=True)
    joint = -0.5 * np.sum(A * A, axis=0) - 0.5 * logdet_all - 0.5 * n * _LOG_2PI
    a_tr = solve_triangular(L_tr, draws.y_train, lower=True)
    logdet_tr = 2.0 * float(np.sum(np.log(np.diag(L_tr))))
    lml_tr = -0.5 * float(a_tr @ a_tr) - 0.5 * logdet_tr - 0.5 * draws.X_train.size * _LOG_2PI
    return float(np.sum(joint)) - W * lml_tr


def predictive_conditional_lml_grad(model: GPModel, draws: DrawSet) -> np.ndarray:
    """Gradient of predictive_conditional_lml wrt the free hyperparameters."""
    if draws.X_test.size == 0:
        k = n_params(model.kernel) + (0 if model.noise_frozen else 1)
        return np.zeros(k)
    Xall, L_all, L_tr = _stacked_factor(model, draws)
    W = draws.n_draws
    Yfull = np.vstack([np.repeat(draws.y_train[:, None], W, axis=1), draws.Y_test])
    Alpha = cho_solve((L_all, True), Yfull)          # n x W
    Cinv_all = cho_solve((L_all, True), np.eye(Xall.size))
    alpha_tr = cho_solve((L_tr, True), draws.y_train)
    Cinv_tr = cho_solve((L_tr, True), np.eye(draws.X_train.size))
    grads_all = _grad_mats(model, Xall)
    grads_tr = _grad_mats(model, draws.X_train)
    out = []
    for dC_all, dC_tr in zip(grads_all, grads_tr):
        quad_all = 0.5 * float(np.sum((dC_all @ Alpha) * Alpha))
        tr_all = 0.5 * W * float(np.sum(Cinv_all * dC_all))
        g_tr = 0.5 * float(alpha_tr @ dC_tr @ alpha_tr) - 0.5 * float(np.sum(Cinv_tr * dC_tr))
        out.append(quad_all - tr_all - W * g_tr)
    return np.asarray(out)
