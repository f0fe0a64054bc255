"""Hyperparameter optimization: bounded quasi-Newton ascent wrapped in a
deterministic multi-restart harness, serving both the data marginal
likelihood and the multi-draw prediction objective.

Box bounds in log space (derived from data statistics) keep the search away
from degenerate kernels: zero-bandwidth spectral components act as
deterministic basis functions whose conditional likelihood no amount of data
can pin down.  Each restart derives its random stream from (seed, restart
index), so results do not depend on execution order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from . import kernels
from .gp import (
    DrawSet,
    GPModel,
    log_marginal_likelihood,
    lml_grad,
    predictive_conditional_lml,
    predictive_conditional_lml_grad,
)
from .kernels import (
    KernelSpec,
    Linear,
    Product,
    RBF,
    RQ,
    SpectralMixture,
    default_sm_init,
    flatten_params,
    unflatten_params,
)

__all__ = ["FitOptions", "FitReport", "RestartResult", "optimize",
           "fit_data_kernel", "fit_prediction_kernel", "FitError"]


class FitError(RuntimeError):
    """Every restart produced a non-finite objective."""


@dataclass(frozen=True)
class FitOptions:
    restarts: int = 10
    max_iters: int = 500
    grad_tol: float = 1e-6
    seed: int = 0
    objective: str = "DataML"  # or "PredictionML"

    def __post_init__(self):
        if self.restarts < 1 or self.max_iters < 1 or self.grad_tol <= 0:
            raise ValueError("restarts >= 1, max_iters >= 1, grad_tol > 0 required")


@dataclass(frozen=True)
class RestartResult:
    seed: int
    objective: float
    iterations: int
    converged: bool
    param_norm: float


@dataclass(frozen=True)
class FitReport:
    best_spec: KernelSpec
    best_noise: float  # effective noise variance
    best_objective: float
    per_restart: tuple[RestartResult, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "best_spec": kernels.spec_to_dict(self.best_spec),
            "best_noise": self.best_noise,
            "best_objective": self.best_objective,
            "per_restart": [
                {"seed": r.seed, "objective": r.objective,
                 "iterations": r.iterations, "converged": r.converged}
                for r in self.per_restart
            ],
        }


def optimize(fun_and_grad, start, opts: FitOptions, bounds=None):
    """Maximize a smooth objective from `start`; L-BFGS-B on the negation.

    Accepted iterates never decrease the objective (sufficient-decrease line
    search).  Returns (x, value, iterations, converged) where converged means
    the projected-gradient infinity norm dropped below opts.grad_tol.
    """

    def neg(v):
        f, g = fun_and_grad(v)
        return -float(f), -np.asarray(g, dtype=float)

    start = np.asarray(start, dtype=float)
    if not np.all(np.isfinite(start)):
        raise FitError("start point contains non-finite values")
    f0, _ = neg(np.asarray(start, dtype=float))
    if not np.isfinite(f0):
        raise FitError("objective non-finite at the starting point")
    res = minimize(
        neg, np.asarray(start, dtype=float), jac=True, method="L-BFGS-B",
        bounds=bounds,
        options={"maxiter": opts.max_iters, "gtol": opts.grad_tol,
                 "ftol": 1e-14, "maxls": 40},
    )
    converged = bool(np.max(np.abs(res.jac), initial=0.0) < opts.grad_tol)
    return res.x, -float(res.fun), int(res.nit), converged


# ---------------------------------------------------------------------------
# data statistics and parameter bounds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Stats:
    x_min: float
    x_max: float
    x_range: float
    min_dx: float
    nyquist: float
    y_var: float


def _data_stats(X, y_all) -> _Stats:
    X = np.sort(np.asarray(X, dtype=float).ravel())
    x_range = float(X[-1] - X[0]) if X.size > 1 else 1.0
    x_range = x_range if x_range > 0 else 1.0
    spacings = np.diff(X)
    min_dx = float(np.min(spacings)) if spacings.size else 1.0
    # second moment, not variance: the GP prior mean is zero, so the signal
    # variance must also cover any constant offset in the data
    y_var = float(np.mean(np.square(np.asarray(y_all, dtype=float))))
    y_var = y_var if y_var > 0 else 1.0
    return _Stats(x_min=float(X[0]), x_max=float(X[-1]), x_range=x_range,
                  min_dx=min_dx, nyquist=0.5 / max(min_dx, 1e-12), y_var=y_var)


def _spec_bounds(spec: KernelSpec, st: _Stats) -> list[tuple[float, float]]:
    yv, nyq, xr = st.y_var, st.nyquist, st.x_range
    lv = (math.log(1e-8 * yv), math.log(10.0 * yv))  # any variance-like param
    if isinstance(spec, RBF):
        ls = (math.log(1e-3 * xr), math.log(1e3 * xr))
        return [ls, lv]
    if isinstance(spec, RQ):
        ls = (math.log(1e-3 * xr), math.log(1e3 * xr))
        return [ls, lv, (math.log(1e-3), math.log(1e8))]
    if isinstance(spec, Linear):
        sv = (math.log(1e-8 * yv / max(xr, 1.0) ** 2), math.log(10.0 * yv))
        return [sv, (st.x_min - 2.0 * xr, st.x_max + 2.0 * xr)]
    if isinstance(spec, SpectralMixture):
        # bandwidth floor: a zero-bandwidth component is a deterministic
        # sinusoid the conditional objective cannot identify
        v_lo = math.log((0.2 / xr) ** 2)
        v_hi = max(2.0 * math.log(nyq / 2.0), v_lo + 1.0)
        out = []
        for _ in spec.components:
            out += [lv, (math.log(1e-3 * nyq), math.log(nyq)), (v_lo, v_hi)]
        return out
    if isinstance(spec, Product):
        return _spec_bounds(spec.left, st) + _spec_bounds(spec.right, st)
    raise TypeError(f"unknown kernel node {type(spec).__name__}")


def _model_bounds(model: GPModel, st: _Stats) -> list[tuple[float, float]]:
    b = _spec_bounds(model.kernel, st)
    if not model.noise_frozen:
        b.append((math.log(1e-8 * st.y_var), math.log(10.0 * st.y_var)))
    return b


# ---------------------------------------------------------------------------
# restart initialization
# ---------------------------------------------------------------------------

def _periodogram_sm_init(draws: DrawSet, st: _Stats, Q: int, seed: int) -> SpectralMixture:
    """Seed spectral-mixture frequencies from the draws' mean periodogram
    (shared mean curve included); far better-placed starts than uniform."""
    Xs = draws.X_test
    order = np.argsort(Xs)
    dx = float(np.mean(np.diff(Xs[order])))
    Y = draws.Y_test[order]
    resid = Y - Y.mean(axis=1, keepdims=True) if Y.shape[1] > 1 else Y
    P = (np.abs(np.fft.rfft(resid - resid.mean(axis=0, keepdims=True), axis=0)) ** 2).mean(axis=1)
    mcurve = Y.mean(axis=1)
    P = P + np.abs(np.fft.rfft(mcurve - mcurve.mean())) ** 2
    freqs = np.fft.rfftfreq(Xs.size, dx)
    P = np.where(freqs > 0, P, 0.0)
    total = float(np.sum(P))
    rng = np.random.default_rng(seed)
    nyq = st.nyquist
    res = 1.0 / (Xs.size * dx)
    comps = []
    for q in range(Q):
        if total > 0:
            i = int(rng.choice(freqs.size, p=P / total))
            mu = float(np.clip(freqs[i] + rng.normal(0.0, res / 2.0), 1e-3 * nyq, nyq))
        else:
            mu = float(rng.uniform(1e-3 * nyq, nyq))
        v = max((res / 2.0) ** 2, (0.2 / st.x_range) ** 2)
        comps.append((math.log(st.y_var / Q), math.log(mu), math.log(v)))
    return SpectralMixture(tuple(comps))


def _restart_spec(spec: KernelSpec, rng: np.random.Generator, st: _Stats,
                  draws: DrawSet | None, restart: int) -> KernelSpec:
    """Fresh SM nodes (periodogram-guided on even restarts when draws are
    available, uniform otherwise); Gaussian log-space jitter elsewhere."""
    if isinstance(spec, Product):
        return Product(
            _restart_spec(spec.left, rng, st, draws, restart),
            _restart_spec(spec.right, rng, st, draws, restart),
        )
    if isinstance(spec, SpectralMixture):
        sub = int(rng.integers(0, 2**31 - 1))
        if draws is not None and restart % 2 == 0:
            return _periodogram_sm_init(draws, st, len(spec.components), sub)
        return default_sm_init(st.x_range, st.y_var, st.nyquist,
                               len(spec.components), sub)
    v = flatten_params(spec)
    return unflatten_params(spec, v + rng.normal(0.0, 0.5, size=v.size))


def _pack(model: GPModel) -> np.ndarray:
    v = flatten_params(model.kernel)
    if not model.noise_frozen:
        v = np.append(v, model.log_noise_var)
    return v


def _unpack(model: GPModel, v: np.ndarray) -> GPModel:
    nk = kernels.n_params(model.kernel)
    spec = unflatten_params(model.kernel, v[:nk])
    if model.noise_frozen:
        return replace(model, kernel=spec)
    return replace(model, kernel=spec, log_noise_var=float(v[nk]))


def _run_restarts(template: GPModel, objective, grad, opts: FitOptions,
                  st: _Stats, draws: DrawSet | None = None) -> FitReport:
    bounds = _model_bounds(template, st)
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])

    def fun_and_grad(v):
        m = _unpack(template, v)
        try:
            with np.errstate(over="ignore", invalid="ignore", under="ignore"):
                f, g = objective(m), grad(m)
            if not np.isfinite(f):
                raise ValueError("non-finite objective")
            return f, g
        except (np.linalg.LinAlgError, ValueError, OverflowError):
            # covariance blew up at an extreme trial point; reject the step
            return -np.inf, np.zeros(v.size)

    results: list[tuple[RestartResult, np.ndarray]] = []
    failures: list[str] = []
    for r in range(opts.restarts):
        rng = np.random.default_rng([opts.seed, r])
        if r == 0:
            start_model = template
        else:
            spec = _restart_spec(template.kernel, rng, st, draws, r)
            lnv = template.log_noise_var
            if not template.noise_frozen:
                lnv = lnv + float(rng.normal(0.0, 0.5))
            start_model = replace(template, kernel=spec, log_noise_var=lnv)
        v0 = np.clip(_pack(start_model), lo, hi)
        try:
            v, fval, iters, conv = optimize(fun_and_grad, v0, opts, bounds=bounds)
        except FitError as e:
            failures.append(f"restart {r}: {e}")
            continue
        if not np.isfinite(fval):
            failures.append(f"restart {r}: non-finite objective")
            continue
        results.append(
            (RestartResult(seed=r, objective=fval, iterations=iters,
                           converged=conv, param_norm=float(np.linalg.norm(v))), v)
        )
    if not results:
        raise FitError("all restarts diverged: " + "; ".join(failures))
    best_res, best_v = max(
        results, key=lambda rv: (rv[0].objective, -rv[0].param_norm)
    )
    best_model = _unpack(template, best_v)
    return FitReport(
        best_spec=best_model.kernel,
        best_noise=best_model.noise_var,
        best_objective=best_res.objective,
        per_restart=tuple(r for r, _ in results),
    )


# ---------------------------------------------------------------------------
# public fit entry points
# ---------------------------------------------------------------------------

def fit_data_kernel(template: GPModel, X, y, opts: FitOptions | None = None) -> FitReport:
    """Maximize the data log marginal likelihood over free hyperparameters."""
    opts = opts or FitOptions(objective="DataML")
    X = np.asarray(X, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if X.size != y.size or X.size < 2:
        raise ValueError("need |X| = |y| >= 2")
    st = _data_stats(X, y)
    return _run_restarts(
        template,
        lambda m: log_marginal_likelihood(m, X, y),
        lambda m: lml_grad(m, X, y),
        opts,
        st,
    )


def fit_prediction_kernel(template: GPModel, draws: DrawSet,
                          opts: FitOptions | None = None) -> FitReport:
    """Maximize the multi-draw predictive conditional marginal likelihood."""
    opts = opts or FitOptions(objective="PredictionML")
    Xall = np.concatenate([draws.X_train, draws.X_test])
    y_all = np.concatenate([draws.y_train, draws.Y_test.ravel()])
    st = _data_stats(Xall, y_all)
    return _run_restarts(
        template,
        lambda m: predictive_conditional_lml(m, draws),
        lambda m: predictive_conditional_lml_grad(m, draws),
        opts,
        st,
        draws=draws,
    )
