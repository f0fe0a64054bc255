"""Synthetic stimulus generators: GP samples, sawtooth, and step functions,
each with a training segment and an extrapolation test grid beyond it."""

from __future__ import annotations

import numpy as np

from ..gp import GPModel, sample_prior
from ..kernels import spec_to_dict
from ..responses import Stimulus

__all__ = ["make_sawtooth", "make_step", "make_gp_stimulus",
           "sawtooth_values", "step_values"]


def sawtooth_values(x, period: float, amplitude: float) -> np.ndarray:
    if period <= 0:
        raise ValueError("period must be > 0")
    x = np.asarray(x, dtype=float)
    return amplitude * (x / period - np.floor(x / period))


def step_values(x, breakpoints, levels) -> np.ndarray:
    """Right-continuous piecewise constant: levels[i] on
    [breakpoints[i-1], breakpoints[i])."""
    breakpoints = list(breakpoints)
    levels = list(levels)
    if len(levels) != len(breakpoints) + 1:
        raise ValueError("need one more level than breakpoints")
    if any(b2 <= b1 for b1, b2 in zip(breakpoints, breakpoints[1:])):
        raise ValueError("breakpoints must be strictly increasing")
    x = np.asarray(x, dtype=float)
    idx = np.searchsorted(breakpoints, x, side="right")
    return np.asarray(levels, dtype=float)[idx]


def _grids(domain, n_train: int, n_test: int):
    lo, train_hi, test_hi = (float(v) for v in domain)
    if not (lo < train_hi < test_hi):
        raise ValueError("domain must satisfy lo < train_hi < test_hi")
    X_train = np.linspace(lo, train_hi, n_train)
    step = (test_hi - train_hi) / n_test
    X_test = train_hi + step * np.arange(1, n_test + 1)
    return X_train, X_test


def make_sawtooth(period: float, amplitude: float, domain=(0.0, 5.0, 10.0),
                  n_train: int = 40, n_test: int = 30,
                  stimulus_id: str = "sawtooth") -> Stimulus:
    X_train, X_test = _grids(domain, n_train, n_test)
    y_train = sawtooth_values(X_train, period, amplitude)
    return Stimulus(
        id=stimulus_id, X_train=tuple(X_train), y_train=tuple(y_train),
        X_test=tuple(X_test), family="sawtooth",
        generator_params={"period": period, "amplitude": amplitude,
                          "domain": list(domain)},
        y_range=(-amplitude, 2.0 * amplitude),
    )


def make_step(breakpoints, levels, domain=(0.0, 5.0, 10.0),
              n_train: int = 40, n_test: int = 30,
              stimulus_id: str = "step") -> Stimulus:
    X_train, X_test = _grids(domain, n_train, n_test)
    lo, _, test_hi = (float(v) for v in domain)
    if any(not (lo < b < test_hi) for b in breakpoints):
        raise ValueError("breakpoints must lie strictly inside the domain")
    y_train = step_values(X_train, breakpoints, levels)
    lv = np.asarray(levels, dtype=float)
    spread = float(lv.max() - lv.min()) or 1.0
    return Stimulus(
        id=stimulus_id, X_train=tuple(X_train), y_train=tuple(y_train),
        X_test=tuple(X_test), family="step",
        generator_params={"breakpoints": list(breakpoints),
                          "levels": list(levels), "domain": list(domain)},
        y_range=(float(lv.min()) - spread, float(lv.max()) + spread),
    )


def make_gp_stimulus(model: GPModel, domain, n_train: int, n_test: int,
                     seed: int, stimulus_id: str) -> Stimulus:
    """Training targets sampled from the model's prior on the training grid."""
    X_train, X_test = _grids(domain, n_train, n_test)
    y = sample_prior(model, X_train, 1, seed)[:, 0]
    spread = float(np.std(y)) * 3.0 or 3.0
    return Stimulus(
        id=stimulus_id, X_train=tuple(X_train), y_train=tuple(y),
        X_test=tuple(X_test), family="gp-sample",
        generator_params={"kernel": spec_to_dict(model.kernel),
                          "log_noise_var": model.log_noise_var, "seed": seed},
        y_range=(float(y.mean()) - spread, float(y.mean()) + spread),
    )
