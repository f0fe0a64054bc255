"""Nonparametric moment estimation from multiple draws.

The covariance estimator divides by the draw count M (not M-1), matching
the generative-model view of the draws; the small-sample bias is accepted.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

__all__ = ["EmpiricalGaussian", "empirical_moments", "psd_project",
           "sample_empirical", "degenerate_mle", "export_cov_csv"]


@dataclass(frozen=True)
class EmpiricalGaussian:
    mean: np.ndarray
    cov: np.ndarray
    n_draws: int
    psd_repaired: bool = False

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).ravel()
        cov = np.asarray(self.cov, dtype=float)
        if cov.shape != (mean.size, mean.size):
            raise ValueError("cov shape must match mean length")
        if np.max(np.abs(cov - cov.T), initial=0.0) > 1e-10:
            raise ValueError("cov must be symmetric")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", 0.5 * (cov + cov.T))


def empirical_moments(Y) -> EmpiricalGaussian:
    """Row means and the M-divisor covariance Y Y^T / M - mean mean^T."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    M = Y.shape[1]
    if M < 1:
        raise ValueError("need at least one draw")
    mean = Y.mean(axis=1)
    cov = (Y @ Y.T) / M - np.outer(mean, mean)
    return EmpiricalGaussian(mean=mean, cov=0.5 * (cov + cov.T), n_draws=M)


def psd_project(g: EmpiricalGaussian, floor_ratio: float = 1e-10) -> EmpiricalGaussian:
    """Clip eigenvalues below floor_ratio * lambda_max up to that floor."""
    cov = g.cov
    if not np.all(np.isfinite(cov)):
        raise ValueError("non-finite covariance entries")
    vals, vecs = np.linalg.eigh(cov)
    lam_max = float(vals[-1])
    floor = floor_ratio * lam_max if lam_max > 0 else floor_ratio
    vals = np.maximum(vals, floor)
    repaired = vecs @ np.diag(vals) @ vecs.T
    repaired = 0.5 * (repaired + repaired.T)
    return EmpiricalGaussian(mean=g.mean, cov=repaired, n_draws=g.n_draws,
                             psd_repaired=True)


def sample_empirical(g: EmpiricalGaussian, n: int, seed: int) -> np.ndarray:
    """N x n matrix of i.i.d. draws from N(mean, cov); requires a repaired
    (PSD) covariance."""
    if not g.psd_repaired:
        raise ValueError("covariance not PSD-repaired; call psd_project first")
    if n < 1:
        raise ValueError("n must be >= 1")
    vals, vecs = np.linalg.eigh(g.cov)
    root = vecs @ np.diag(np.sqrt(np.maximum(vals, 0.0)))
    rng = np.random.default_rng(seed)
    return g.mean[:, None] + root @ rng.standard_normal((g.mean.size, n))


def degenerate_mle(y) -> np.ndarray:
    """Single-realisation covariance MLE (y - mean)(y - mean)^T; rank <= 1."""
    y = np.asarray(y, dtype=float).ravel()
    if y.size < 1:
        raise ValueError("need at least one value")
    d = y - y.mean()
    return np.outer(d, d)


def export_cov_csv(path, cov, locations) -> None:
    """Row-major CSV with a header row of test-input locations."""
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    locations = np.asarray(locations, dtype=float).ravel()
    if cov.shape[0] != locations.size:
        raise ValueError("location count must match covariance dimension")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"{x:.12g}" for x in locations])
        for row in cov:
            writer.writerow([f"{v:.12g}" for v in row])
