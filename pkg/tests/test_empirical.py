import numpy as np
import pytest

from humankernel import empirical as emp


def test_moments_match_numpy_oracle():
    rng = np.random.default_rng(0)
    Y = rng.standard_normal((4, 50))
    g = emp.empirical_moments(Y)
    assert np.allclose(g.mean, Y.mean(axis=1))
    # divisor-M covariance == np.cov with ddof=0
    assert np.allclose(g.cov, np.cov(Y, ddof=0), atol=1e-12)
    assert g.n_draws == 50
    assert not g.psd_repaired


def test_moments_single_draw_is_zero_cov():
    g = emp.empirical_moments(np.array([[1.0], [2.0]]))
    assert np.allclose(g.cov, 0.0, atol=1e-12)


def test_psd_project_clips_and_is_idempotent():
    base = np.diag([2.0, 1.0, -0.5])
    g = emp.EmpiricalGaussian(mean=np.zeros(3), cov=base, n_draws=10)
    fixed = emp.psd_project(g)
    vals = np.linalg.eigvalsh(fixed.cov)
    assert vals.min() >= 0
    assert fixed.psd_repaired
    again = emp.psd_project(fixed)
    assert np.allclose(again.cov, fixed.cov, atol=1e-12)
    # PSD input passes through (up to the tiny floor)
    ok = emp.psd_project(emp.EmpiricalGaussian(
        mean=np.zeros(2), cov=np.eye(2), n_draws=5))
    assert np.allclose(ok.cov, np.eye(2), atol=1e-9)


def test_sample_empirical_requires_repair_and_matches_moments():
    rng = np.random.default_rng(1)
    A = rng.standard_normal((3, 3))
    cov = A @ A.T
    g = emp.EmpiricalGaussian(mean=np.array([1.0, -2.0, 0.5]), cov=cov,
                              n_draws=10)
    with pytest.raises(ValueError):
        emp.sample_empirical(g, 5, seed=0)
    S = emp.sample_empirical(emp.psd_project(g), 50_000, seed=0)
    assert np.allclose(S.mean(axis=1), g.mean, atol=0.05)
    assert np.allclose(np.cov(S, ddof=0), cov, atol=0.15)


def test_degenerate_mle_rank_one():
    y = np.array([1.0, 3.0, 5.0])
    C = emp.degenerate_mle(y)
    d = y - y.mean()
    assert np.allclose(C, np.outer(d, d))
    assert np.linalg.matrix_rank(C) == 1


def test_shrinking_error_with_draws():
    """Estimator error decays like 1/sqrt(M) in Frobenius norm."""
    rng = np.random.default_rng(2)
    A = rng.standard_normal((5, 5))
    cov = A @ A.T + np.eye(5)
    L = np.linalg.cholesky(cov)

    def err(M, seed):
        Y = L @ np.random.default_rng(seed).standard_normal((5, M))
        g = emp.empirical_moments(Y)
        return np.linalg.norm(g.cov - cov) / np.linalg.norm(cov)

    e100 = np.median([err(100, s) for s in range(10)])
    e10k = np.median([err(10_000, s) for s in range(10)])
    assert e10k < e100 / 3


def test_export_cov_csv(tmp_path):
    path = tmp_path / "cov.csv"
    cov = np.array([[1.0, 0.25], [0.25, 2.0]])
    emp.export_cov_csv(path, cov, [0.5, 1.5])
    lines = path.read_text().strip().split("\n")
    assert lines[0].split(",") == ["0.5", "1.5"]
    assert lines[1].split(",") == ["1", "0.25"]
    with pytest.raises(ValueError):
        emp.export_cov_csv(path, cov, [0.5])
