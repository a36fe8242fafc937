import numpy as np
import pytest

from longwave.errors import DimensionMismatch, DomainError, InvalidD, NonPsdSigma, NonPsdSpectrum
from longwave.simulate import (
    MfbmParams,
    ModelSpec,
    arfima_model,
    arfima_weights,
    mfbm_increment_spectrum,
    mfbm_model,
    mfbm_theta,
    sim_arfima0d0,
    sim_mfbm,
)

CASE1 = MfbmParams.bivariate([1.0, 1.2], 0.6, 0.9)
CASE2 = MfbmParams.bivariate([1.0, 1.2], 0.2, -0.6)


def test_arfima_weights_recursion():
    w = arfima_weights(0.3, 5)
    assert w[0] == 1
    for k in range(1, 5):
        assert w[k] == pytest.approx(w[k - 1] * (k - 1 + 0.3) / k)


def test_white_noise_case():
    X = sim_arfima0d0(4096, [0.0, 0.0], np.eye(2), seed=1)
    for c in range(2):
        x = X[:, c] - X[:, c].mean()
        r1 = np.dot(x[1:], x[:-1]) / np.dot(x, x)
        assert abs(r1) < 3 / np.sqrt(4096)


def test_reproducible():
    a = sim_arfima0d0(256, [0.2, 0.4], np.eye(2), seed=42)
    b = sim_arfima0d0(256, [0.2, 0.4], np.eye(2), seed=42)
    c = sim_arfima0d0(256, [0.2, 0.4], np.eye(2), seed=43)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_innovation_covariance():
    S = np.array([[1.0, 0.8], [0.8, 2.0]])
    X = sim_arfima0d0(2 ** 14, [0.0, 0.0], S, seed=2)
    assert np.allclose(np.cov(X.T), S, atol=0.06)


def test_arfima_lag_one_autocorrelation():
    # rho(1) = d / (1 - d) for ARFIMA(0, d, 0)
    d = 0.3
    rs = []
    for s in range(20):
        x = sim_arfima0d0(4096, [d], np.eye(1), seed=s)[:, 0]
        x = x - x.mean()
        rs.append(np.dot(x[1:], x[:-1]) / np.dot(x, x))
    assert np.mean(rs) == pytest.approx(d / (1 - d), abs=0.03)


def test_integrated_branch():
    X = sim_arfima0d0(512, [1.2], np.eye(1), seed=4)
    dX = np.diff(X[:, 0])
    assert np.var(dX) < np.var(X[:, 0])


def test_arfima_errors():
    with pytest.raises(InvalidD):
        sim_arfima0d0(128, [-0.5], np.eye(1))
    with pytest.raises(NonPsdSigma):
        sim_arfima0d0(128, [0.1, 0.1], np.array([[1, 2], [2, 1]]))
    with pytest.raises(DimensionMismatch):
        sim_arfima0d0(128, [0.1, 0.1], np.eye(3))


def test_arfima_model_phase():
    m = arfima_model([0.2, 0.8], np.eye(2))
    assert m.Phi[0, 1] == pytest.approx(0.3 * np.pi)
    assert np.allclose(m.Phi, -m.Phi.T)
    assert np.allclose(arfima_model([0.2, 0.2], np.eye(2)).Phi, 0)


def test_model_spec_validation():
    with pytest.raises(DomainError):
        ModelSpec([0.1, 0.2], np.eye(2), np.ones((2, 2)))
    with pytest.raises(DimensionMismatch):
        ModelSpec([0.1], np.eye(2), np.zeros((2, 2)))


def test_mfbm_case1():
    Om, Ph = mfbm_theta(CASE1)
    assert Ph[0, 1] == pytest.approx(np.pi / 7, abs=0.005)
    assert Om[0, 1] == pytest.approx(0.699, abs=0.005)
    assert mfbm_model(CASE1).rho[0, 1] == pytest.approx(0.70, abs=0.01)


def test_mfbm_case2_magnitude():
    Om, _ = mfbm_theta(CASE2)
    assert Om[0, 1] == pytest.approx(0.293, abs=0.005)


def test_mfbm_time_reversible():
    _, Ph = mfbm_theta(MfbmParams.bivariate([0.8, 1.3], 0.5, 0.0))
    assert np.allclose(Ph, 0)


def test_mfbm_diagonal():
    Om, Ph = mfbm_theta(CASE1)
    # Omega_ll = sigma_l**2 Gamma(2 d_l) |cos(pi d_l)|
    from scipy.special import gamma

    for l, d in enumerate(CASE1.d):
        assert Om[l, l] == pytest.approx(gamma(2 * d) * abs(np.cos(np.pi * d)) if not np.isclose(d, 1) else 1.0)
    assert np.allclose(np.diag(Ph), 0)


@pytest.mark.parametrize("r", [0.3, -0.5])
def test_mfbm_branch_continuity_reversible(r):
    at = mfbm_theta(MfbmParams.bivariate([1.0, 1.0], r, 0.0))
    for eps in (1e-7, -1e-7):
        near = mfbm_theta(MfbmParams.bivariate([1.0, 1.0 + eps], r, 0.0))
        assert np.allclose(near[0], at[0], atol=1e-6)
        assert np.allclose(near[1], at[1], atol=1e-6)


def test_mfbm_params_validation():
    with pytest.raises(InvalidD):
        MfbmParams.bivariate([0.4, 1.0], 0.2, 0.1)
    with pytest.raises(DomainError):
        MfbmParams.bivariate([1.0, 1.0], 1.2, 0.1)
    with pytest.raises(DomainError):
        MfbmParams(np.ones(2), np.eye(2), np.ones((2, 2)), np.ones(2))


def test_brownian_increments_white():
    p = MfbmParams(np.ones(1), np.eye(1), np.zeros((1, 1)), np.ones(1))
    X = sim_mfbm(4096, p, seed=0)[:, 0]
    dx = np.diff(np.concatenate([[0.0], X]))
    assert np.var(dx) == pytest.approx(1.0, rel=0.1)
    r1 = np.corrcoef(dx[1:], dx[:-1])[0, 1]
    assert abs(r1) < 4 / np.sqrt(4096)


def test_mfbm_self_similarity():
    d = 1.3
    p = MfbmParams(np.ones(1), np.eye(1), np.zeros((1, 1)), np.array([d]))
    v = np.zeros(4)
    for s in range(100):
        dx = np.diff(np.concatenate([[0.0], sim_mfbm(1024, p, seed=s)[:, 0]]))
        for i, m in enumerate((1, 2, 4, 8)):
            v[i] += np.var(dx[: 1024 // m * m].reshape(-1, m).sum(axis=1))
    ratio = v / v[0]
    assert np.allclose(ratio, np.array([1, 2, 4, 8]) ** (2 * d - 1), rtol=0.1)


def test_mfbm_cross_periodogram():
    N, reps = 1024, 200
    lam = 2 * np.pi * np.arange(N // 2 + 1) / N
    acc = np.zeros((N // 2 + 1, 2, 2), dtype=complex)
    for s in range(reps):
        X = sim_mfbm(N, CASE1, seed=s)
        dx = np.diff(np.vstack([np.zeros((1, 2)), X]), axis=0)
        F = np.fft.rfft(dx, axis=0)
        acc += F[:, :, None] * F[:, None, :].conj() / N
    acc /= reps
    mid = (lam > 0.5) & (lam < 2.5)
    f = mfbm_increment_spectrum(lam[mid], CASE1)
    # with Cov(h) = (1/2pi) int f exp(i h lam) the periodogram |F|**2 / N estimates f
    for l, m in ((0, 0), (1, 1), (0, 1)):
        ratio = np.abs(acc[mid, l, m]).mean() / np.abs(f[:, l, m]).mean()
        assert ratio == pytest.approx(1.0, rel=0.1)


def test_mfbm_rejects_bad_length():
    with pytest.raises(DomainError):
        sim_mfbm(1000, CASE1)


def test_mfbm_invalid_spectrum():
    bad = MfbmParams.bivariate([0.6, 1.4], 1.0, 1.0)
    with pytest.raises(NonPsdSpectrum):
        sim_mfbm(256, bad, seed=0)
