import numpy as np
import pytest

from longwave.asymptotics import (
    D_u,
    D_u_tau,
    I_inf,
    I_tilde,
    asymptotic_variance,
    variance_d_inf,
    variance_G_inf,
)
from longwave.errors import DomainError, SeriesNotConverged, SingularG
from longwave.filters import psi_hat


def test_D_u_zero_is_magnitude_sum(bank44):
    lam = np.array([1.0])
    ref = sum(np.abs(psi_hat(lam + 2 * np.pi * t, bank44)) ** 2 for t in range(-8, 9))
    val = D_u(lam, 0.0, 0, 8, bank44)
    assert val.shape == (1, 1)
    assert val.imag[0, 0] == pytest.approx(0, abs=1e-15)
    assert val.real[0, 0] == pytest.approx(ref[0], rel=1e-12)


def test_D_u_stable_in_t_max(bank44):
    a = D_u(np.array([0.7]), 0.4, 1, 8, bank44)
    b = D_u(np.array([0.7]), 0.4, 1, 16, bank44)
    assert a.shape == (1, 2)
    assert np.max(np.abs(a - b)) < 1e-8


def test_D_u_conjugate_symmetry_real_bank():
    from longwave.filters import make_bank

    bank = make_bank("daubechies", 4)
    lam = np.array([0.3, 1.1, 2.5])
    assert np.allclose(D_u(-lam, 0.4, 0, 8, bank), np.conj(D_u(lam, 0.4, 0, 8, bank)))


def test_D_u_stacks_components(bank44):
    lam = np.array([0.2, 0.9])
    D = D_u(lam, 0.3, 2, 8, bank44)
    for tau in range(4):
        assert np.allclose(D[:, tau], D_u_tau(lam, 0.3, 2, tau, 8, bank44))


def test_I_tilde_matches_components(bank44):
    # quadrature of sum_tau conj(D_tau) D_tau on a plain grid
    from longwave.whittle import K

    lam = np.linspace(-np.pi, np.pi, 4001)[1:-1:2]  # midpoints avoid lam = 0
    D1 = D_u(lam, 0.2, 1, 8, bank44)
    D2 = D_u(lam, 0.5, 1, 8, bank44)
    val = np.sum(np.conj(D1) * D2) * (2 * np.pi / lam.size)
    ref = 2 * np.pi * val / (K(0.2, bank44) * K(0.5, bank44))
    assert I_tilde(1, 0.2, 0.5, bank44) == pytest.approx(ref, rel=1e-3)


def test_D_u_argument_checks(bank44):
    with pytest.raises(DomainError):
        D_u(np.array([0.1]), 0.0, -1, 8, bank44)
    with pytest.raises(DomainError):
        D_u(np.array([0.1]), 0.0, 0, 4, bank44)


def test_I_tilde_properties(bank44):
    v = I_tilde(0, 0.4, 0.4, bank44)
    assert v.real > 0 and abs(v.imag) < 1e-12 * v.real
    for u in (0, 1, 2):
        assert I_tilde(u, 0.0, 0.4, bank44) == pytest.approx(np.conj(I_tilde(u, 0.4, 0.0, bank44)), rel=1e-12)


def test_I_tilde_independent_quadrature(bank44):
    # Simpson's rule, log-spaced on (1e-8, 1] and uniform on [1, pi]
    from scipy.integrate import simpson

    from longwave.whittle import K

    def f(lam):
        a = D_u_tau(lam, 0.0, 0, 0, 8, bank44)
        b = D_u_tau(lam, 0.4, 0, 0, 8, bank44)
        return (np.conj(a) * b).real

    s = np.linspace(np.log(1e-8), 0, 8001)
    x = np.exp(s)
    near = simpson((f(x) + f(-x)) * x, x=s)
    y = np.linspace(1, np.pi, 4001)
    far = simpson(f(y) + f(-y), x=y)
    ref = 2 * np.pi * (near + far) / (K(0.0, bank44) * K(0.4, bank44))
    assert I_tilde(0, 0.0, 0.4, bank44).real == pytest.approx(ref, rel=1e-6)


def test_series_terms_decay(bank44):
    terms = [abs((2 ** (u * 0.4) + 2 ** (u * 0.4)) * 2.0 ** -u * I_tilde(u, 0.4, 0.4, bank44)) for u in range(1, 6)]
    assert all(b < a for a, b in zip(terms[:-1], terms[1:]))


def test_I_inf_includes_u0(bank44):
    assert I_inf(0.4, 0.4, bank44).real > I_tilde(0, 0.4, 0.4, bank44).real


def test_univariate_variance_positive(bank44):
    V = variance_d_inf([[1.0]], [0.2], 10, bank44)
    assert V.shape == (1, 1) and V[0, 0] > 0
    VG = variance_G_inf([[1.0]], [0.2], 10, bank44)
    assert VG.shape == (1, 1) and VG[0, 0].real > 0


def test_variance_converges_in_u_max(bank44):
    G = np.array([[1.0, 0.8], [0.8, 1.0]])
    a = variance_d_inf(G, [0.2, 0.2], 10, bank44)
    b = variance_d_inf(G, [0.2, 0.2], 20, bank44)
    assert np.max(np.abs(a - b)) < 1e-6


def test_variance_structure_complex_G(bank44):
    G = np.array([[1.0, 0.5 + 0.3j], [0.5 - 0.3j, 1.5]])
    av = asymptotic_variance(G, [0.2, 0.5], 10, bank44)
    assert np.allclose(av.Vd, av.Vd.T, atol=1e-12)
    assert np.linalg.eigvalsh(av.Vd)[0] > -1e-8
    assert np.allclose(av.VG, av.VG.conj().T, atol=1e-12)
    assert np.linalg.eigvalsh(av.VG)[0] > -1e-8 * np.abs(av.VG).max()
    assert av.diagnostics["imag_Vd"] < 1e-10


def test_variance_permutation_equivariance(bank44):
    G = np.array([[1.0, 0.4 + 0.1j], [0.4 - 0.1j, 2.0]])
    d = np.array([0.1, 0.45])
    P = [1, 0]
    a = variance_d_inf(G, d, 10, bank44)
    b = variance_d_inf(G[np.ix_(P, P)], d[P], 10, bank44)
    assert np.allclose(a[np.ix_(P, P)], b, rtol=1e-10)


def test_variance_errors(bank44):
    with pytest.raises(DomainError):
        variance_d_inf(np.eye(2), [0.2, 0.2], 5, bank44)
    with pytest.raises(SingularG):
        variance_d_inf(np.ones((2, 2)), [0.2, 0.2], 10, bank44)
    with pytest.raises(DomainError):
        variance_d_inf(np.eye(3), [0.2, 0.2], 10, bank44)


def test_series_converges_for_nonstationary_memory(bank44):
    V = variance_d_inf([[1.0]], [1.6], 10, bank44)
    assert 0 < V[0, 0] < np.inf


def test_series_not_converged_reported(bank44, monkeypatch):
    import longwave.asymptotics as asy

    monkeypatch.setattr(asy, "SERIES_TOL", 0.0)
    with pytest.raises(SeriesNotConverged):
        variance_d_inf([[1.0]], [0.2], 10, bank44)
