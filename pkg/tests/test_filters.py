import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from longwave.errors import DegenerateDenominator, DomainError
from longwave.filters import (
    analyticity_bound,
    analyticity_defect,
    d_hat_L,
    equivalent_response,
    make_bank,
    phi_hat,
    phi_hat_parts,
    pr_residual,
    psi_h_hat,
    psi_hat,
    qmf_error,
    tau_hat,
)

BANKS = [("cfw-c", 2, 2), ("cfw-c", 4, 4), ("cfw-c", 4, 6), ("cfw-pr", 4, 4), ("cfw-pr", 2, 3), ("daubechies", 4, 0)]


@pytest.mark.parametrize("variant,M,L", BANKS)
def test_qmf_identities(variant, M, L):
    assert qmf_error(make_bank(variant, M, L)) < 1e-10


@pytest.mark.parametrize("variant,M,L", BANKS)
def test_lowpass_dc_gain(variant, M, L):
    bank = make_bank(variant, M, L)
    for name in ("hL", "gL"):
        assert bank.response(name, np.array([0.0]))[0] == pytest.approx(np.sqrt(2), abs=1e-12)
        assert abs(bank.response(name, np.array([np.pi]))[0]) < 1e-10


@pytest.mark.parametrize("variant,M,L", BANKS)
def test_highpass_vanishing_moments(variant, M, L):
    bank = make_bank(variant, M, L)
    for name in ("hH", "gH"):
        taps, start = bank.taps(name)
        n = start + np.arange(len(taps))
        for k in range(M):
            assert abs(np.sum(taps * n ** k)) < 1e-8 * max(1.0, np.sum(np.abs(n) ** k))


def test_support_lengths():
    assert make_bank("cfw-c", 4, 4).support_length == 9
    assert make_bank("cfw-pr", 4, 4).support_length == 16
    assert make_bank("daubechies", 4).support_length == 8


def test_pr_bank_reconstructs():
    assert pr_residual(make_bank("cfw-pr", 4, 4)) < 1e-10
    assert pr_residual(make_bank("cfw-pr", 3, 2)) < 1e-10


def test_daubechies_matches_known_db2():
    # four-tap Daubechies filter (1 + sqrt 3, 3 + sqrt 3, 3 - sqrt 3, 1 - sqrt 3) / (4 sqrt 2)
    s3 = np.sqrt(3)
    ref = np.array([1 + s3, 3 + s3, 3 - s3, 1 - s3]) / (4 * np.sqrt(2))
    h = make_bank("daubechies", 2).hL
    assert np.allclose(h, ref) or np.allclose(h, ref[::-1])


def test_unknown_variant_rejected():
    with pytest.raises(DomainError):
        make_bank("haar", 2, 2)


@settings(max_examples=60, deadline=None)
@given(lam=st.floats(-100, 100), L=st.integers(1, 8))
def test_common_factor_is_bounded(lam, L):
    assert abs(d_hat_L(np.array([lam]), L)[0]) <= 1 + 1e-12


def test_common_factor_at_zero():
    for L in range(1, 7):
        assert d_hat_L(np.array([0.0]), L)[0] == pytest.approx(1.0)


def test_scaling_function_bounds(bank44):
    lam = np.linspace(-30, 30, 2001)
    ph, pg = phi_hat_parts(lam, bank44)
    assert np.max(np.abs(ph)) <= 2 ** -0.5 + 1e-12
    assert np.max(np.abs(pg)) <= 2 ** -0.5 + 1e-12
    assert np.max(np.abs(phi_hat(lam, bank44))) <= np.sqrt(2) + 1e-12
    assert phi_hat(np.array([0.0]), bank44)[0] == pytest.approx(2 ** -0.5 * (1 + 1j))


@pytest.mark.parametrize("M,L", [(2, 2), (4, 4), (4, 6)])
def test_wavelet_decay_bounds(M, L):
    bank = make_bank("cfw-c", M, L)
    lam = np.linspace(-8 * np.pi, 8 * np.pi, 4096)
    a = np.abs(psi_hat(lam, bank))
    assert np.all(a <= np.abs(lam) ** M + 1e-15)
    assert np.all(a <= 2 * 5.0 ** M * (1 + np.abs(lam)) ** -M)


def test_quasi_analytic(bank44):
    lam = np.linspace(2, 12, 50)
    neg = np.abs(psi_hat(-lam, bank44))
    pos = np.abs(psi_hat(lam, bank44))
    assert np.all(neg < 0.05 * pos.max())


def test_analyticity_defect_within_bound_and_decreasing():
    pts = np.array([1.0, 3.0, 6.0])
    prev = None
    for L in (2, 4, 6):
        bank = make_bank("cfw-c", 4, L)
        defect = analyticity_defect(pts, bank)
        assert np.all(defect <= analyticity_bound(pts, L))
        if prev is not None:
            assert np.all(defect < prev)
        prev = defect


def test_analyticity_defect_degenerate(bank44):
    with pytest.raises(DegenerateDenominator):
        analyticity_defect(np.array([0.0]), bank44)


def test_psi_h_alone_matches(bank44):
    lam = np.linspace(-20, 20, 101)
    from longwave.filters import psi_hat_parts

    assert np.allclose(psi_h_hat(lam, bank44), psi_hat_parts(lam, bank44)[0], atol=1e-15)


def test_cascade_matches_wavelet_at_low_frequency(bank44):
    # |T_j(lam)|**2 ~ 2 * 2**j |psi_hat(2**j lam)|**2 for the scale-j filter
    j = 5
    lam = np.linspace(0.5, 4, 9) * 2.0 ** -j
    ratio = np.abs(equivalent_response(j, lam, bank44)) ** 2 / (2 * 2 ** j * np.abs(psi_hat(2 ** j * lam, bank44)) ** 2)
    assert np.all(np.abs(ratio - 1) < 0.02)


def test_tau_hat_finite(bank44):
    v = tau_hat(2, np.linspace(-np.pi, np.pi, 11), bank44)
    assert np.all(np.isfinite(v))
    with pytest.raises(DomainError):
        tau_hat(-1, np.array([0.0]), bank44)
