import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from longwave.errors import DomainError, InputTooShort, NonFiniteInput
from longwave.filters import make_bank
from longwave.transform import equivalent_filter, first_index, n_coeffs, pyramid


def direct(X, j, bank):
    """W[j, k] = sum_s tau_j[2**j k - s] X[s] over fully supported k."""
    tau = equivalent_filter(j, bank)
    N = X.shape[0]
    k0 = first_index(j, bank.support_length)
    out = []
    k = k0
    while 2 ** j * k <= N - 1:
        s = 2 ** j * k - np.arange(len(tau))
        out.append(tau @ X[s])
        k += 1
    return np.array(out).reshape(-1, X.shape[1])


@pytest.mark.parametrize("variant,M,L", [("cfw-c", 4, 4), ("cfw-pr", 2, 2), ("daubechies", 3, 0)])
def test_pyramid_equals_direct_convolution(variant, M, L, rng):
    bank = make_bank(variant, M, L)
    X = rng.standard_normal((300, 2))
    pyr = pyramid(X, bank, 4)
    for j in range(1, 5):
        ref = direct(X, j, bank)
        assert pyr.W(j).shape == ref.shape
        assert np.allclose(pyr.W(j), ref, rtol=1e-10, atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(N=st.integers(10, 5000), j=st.integers(1, 12), T=st.integers(2, 20))
def test_n_coeffs_formula(N, j, T):
    expected = max(0, (N - 1) // 2 ** j - int(np.ceil((2 ** j - 1) * (T - 1) / 2 ** j)) + 1)
    assert n_coeffs(N, j, T) == expected


def test_n_coeffs_examples():
    assert n_coeffs(4096, 1, 9) == 2044
    assert n_coeffs(4096, 2, 9) == 1018
    assert n_coeffs(4096, 12, 9) == 0
    assert n_coeffs(10, 1, 9) == 1


def test_counts_match_formula(bank44, rng):
    X = rng.standard_normal((1000, 1))
    pyr = pyramid(X, bank44)
    for j in range(1, pyr.j_max + 1):
        assert pyr.n(j) == n_coeffs(1000, j, 9)


def test_linearity(bank44, rng):
    X, Y = rng.standard_normal((2, 257, 2))
    a, b = 1.7, -0.3
    p1, p2, p3 = pyramid(X, bank44), pyramid(Y, bank44), pyramid(a * X + b * Y, bank44)
    for j in range(1, p1.j_max + 1):
        assert np.allclose(p3.W(j), a * p1.W(j) + b * p2.W(j))


def test_polynomial_trend_killed(bank44):
    t = np.arange(512.0)
    X = (1 + 0.5 * t - 1e-3 * t ** 2 + 1e-6 * t ** 3)[:, None]
    pyr = pyramid(X, bank44)
    for j in range(1, 5):
        assert np.max(np.abs(pyr.W(j))) < 1e-6 * np.max(np.abs(X))


def test_input_errors(bank44):
    with pytest.raises(InputTooShort):
        pyramid(np.zeros((9, 1)), bank44)
    X = np.zeros((64, 1))
    X[3] = np.nan
    with pytest.raises(NonFiniteInput):
        pyramid(X, bank44)
    with pytest.raises(DomainError):
        pyramid(np.zeros((64, 1)), bank44, j_max=7)
    with pytest.raises(DomainError):
        n_coeffs(100, 0, 9)


def test_deep_levels_empty_but_shaped(bank44, rng):
    pyr = pyramid(rng.standard_normal((40, 3)), bank44)
    assert pyr.j_max == 5
    assert all(pyr.W(j).shape[1] == 3 for j in range(1, 6))
    assert pyr.n(5) == 0
