"""Common-factor wavelet filter banks and their frequency-domain quantities.

A bank holds four real FIR filters: the low/high-pass pair of the
``h`` tree and of the ``g`` tree.  The complex wavelet is
``psi = psi_h + i psi_g``; with the common-factor construction it is
quasi-analytic, i.e. ``psi_hat(lam) ~ 2 * 1{lam > 0} * psi_h_hat(lam)``.

Fourier conventions
-------------------
A filter with taps ``c[n]`` placed at integer positions ``start + n`` has
response ``sum_n c[n] exp(-i lam (start + n))``.  Scaling functions are
normalized by ``phi_h_hat(0) = phi_g_hat(0) = 2**-0.5`` and wavelets by

    psi_h_hat(lam) = 2**-0.5 * hH_hat(lam / 2) * phi_h_hat(lam / 2),

and likewise for ``g``.  With this normalization the scale-``j`` equivalent
filter of the complex pyramid satisfies
``|T_j(lam)|**2 ~ 2 * 2**j * |psi_hat(2**j lam)|**2`` at low frequency.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import DegenerateDenominator, DomainError, FactorizationFailed, NumericalResidual

__all__ = [
    "ComplexFilterBank",
    "FrequencyResponse",
    "d_hat_L",
    "build_cfw_c",
    "build_cfw_pr",
    "build_daubechies",
    "make_bank",
    "phi_hat_parts",
    "phi_hat",
    "psi_hat_parts",
    "psi_h_hat",
    "psi_hat",
    "analyticity_defect",
    "analyticity_bound",
    "tau_hat",
    "equivalent_response",
    "pr_residual",
    "qmf_error",
]

VARIANTS = ("cfw-c", "cfw-pr", "daubechies")
_TAP_RESIDUAL = 1e-10


@dataclass(frozen=True)
class FrequencyResponse:
    """Samples of a complex frequency response on an increasing grid."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        if grid.ndim != 1 or np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("response values must be finite")


@dataclass(frozen=True, eq=False)
class ComplexFilterBank:
    """Four real analysis filters of a dual-tree complex wavelet.

    Parameters
    ----------
    M, L : int
        Number of vanishing moments and degree of the common factor.
    variant : {'cfw-c', 'cfw-pr', 'daubechies'}
        Construction used.
    hL, hH, gL, gH : ndarray
        Real taps.  The two low-pass filters start at position
        ``low_start`` and the two high-pass filters at ``high_start``.
    q : ndarray, optional
        Coefficients of the polynomial ``q_hat`` in ``exp(-i lam)``
        (``None`` means ``q_hat = 1``).
    """

    M: int
    L: int
    variant: str
    hL: np.ndarray
    hH: np.ndarray
    gL: np.ndarray
    gH: np.ndarray
    low_start: int = 0
    high_start: int = 0
    q: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        for name in ("hL", "hH", "gL", "gH"):
            taps = np.array(getattr(self, name), dtype=float)
            if not np.all(np.isfinite(taps)):
                raise NumericalResidual(f"non-finite taps in {name}")
            taps.flags.writeable = False
            object.__setattr__(self, name, taps)
        lengths = {len(self.hL), len(self.hH), len(self.gL), len(self.gH)}
        if len(lengths) != 1:
            raise ValueError("all four filters must share one support length")
        object.__setattr__(self, "_reduced", {n: _deflate(getattr(self, n), self.M) for n in ("hH", "gH")})

    @property
    def support_length(self) -> int:
        return len(self.hL)

    @property
    def label(self) -> str:
        if self.variant == "daubechies":
            return f"daubechies({self.M})"
        return f"{self.variant.upper()}({self.M},{self.L})"

    def taps(self, name: str):
        """Return ``(taps, start)`` for one of ``hL, hH, gL, gH``."""
        start = self.low_start if name.endswith("L") else self.high_start
        return getattr(self, name), start

    def response(self, name: str, lam):
        """Frequency response of filter ``name`` at angular frequencies ``lam``."""
        taps, start = self.taps(name)
        if name in ("hH", "gH"):
            return _highpass_response(taps, self._reduced[name], start, self.M, lam)
        return _fir_response(taps, start, lam)


def _fir_response(taps, start, lam):
    lam = np.asarray(lam, dtype=float)
    z = np.exp(-1j * lam)
    out = np.zeros(lam.shape, dtype=complex)
    for c in taps[::-1]:
        out = out * z + c
    return out * np.exp(-1j * lam * start)


def _deflate(taps, M):
    """Taps ``r`` with ``sum c_n x**n = (1 - x)**M sum r_n x**n``."""
    r = np.asarray(taps, dtype=float)
    for _ in range(M):
        # synthetic division by (1 - x): r_n = c_n + r_{n-1}
        q = np.cumsum(r)
        if abs(q[-1]) > 1e-9 * np.abs(r).sum():
            raise NumericalResidual("high-pass filter lacks the expected zeros at the origin")
        r = q[:-1]
    return r


def _highpass_response(taps, reduced, start, M, lam):
    """High-pass response computed from its factored form, accurate near zero."""
    lam = np.asarray(lam, dtype=float)
    one_minus = 2j * np.sin(lam / 2) * np.exp(-0.5j * lam)
    return one_minus ** M * _fir_response(reduced, start, lam)


def d_hat_L(lam, L: int):
    """Common factor ``d_L``.

    ``exp(i lam (1/4 - L/2)) [cos(lam/4)**(2L+1) + i (-1)**(L+1) sin(lam/4)**(2L+1)]``.
    Its modulus never exceeds one.
    """
    if L < 1:
        raise DomainError("L must be >= 1")
    lam = np.asarray(lam, dtype=float)
    c = np.cos(lam / 4) ** (2 * L + 1)
    s = np.sin(lam / 4) ** (2 * L + 1)
    return np.exp(1j * lam * (0.25 - L / 2)) * (c + 1j * (-1) ** (L + 1) * s)


def _binomial_factor(lam, M):
    return 2.0 ** (-M + 0.5) * (1 + np.exp(-1j * lam)) ** M


def _q_response(q, lam):
    if q is None:
        return np.ones(np.shape(lam), dtype=complex)
    return _fir_response(q, 0, lam)


def _cfw_lowpass(lam, M, L, q=None):
    d = d_hat_L(lam, L)
    base = _binomial_factor(lam, M) * _q_response(q, lam)
    return base * d, base * np.conj(d) * np.exp(-1j * lam * L)


def _highpass_from_lowpass(low, lam):
    return np.conj(low(lam + np.pi)) * np.exp(-1j * lam)


def _grid_size(T):
    n = 1
    while n < 8 * T:
        n *= 2
    return n


def _extract_taps(func, T):
    """Recover ``T`` contiguous real taps of a trigonometric polynomial.

    The response is sampled on a power-of-two grid and inverted; the
    circular window of maximal energy is kept.
    """
    n = _grid_size(T)
    lam = 2 * np.pi * np.arange(n) / n
    coef = np.fft.ifft(func(lam))
    energy = np.abs(coef) ** 2
    csum = np.concatenate([[0.0], np.cumsum(np.concatenate([energy, energy]))])
    window = csum[T:T + n] - csum[:n]
    s = int(np.argmax(window))
    idx = (s + np.arange(T)) % n
    taps = coef[idx]
    total = energy.sum()
    residual = (total - energy[idx].sum()) / total
    imag = np.max(np.abs(taps.imag)) / np.max(np.abs(taps.real))
    if residual > _TAP_RESIDUAL or imag > _TAP_RESIDUAL:
        raise NumericalResidual(
            f"off-support residual {residual:.3e}, imaginary part {imag:.3e}"
        )
    start = s if s <= n // 2 else s - n
    return taps.real.copy(), start


def _bank_from_lowpass(M, L, variant, lowpass, T, q=None):
    h_low = lambda lam: lowpass(lam)[0]
    g_low = lambda lam: lowpass(lam)[1]
    hL, sL = _extract_taps(h_low, T)
    gL, sgL = _extract_taps(g_low, T)
    hH, sH = _extract_taps(lambda lam: _highpass_from_lowpass(h_low, lam), T)
    gH, sgH = _extract_taps(lambda lam: _highpass_from_lowpass(g_low, lam), T)
    if sL != sgL or sH != sgH:
        raise NumericalResidual("h and g trees have misaligned supports")
    bank = ComplexFilterBank(M, L, variant, hL, hH, gL, gH, sL, sH, q)
    err = qmf_error(bank)
    if err > 1e-10:
        raise NumericalResidual(f"QMF identity violated by {err:.3e}")
    return bank


def build_cfw_c(M: int, L: int) -> ComplexFilterBank:
    """Common-factor bank with ``q_hat = 1`` (support ``M + L + 1``)."""
    if M < 2 or L < 1:
        raise DomainError("CFW-C requires M >= 2 and L >= 1")
    return _bank_from_lowpass(M, L, "cfw-c", lambda lam: _cfw_lowpass(lam, M, L), M + L + 1)


def _poly_in_y_for_dL(L):
    """``|d_L(lam)|**2`` as a polynomial in ``y = sin(lam/2)**2``."""
    # cos(lam/4)**2 = (1 + x)/2 and sin(lam/4)**2 = (1 - x)/2 with x = cos(lam/2);
    # the sum is even in x and x**2 = 1 - y.
    k = 2 * L + 1
    plus = P.polypow([0.5, 0.5], k)
    minus = P.polypow([0.5, -0.5], k)
    even = P.polyadd(plus, minus)
    out = np.zeros(1)
    for power in range(0, len(even), 2):
        out = P.polyadd(out, even[power] * P.polypow([1.0, -1.0], power // 2))
    return P.polytrim(out, 1e-15)


def _bezout(A):
    """Solve ``A(y) Q(y) + A(1-y) Q(1-y) = 1`` with ``deg Q < deg A``."""
    n = len(A) - 1
    A_ref = _reflect(A)
    size = 2 * n
    mat = np.zeros((size, n))
    for k in range(n):
        e = np.zeros(k + 1)
        e[k] = 1.0
        col = P.polyadd(P.polymul(A, e), P.polymul(A_ref, _reflect(e)))
        mat[: min(len(col), size), k] = col[:size]
    rhs = np.zeros(size)
    rhs[0] = 1.0
    Q, *_ = np.linalg.lstsq(mat, rhs, rcond=None)
    if np.max(np.abs(mat @ Q - rhs)) > 1e-8:
        raise FactorizationFailed("Bezout system is inconsistent")
    return Q


def _reflect(c):
    """Coefficients of ``p(1 - y)`` given those of ``p(y)``."""
    out = np.zeros(1)
    for k, ck in enumerate(c):
        out = P.polyadd(out, ck * P.polypow([1.0, -1.0], k))
    return out


def _min_phase(Q):
    """Minimum-phase ``q`` with ``|q_hat(lam)|**2 = Q(sin(lam/2)**2)``, ``q_hat(0)=1``."""
    yy = np.linspace(0, 1, 2001)
    if np.min(P.polyval(yy, Q)) < -1e-12:
        raise FactorizationFailed("Bezout solution is negative on [0, 1]")
    m = len(Q) - 1
    if m == 0:
        return np.array([1.0])
    # z**m Q(-(z-1)**2 / (4 z)) as a polynomial in z
    poly = np.zeros(2 * m + 1)
    for k, bk in enumerate(Q):
        term = P.polymul(P.polypow([-1.0, 1.0], 2 * k), np.eye(1, m - k + 1, m - k)[0])
        poly[: len(term)] += bk * (-0.25) ** k * term
    roots = np.roots(poly[::-1])
    roots = roots[np.argsort(np.abs(roots))][:m]
    if np.any(np.abs(roots) > 1 + 1e-6):
        raise FactorizationFailed("could not split roots across the unit circle")
    q = np.real_if_close(np.poly(roots), tol=1e6)
    if np.iscomplexobj(q):
        raise FactorizationFailed("spectral factor has complex coefficients")
    q = np.asarray(q, dtype=float) / np.sum(q)
    lam = np.linspace(0, np.pi, 513)
    err = np.max(np.abs(np.abs(_q_response(q, lam)) ** 2 - P.polyval(np.sin(lam / 2) ** 2, Q)))
    if err > 1e-8:
        raise FactorizationFailed(f"spectral factor residual {err:.3e}")
    return q


def build_cfw_pr(M: int, L: int) -> ComplexFilterBank:
    """Common-factor bank with perfect reconstruction (support ``2(M + L)``).

    ``|q_hat|**2`` solves the Bezout identity
    ``|q(lam)|**2 s(lam) + |q(lam+pi)|**2 s(lam+pi) = 1`` with
    ``s(lam) = 2**-M (1 + cos lam)**M |d_L(lam)|**2``, and ``q`` is its
    minimum-phase factor normalized by ``q_hat(0) = 1``.  Root finding is
    reliable for ``M + L <= 12``.
    """
    if M < 2 or L < 1:
        raise DomainError("CFW-PR requires M >= 2 and L >= 1")
    if M + L > 12:
        raise DomainError("CFW-PR root finding is only supported for M + L <= 12")
    A = P.polymul(P.polypow([1.0, -1.0], M), _poly_in_y_for_dL(L))
    q = _min_phase(_bezout(A))
    return _bank_from_lowpass(
        M, L, "cfw-pr", lambda lam: _cfw_lowpass(lam, M, L, q), 2 * (M + L), q
    )


def build_daubechies(M: int) -> ComplexFilterBank:
    """Real Daubechies bank with ``M`` vanishing moments used on both trees.

    Serves as the real-wavelet comparison: ``psi_g = psi_h`` so no phase
    information can be recovered.
    """
    if M < 1:
        raise DomainError("M must be >= 1")
    Q = np.array([comb(M - 1 + k, k) for k in range(M)], dtype=float)
    q = _min_phase(Q)
    h = np.sqrt(2.0) * P.polymul(P.polypow([0.5, 0.5], M), q)
    T = len(h)
    # the high-pass tap at position 1 - m is (-1)**m h[m]
    hH = ((-1.0) ** np.arange(T) * h)[::-1]
    return ComplexFilterBank(M, 0, "daubechies", h, hH, h, hH, 0, 2 - T)


@lru_cache(maxsize=32)
def make_bank(variant: str = "cfw-c", M: int = 4, L: int = 4) -> ComplexFilterBank:
    """Build (and cache) a bank by name."""
    variant = variant.lower()
    if variant == "cfw-c":
        return build_cfw_c(M, L)
    if variant == "cfw-pr":
        return build_cfw_pr(M, L)
    if variant == "daubechies":
        return build_daubechies(M)
    raise DomainError(f"unknown filter variant {variant!r}; choose from {VARIANTS}")


def qmf_error(bank: ComplexFilterBank, n_grid: int = 1024) -> float:
    """Largest violation of the quadrature-mirror identities on a grid."""
    lam = np.linspace(-np.pi, np.pi, n_grid)
    err = 0.0
    for low, high in (("hL", "hH"), ("gL", "gH")):
        ref = np.conj(bank.response(low, lam + np.pi)) * np.exp(-1j * lam)
        err = max(err, float(np.max(np.abs(bank.response(high, lam) - ref))))
    return err


def pr_residual(bank: ComplexFilterBank, n_grid: int = 1024) -> float:
    """Residual of the perfect-reconstruction identity for ``q_hat``."""
    lam = np.linspace(-np.pi, np.pi, n_grid)

    def s(x):
        return 2.0 ** (-bank.M) * (1 + np.cos(x)) ** bank.M * np.abs(d_hat_L(x, bank.L)) ** 2

    q2 = lambda x: np.abs(_q_response(bank.q, x)) ** 2
    return float(np.max(np.abs(q2(lam) * s(lam) + q2(lam + np.pi) * s(lam + np.pi) - 1)))


def _depth(lam):
    top = np.max(np.abs(lam)) if np.size(lam) else 0.0
    return 30 + max(0, int(np.ceil(np.log2(top)))) if top > 1 else 30


def _scaling_product(lam, bank, name):
    """``2**-0.5 prod_{j>=1} 2**-0.5 H(2**-j lam)`` with a linear-phase tail."""
    taps, start = bank.taps(name)
    lam = np.asarray(lam, dtype=float)
    J = _depth(lam)
    out = np.full(lam.shape, 2 ** -0.5, dtype=complex)
    for j in range(1, J + 1):
        out *= 2 ** -0.5 * _fir_response(taps, start, lam * 2.0 ** -j)
    # omitted factors are exp(-i c mu) (1 + O(mu**2)) with c the centre of mass
    c = np.dot(start + np.arange(len(taps)), taps) / np.sum(taps)
    return out * np.exp(-1j * c * lam * 2.0 ** -J)


def phi_hat_parts(lam, bank: ComplexFilterBank):
    """Fourier transforms ``(phi_h_hat, phi_g_hat)`` of the two scaling functions."""
    return _scaling_product(lam, bank, "hL"), _scaling_product(lam, bank, "gL")


def phi_hat(lam, bank: ComplexFilterBank):
    """Complex scaling function ``phi_h_hat + i phi_g_hat``.

    Each part is bounded by ``2**-0.5`` in modulus, so the complex
    combination is bounded by ``sqrt(2)`` (and equals one at the origin).
    """
    ph, pg = phi_hat_parts(lam, bank)
    return ph + 1j * pg


def psi_hat_parts(lam, bank: ComplexFilterBank):
    """Return ``(psi_h_hat, psi_g_hat, psi_hat)`` at ``lam``."""
    lam = np.asarray(lam, dtype=float)
    if np.size(lam) and np.max(np.abs(lam)) > 2.0 ** 40:
        raise DomainError("|lambda| must not exceed 2**40")
    half = lam / 2
    ph, pg = phi_hat_parts(half, bank)
    psi_h = 2 ** -0.5 * bank.response("hH", half) * ph
    psi_g = 2 ** -0.5 * bank.response("gH", half) * pg
    return psi_h, psi_g, psi_h + 1j * psi_g


def psi_h_hat(lam, bank: ComplexFilterBank):
    """``psi_h_hat`` alone (half the work of :func:`psi_hat_parts`)."""
    lam = np.asarray(lam, dtype=float)
    half = lam / 2
    return 2 ** -0.5 * bank.response("hH", half) * _scaling_product(half, bank, "hL")


def psi_hat(lam, bank: ComplexFilterBank):
    return psi_hat_parts(lam, bank)[2]


def analyticity_defect(lam, bank: ComplexFilterBank):
    """``|psi_hat - 2 * 1{lam > 0} psi_h_hat| / |psi_h_hat|``."""
    lam = np.asarray(lam, dtype=float)
    psi_h, _, psi = psi_hat_parts(lam, bank)
    den = np.abs(psi_h)
    if np.any(den < 1e-14):
        raise DegenerateDenominator("psi_h_hat vanishes at a requested frequency")
    return np.abs(psi - 2 * (lam > 0) * psi_h) / den


def analyticity_bound(lam, L: int):
    """Explicit upper bound on the analyticity defect at ``lam``."""
    lam = np.abs(np.asarray(lam, dtype=float))
    big = np.maximum(4 * np.pi, lam)
    dist = np.abs(lam - 4 * np.pi * np.round(lam / (4 * np.pi)))
    return 2 * np.sqrt(2) * (np.log2(big / (2 * np.pi)) + 2) * (1 - dist / big) ** (2 * L + 1)


def tau_hat(j: int, lam, bank: ComplexFilterBank, k_max: int = 8):
    """Frequency-domain coefficient filter at scale ``j``.

    ``2**(j/2) sum_{|k|<=k_max} phi_hat(lam + 2k pi) conj(psi_hat(2**j (lam + 2k pi)))``.
    The conjugate sits on ``psi_hat``; the factors decay fast in ``k`` so
    the truncation error is negligible for ``k_max >= 8``.
    """
    if j < 0 or k_max < 1:
        raise DomainError("need j >= 0 and k_max >= 1")
    lam = np.asarray(lam, dtype=float)
    out = np.zeros(lam.shape, dtype=complex)
    for k in range(-k_max, k_max + 1):
        x = lam + 2 * np.pi * k
        out += phi_hat(x, bank) * np.conj(psi_hat(2.0 ** j * x, bank))
    return 2.0 ** (j / 2) * out


def equivalent_response(j: int, lam, bank: ComplexFilterBank):
    """Exact response of the scale-``j`` filter of ``W_h + i W_g``.

    ``hH(2**(j-1) lam) prod_{i<j-1} hL(2**i lam)`` plus ``i`` times the
    same product for the ``g`` tree.
    """
    if j < 1:
        raise DomainError("j must be >= 1")
    lam = np.asarray(lam, dtype=float)
    out = []
    for low, high in (("hL", "hH"), ("gL", "gH")):
        r = bank.response(high, 2.0 ** (j - 1) * lam)
        for i in range(j - 1):
            r = r * bank.response(low, 2.0 ** i * lam)
        out.append(r)
    return out[0] + 1j * out[1]
