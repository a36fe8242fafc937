"""Asymptotic covariance of the wavelet Whittle estimates.

Only the regime where the number of scales used grows without bound is
covered.  Coefficients at scale ``j + u`` are paired with the block of
``2**u`` coefficients at scale ``j`` they cover.  With ``x = lam + 2 t pi``
a frequency of the coarse scale,

    D_{u,tau}(lam; delta) = sum_t |x|**-delta conj(psi_hat(x))
                            2**(-u/2) psi_hat(2**-u x) exp(-i tau 2**-u x)

is the (normalized) cross-spectral density between the coarse sequence and
the ``tau``-th fine sub-sequence, and the cross-scale kernel is

    I~_u(d1, d2) = 2 pi / (K(d1) K(d2))
                   int_{-pi}^{pi} <D_u(lam; d1), D_u(lam; d2)> dlam,

where ``<., .>`` is the Hermitian inner product over ``tau = 0..2**u - 1``.
Summing over ``tau`` first leaves only harmonics ``t, t'`` congruent
modulo ``2**u``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DomainError, SeriesNotConverged, SingularG
from .filters import ComplexFilterBank, psi_hat
from .whittle import K

__all__ = [
    "AsymptoticVariance",
    "D_u",
    "D_u_tau",
    "I_tilde",
    "I_inf",
    "variance_d_inf",
    "variance_G_inf",
    "asymptotic_variance",
]

LOG2 = np.log(2.0)
SERIES_TOL = 1e-6


@dataclass(frozen=True)
class AsymptoticVariance:
    """Limit covariances of ``sqrt(n)(d_hat - d)`` and ``sqrt(n) vec(G_hat - G)``.

    Attributes
    ----------
    Vd : ndarray, shape (p, p)
        Real symmetric.
    VG : ndarray, shape (p*p, p*p)
        Hermitian covariance ``E[dG_ab conj(dG_a'b')]`` of ``sqrt(n) vec(G_hat(d0))``
        with ``G_hat`` evaluated at the true ``d0``; rows and columns are
        row-major ``(a, b)`` pairs.
    diagnostics : dict
        ``u_max``, ``t_max``, the estimated relative u-series tail and the
        largest discarded imaginary part of ``Vd``.
    """

    Vd: np.ndarray
    VG: np.ndarray
    diagnostics: dict = field(default_factory=dict)


def _check_u(u, t_max):
    if u < 0:
        raise DomainError("u must be >= 0")
    if t_max < 8:
        raise DomainError("t_max must be >= 8")


def _fine(x, u, bank):
    return 2.0 ** (-u / 2) * psi_hat(2.0 ** -u * x, bank)


def D_u_tau(lam, delta: float, u: int, tau: int, t_max: int, bank: ComplexFilterBank):
    """Single component ``D_{u,tau}(lam; delta)``, harmonics ``|t| <= t_max``."""
    _check_u(u, t_max)
    lam = np.asarray(lam, dtype=float)
    out = np.zeros(lam.shape, dtype=complex)
    for t in range(-t_max, t_max + 1):
        x = lam + 2 * np.pi * t
        out += np.abs(x) ** (-delta) * np.conj(psi_hat(x, bank)) * _fine(x, u, bank) * np.exp(-1j * tau * 2.0 ** -u * x)
    return out


def D_u(lam, delta: float, u: int, t_max: int, bank: ComplexFilterBank):
    """All components, shape ``lam.shape + (2**u,)``.

    For ``u = 0`` this is ``sum_t |x|**-delta |psi_hat(x)|**2`` (last axis of
    length one).
    """
    _check_u(u, t_max)
    lam = np.asarray(lam, dtype=float)
    return np.stack([D_u_tau(lam, delta, u, tau, t_max, bank) for tau in range(2 ** u)], axis=-1)


# ---------------------------------------------------------------------------
# quadrature


def _panels(edges, order):
    x, w = np.polynomial.legendre.leggauss(order)
    a, b = edges[:-1, None], edges[1:, None]
    return (0.5 * (b - a) * x + 0.5 * (b + a)).ravel(), (0.5 * (b - a) * w).ravel()


def _edges():
    """Panel edges on ``(0, pi]``, graded towards the singular point 0."""
    graded = np.pi * 2.0 ** -np.arange(50, -1, -1)
    out = [np.array([0.0])]
    for a, b in zip(graded[:-1], graded[1:]):
        out.append(np.linspace(a, b, 3)[1:])
    return np.concatenate(out)


@dataclass(frozen=True)
class _UTable:
    u: int
    weight: np.ndarray
    absx: np.ndarray  # (2 t_max + 1, n)
    prod: np.ndarray  # conj(psi_hat(x)) 2**(-u/2) psi_hat(2**-u x)
    t: np.ndarray


@lru_cache(maxsize=128)
def _u_table(bank: ComplexFilterBank, u: int, t_max: int, order: int = 16) -> _UTable:
    pos, w = _panels(_edges(), order)
    lam = np.concatenate([-pos[::-1], pos])
    weight = np.concatenate([w[::-1], w])
    t = np.arange(-t_max, t_max + 1)
    x = lam[None, :] + 2 * np.pi * t[:, None]
    prod = np.conj(psi_hat(x, bank)) * _fine(x, u, bank)
    return _UTable(u, weight, np.abs(x), prod, t)


def _coeffs(table: _UTable, delta):
    return table.absx ** (-delta) * table.prod  # (T, n)


def _inner(table: _UTable, a1, a2):
    """``int sum_tau conj(D_tau(d1)) D_tau(d2)`` from harmonic coefficients."""
    m = 2 ** table.u
    cls = np.mod(table.t, m)
    total = 0.0
    for c in np.unique(cls):
        s1 = a1[cls == c].sum(axis=0)
        s2 = a2[cls == c].sum(axis=0)
        total = total + np.sum(table.weight * np.conj(s1) * s2)
    return m * total


def I_tilde(u: int, delta1: float, delta2: float, bank: ComplexFilterBank, t_max: int = 8) -> complex:
    """Cross-scale kernel ``I~_u(delta1, delta2)``.

    Raises
    ------
    DomainError
        If ``K`` diverges at ``delta1`` or ``delta2``.
    """
    _check_u(u, t_max)
    k1, k2 = K(delta1, bank), K(delta2, bank)
    tab = _u_table(bank, u, t_max)
    val = _inner(tab, _coeffs(tab, delta1), _coeffs(tab, delta2))
    return complex(2 * np.pi * val / (k1 * k2))


def _series(deltas, bank, u_max, t_max):
    """``I_inf`` for every pair of ``deltas`` plus the tail estimate."""
    deltas = np.asarray(deltas, dtype=float)
    kk = np.array([K(x, bank) for x in deltas])
    norm = 2 * np.pi / np.outer(kk, kk)

    def kernel(u):
        tab = _u_table(bank, u, t_max)
        A = [_coeffs(tab, x) for x in deltas]
        out = np.empty((len(deltas), len(deltas)), dtype=complex)
        for i in range(len(deltas)):
            for k in range(i, len(deltas)):
                out[i, k] = _inner(tab, A[i], A[k])
                out[k, i] = np.conj(out[i, k])
        return norm * out

    total = kernel(0)
    scale = np.max(np.abs(total))
    last = []
    for u in range(1, u_max + 1):
        pw = 2.0 ** (u * deltas)
        term = (pw[:, None] + pw[None, :]) * 2.0 ** -u * kernel(u)
        total = total + term
        last.append(np.max(np.abs(term)))
        # stop once the geometric remainder is far below the tolerance
        if len(last) >= 2 and last[-1] < 1e-12 * scale and last[-1] < last[-2]:
            break
    # geometric tail from the last two terms
    a, b = (last[-2], last[-1]) if len(last) >= 2 else (np.inf, last[-1])
    r = b / a if a > 0 else 0.0
    tail = np.inf if r >= 1 else b * r / (1 - r)
    return total, tail / scale


def I_inf(delta1: float, delta2: float, bank: ComplexFilterBank, u_max: int = 10, t_max: int = 8) -> complex:
    """``I~_0 + sum_{u=1}^{u_max} (2**(u d1) + 2**(u d2)) 2**-u I~_u``."""
    total, _ = _series([delta1, delta2], bank, u_max, t_max)
    return complex(total[0, 1])


def _check_inputs(G0, d0, u_max):
    G0 = np.atleast_2d(np.asarray(G0, dtype=complex))
    d0 = np.atleast_1d(np.asarray(d0, dtype=float))
    p = len(d0)
    if G0.shape != (p, p):
        raise DomainError("G0 must be p x p with p = len(d0)")
    if u_max < 10:
        raise DomainError("u_max must be >= 10")
    if np.max(np.abs(G0 - G0.conj().T)) > 1e-8 * np.max(np.abs(G0)):
        raise DomainError("G0 must be Hermitian")
    if np.linalg.eigvalsh(0.5 * (G0 + G0.conj().T))[0] <= 0:
        raise SingularG("G0 must be positive definite")
    return G0, d0, p


def _kernel_tensor(d0, bank, u_max, t_max):
    """``I4[a, b, c, e] = I_inf(d_a + d_b, d_c + d_e)``."""
    p = len(d0)
    sums = np.add.outer(d0, d0).ravel()
    uniq, inv = np.unique(np.round(sums, 14), return_inverse=True)
    table, tail = _series(uniq, bank, u_max, t_max)
    if tail > SERIES_TOL:
        raise SeriesNotConverged(f"u-series tail estimate {tail:.2e} exceeds {SERIES_TOL:g}")
    return table[np.ix_(inv, inv)].reshape(p, p, p, p), tail


def variance_d_inf(G0, d0, u_max: int = 10, bank: ComplexFilterBank | None = None, t_max: int = 8) -> np.ndarray:
    """Limit covariance of ``sqrt(n) (d_hat - d0)``."""
    return asymptotic_variance(G0, d0, u_max, bank, t_max).Vd


def variance_G_inf(G0, d0, u_max: int = 10, bank: ComplexFilterBank | None = None, t_max: int = 8) -> np.ndarray:
    """Limit covariance of ``sqrt(n) vec(G_hat - G0)`` (row-major pairs)."""
    return asymptotic_variance(G0, d0, u_max, bank, t_max).VG


def asymptotic_variance(G0, d0, u_max: int = 10, bank: ComplexFilterBank | None = None, t_max: int = 8) -> AsymptoticVariance:
    """Both limit covariances at ``(G0, d0)``.

    Plug in ``(G_hat, d_hat)`` to obtain standard errors.

    Raises
    ------
    SeriesNotConverged
        If the estimated remainder of the u-series exceeds ``1e-6``
        relative.  The terms decay geometrically throughout the domain of
        ``K``, so this signals a numerical breakdown rather than a
        modelling choice.
    """
    from .filters import make_bank

    bank = bank or make_bank()
    G0, d0, p = _check_inputs(G0, d0, u_max)
    I4, tail = _kernel_tensor(d0, bank, u_max, t_max)
    B = np.linalg.inv(G0)
    # covariance and pseudo-covariance of vec(G_hat) for circular complex
    # coefficients; for real G they are (G.I.G)_{(a,a'),(b,b')} and
    # (G.I.G)_{(a,b'),(a',b)}
    cov = np.einsum("ac,be,acbe->abce", G0, G0.conj(), I4)
    pseudo = np.einsum("ae,cb,aecb->abce", G0, G0, I4)
    ups = np.einsum("ba,ce,abce->ac", B, B, cov) + np.einsum("ba,ec,abce->ac", B, B, pseudo)
    H = (B.T * G0).real + np.eye(p)
    Hinv = np.linalg.inv(H)
    Vd = Hinv @ ups @ Hinv / (2 * LOG2 ** 2)
    imag = float(np.max(np.abs(Vd.imag)))
    Vd = Vd.real
    Vd = 0.5 * (Vd + Vd.T)
    VG = cov.reshape(p * p, p * p)
    VG = 0.5 * (VG + VG.conj().T)
    diag = {"u_max": u_max, "t_max": t_max, "series_tail": float(tail), "imag_Vd": imag}
    return AsymptoticVariance(Vd, VG, diag)

