"""Complex wavelet pyramid.

Two real Mallat cascades (``h`` and ``g`` trees) run side by side and the
detail outputs are combined into ``W = W_h + i W_g``.  Filters are applied
as causal sequences, which delays both trees by the same amount and so
does not affect any second-moment statistic.  Only coefficients whose
support lies entirely inside the observed samples are kept: with
``tau_j`` the causal scale-``j`` equivalent filter of length
``(2**j - 1)(T - 1) + 1``,

    W[j, k] = sum_s tau_j[2**j k - s] X[s],

for every ``k`` such that the sum only touches ``0 <= s < N``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .errors import DomainError, InputTooShort, NonFiniteInput
from .filters import ComplexFilterBank

__all__ = ["WaveletPyramid", "n_coeffs", "first_index", "pyramid", "equivalent_filter"]


def first_index(j: int, T: int) -> int:
    """Smallest ``k`` with a fully supported coefficient at scale ``j``."""
    return -((-(2 ** j - 1) * (T - 1)) // 2 ** j)


def n_coeffs(N: int, j: int, T: int) -> int:
    """Number of fully supported coefficients at scale ``j``.

    Equals ``floor((N - 1) / 2**j) - ceil((2**j - 1)(T - 1) / 2**j) + 1``
    (clipped at zero), which is ``2**-j N`` up to ``O(T)`` at fine scales.
    """
    if j < 1:
        raise DomainError("j must be >= 1")
    return max(0, (N - 1) // 2 ** j - first_index(j, T) + 1)


@dataclass(frozen=True)
class WaveletPyramid:
    """Complex wavelet coefficients of a multivariate series.

    Attributes
    ----------
    coeffs : list of ndarray
        ``coeffs[j - 1]`` has shape ``(n_j, p)``.
    N : int
        Number of samples transformed.
    bank : ComplexFilterBank
    """

    coeffs: list
    N: int
    bank: ComplexFilterBank

    @property
    def j_max(self) -> int:
        return len(self.coeffs)

    @property
    def p(self) -> int:
        return self.coeffs[0].shape[1] if self.coeffs else 0

    def W(self, j: int) -> np.ndarray:
        return self.coeffs[j - 1]

    def n(self, j: int) -> int:
        return self.coeffs[j - 1].shape[0]

    @property
    def counts(self) -> np.ndarray:
        return np.array([c.shape[0] for c in self.coeffs])


def _as_matrix(X):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise DomainError("X must be an N x p matrix")
    if not np.all(np.isfinite(X)):
        raise NonFiniteInput("X contains NaN or infinite values")
    return X


def _step(a, lo, hi, taps):
    """One filtering + decimation step on a sequence known on ``[lo, hi]``.

    Returns ``(out, new_lo, new_hi)`` with
    ``out[k - new_lo] = sum_m taps[m] a[2k - m]``.
    """
    T = len(taps)
    new_lo = -((-(lo + T - 1)) // 2)
    new_hi = hi // 2
    if new_hi < new_lo:
        return a[:0], new_lo, new_lo - 1
    full = fftconvolve(a, taps[:, None], mode="valid", axes=0)
    # full[i] sits at absolute position lo + T - 1 + i
    first = 2 * new_lo - (lo + T - 1)
    return full[first::2][: new_hi - new_lo + 1], new_lo, new_hi


def pyramid(X, bank: ComplexFilterBank, j_max: int | None = None) -> WaveletPyramid:
    """Complex wavelet pyramid of the columns of ``X``.

    Parameters
    ----------
    X : array_like, shape (N, p)
    bank : ComplexFilterBank
    j_max : int, optional
        Deepest scale; defaults to ``floor(log2 N)``.

    Returns
    -------
    WaveletPyramid
    """
    X = _as_matrix(X)
    N = X.shape[0]
    T = bank.support_length
    if N <= T:
        raise InputTooShort(f"need more than {T} samples, got {N}")
    top = int(np.floor(np.log2(N)))
    if j_max is None:
        j_max = top
    if not 1 <= j_max <= top:
        raise DomainError(f"j_max must lie in [1, {top}]")

    coeffs = []
    ah = ag = X
    lo, hi = 0, N - 1
    for _ in range(j_max):
        wh, nlo, nhi = _step(ah, lo, hi, bank.hH)
        wg, _, _ = _step(ag, lo, hi, bank.gH)
        coeffs.append(wh + 1j * wg)
        if nhi < nlo:
            ah = ag = ah[:0]
        else:
            ah, _, _ = _step(ah, lo, hi, bank.hL)
            ag, _, _ = _step(ag, lo, hi, bank.gL)
        lo, hi = nlo, nhi
    # empty levels must keep the channel dimension
    coeffs = [c if c.size else np.zeros((0, X.shape[1]), dtype=complex) for c in coeffs]
    return WaveletPyramid(coeffs, N, bank)


def _upsample(taps, factor):
    out = np.zeros((len(taps) - 1) * factor + 1)
    out[::factor] = taps
    return out


def equivalent_filter(j: int, bank: ComplexFilterBank) -> np.ndarray:
    """Causal complex taps ``tau_j`` of the scale-``j`` coefficient filter."""
    if j < 1:
        raise DomainError("j must be >= 1")
    out = []
    for low, high in ((bank.hL, bank.hH), (bank.gL, bank.gH)):
        tau = _upsample(np.asarray(high), 2 ** (j - 1))
        for i in range(j - 1):
            tau = np.convolve(tau, _upsample(np.asarray(low), 2 ** i))
        out.append(tau)
    return out[0] + 1j * out[1]
