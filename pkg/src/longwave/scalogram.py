"""Per-scale second moments of a complex wavelet pyramid."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateScale, DomainError, EmptyPyramid
from .transform import WaveletPyramid

__all__ = ["Scalogram", "scalogram", "wavelet_correlation"]


@dataclass(frozen=True)
class Scalogram:
    """Hermitian matrices ``I(j)`` for scales ``1..J``.

    Attributes
    ----------
    I : ndarray, shape (J, p, p)
        ``I[j - 1]``.  Uncentered: ``sum_k W W^H``.  Centered: the sample
        covariance of the scale-``j`` coefficients (divided by ``n_j``).
    counts : ndarray of int, shape (J,)
    centered : bool
    """

    I: np.ndarray
    counts: np.ndarray
    centered: bool = False

    @property
    def scales(self) -> np.ndarray:
        return np.arange(1, len(self.counts) + 1)

    @property
    def p(self) -> int:
        return self.I.shape[1]

    def at(self, j: int) -> np.ndarray:
        return self.I[j - 1]


def scalogram(pyr: WaveletPyramid, centered: bool = False) -> Scalogram:
    """Empirical scalogram ``I(j) = sum_k W[j, k] conj(W[j, k])^T``.

    With ``centered=True`` the per-scale means are removed first and the
    result is divided by ``n_j``; this variant is meant for diagnostics.
    """
    counts = pyr.counts
    if pyr.j_max == 0 or counts.max() < 1:
        raise EmptyPyramid("no scale has a fully supported coefficient")
    p = pyr.p
    out = np.zeros((pyr.j_max, p, p), dtype=complex)
    for j in range(1, pyr.j_max + 1):
        W = pyr.W(j)
        if W.shape[0] == 0:
            continue
        if centered:
            W = W - W.mean(axis=0)
        S = W.T @ W.conj()
        S = 0.5 * (S + S.conj().T)
        out[j - 1] = S / W.shape[0] if centered else S
    return Scalogram(out, counts, centered)


def wavelet_correlation(sc: Scalogram, j: int) -> np.ndarray:
    """Complex wavelet correlation matrix at scale ``j``."""
    if not 1 <= j <= len(sc.counts):
        raise DomainError(f"scale {j} is not available")
    S = sc.at(j)
    diag = S.diagonal().real
    if np.any(diag <= 0):
        raise DegenerateScale(f"zero wavelet variance at scale {j}")
    s = np.sqrt(diag)
    C = S / np.outer(s, s)
    np.fill_diagonal(C, 1.0)
    return C
