"""Simulation of multivariate long-memory processes with known ``(d, Theta)``.

Spectral densities follow the convention
``Cov(X_t, X_{t+h}) = (1 / 2 pi) int f(lam) exp(-i lam h) dlam`` for a
process ``X_t = int exp(i lam t) dZ(lam)``.  Near the origin the
generalized spectral density behaves as
``f_lm(lam) ~ Theta_lm lam**-(d_l + d_m)`` for ``lam > 0``, with
``Theta = Omega * exp(i Phi)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve
from scipy.special import gamma

from .errors import DimensionMismatch, DomainError, InvalidD, NonPsdSigma, NonPsdSpectrum

__all__ = [
    "ModelSpec",
    "MfbmParams",
    "arfima_model",
    "mfbm_model",
    "arfima_weights",
    "sim_arfima0d0",
    "mfbm_theta",
    "mfbm_increment_spectrum",
    "sim_mfbm",
]

KINDS = ("ARFIMA0D0", "MFBM")


@dataclass(frozen=True)
class ModelSpec:
    """Ground truth of a simulated model.

    Attributes
    ----------
    d : ndarray (p,)
    Omega : ndarray (p, p)
        Magnitude of the long-run covariance.
    Phi : ndarray (p, p)
        Phase of the long-run covariance (antisymmetric).
    kind : {'ARFIMA0D0', 'MFBM'}
    beta : float
        Short-range regularity exponent, informative only.
    """

    d: np.ndarray
    Omega: np.ndarray
    Phi: np.ndarray
    kind: str = "ARFIMA0D0"
    beta: float = 2.0

    def __post_init__(self):
        d = np.atleast_1d(np.asarray(self.d, dtype=float))
        Omega = np.atleast_2d(np.asarray(self.Omega, dtype=float))
        Phi = np.atleast_2d(np.asarray(self.Phi, dtype=float))
        p = d.size
        if Omega.shape != (p, p) or Phi.shape != (p, p):
            raise DimensionMismatch("Omega and Phi must be p x p")
        if not np.allclose(Omega, Omega.T) or not np.allclose(Phi, -Phi.T):
            raise DomainError("Omega must be symmetric and Phi antisymmetric")
        if self.kind not in KINDS:
            raise DomainError(f"kind must be one of {KINDS}")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "Omega", Omega)
        object.__setattr__(self, "Phi", Phi)

    @property
    def p(self) -> int:
        return self.d.size

    @property
    def Theta(self) -> np.ndarray:
        return self.Omega * np.exp(1j * self.Phi)

    @property
    def rho(self) -> np.ndarray:
        s = np.sqrt(np.diag(self.Omega))
        return self.Omega / np.outer(s, s)


def _check_sigma(Sigma, p):
    Sigma = np.atleast_2d(np.asarray(Sigma, dtype=float))
    if Sigma.shape != (p, p):
        raise DimensionMismatch(f"Sigma must be {p} x {p}")
    if not np.allclose(Sigma, Sigma.T, atol=1e-12):
        raise NonPsdSigma("Sigma must be symmetric")
    ev = np.linalg.eigvalsh(Sigma)
    if ev[0] < -1e-10 * max(ev[-1], 1.0):
        raise NonPsdSigma("Sigma is not positive semi-definite")
    return Sigma


def _check_d(d):
    d = np.atleast_1d(np.asarray(d, dtype=float))
    if not np.all(np.isfinite(d)) or np.any(d <= -0.5):
        raise InvalidD("memory parameters must be finite and exceed -0.5")
    return d


def arfima_model(d, Sigma) -> ModelSpec:
    """Truth for ARFIMA(0, d, 0) with innovation covariance ``Sigma``.

    ``Theta = Sigma * exp(i Phi)`` with ``Phi_lm = pi (d_m - d_l) / 2``,
    which is the phase of ``(1 - exp(-i lam))**-d_l (1 - exp(i lam))**-d_m``
    as ``lam -> 0+``.
    """
    d = _check_d(d)
    Sigma = _check_sigma(Sigma, d.size)
    Phi = np.pi / 2 * (d[None, :] - d[:, None])
    return ModelSpec(d, Sigma, Phi, "ARFIMA0D0", beta=2.0)


def arfima_weights(d: float, n: int) -> np.ndarray:
    """First ``n`` MA coefficients of ``(1 - B)**-d``."""
    k = np.arange(1, n)
    return np.concatenate([[1.0], np.cumprod((k - 1 + d) / k)])


def _sqrt_psd(S):
    ev, V = np.linalg.eigh(S)
    return (V * np.sqrt(np.clip(ev, 0, None))) @ V.conj().T


def sim_arfima0d0(N: int, d, Sigma, seed=None) -> np.ndarray:
    """Simulate ``X_l = (1 - B)**-d_l u_l`` with ``u ~ iid N(0, Sigma)``.

    Components with ``d_l >= 0.5`` are obtained by integrating
    ``floor(d_l + 1/2)`` times a stationary series of memory
    ``d_l - floor(d_l + 1/2)``.  The MA(inf) filter is truncated to ``4N``
    taps and a burn-in of ``4N`` samples is discarded.

    Parameters
    ----------
    N : int
        Number of samples (>= 64).
    d : array_like (p,)
    Sigma : array_like (p, p)
    seed : int or numpy.random.SeedSequence or Generator, optional

    Returns
    -------
    ndarray (N, p)
    """
    if N < 64:
        raise DomainError("N must be at least 64")
    d = _check_d(d)
    Sigma = _check_sigma(Sigma, d.size)
    rng = np.random.default_rng(seed)
    n_filter = 4 * N
    total = N + 4 * N
    u = rng.standard_normal((total, d.size)) @ _sqrt_psd(Sigma).T
    X = np.empty((N, d.size))
    for l, dl in enumerate(d):
        D = int(np.floor(dl + 0.5))
        w = arfima_weights(dl - D, n_filter)
        y = fftconvolve(u[:, l], w)[:total][-N:]
        for _ in range(D):
            y = np.cumsum(y)
        X[:, l] = y
    return X


# ---------------------------------------------------------------------------
# multivariate fractional Brownian motion


@dataclass(frozen=True)
class MfbmParams:
    """Parameters of a multivariate fractional Brownian motion.

    Attributes
    ----------
    sigma : ndarray (p,)
        Standard deviations at time one.
    r : ndarray (p, p)
        Symmetric correlation coefficients with unit diagonal.
    eta : ndarray (p, p)
        Antisymmetric asymmetry coefficients.
    d : ndarray (p,)
        Memory parameters in (0.5, 1.5) (Hurst index ``d - 1/2``).
    """

    sigma: np.ndarray
    r: np.ndarray
    eta: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        sigma = np.atleast_1d(np.asarray(self.sigma, dtype=float))
        d = np.atleast_1d(np.asarray(self.d, dtype=float))
        p = d.size
        r = np.atleast_2d(np.asarray(self.r, dtype=float))
        eta = np.atleast_2d(np.asarray(self.eta, dtype=float))
        if sigma.shape != (p,) or r.shape != (p, p) or eta.shape != (p, p):
            raise DimensionMismatch("sigma, r, eta and d have inconsistent sizes")
        if np.any(sigma <= 0):
            raise DomainError("sigma must be positive")
        if np.any((d <= 0.5) | (d >= 1.5)):
            raise InvalidD("mFBM memory parameters must lie in (0.5, 1.5)")
        if not np.allclose(r, r.T) or np.any(np.abs(r) > 1) or not np.allclose(np.diag(r), 1):
            raise DomainError("r must be symmetric with unit diagonal and entries in [-1, 1]")
        if not np.allclose(eta, -eta.T):
            raise DomainError("eta must be antisymmetric")
        for name, val in (("sigma", sigma), ("r", r), ("eta", eta), ("d", d)):
            object.__setattr__(self, name, val)

    @classmethod
    def bivariate(cls, d, r12, eta12, sigma=(1.0, 1.0)):
        return cls(
            np.asarray(sigma, dtype=float),
            np.array([[1.0, r12], [r12, 1.0]]),
            np.array([[0.0, eta12], [-eta12, 0.0]]),
            np.asarray(d, dtype=float),
        )

    @property
    def p(self) -> int:
        return self.d.size


def mfbm_theta(params: MfbmParams):
    """Long-run magnitude and phase of the increments of an mFBM.

    With ``s = d_l + d_m``::

        Omega_lm = sigma_l sigma_m Gamma(s) (r**2 cos(pi s/2)**2 + eta**2 sin(pi s/2)**2)**0.5
        phi_lm   = atan(eta / r * tan(pi s / 2))

    and, when ``s = 2``, ``(r**2 + eta**2 pi**2 / 4)**0.5`` and
    ``atan(eta / r * pi / 2)``.

    Returns
    -------
    Omega, Phi : ndarray (p, p)
    """
    d, sig, r, eta = params.d, params.sigma, params.r, params.eta
    s = d[:, None] + d[None, :]
    at_two = np.isclose(s, 2.0, rtol=0, atol=1e-12)
    c2 = np.where(at_two, 1.0, np.cos(np.pi * s / 2) ** 2)
    s2 = np.where(at_two, np.pi ** 2 / 4, np.sin(np.pi * s / 2) ** 2)
    Omega = np.outer(sig, sig) * gamma(s) * np.sqrt(r ** 2 * c2 + eta ** 2 * s2)
    slope = np.where(at_two, np.pi / 2, np.tan(np.pi * s / 2))
    num = eta * slope
    with np.errstate(divide="ignore", invalid="ignore"):
        Phi = np.where(r != 0, np.arctan(num / np.where(r != 0, r, 1.0)), np.sign(num) * np.pi / 2)
    Phi = 0.5 * (Phi - Phi.T)
    return 0.5 * (Omega + Omega.T), Phi


def mfbm_model(params: MfbmParams) -> ModelSpec:
    Omega, Phi = mfbm_theta(params)
    return ModelSpec(params.d, Omega, Phi, "MFBM", beta=2.0)


def mfbm_increment_spectrum(lam, params: MfbmParams, t_max: int = 20):
    """Aliased cross-spectral density of the increments, shape ``(len(lam), p, p)``.

    ``sum_{|t| <= t_max} 2 Omega (1 - cos lam) |lam + 2 pi t|**-(d_l + d_m)
    exp(i sign(lam + 2 pi t) phi)``.
    """
    Omega, Phi = mfbm_theta(params)
    d = params.d
    s = d[:, None] + d[None, :]
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    out = np.zeros((lam.size, params.p, params.p), dtype=complex)
    for t in range(-t_max, t_max + 1):
        x = lam + 2 * np.pi * t
        ax = np.abs(x)[:, None, None]
        with np.errstate(divide="ignore"):
            term = ax ** (-s) * np.exp(1j * np.sign(x)[:, None, None] * Phi)
        out += np.where(ax > 0, term, 0.0)
    return 2 * Omega * (1 - np.cos(lam))[:, None, None] * out


def sim_mfbm(N: int, params: MfbmParams, seed=None, pad: int = 4, t_max: int = 20) -> np.ndarray:
    """Approximate mFBM path of length ``N`` by spectral synthesis of its increments.

    Increments are drawn on a Fourier grid ``pad`` times longer than
    ``N`` from the aliased spectral density
    (:func:`mfbm_increment_spectrum`) using a Hermitian square root per
    frequency; the first ``N`` increments are cumulated.  The method is
    exact only asymptotically.

    Raises
    ------
    NonPsdSpectrum
        If the spectral matrix is indefinite at some frequency.
    """
    if N < 256 or N & (N - 1):
        raise DomainError("N must be a power of two >= 256")
    rng = np.random.default_rng(seed)
    n = pad * N
    p = params.p
    k = np.arange(1, n // 2 + 1)
    S = mfbm_increment_spectrum(2 * np.pi * k / n, params, t_max)
    S = 0.5 * (S + np.conj(np.swapaxes(S, 1, 2)))
    ev, V = np.linalg.eigh(S)
    if np.any(ev[:, 0] < -1e-10 * np.maximum(ev[:, -1], 1e-300)):
        raise NonPsdSpectrum("increment spectral matrix is not positive semi-definite")
    A = (V * np.sqrt(np.clip(ev, 0, None))[:, None, :]) @ np.conj(np.swapaxes(V, 1, 2))
    xi = (rng.standard_normal((k.size, p)) + 1j * rng.standard_normal((k.size, p))) / np.sqrt(2)
    xi[-1] = rng.standard_normal(p)  # Nyquist bin is real
    half = np.einsum("kab,kb->ka", A, xi) / np.sqrt(n)
    half[-1] = half[-1].real
    dZ = np.zeros((n, p), dtype=complex)
    dZ[1 : n // 2 + 1] = half
    dZ[n // 2 + 1 :] = np.conj(half[:-1][::-1])
    Y = (n * np.fft.ifft(dZ, axis=0)).real[:N]
    return np.cumsum(Y, axis=0)
