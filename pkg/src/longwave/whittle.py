"""Multivariate wavelet local Whittle estimation.

For memory parameters ``d`` the normalized scalogram average is

    G_hat(d) = (1/n) sum_{j0 <= j <= j1} D_j(d)^-1 I(j) D_j(d)^-1,
    D_j(d) = diag(2**(j d_l)),

and ``d`` is estimated by minimizing the profile criterion

    R(d) = log det G_hat(d) + 2 log(2) jbar sum_l d_l,
    jbar = (1/n) sum_j j n_j.

The long-run covariance follows as ``Theta_hat = pi G_hat / K(d_l + d_m)``.
The factor ``pi`` links the pyramid normalization (see
:mod:`longwave.filters`) to spectral densities normalized by
``Cov(X_t, X_{t+h}) = (1 / 2 pi) int f(lam) exp(i lam h) dlam``, so that
for ARFIMA innovations with covariance ``Sigma`` one has
``|Theta| = Sigma``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize, minimize_scalar
from scipy.special import expit, logit

from .errors import (
    DomainError,
    EmptyScales,
    OptimizerDidNotConverge,
    SingularG,
)
from .filters import ComplexFilterBank, make_bank, psi_h_hat
from .scalogram import Scalogram, scalogram
from .transform import pyramid

__all__ = [
    "WhittleConfig",
    "WhittleFit",
    "K",
    "G_hat",
    "R",
    "estimate",
    "estimate_from_scalogram",
    "default_j1",
    "THETA_SCALE",
]

log = logging.getLogger(__name__)

LOG2 = np.log(2.0)
THETA_SCALE = np.pi


# ---------------------------------------------------------------------------
# K(delta)


def _gauss_panels(edges, order):
    x, w = np.polynomial.legendre.leggauss(order)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = 0.5 * (b - a) * x + 0.5 * (b + a)
    weights = 0.5 * (b - a) * w
    return nodes.ravel(), weights.ravel()


@dataclass(frozen=True)
class _KTable:
    """Quadrature nodes and ``|psi_h_hat|**2`` samples for one bank."""

    lam: np.ndarray
    weight: np.ndarray
    psi2: np.ndarray
    lam_min: float
    c0: float  # |psi_h_hat(lam)|**2 ~ c0 lam**(2M) near zero
    octave: tuple  # (lam, weight, psi2) for the last two octaves, for the tail


@lru_cache(maxsize=16)
def _k_table(bank: ComplexFilterBank, order: int = 20, depth: int = 1) -> _KTable:
    a = np.pi / 2
    # (0, a]: substitute lam = exp(s); integrand decays like exp(s (2M + 1 - delta))
    s_lo = np.log(a) - 40.0
    s_edges = np.linspace(s_lo, np.log(a), 40 * depth + 1)
    s, ws = _gauss_panels(s_edges, order)
    lam_near = np.exp(s)
    w_near = ws * lam_near
    # [a, Lam]: uniform panels of width pi / 2
    lam_max = 4 * np.pi * 2 ** 10
    n_panel = int(round((lam_max - a) / (np.pi / 2))) * depth
    lam_far, w_far = _gauss_panels(np.linspace(a, lam_max, n_panel + 1), order)
    lam = np.concatenate([lam_near, lam_far])
    weight = np.concatenate([w_near, w_far])
    psi2 = np.abs(psi_h_hat(lam, bank)) ** 2
    lam_min = float(np.exp(s_lo))
    c0 = float(np.abs(psi_h_hat(np.array([lam_min]), bank)[0]) ** 2 / lam_min ** (2 * bank.M))
    sel = lam_far >= lam_max / 4
    octave = (lam_far[sel], w_far[sel], psi2[len(lam_near):][sel], lam_max)
    return _KTable(lam, weight, psi2, lam_min, c0, octave)


def _k_integral(delta, table: _KTable, M: int):
    body = np.sum(table.weight * table.lam ** (-delta) * table.psi2)
    head = table.c0 * table.lam_min ** (2 * M + 1 - delta) / (2 * M + 1 - delta)
    # geometric extrapolation of the last two octaves for the tail beyond lam_max
    lam, w, p2, lam_max = table.octave
    f = w * lam ** (-delta) * p2
    s1 = f[lam >= lam_max / 2].sum()
    s2 = f[lam < lam_max / 2].sum()
    tail = s1 * (s1 / s2) / (1 - s1 / s2) if 0 < s1 < s2 else 0.0
    return 4.0 * (body + head + tail)


def K(delta: float, bank: ComplexFilterBank) -> float:
    """``4 int_0^inf lam**-delta |psi_h_hat(lam)|**2 dlam``.

    Defined for ``1 - 2M < delta < 2M + 1``.  The integral is evaluated by
    composite Gauss-Legendre quadrature on nodes that are cached per bank,
    so repeated calls cost one dot product.
    """
    M = bank.M
    if not 1 - 2 * M < delta < 2 * M + 1:
        raise DomainError(f"K(delta) diverges for delta={delta} (need {1 - 2 * M} < delta < {2 * M + 1})")
    return float(_k_integral(float(delta), _k_table(bank), M))


# ---------------------------------------------------------------------------
# criterion


@dataclass(frozen=True)
class _ScaleData:
    js: np.ndarray  # scales j0..j1
    I: np.ndarray  # (J, p, p)
    counts: np.ndarray
    n: int
    jbar: float


def _scale_data(sc: Scalogram, j0: int, j1: int) -> _ScaleData:
    if not 1 <= j0 <= j1:
        raise DomainError(f"invalid scale range j0={j0}, j1={j1}")
    j1 = min(j1, len(sc.counts))
    js = np.arange(j0, j1 + 1)
    if js.size == 0:
        raise EmptyScales("no scales between j0 and j1")
    counts = sc.counts[js - 1]
    n = int(counts.sum())
    if n < 1:
        raise EmptyScales("no wavelet coefficients between j0 and j1")
    return _ScaleData(js, sc.I[js - 1], counts, n, float(np.dot(js, counts) / n))


def _g_hat(data: _ScaleData, d):
    d = np.asarray(d, dtype=float)
    scale = 2.0 ** (-np.outer(data.js, d))  # (J, p)
    w = scale[:, :, None] * scale[:, None, :]
    G = np.einsum("jlm,jlm->lm", w, data.I) / data.n
    return 0.5 * (G + G.conj().T)


def _criterion(data: _ScaleData, d):
    G = _g_hat(data, d)
    ev = np.linalg.eigvalsh(G)
    if ev[0] <= 1e-13 * max(ev[-1], np.finfo(float).tiny):
        raise SingularG("G_hat(d) is not positive definite")
    return float(np.sum(np.log(ev)) + 2 * LOG2 * data.jbar * np.sum(d))


def G_hat(sc: Scalogram, d, j0: int, j1: int) -> np.ndarray:
    """Closed-form minimizer of the Whittle contrast for fixed ``d``."""
    d = np.atleast_1d(np.asarray(d, dtype=float))
    if d.shape != (sc.p,):
        raise DomainError("d must have one entry per channel")
    return _g_hat(_scale_data(sc, j0, j1), d)


def R(d, sc: Scalogram, j0: int, j1: int) -> float:
    """Profile Whittle criterion; raises :class:`SingularG` if ``G_hat`` is singular."""
    d = np.atleast_1d(np.asarray(d, dtype=float))
    if d.shape != (sc.p,):
        raise DomainError("d must have one entry per channel")
    return _criterion(_scale_data(sc, j0, j1), d)


# ---------------------------------------------------------------------------
# estimation


@dataclass(frozen=True)
class WhittleConfig:
    """Estimation settings.

    Parameters
    ----------
    j0, j1 : int
        Finest and coarsest scales used; ``j1=None`` takes the largest
        scale with at least four coefficients.
    M, L, variant : filter selection (see :func:`longwave.filters.make_bank`).
    d_min, d_max : float
        Search box for each ``d_l``; ``d_max=None`` means ``M - 0.51``.
    xatol, fatol : float
        Nelder-Mead tolerances (``xatol`` in the logit parameterization).
    grid_size : int
        Grid used for the univariate starting values.
    """

    j0: int = 4
    j1: int | None = None
    M: int = 4
    L: int = 4
    variant: str = "cfw-c"
    d_min: float = -0.49
    d_max: float | None = None
    xatol: float = 1e-9
    fatol: float = 1e-13
    maxiter: int | None = None
    grid_size: int = 200

    def __post_init__(self):
        if self.j0 < 1 or (self.j1 is not None and self.j1 < self.j0):
            raise DomainError("need 1 <= j0 <= j1")
        if self.d_min <= -0.5:
            raise DomainError("d_min must exceed -0.5")
        if self.upper >= self.M - 0.5:
            raise DomainError("d_max must be below M - 0.5")
        if self.upper <= self.d_min:
            raise DomainError("d_max must exceed d_min")

    @property
    def upper(self) -> float:
        return self.M - 0.51 if self.d_max is None else self.d_max

    @property
    def bank(self) -> ComplexFilterBank:
        return make_bank(self.variant, self.M, self.L)


@dataclass(frozen=True)
class WhittleFit:
    """Result of :func:`estimate`."""

    d_hat: np.ndarray
    G_hat: np.ndarray
    Theta_hat: np.ndarray
    Omega_hat: np.ndarray
    Phi_hat: np.ndarray
    rho_hat: np.ndarray
    criterion: float
    n_iter: int
    n_fev: int
    converged: bool
    n: int
    counts: dict
    j0: int
    j1: int
    singular_evaluations: int = 0
    bank: ComplexFilterBank | None = field(default=None, repr=False)

    @property
    def p(self) -> int:
        return len(self.d_hat)


def default_j1(counts, minimum: int = 4) -> int:
    """Largest scale holding at least ``minimum`` coefficients."""
    ok = np.nonzero(np.asarray(counts) >= minimum)[0]
    if ok.size == 0:
        raise EmptyScales(f"no scale has {minimum} coefficients")
    return int(ok[-1] + 1)


def _univariate_start(data: _ScaleData, lo, hi, size):
    grid = np.linspace(lo, hi, size + 2)[1:-1]
    diag = data.I.diagonal(axis1=1, axis2=2).real  # (J, p)
    start = np.empty(diag.shape[1])
    for l in range(diag.shape[1]):
        col = diag[:, l]
        if not np.any(col > 0):
            raise SingularG(f"channel {l} has no wavelet energy on the selected scales")

        def r1(x):
            return np.log(np.sum(2.0 ** (-2 * data.js * x) * col) / data.n) + 2 * LOG2 * data.jbar * x

        vals = np.array([r1(x) for x in grid])
        k = int(np.argmin(vals))
        a, b = grid[max(k - 1, 0)], grid[min(k + 1, size - 1)]
        res = minimize_scalar(r1, bounds=(a, b), method="bounded", options={"xatol": 1e-10})
        start[l] = res.x if res.fun <= vals[k] else grid[k]
    return start


def estimate_from_scalogram(sc: Scalogram, cfg: WhittleConfig, bank: ComplexFilterBank | None = None) -> WhittleFit:
    """Whittle estimation from a precomputed (uncentered) scalogram."""
    if sc.centered:
        raise DomainError("the Whittle criterion needs the uncentered scalogram")
    bank = cfg.bank if bank is None else bank
    j1 = default_j1(sc.counts) if cfg.j1 is None else cfg.j1
    data = _scale_data(sc, cfg.j0, j1)
    lo, hi = cfg.d_min, cfg.upper
    width = hi - lo
    p = sc.p

    d0 = _univariate_start(data, lo, hi, cfg.grid_size)
    theta0 = logit(np.clip((d0 - lo) / width, 1e-9, 1 - 1e-9))
    singular = [0]

    def to_d(theta):
        return lo + width * expit(theta)

    def objective(theta):
        try:
            return _criterion(data, to_d(theta))
        except SingularG:
            singular[0] += 1
            return np.inf

    maxiter = cfg.maxiter or 4000 * p
    res = minimize(
        objective,
        theta0,
        method="Nelder-Mead",
        options={
            "xatol": cfg.xatol,
            "fatol": cfg.fatol,
            "maxiter": maxiter,
            "maxfev": 2 * maxiter,
            "adaptive": p > 2,
            "initial_simplex": theta0 + np.vstack([np.zeros(p), 0.05 * np.eye(p)]),
        },
    )
    d_hat = to_d(res.x)
    if not res.success or not np.isfinite(res.fun):
        raise OptimizerDidNotConverge(res.message, best=d_hat, value=float(res.fun))

    G = _g_hat(data, d_hat)
    Kmat = np.array([[K(d_hat[l] + d_hat[m], bank) for m in range(p)] for l in range(p)])
    Theta = THETA_SCALE * G / Kmat
    Theta = 0.5 * (Theta + Theta.conj().T)
    Omega = np.abs(Theta)
    Phi = np.angle(Theta)
    Phi = 0.5 * (Phi - Phi.T)
    sd = np.sqrt(np.diag(Omega))
    rho = Omega / np.outer(sd, sd)
    np.fill_diagonal(rho, 1.0)
    counts = {int(j): int(c) for j, c in zip(data.js, data.counts)}
    return WhittleFit(
        d_hat=d_hat,
        G_hat=G,
        Theta_hat=Theta,
        Omega_hat=Omega,
        Phi_hat=Phi,
        rho_hat=rho,
        criterion=float(res.fun),
        n_iter=int(res.nit),
        n_fev=int(res.nfev),
        converged=True,
        n=data.n,
        counts=counts,
        j0=cfg.j0,
        j1=int(data.js[-1]),
        singular_evaluations=singular[0],
        bank=bank,
    )


def estimate(X, cfg: WhittleConfig | None = None) -> WhittleFit:
    """Estimate ``d``, ``Theta`` and the derived magnitudes, phases and correlations.

    Parameters
    ----------
    X : array_like, shape (N, p)
    cfg : WhittleConfig, optional

    Returns
    -------
    WhittleFit
    """
    cfg = WhittleConfig() if cfg is None else cfg
    bank = cfg.bank
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    N = X.shape[0]
    if cfg.j1 is not None and N <= 2 ** cfg.j1:
        raise DomainError(f"need N > 2**j1 = {2 ** cfg.j1}")
    pyr = pyramid(X, bank)
    return estimate_from_scalogram(scalogram(pyr), cfg, bank)
