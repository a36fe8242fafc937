"""Replication harness for bias, std and RMSE tables.

Each replication simulates a series with a seed derived from
``(seed, rep)``, estimates it, and stores the parameters of interest.
Replications whose optimizer fails are counted and left out.  Phases are
aggregated on the circle: errors are wrapped into ``(-pi, pi]`` before the
moments are taken.
"""

from __future__ import annotations

import csv
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import AllReplicationsFailed, DomainError, NumericalError
from .simulate import MfbmParams, ModelSpec, arfima_model, mfbm_model, sim_arfima0d0, sim_mfbm
from .whittle import WhittleConfig, estimate

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = ["McScenario", "McRow", "McReport", "run_mc", "load_scenario", "wrap_phase", "worker_count"]

log = logging.getLogger(__name__)

MODELS = ("arfima", "mfbm")


def wrap_phase(x):
    """Map angles into ``(-pi, pi]``."""
    x = np.asarray(x, dtype=float)
    return np.pi - np.mod(np.pi - x, 2 * np.pi)


def worker_count() -> int:
    """Worker processes allowed by ``LONGWAVE_THREADS`` (default 1)."""
    raw = os.environ.get("LONGWAVE_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise DomainError(f"LONGWAVE_THREADS must be an integer, got {raw!r}") from None


@dataclass(frozen=True)
class McScenario:
    """One Monte Carlo experiment.

    Attributes
    ----------
    model : {'arfima', 'mfbm'}
    d : tuple of float
    N : int
        Sample size, a power of two.
    reps : int
    sigma : tuple of tuple, optional
        ARFIMA innovation covariance; defaults to the identity.
    r, eta : tuple of tuple, optional
        mFBM coefficient matrices.
    scale : tuple of float, optional
        mFBM standard deviations at time one.
    M, L, variant : filter selection.
    j0, j1 : scale range (``j1=None`` picks the default).
    seed : int
    params : tuple of str
        Any of ``'d'``, ``'Omega'``, ``'rho'``, ``'phi'``.
    """

    model: str = "arfima"
    d: tuple = (0.2, 0.2)
    N: int = 4096
    reps: int = 100
    sigma: tuple | None = None
    r: tuple | None = None
    eta: tuple | None = None
    scale: tuple | None = None
    M: int = 4
    L: int = 4
    variant: str = "cfw-c"
    j0: int = 4
    j1: int | None = None
    seed: int = 0
    params: tuple = ("d", "Omega", "rho", "phi")

    def __post_init__(self):
        if self.model not in MODELS:
            raise DomainError(f"model must be one of {MODELS}")
        if self.reps < 1:
            raise DomainError("reps must be >= 1")
        if self.N < 2 or self.N & (self.N - 1):
            raise DomainError("N must be a power of two")
        if not 0 <= self.seed < 2 ** 64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "d", tuple(float(x) for x in np.atleast_1d(self.d)))
        object.__setattr__(self, "params", tuple(self.params))
        bad = set(self.params) - {"d", "Omega", "rho", "phi"}
        if bad:
            raise DomainError(f"unknown parameters {sorted(bad)}")

    @property
    def p(self) -> int:
        return len(self.d)

    @property
    def config(self) -> WhittleConfig:
        return WhittleConfig(j0=self.j0, j1=self.j1, M=self.M, L=self.L, variant=self.variant)

    def truth(self) -> ModelSpec:
        if self.model == "arfima":
            return arfima_model(self.d, self._sigma())
        return mfbm_model(self._mfbm())

    def _sigma(self):
        return np.eye(self.p) if self.sigma is None else np.asarray(self.sigma, dtype=float)

    def _mfbm(self) -> MfbmParams:
        p = self.p
        r = np.eye(p) if self.r is None else np.asarray(self.r, dtype=float)
        eta = np.zeros((p, p)) if self.eta is None else np.asarray(self.eta, dtype=float)
        sc = np.ones(p) if self.scale is None else np.asarray(self.scale, dtype=float)
        return MfbmParams(sc, r, eta, np.asarray(self.d))

    def simulate(self, rep: int) -> np.ndarray:
        seed = np.random.SeedSequence([self.seed, rep])
        if self.model == "arfima":
            return sim_arfima0d0(self.N, self.d, self._sigma(), seed)
        return sim_mfbm(self.N, self._mfbm(), seed)


@dataclass(frozen=True)
class McRow:
    name: str
    true: float
    bias: float
    std: float
    rmse: float
    mean: float


@dataclass
class McReport:
    """Aggregated replication results."""

    rows: list
    reps: int
    failures: int
    runtime: float
    scenario: McScenario
    estimates: np.ndarray = field(repr=False, default=None)

    @property
    def failure_rate(self) -> float:
        return self.failures / self.reps

    def row(self, name: str) -> McRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["parameter", "true", "mean", "bias", "std", "rmse"])
            for r in self.rows:
                w.writerow([r.name] + [f"{v:.17g}" for v in (r.true, r.mean, r.bias, r.std, r.rmse)])

    def to_dict(self) -> dict:
        return {
            "rows": [asdict(r) for r in self.rows],
            "reps": self.reps,
            "failures": self.failures,
            "runtime": self.runtime,
        }


def _names(sc: McScenario):
    """Parameter names with their truth extractors and circular flags."""
    p = sc.p
    pairs = [(l, m) for l in range(p) for m in range(l + 1, p)]
    out = []
    if "d" in sc.params:
        out += [(f"d{l + 1}", ("d", l, l), False) for l in range(p)]
    if "Omega" in sc.params:
        out += [(f"Omega{l + 1}{m + 1}", ("Omega", l, m), False) for l in range(p) for m in range(l, p)]
    if "rho" in sc.params:
        out += [(f"rho{l + 1}{m + 1}", ("rho", l, m), False) for l, m in pairs]
    if "phi" in sc.params:
        out += [(f"phi{l + 1}{m + 1}", ("Phi", l, m), True) for l, m in pairs]
    return out


def _extract(obj, key):
    kind, l, m = key
    if kind == "d":
        return obj.d[l] if hasattr(obj, "d") else obj.d_hat[l]
    attr = {"Omega": ("Omega", "Omega_hat"), "rho": ("rho", "rho_hat"), "Phi": ("Phi", "Phi_hat")}[kind]
    return getattr(obj, attr[0] if hasattr(obj, attr[0]) else attr[1])[l, m]


def _one(args):
    sc, rep = args
    try:
        fit = estimate(sc.simulate(rep), sc.config)
    except NumericalError as exc:
        log.info("replication %d failed: %s", rep, exc)
        return None
    return np.array([_extract(fit, key) for _, key, _ in _names(sc)])


def _aggregate(name, truth, values, circular):
    err = wrap_phase(values - truth) if circular else values - truth
    bias = float(np.mean(err))
    std = float(np.std(err))
    rmse = float(np.sqrt(bias ** 2 + std ** 2))
    return McRow(name, float(truth), bias, std, rmse, float(truth + bias))


def run_mc(sc: McScenario, workers: int | None = None) -> McReport:
    """Run every replication of ``sc`` and aggregate.

    Parameters
    ----------
    sc : McScenario
    workers : int, optional
        Process count; defaults to :func:`worker_count`.  The result does
        not depend on it.

    Raises
    ------
    AllReplicationsFailed
    """
    start = time.perf_counter()
    workers = worker_count() if workers is None else max(1, workers)
    jobs = [(sc, rep) for rep in range(sc.reps)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_one, jobs, chunksize=max(1, sc.reps // (4 * workers))))
    else:
        results = [_one(job) for job in jobs]
    ok = [r for r in results if r is not None]
    if not ok:
        raise AllReplicationsFailed(f"all {sc.reps} replications failed")
    est = np.vstack(ok)
    truth = sc.truth()
    rows = [
        _aggregate(name, _extract(truth, key), est[:, i], circ)
        for i, (name, key, circ) in enumerate(_names(sc))
    ]
    return McReport(rows, sc.reps, sc.reps - len(ok), time.perf_counter() - start, sc, est)


def _tupled(x):
    if isinstance(x, list):
        return tuple(_tupled(v) for v in x)
    return x


def load_scenario(path) -> McScenario:
    """Read a scenario from a ``.toml`` or ``.json`` file.

    Keys mirror the :class:`McScenario` fields; ``rho`` may be given
    instead of ``sigma`` for a bivariate ARFIMA with unit variances.
    """
    path = str(path)
    if path.endswith(".toml"):
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    elif path.endswith(".json"):
        with open(path) as fh:
            raw = json.load(fh)
    else:
        raise DomainError("scenario files must end in .toml or .json")
    raw = dict(raw.get("scenario", raw))
    if "rho" in raw:
        rho = float(raw.pop("rho"))
        raw["sigma"] = [[1.0, rho], [rho, 1.0]]
    known = set(McScenario.__dataclass_fields__)
    extra = set(raw) - known
    if extra:
        raise DomainError(f"unknown scenario keys {sorted(extra)}")
    return McScenario(**{k: _tupled(v) for k, v in raw.items()})
