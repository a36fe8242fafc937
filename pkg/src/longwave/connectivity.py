"""Group connectivity graphs from per-subject long-memory fits.

Each subject gives a correlation matrix and a phase matrix.  An edge is
kept in a subject's graph when the long-run correlation exceeds the
threshold, and in the group graph when it is present for every subject.
Edges are classified by comparing the circular mean of the subject phases
with the reference phase ``phi*_lm = -(pi/2)(dbar_l - dbar_m)`` built from
the group-mean memory parameters: ``positive`` above ``1.1 |phi*|``,
``negative`` below ``-1.1 |phi*|``, ``neutral`` otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, DomainError
from .whittle import WhittleConfig, WhittleFit, estimate

__all__ = [
    "SubjectFit",
    "Edge",
    "GroupGraph",
    "threshold_graph",
    "group_graph",
    "fit_subject",
    "fit_subjects",
    "circular_mean",
]

MARGIN = 1.1


@dataclass(frozen=True)
class SubjectFit:
    """Estimates for one subject."""

    subject: str
    d_hat: np.ndarray
    rho_hat: np.ndarray
    phi_hat: np.ndarray

    def __post_init__(self):
        d = np.atleast_1d(np.asarray(self.d_hat, dtype=float))
        rho = np.atleast_2d(np.asarray(self.rho_hat, dtype=float))
        phi = np.atleast_2d(np.asarray(self.phi_hat, dtype=float))
        p = d.size
        if rho.shape != (p, p) or phi.shape != (p, p):
            raise DimensionMismatch("rho_hat and phi_hat must be p x p")
        object.__setattr__(self, "d_hat", d)
        object.__setattr__(self, "rho_hat", rho)
        object.__setattr__(self, "phi_hat", phi)

    @property
    def p(self) -> int:
        return self.d_hat.size

    @classmethod
    def from_fit(cls, subject: str, fit: WhittleFit) -> "SubjectFit":
        return cls(subject, fit.d_hat, fit.rho_hat, fit.Phi_hat)


@dataclass(frozen=True)
class Edge:
    l: int
    m: int
    mean_phase: float
    reference: float
    cls: str


@dataclass(frozen=True)
class GroupGraph:
    """Edges present in every subject of a group."""

    nodes: tuple
    edges: tuple
    threshold: float

    def adjacency(self) -> np.ndarray:
        A = np.zeros((len(self.nodes), len(self.nodes)), dtype=bool)
        for e in self.edges:
            A[e.l, e.m] = A[e.m, e.l] = True
        return A

    def to_dict(self) -> dict:
        return {
            "nodes": list(self.nodes),
            "threshold": self.threshold,
            "edges": [
                {"l": e.l, "m": e.m, "mean_phase": e.mean_phase, "reference": e.reference, "class": e.cls}
                for e in self.edges
            ],
        }


def threshold_graph(rho, thr: float) -> np.ndarray:
    """Boolean adjacency with an edge wherever ``rho_lm > thr`` (``l != m``)."""
    if not 0 < thr < 1:
        raise DomainError("threshold must lie in (0, 1)")
    rho = np.atleast_2d(np.asarray(rho, dtype=float))
    A = rho > thr
    A = A & A.T
    np.fill_diagonal(A, False)
    return A


def circular_mean(x, axis=0):
    """Angle of the mean unit vector."""
    return np.angle(np.mean(np.exp(1j * np.asarray(x, dtype=float)), axis=axis))


def _classify(phase, ref):
    band = MARGIN * abs(ref)
    if phase > band:
        return "positive"
    if phase < -band:
        return "negative"
    return "neutral"


def group_graph(fits, thr: float = 0.3, labels=None, per_subject_reference: bool = False) -> GroupGraph:
    """Intersection graph of a group with classified edges.

    Parameters
    ----------
    fits : sequence of SubjectFit
    thr : float
        Correlation threshold.
    labels : sequence of str, optional
        Node names; defaults to ``0..p-1``.
    per_subject_reference : bool
        Average the per-subject reference phases instead of using the
        group-mean memory parameters.
    """
    fits = list(fits)
    if not fits:
        raise DomainError("need at least one subject")
    p = fits[0].p
    if any(f.p != p for f in fits):
        raise DimensionMismatch("subjects have different numbers of channels")
    labels = tuple(str(i) for i in range(p)) if labels is None else tuple(labels)
    if len(labels) != p:
        raise DimensionMismatch("labels must have one entry per channel")
    A = np.logical_and.reduce([threshold_graph(f.rho_hat, thr) for f in fits])
    phases = np.stack([f.phi_hat for f in fits])
    dbar = np.mean([f.d_hat for f in fits], axis=0)
    edges = []
    for l in range(p):
        for m in range(l + 1, p):
            if not A[l, m]:
                continue
            mean = float(circular_mean(phases[:, l, m]))
            if per_subject_reference:
                ref = float(np.mean([-np.pi / 2 * (f.d_hat[l] - f.d_hat[m]) for f in fits]))
            else:
                ref = float(-np.pi / 2 * (dbar[l] - dbar[m]))
            edges.append(Edge(l, m, mean, ref, _classify(mean, ref)))
    return GroupGraph(labels, tuple(edges), thr)


def fit_subject(subject: str, X, cfg: WhittleConfig | None = None) -> SubjectFit:
    return SubjectFit.from_fit(subject, estimate(X, cfg))


def fit_subjects(data, cfg: WhittleConfig | None = None) -> list:
    """Fit every ``(subject, X)`` pair in ``data``."""
    return [fit_subject(s, X, cfg) for s, X in data]
