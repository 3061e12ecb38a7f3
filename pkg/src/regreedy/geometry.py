"""Candidate discretizations of the domain and fill/separation distances."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist

from .kernels import check_distinct


@dataclass(frozen=True)
class CandidateSet:
    """Finite set of candidate points, optionally with target values.

    Attributes
    ----------
    points : ndarray, shape (N, d)
    values : ndarray, shape (N,), or None
    """

    points: np.ndarray
    values: np.ndarray | None = field(default=None)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2:
            raise ValueError(f"points must be a 2-d array, got shape {pts.shape}")
        check_distinct(pts)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.values is not None:
            vals = np.array(self.values, dtype=float).reshape(-1)
            if vals.shape[0] != pts.shape[0]:
                raise ValueError(f"got {vals.shape[0]} values for {pts.shape[0]} points")
            vals.setflags(write=False)
            object.__setattr__(self, "values", vals)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    def with_values(self, values) -> CandidateSet:
        return CandidateSet(self.points, values)


def grid_interval(a: float, b: float, m: int) -> CandidateSet:
    """m equispaced points on [a, b], endpoints included."""
    if m < 2:
        raise ValueError(f"need at least 2 grid points, got {m}")
    if not a < b:
        raise ValueError(f"empty interval [{a}, {b}]")
    return CandidateSet(np.linspace(a, b, m)[:, None])


def grid_unit_ball(m: int) -> CandidateSet:
    """The m x m tensor grid on [-1, 1]^2 restricted to the closed unit disk."""
    if m < 2:
        raise ValueError(f"need at least 2 grid points per axis, got {m}")
    t = np.linspace(-1.0, 1.0, m)
    xx, yy = np.meshgrid(t, t, indexing="ij")
    pts = np.column_stack([xx.ravel(), yy.ravel()])
    pts = pts[np.sum(pts**2, axis=1) <= 1.0]
    if pts.shape[0] == 0:
        raise ValueError("empty candidate set")
    return CandidateSet(pts)


def _points(X, dim=None):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None] if dim in (None, 1) else X.reshape(-1, dim)
    return X


def fill_distance(X, omega_h) -> float:
    """Largest distance from a candidate to its nearest point of ``X``."""
    cand = omega_h.points if isinstance(omega_h, CandidateSet) else _points(omega_h)
    X = _points(X, cand.shape[1])
    if X.shape[0] == 0:
        raise ValueError("fill distance of an empty point set is undefined")
    dist, _ = cKDTree(X).query(cand, k=1)
    return float(np.max(dist))


def separation_distance(X) -> float:
    """Half of the minimal pairwise distance of ``X``."""
    X = _points(X)
    if X.shape[0] < 2:
        raise ValueError("separation distance needs at least 2 points")
    return 0.5 * float(np.min(pdist(X)))
