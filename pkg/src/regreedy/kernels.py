"""Kernel families and the regularized kernel K_lambda = K + lambda * delta.

All kernels are radial, K(x, y) = phi(eps * ||x - y||_2):

* ``gaussian``: phi(r) = exp(-r^2)
* ``imq``: phi(r) = (1 + r^2)^(-1/2)
* ``wendland``: phi_{d,k}(r), compactly supported on [0, 1).

Wendland functions use the classical polynomial forms with
l = floor(d/2) + k + 1 and are not renormalized, so phi(0) equals
1, 1, 3 and 15 for k = 0, 1, 2, 3:

    k=0: (1-r)_+^l
    k=1: (1-r)_+^(l+1) [(l+1) r + 1]
    k=2: (1-r)_+^(l+2) [(l^2+4l+3) r^2 + (3l+6) r + 3]
    k=3: (1-r)_+^(l+3) [(l^3+9l^2+23l+15) r^3 + (6l^2+36l+45) r^2 + (15l+45) r + 15]
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

FAMILIES = ("gaussian", "imq", "wendland")
WENDLAND_K = (0, 1, 2, 3)


class DimensionError(ValueError):
    """Point dimension does not match the kernel dimension."""


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family, shape parameter, dimension and regularization.

    Parameters
    ----------
    family : str
        One of ``"gaussian"``, ``"imq"``, ``"wendland"``.
    shape : float
        Shape parameter eps > 0.
    dim : int
        Space dimension d >= 1.
    lam : float
        Regularization parameter lambda >= 0.
    wendland_k : int
        Smoothness index of the Wendland function, ignored otherwise.
    strictly_pd : bool
        Whether the kernel is declared strictly positive definite. All
        built-in families are; ``False`` forbids lambda = 0 in the greedy engine.
    """

    family: str = "gaussian"
    shape: float = 1.0
    dim: int = 1
    lam: float = 0.0
    wendland_k: int = 2
    strictly_pd: bool = True

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        if not (np.isfinite(self.shape) and self.shape > 0):
            raise ValueError(f"shape parameter must be positive, got {self.shape}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.dim}")
        if not (np.isfinite(self.lam) and self.lam >= 0):
            raise ValueError(f"lambda must be non-negative, got {self.lam}")
        if self.family == "wendland" and self.wendland_k not in WENDLAND_K:
            raise ValueError(f"wendland_k must be one of {WENDLAND_K}, got {self.wendland_k}")

    def with_lambda(self, lam: float) -> KernelSpec:
        return KernelSpec(self.family, self.shape, self.dim, lam, self.wendland_k, self.strictly_pd)

    @property
    def phi0(self) -> float:
        """Value of the kernel on the diagonal, K(x, x)."""
        return float(self.phi(np.zeros(1))[0])

    def phi(self, r: np.ndarray) -> np.ndarray:
        """Radial profile evaluated at scaled distances ``r = eps * ||x - y||``."""
        r = np.asarray(r, dtype=float)
        if self.family == "gaussian":
            return np.exp(-(r**2))
        if self.family == "imq":
            return 1.0 / np.sqrt(1.0 + r**2)
        return _wendland(r, self.dim, self.wendland_k)


def _wendland(r, d, k):
    l = d // 2 + k + 1
    t = np.clip(1.0 - r, 0.0, None)
    if k == 0:
        p = np.ones_like(r)
    elif k == 1:
        p = (l + 1) * r + 1
    elif k == 2:
        p = (l**2 + 4 * l + 3) * r**2 + (3 * l + 6) * r + 3
    else:
        p = (
            (l**3 + 9 * l**2 + 23 * l + 15) * r**3
            + (6 * l**2 + 36 * l + 45) * r**2
            + (15 * l + 45) * r
            + 15
        )
    out = t ** (l + k) * p
    # exact zero outside the support
    out[r >= 1.0] = 0.0
    return out


def as_points(X, dim: int) -> np.ndarray:
    """Coerce ``X`` to a float array of shape (n, dim)."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 0:
        X = X.reshape(1, 1)
    elif X.ndim == 1:
        X = X.reshape(-1, dim) if dim > 1 else X.reshape(-1, 1)
    if X.ndim != 2 or X.shape[1] != dim:
        raise DimensionError(f"expected points of dimension {dim}, got shape {X.shape}")
    return X


def _as_point(x, dim):
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != dim:
        raise DimensionError(f"expected a point of dimension {dim}, got {x.shape[0]}")
    return x


def kernel_eval(spec: KernelSpec, x, y) -> float:
    """K(x, y) for two single points."""
    x = _as_point(x, spec.dim)
    y = _as_point(y, spec.dim)
    r = spec.shape * np.sqrt(np.sum((x - y) ** 2))
    return float(spec.phi(np.array([r]))[0])


def kernel_lambda_eval(spec: KernelSpec, x, y) -> float:
    """K_lambda(x, y): adds lambda when x and y coincide coordinate-wise."""
    x = _as_point(x, spec.dim)
    y = _as_point(y, spec.dim)
    value = kernel_eval(spec, x, y)
    if np.array_equal(x, y):
        value += spec.lam
    return value


def kernel_cross(spec: KernelSpec, X, Y) -> np.ndarray:
    """Matrix [K(x_i, y_j)] of plain kernel values (never K_lambda)."""
    X = as_points(X, spec.dim)
    Y = as_points(Y, spec.dim)
    if X.shape[0] == 0 or Y.shape[0] == 0:
        return np.zeros((X.shape[0], Y.shape[0]))
    return spec.phi(spec.shape * cdist(X, Y))


def kernel_row(spec: KernelSpec, x, X) -> np.ndarray:
    """Vector [K(x, x_1), ..., K(x, x_n)] using K, not K_lambda."""
    x = _as_point(x, spec.dim)
    return kernel_cross(spec, x[None, :], X)[0]


def kernel_matrix(spec: KernelSpec, X, regularized: bool = False) -> np.ndarray:
    """Kernel matrix A of the points ``X``; ``A + lam * I`` if ``regularized``."""
    X = as_points(X, spec.dim)
    check_distinct(X)
    A = kernel_cross(spec, X, X)
    # cdist may leave tiny asymmetries; the diagonal is exactly phi(0)
    A = 0.5 * (A + A.T)
    np.fill_diagonal(A, spec.phi0)
    if regularized:
        A[np.diag_indices_from(A)] += spec.lam
    return A


def check_distinct(X: np.ndarray) -> None:
    """Raise ``ValueError`` listing the first pair of duplicate rows in ``X``."""
    if X.shape[0] < 2:
        return
    _, first, counts = np.unique(X, axis=0, return_index=True, return_counts=True)
    if np.any(counts > 1):
        dup = X[first[np.argmax(counts > 1)]]
        rows = np.flatnonzero(np.all(X == dup, axis=1))
        raise ValueError(f"duplicate points at rows {rows.tolist()}")


def coincidence_mask(spec: KernelSpec, x, X) -> np.ndarray:
    """Boolean matrix of exact coordinate-wise coincidences between x and X."""
    x = as_points(x, spec.dim)
    X = as_points(X, spec.dim)
    return np.all(x[:, None, :] == X[None, :, :], axis=2)


def kernel_lambda_cross(spec: KernelSpec, x, X) -> np.ndarray:
    """Matrix [K_lambda(x_i, X_j)]; lambda is added only on exact coincidences."""
    out = kernel_cross(spec, x, X)
    if spec.lam > 0 and out.size:
        out = out + spec.lam * coincidence_mask(spec, x, X)
    return out
