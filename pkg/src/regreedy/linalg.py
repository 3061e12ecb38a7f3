"""Incremental Cholesky factor of A + lambda*I, triangular solves, dense oracle."""

from __future__ import annotations

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, solve_triangular

from .kernels import KernelSpec, kernel_matrix


class NotPositiveDefinite(ArithmeticError):
    """Raised when a pivot falls below the positivity threshold."""


class IncrementalCholesky:
    """Lower-triangular factor L with L L^T = A + lambda*I, grown one row at a time.

    Storage is a dense square buffer whose capacity doubles when full.
    """

    def __init__(self, lam: float = 0.0, pivot_tol: float = 1e-14, capacity: int = 16):
        self.lam = lam
        self.pivot_tol = pivot_tol
        self._buf = np.zeros((max(capacity, 1),) * 2)
        self.n = 0

    @property
    def L(self) -> np.ndarray:
        return self._buf[: self.n, : self.n]

    def _grow(self):
        cap = self._buf.shape[0]
        buf = np.zeros((2 * cap, 2 * cap))
        buf[:cap, :cap] = self._buf
        self._buf = buf

    def append(self, new_row, new_diag: float) -> np.ndarray:
        """Add one point; returns the new row of L.

        ``new_row`` holds the regularized kernel values between the new point
        and the current points, ``new_diag`` is K(x, x) + lambda.
        """
        new_row = np.asarray(new_row, dtype=float).reshape(-1)
        if new_row.shape[0] != self.n:
            raise ValueError(f"expected a row of length {self.n}, got {new_row.shape[0]}")
        if self.n:
            ell = solve_triangular(self.L, new_row, lower=True, check_finite=False)
        else:
            ell = new_row
        pivot = new_diag - ell @ ell
        if not pivot > self.pivot_tol:
            raise NotPositiveDefinite(f"pivot {pivot:.3e} below threshold {self.pivot_tol:.1e} at n={self.n}")
        if self.n == self._buf.shape[0]:
            self._grow()
        self._buf[self.n, : self.n] = ell
        self._buf[self.n, self.n] = np.sqrt(pivot)
        self.n += 1
        return self._buf[self.n - 1, : self.n].copy()


def chol_append(state: IncrementalCholesky, new_row, new_diag: float) -> IncrementalCholesky:
    state.append(new_row, new_diag)
    return state


def tri_solve(L, b, transposed: bool = False) -> np.ndarray:
    """Solve ``L y = b`` (or ``L^T y = b``) for lower-triangular ``L``."""
    L = np.asarray(L, dtype=float)
    b = np.asarray(b, dtype=float)
    if L.shape[0] == 0:
        return b.copy()
    if np.any(np.diag(L) == 0):
        raise LinAlgError("singular triangular matrix: zero on the diagonal")
    return solve_triangular(L, b, lower=True, trans="T" if transposed else "N")


def solve_regularized(spec: KernelSpec, X, b) -> np.ndarray:
    """Coefficients alpha of (A + lambda*I) alpha = b by a fresh dense Cholesky."""
    M = kernel_matrix(spec, X, regularized=True)
    b = np.asarray(b, dtype=float)
    if M.shape[0] == 0:
        return np.zeros(0)
    try:
        factor = cho_factor(M, lower=True)
    except LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc
    return cho_solve(factor, b)
