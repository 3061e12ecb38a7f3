"""Direct (dense-solve) power functions, Lagrange basis and Lebesgue function.

Every function takes a node set ``X`` of shape (n, d) and evaluation points
``x`` of shape (m, d) and returns one value per evaluation point. Nothing
here touches the incremental greedy state, so these routines serve as the
independent check of the engine.

Notation, with k_x = [K(x, x_j)]_j and z = (A + mu I)^{-1} k_x:

    P_n^mu(x)^2     = K(x, x) - k_x^T (A + mu I)^{-1} (A + 2 mu I) (A + mu I)^{-1} k_x
    Q_n^lam(x)^2    = K_lam(x, x) - (k_x^lam)^T (A + lam I)^{-1} k_x^lam
    Lambda(x)^2     = ||z||^2
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .kernels import KernelSpec, as_points, coincidence_mask, kernel_cross, kernel_matrix
from .linalg import NotPositiveDefinite


def _factor(spec, X, mu):
    A = kernel_matrix(spec, X)
    M = A.copy()
    M[np.diag_indices_from(M)] += mu
    try:
        return A, cho_factor(M, lower=True)
    except LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc


def _setup(spec, X, x):
    X = as_points(X, spec.dim)
    x = as_points(x, spec.dim)
    return X, x


def _sqrt_clamped(q):
    return np.sqrt(np.maximum(q, 0.0))


def power_reg2(spec: KernelSpec, X, mu: float, x) -> np.ndarray:
    """Squared power function of regularized interpolation with parameter ``mu``.

    Evaluated from the quadratic form with (A + 2 mu I) in the middle, before
    clamping.
    """
    X, x = _setup(spec, X, x)
    diag = np.full(x.shape[0], spec.phi0)
    if X.shape[0] == 0:
        return diag
    A, fac = _factor(spec, X, mu)
    kx = kernel_cross(spec, X, x)  # (n, m)
    z = cho_solve(fac, kx)
    middle = A @ z + 2.0 * mu * z
    p2 = diag - np.einsum("ij,ij->j", z, middle)
    if mu == 0:
        p2[coincidence_mask(spec, x, X).any(axis=1)] = 0.0
    return p2


def power_reg(spec: KernelSpec, X, mu: float, x) -> np.ndarray:
    """P_n^mu(x): worst-case error of regularized interpolation on the unit ball of H."""
    return _sqrt_clamped(power_reg2(spec, X, mu, x))


def power_interp(spec: KernelSpec, X, x) -> np.ndarray:
    """P_n(x) of plain interpolation, K(x, x) - k_x^T A^{-1} k_x; lambda is ignored."""
    X, x = _setup(spec, X, x)
    diag = np.full(x.shape[0], spec.phi0)
    if X.shape[0] == 0:
        return np.sqrt(diag)
    _, fac = _factor(spec, X, 0.0)
    kx = kernel_cross(spec, X, x)
    z = cho_solve(fac, kx)
    p2 = diag - np.einsum("ij,ij->j", kx, z)
    # interpolation is exact at the nodes
    p2[coincidence_mask(spec, x, X).any(axis=1)] = 0.0
    return _sqrt_clamped(p2)


def power_klambda2(spec: KernelSpec, X, x) -> np.ndarray:
    """Squared power function of K_lambda-interpolation, before clamping."""
    X, x = _setup(spec, X, x)
    diag = np.full(x.shape[0], spec.phi0 + spec.lam)
    if X.shape[0] == 0:
        return diag
    _, fac = _factor(spec, X, spec.lam)
    kx = kernel_cross(spec, X, x)
    if spec.lam > 0:
        kx = kx + spec.lam * coincidence_mask(spec, X, x)
    z = cho_solve(fac, kx)
    q2 = diag - np.einsum("ij,ij->j", kx, z)
    # interpolation in H_lambda is exact at the nodes
    q2[coincidence_mask(spec, x, X).any(axis=1)] = 0.0
    return q2


def power_klambda(spec: KernelSpec, X, x) -> np.ndarray:
    """Q_n^lambda(x), the power function of interpolation with K_lambda."""
    return _sqrt_clamped(power_klambda2(spec, X, x))


def lagrange_values(spec: KernelSpec, X, lam: float, x) -> np.ndarray:
    """Lagrange basis values l_j^lam(x), shape (m, n): rows are (A + lam I)^{-1} k_x."""
    X, x = _setup(spec, X, x)
    if X.shape[0] == 0:
        return np.zeros((x.shape[0], 0))
    _, fac = _factor(spec, X, lam)
    return cho_solve(fac, kernel_cross(spec, X, x)).T


def lebesgue2(spec: KernelSpec, X, lam: float, x) -> np.ndarray:
    """l2-Lebesgue function sqrt(k_x^T (A + lam I)^{-2} k_x)."""
    X, x = _setup(spec, X, x)
    if X.shape[0] == 0:
        return np.zeros(x.shape[0])
    A = kernel_matrix(spec, X)
    w, U = np.linalg.eigh(A)
    proj = U.T @ kernel_cross(spec, X, x)
    return np.sqrt(np.sum((proj / (w + lam)[:, None]) ** 2, axis=0))


def maximizer_ratio(spec: KernelSpec, X, mu: float, x) -> tuple[float, float]:
    """Error ratio attained by f_x = K(., x) - s_n^mu(K(., x)) and its claimed value.

    Returns ``(|f_x(x) - s_n^mu(f_x)(x)| / ||f_x||_H, P_n^mu(x))``.
    """
    X, x = _setup(spec, X, x)
    x = x[:1]
    _, fac = _factor(spec, X, mu)
    # f_x is a kernel expansion on the centers [x, X] with coefficients [1, -z]
    centers = np.vstack([x, X])
    coef = np.concatenate([[1.0], -cho_solve(fac, kernel_cross(spec, X, x)[:, 0])])
    G = kernel_cross(spec, centers, centers)
    norm = np.sqrt(max(coef @ G @ coef, 0.0))
    f_on = kernel_cross(spec, np.vstack([x, X]), centers) @ coef
    s_coef = cho_solve(fac, f_on[1:])
    err = abs(f_on[0] - kernel_cross(spec, x, X)[0] @ s_coef)
    return err / norm, float(power_reg(spec, X, mu, x)[0])


def variational_lower_bound(spec: KernelSpec, X, mu: float, x, n_trials: int = 200, rng=None) -> float:
    """Largest error ratio |f(x) - s_n^mu(f)(x)| / ||f||_H over random kernel expansions.

    Each trial draws a random expansion on the nodes, the evaluation point and
    a few extra random centers; the sup over all of H is P_n^mu(x), so the
    result must never exceed it.
    """
    rng = np.random.default_rng(rng)
    X, x = _setup(spec, X, x)
    x = x[:1]
    _, fac = _factor(spec, X, mu)
    lo, hi = X.min(axis=0), X.max(axis=0)
    best = 0.0
    for _ in range(n_trials):
        extra = rng.uniform(lo, hi, size=(3, spec.dim))
        centers = np.vstack([x, X, extra])
        coef = rng.standard_normal(centers.shape[0])
        G = kernel_cross(spec, centers, centers)
        norm = np.sqrt(max(coef @ G @ coef, 0.0))
        if norm == 0:
            continue
        coef = coef / norm
        f_nodes = kernel_cross(spec, X, centers) @ coef
        fx = kernel_cross(spec, x, centers)[0] @ coef
        sx = kernel_cross(spec, x, X)[0] @ cho_solve(fac, f_nodes)
        best = max(best, abs(fx - sx))
    return best


@dataclass
class PowerReport:
    """Power functions and Lebesgue function sampled on a set of points."""

    spec: KernelSpec
    nodes: np.ndarray
    points: np.ndarray
    P: np.ndarray
    P_lambda: np.ndarray
    Q_lambda: np.ndarray
    lebesgue: np.ndarray


def power_report(spec: KernelSpec, X, x) -> PowerReport:
    X, x = _setup(spec, X, x)
    return PowerReport(
        spec=spec,
        nodes=X,
        points=x,
        P=power_interp(spec, X, x),
        P_lambda=power_reg(spec, X, spec.lam, x),
        Q_lambda=power_klambda(spec, X, x),
        lebesgue=lebesgue2(spec, X, spec.lam, x),
    )


@dataclass
class IdentityReport:
    """Maximal violations of the power-function identities; zero means satisfied.

    Attributes
    ----------
    decomposition : float
        max |Q^2 - P^lam^2 - lam (1 + Lambda^2)| / (1 + Q^2) off the nodes.
    chain : float
        max of (P - P^lam) and (P^lam - Q) off the nodes, floored at 0.
    floor : float
        max of (lam - Q^2) off the nodes, floored at 0.
    on_nodes : float
        max of (P^lam(x_i) - sqrt(lam)) on the nodes, floored at 0.
    mu_bound : float
        max of Q^2 - P^mu^2 - lam (1 + Lambda^mu^2) over the mu grid, floored at 0.
    """

    decomposition: float
    chain: float
    floor: float
    on_nodes: float
    mu_bound: float
    tol: float = 1e-8

    def items(self):
        return {
            "decomposition": self.decomposition,
            "chain": self.chain,
            "floor": self.floor,
            "on_nodes": self.on_nodes,
            "mu_bound": self.mu_bound,
        }.items()

    @property
    def passed(self) -> bool:
        return all(v <= self.tol for _, v in self.items())


def verify_identities(spec: KernelSpec, X, lam: float, sample_points, mus=None, tol: float = 1e-8) -> IdentityReport:
    """Check the power-function identities and inequalities at ``sample_points``.

    Sample points that coincide with a node are skipped for the off-node
    checks. ``mus`` is the grid of mu < lam used for the inequality between
    Q^lam and P^mu; it defaults to {0, lam/10, lam/2}.
    """
    spec = spec.with_lambda(lam)
    X, x = _setup(spec, X, sample_points)
    off = x[~coincidence_mask(spec, x, X).any(axis=1)]
    q2 = power_klambda2(spec, X, off)
    pl2 = power_reg2(spec, X, lam, off)
    leb = lebesgue2(spec, X, lam, off)
    decomposition = np.abs(q2 - pl2 - lam * (1.0 + leb**2)) / (1.0 + q2)

    P = power_interp(spec, X, off) if spec.strictly_pd else np.zeros(off.shape[0])
    Pl = _sqrt_clamped(pl2)
    Q = _sqrt_clamped(q2)
    chain = np.maximum(P - Pl, Pl - Q)
    floor = lam - q2

    on_nodes = power_reg(spec, X, lam, X) - np.sqrt(lam)

    if mus is None:
        mus = [0.0, lam / 10, lam / 2] if lam > 0 else []
    mu_viol = [0.0]
    for mu in mus:
        if mu == 0 and not spec.strictly_pd:
            continue
        rhs = power_reg2(spec, X, mu, x) + lam * (1.0 + lebesgue2(spec, X, mu, x) ** 2)
        mu_viol.append(float(np.max(power_klambda2(spec, X, x) - rhs, initial=0.0)))

    def worst(a):
        return float(max(np.max(a, initial=0.0), 0.0))

    return IdentityReport(
        decomposition=worst(decomposition),
        chain=worst(chain),
        floor=worst(floor),
        on_nodes=worst(on_nodes),
        mu_bound=max(mu_viol),
        tol=tol,
    )


def slope_fit(trace, n_min: int, n_max: int, lam: float = 0.0) -> float:
    """Least-squares slope of log(max_power - sqrt(lam)) against log(n).

    Only records with n in [n_min, n_max] and max_power > 1.05 sqrt(lam)
    are used. ``trace`` is a RunTrace or a pair of arrays (n, max_power).
    """
    if hasattr(trace, "records"):
        n = np.array([r.n for r in trace.records], dtype=float)
        p = np.array([r.max_power for r in trace.records], dtype=float)
    else:
        n, p = (np.asarray(a, dtype=float) for a in trace)
    floor = np.sqrt(lam)
    keep = (n >= n_min) & (n <= n_max) & (p > 1.05 * floor) & (p > 0)
    if keep.sum() < 5:
        raise ValueError(f"only {int(keep.sum())} usable records in [{n_min}, {n_max}], need 5")
    slope, _ = np.polyfit(np.log(n[keep]), np.log(p[keep] - floor), 1)
    return float(slope)
