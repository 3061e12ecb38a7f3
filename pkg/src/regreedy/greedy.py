"""Greedy selection of kernel centers with incremental Newton-basis updates.

The engine runs the standard f-/P-greedy loop with the kernel
K_lambda = K + lambda*delta. The Newton basis v_k^lambda is kept as its
values on every candidate, so each iteration costs O(N n). Replacing
K_lambda by K in the final expansion gives the regularized interpolant
s_n^lambda(f) = sum_j alpha_j K(., x_j) with (A + lambda I) alpha = f|X.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .geometry import CandidateSet
from .kernels import KernelSpec, as_points, kernel_cross
from .linalg import IncrementalCholesky, NotPositiveDefinite, tri_solve

logger = logging.getLogger(__name__)

RULES = ("p-greedy", "f-greedy")
TIE_RTOL = 1e-9


class CandidatesExhausted(RuntimeError):
    """Every candidate has already been selected."""


@dataclass(frozen=True)
class GreedyConfig:
    """Stopping and selection parameters of a greedy run.

    ``power_tol`` is compared with the maximum of the squared power function,
    ``residual_tol`` with the maximum absolute residual. A tolerance of
    ``None`` is inactive.
    """

    rule: str = "p-greedy"
    max_points: int = 100
    power_tol: float | None = 1e-16
    residual_tol: float | None = None

    def __post_init__(self):
        if self.rule not in RULES:
            raise ValueError(f"rule must be one of {RULES}, got {self.rule!r}")
        if self.max_points < 1:
            raise ValueError(f"max_points must be positive, got {self.max_points}")
        for name in ("power_tol", "residual_tol"):
            tol = getattr(self, name)
            if tol is not None and not tol >= 0:
                raise ValueError(f"{name} must be non-negative, got {tol}")


@dataclass
class TraceRecord:
    n: int
    selected_index: int
    max_power: float
    max_residual: float
    fill_distance: float
    separation_distance: float
    elapsed_ms: float


@dataclass
class RunTrace:
    records: list[TraceRecord] = field(default_factory=list)
    stop_reason: str = ""

    def __len__(self):
        return len(self.records)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])


@dataclass(frozen=True)
class SurrogateModel:
    """Sparse kernel expansion s(x) = sum_j alpha_j K(x, x_j)."""

    spec: KernelSpec
    points: np.ndarray
    newton_coeffs: np.ndarray
    alpha: np.ndarray
    selection_order: tuple = ()

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def predict(self, x) -> np.ndarray:
        return predict(self, x)


class GreedyState:
    """Fit in progress on a fixed candidate set.

    Attributes
    ----------
    selected : list of int
        Candidate indices in selection order.
    chol : IncrementalCholesky
        Factor of A + lambda*I on the selected points.
    newton_values : ndarray, shape (N, n)
        v_k^lambda evaluated on all candidates.
    newton_coeffs : ndarray, shape (n,)
        Coefficients c_k of f in the Newton basis.
    residual : ndarray, shape (N,) or None
        r_n on the candidates; ``None`` when no target values are given.
    power2 : ndarray, shape (N,)
        Squared power function Q_n^lambda(x)^2 on the candidates.
    """

    def __init__(self, spec: KernelSpec, omega_h: CandidateSet, capacity: int | None = None, tie_rtol: float = TIE_RTOL):
        if len(omega_h) == 0:
            raise ValueError("empty candidate set")
        if omega_h.dim != spec.dim:
            raise ValueError(f"candidate dimension {omega_h.dim} != kernel dimension {spec.dim}")
        if spec.lam == 0 and not spec.strictly_pd:
            raise ValueError("lambda = 0 requires a strictly positive definite kernel")
        self.spec = spec
        self.omega_h = omega_h
        self.tie_rtol = tie_rtol
        N = len(omega_h)
        cap = min(N, capacity if capacity else 64)
        self.selected: list[int] = []
        self._is_selected = np.zeros(N, dtype=bool)
        self.chol = IncrementalCholesky(spec.lam, pivot_tol=1e-14 * spec.phi0, capacity=cap)
        # column-major so each Newton column is contiguous
        self._V = np.zeros((N, cap), order="F")
        self._c = np.zeros(cap)
        self.power2 = np.full(N, spec.phi0 + spec.lam)
        values = omega_h.values
        self.residual = None if values is None else np.array(values, dtype=float)
        self.degraded = False

    @property
    def n(self) -> int:
        return len(self.selected)

    @property
    def newton_values(self) -> np.ndarray:
        return self._V[:, : self.n]

    @property
    def newton_coeffs(self) -> np.ndarray:
        return self._c[: self.n]

    def _grow(self):
        cap = self._V.shape[1]
        new_cap = min(len(self.omega_h), 2 * cap)
        V = np.zeros((self._V.shape[0], new_cap), order="F")
        V[:, :cap] = self._V
        self._V = V
        c = np.zeros(new_cap)
        c[:cap] = self._c
        self._c = c

    def select_next(self, rule: str) -> int:
        """Unselected candidate maximizing |residual| or power2; lowest index on ties.

        Values within ``tie_rtol`` (relative) of the maximum count as ties, so
        that symmetric candidate sets do not resolve ties by round-off.
        """
        if self._is_selected.all():
            raise CandidatesExhausted("all candidates are selected")
        if rule == "f-greedy":
            if self.residual is None:
                raise ValueError("f-greedy needs target values")
            crit = np.abs(self.residual)
        elif rule == "p-greedy":
            crit = self.power2.copy()
        else:
            raise ValueError(f"unknown rule {rule!r}")
        crit[self._is_selected] = -np.inf
        top = crit.max()
        return int(np.argmax(crit >= top - self.tie_rtol * abs(top)))

    def update(self, idx: int) -> None:
        """Add candidate ``idx`` to the expansion and update all arrays."""
        if self._is_selected[idx]:
            raise ValueError(f"candidate {idx} is already selected")
        spec = self.spec
        n = self.n
        p2 = self.power2[idx]
        if not p2 > self.chol.pivot_tol:
            raise NotPositiveDefinite(f"power function {p2:.3e} at candidate {idx} below threshold")
        pts = self.omega_h.points
        xn = pts[idx : idx + 1]
        kcol = kernel_cross(spec, pts, xn)[:, 0]
        kcol[idx] += spec.lam
        sel = np.asarray(self.selected, dtype=np.intp)
        self.chol.append(kcol[sel], kcol[idx])

        if n == self._V.shape[1]:
            self._grow()
        if n:
            kcol -= self._V[:, :n] @ self._V[idx, :n]
        v = kcol / np.sqrt(p2)
        self._V[:, n] = v

        if self.residual is not None:
            c = self.residual[idx] / v[idx]
            self._c[n] = c
            self.residual -= c * v
            self.residual[idx] = 0.0
        self.power2 -= v**2
        np.maximum(self.power2, 0.0, out=self.power2)
        self.power2[idx] = 0.0

        self.selected.append(int(idx))
        self._is_selected[idx] = True
        if spec.lam > 0 and not self.degraded:
            free = ~self._is_selected
            if free.any() and self.power2[free].min() < spec.lam - 1e-6:
                self.degraded = True
                logger.warning(
                    "power function fell below sqrt(lambda) off the nodes at n=%d; "
                    "results may be affected by round-off",
                    self.n,
                )

    def max_power2(self) -> float:
        return float(self.power2.max())

    def max_residual(self) -> float:
        return float("nan") if self.residual is None else float(np.abs(self.residual).max())

    def to_model(self) -> SurrogateModel:
        if self.residual is None:
            raise ValueError("no target values: the state holds no interpolant")
        c = self.newton_coeffs.copy()
        alpha = newton_to_alpha(self.chol, c)
        pts = self.omega_h.points[self.selected].copy()
        return SurrogateModel(self.spec, pts, c, alpha, tuple(self.selected))


def newton_to_alpha(chol, newton_coeffs) -> np.ndarray:
    """Kernel-expansion coefficients alpha = L^{-T} c."""
    L = chol.L if isinstance(chol, IncrementalCholesky) else np.asarray(chol)
    c = np.asarray(newton_coeffs, dtype=float)
    if L.shape[0] != c.shape[0]:
        raise ValueError(f"factor of size {L.shape[0]} vs {c.shape[0]} coefficients")
    return tri_solve(L, c, transposed=True)


def select_next(state: GreedyState, rule: str) -> int:
    return state.select_next(rule)


def update_state(state: GreedyState, new_index: int) -> GreedyState:
    state.update(new_index)
    return state


def predict(model: SurrogateModel, x) -> np.ndarray:
    """Evaluate sum_j alpha_j K(x, x_j) at the rows of ``x``.

    The expansion uses K, never K_lambda, so at a node x_i the prediction is
    f(x_i) - lambda * alpha_i.
    """
    x = as_points(x, model.spec.dim)
    if model.n == 0:
        return np.zeros(x.shape[0])
    return kernel_cross(model.spec, x, model.points) @ model.alpha


class _DistanceTracker:
    """Incremental fill and separation distances of the selected points."""

    def __init__(self, points):
        self.points = points
        self.nearest = np.full(points.shape[0], np.inf)
        self.sep = np.inf
        self.chosen = []

    def add(self, idx):
        p = self.points[idx]
        if self.chosen:
            d_sel = np.sqrt(np.sum((self.points[self.chosen] - p) ** 2, axis=1))
            self.sep = min(self.sep, 0.5 * float(d_sel.min()))
        self.chosen.append(idx)
        d = np.sqrt(np.sum((self.points - p) ** 2, axis=1))
        np.minimum(self.nearest, d, out=self.nearest)
        return float(self.nearest.max()), self.sep


def run(state: GreedyState, config: GreedyConfig, track_geometry: bool = True) -> RunTrace:
    """Iterate select/update on ``state`` until a stopping condition is met."""
    trace = RunTrace()
    tracker = _DistanceTracker(state.omega_h.points) if track_geometry else None
    t0 = time.perf_counter()
    while True:
        if state.n >= config.max_points:
            trace.stop_reason = "max_points"
            break
        if state.n == len(state.omega_h):
            trace.stop_reason = "exhausted"
            break
        if config.power_tol is not None and state.max_power2() <= config.power_tol:
            trace.stop_reason = "power_tol"
            break
        if config.residual_tol is not None and state.residual is not None:
            if state.max_residual() <= config.residual_tol:
                trace.stop_reason = "residual_tol"
                break
        idx = state.select_next(config.rule)
        try:
            state.update(idx)
        except NotPositiveDefinite as exc:
            logger.info("stopping at n=%d: %s", state.n, exc)
            trace.stop_reason = "not_positive_definite"
            break
        fill, sep = tracker.add(idx) if tracker else (float("nan"), float("nan"))
        trace.records.append(
            TraceRecord(
                n=state.n,
                selected_index=idx,
                max_power=float(np.sqrt(state.max_power2())),
                max_residual=state.max_residual(),
                fill_distance=fill,
                separation_distance=sep,
                elapsed_ms=1e3 * (time.perf_counter() - t0),
            )
        )
    return trace


def fit(spec: KernelSpec, config: GreedyConfig, omega_h: CandidateSet):
    """Greedy sparse regularized interpolant of the candidate values.

    Returns
    -------
    model : SurrogateModel
    trace : RunTrace
    """
    if omega_h.values is None:
        raise ValueError("candidate set has no target values")
    state = GreedyState(spec, omega_h, capacity=min(config.max_points, len(omega_h)))
    trace = run(state, config)
    return state.to_model(), trace
