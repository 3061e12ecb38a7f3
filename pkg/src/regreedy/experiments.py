"""Power-function decay and power-report experiments behind the CLI."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .diagnostics import power_report, verify_identities
from .geometry import grid_interval, grid_unit_ball
from .greedy import GreedyConfig, GreedyState, run
from .kernels import KernelSpec
from .surrogate_io import _csv_text, _write_text, fmt, write_power_report_csv

logger = logging.getLogger(__name__)

DEFAULT_LAMBDAS = (1e-14, 1e-12, 1e-10, 1e-8, 1e-6)
FIG1_NODES = (0.1, 0.4, 0.7, 0.8)


@dataclass
class ExperimentConfig:
    family: str = "wendland"
    eps: float = 1.0
    wendland_k: int = 2
    lambdas: tuple = DEFAULT_LAMBDAS
    grid_ball: int | None = 160
    grid_interval: tuple | None = None
    rule: str = "p-greedy"
    max_points: int = 1000
    power_tol: float = 1e-16
    out: str = "."
    threads: int = 1
    test_function: str = "exp-sq"

    def __post_init__(self):
        self.lambdas = tuple(float(v) for v in self.lambdas)
        if not self.lambdas:
            raise ValueError("lambda list is empty")
        if any(not v >= 0 for v in self.lambdas):
            raise ValueError("all lambdas must be non-negative")

    def candidates(self):
        if self.grid_interval is not None:
            a, b, m = self.grid_interval
            return grid_interval(float(a), float(b), int(m))
        return grid_unit_ball(int(self.grid_ball))

    def spec(self, dim: int, lam: float) -> KernelSpec:
        return KernelSpec(self.family, self.eps, dim, lam, self.wendland_k)


def lambda_tag(lam: float) -> str:
    return "0" if lam == 0 else f"{lam:g}"


@dataclass
class DecayCurve:
    lam: float
    max_power: np.ndarray  # entry n is the sup-norm after n selections
    selected: list = field(default_factory=list)
    stop_reason: str = ""


TEST_FUNCTIONS = {
    "exp-sq": lambda x: np.exp(-np.sum(x**2, axis=1)),
}


def decay_curve(spec: KernelSpec, omega_h, max_points: int, power_tol, rule: str = "p-greedy", values=None) -> DecayCurve:
    """Greedy run recording the sup-norm of Q_n^lambda on the candidates.

    P-greedy needs no target values; f-greedy takes them from ``values``.
    """
    state = GreedyState(spec, omega_h.with_values(values), capacity=min(max_points, len(omega_h)))
    trace = run(state, GreedyConfig(rule, max_points, power_tol), track_geometry=False)
    curve = np.concatenate([[np.sqrt(spec.phi0 + spec.lam)], trace.column("max_power")])
    return DecayCurve(spec.lam, curve, state.selected, trace.stop_reason)


def c_lambda(q_curve, p_curve, lam: float) -> tuple[float, int]:
    """Smallest c with ||Q_n|| <= c (||P_n|| + sqrt(lam)) for n = 1..common length."""
    n_common = min(len(q_curve), len(p_curve)) - 1
    if n_common < 1:
        raise ValueError("no common iterations")
    q = np.asarray(q_curve[1 : n_common + 1])
    p = np.asarray(p_curve[1 : n_common + 1])
    return float(np.max(q / (p + np.sqrt(lam)))), n_common


def decay_experiment(config: ExperimentConfig, write: bool = True) -> dict:
    """Run the baseline lambda = 0 and every lambda of the config.

    Writes ``decay_<lambda>.csv`` (n, max_power), ``bound_<lambda>.csv``
    (n, c_lambda (||P_n|| + sqrt(lambda))) and ``coefficients.csv``.
    """
    omega_h = config.candidates()
    lambdas = [0.0] + [lam for lam in config.lambdas if lam != 0]

    def one(lam):
        spec = config.spec(omega_h.dim, lam)
        return decay_curve(spec, omega_h, config.max_points, config.power_tol, config.rule, values)

    values = None
    if config.rule == "f-greedy":
        values = TEST_FUNCTIONS[config.test_function](omega_h.points)

    with ThreadPoolExecutor(max_workers=max(1, config.threads)) as pool:
        curves = dict(zip(lambdas, pool.map(one, lambdas)))

    base = curves[0.0]
    if len(base.max_power) < 2:
        raise RuntimeError("baseline lambda = 0 run selected no points")
    coeffs = {}
    for lam in lambdas[1:]:
        coeffs[lam] = c_lambda(curves[lam].max_power, base.max_power, lam)

    if write:
        out = Path(config.out)
        out.mkdir(parents=True, exist_ok=True)
        for lam, curve in curves.items():
            rows = [[str(n), fmt(v)] for n, v in enumerate(curve.max_power)]
            _write_text(out / f"decay_{lambda_tag(lam)}.csv", _csv_text(["n", "max_power"], rows))
        for lam, (c, n_common) in coeffs.items():
            bound = c * (base.max_power[: n_common + 1] + np.sqrt(lam))
            rows = [[str(n), fmt(v)] for n, v in enumerate(bound)]
            _write_text(out / f"bound_{lambda_tag(lam)}.csv", _csv_text(["n", "bound"], rows))
        rows = [[fmt(lam), fmt(c), str(n)] for lam, (c, n) in coeffs.items()]
        _write_text(out / "coefficients.csv", _csv_text(["lambda", "c_lambda", "n_common"], rows))
    return {"curves": curves, "coefficients": coeffs}


def powerfun_experiment(
    family: str = "gaussian",
    eps: float = 4.0,
    lam: float = 0.1,
    nodes=FIG1_NODES,
    interval=(0.0, 1.0, 1001),
    wendland_k: int = 2,
    out: str | None = None,
):
    """Power functions of a fixed 1-d node set on a fine interval grid.

    The grid always contains the nodes themselves. Returns the report and the
    identity check; writes ``power_report.csv`` with a pass/fail footer when
    ``out`` is given.
    """
    a, b, m = interval
    nodes = np.asarray(nodes, dtype=float).reshape(-1)
    if np.any(nodes < a) or np.any(nodes > b):
        raise ValueError(f"nodes must lie in [{a}, {b}]")
    x = np.union1d(grid_interval(a, b, int(m)).points[:, 0], nodes)[:, None]
    spec = KernelSpec(family, eps, 1, lam, wendland_k)
    report = power_report(spec, nodes[:, None], x)
    check = verify_identities(spec, nodes[:, None], lam, x)
    if out is not None:
        footer = [f"{name}: max violation {fmt(v)} {'PASS' if v <= check.tol else 'FAIL'}" for name, v in check.items()]
        path = Path(out)
        path.mkdir(parents=True, exist_ok=True)
        write_power_report_csv(report, path / "power_report.csv", footer)
    return report, check
