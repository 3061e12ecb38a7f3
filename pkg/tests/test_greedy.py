import numpy as np
import pytest

from regreedy.diagnostics import lagrange_values, power_klambda2
from regreedy.geometry import CandidateSet, grid_interval, grid_unit_ball
from regreedy.greedy import (
    CandidatesExhausted,
    GreedyConfig,
    GreedyState,
    fit,
    newton_to_alpha,
    predict,
    run,
    select_next,
    update_state,
)
from regreedy.kernels import KernelSpec, kernel_cross, kernel_lambda_cross, kernel_matrix
from regreedy.linalg import IncrementalCholesky, solve_regularized


def _random_1d(rng, N=200):
    x = np.sort(rng.uniform(0, 5, N))
    return CandidateSet(x[:, None], np.sin(2 * x) + 0.1 * x**2)


def test_config_validation():
    with pytest.raises(ValueError):
        GreedyConfig(rule="x-greedy")
    with pytest.raises(ValueError):
        GreedyConfig(max_points=0)
    with pytest.raises(ValueError):
        GreedyConfig(power_tol=-1.0)


@pytest.mark.parametrize("rule", ["p-greedy", "f-greedy"])
def test_single_candidate(rule):
    spec = KernelSpec("gaussian", 1.0, 1, 0.3)
    model, trace = fit(spec, GreedyConfig(rule, 10), CandidateSet([[0.2]], [1.7]))
    assert model.n == 1
    assert model.alpha[0] == pytest.approx(1.7 / 1.3, rel=1e-15)
    assert trace.stop_reason == "exhausted"


def test_first_pgreedy_pick_is_lowest_index():
    state = GreedyState(KernelSpec("imq", 1.0, 2, 1e-3), grid_unit_ball(11))
    assert select_next(state, "p-greedy") == 0


def test_first_fgreedy_pick_is_argmax_abs_f(rng):
    cs = _random_1d(rng)
    state = GreedyState(KernelSpec("gaussian", 1.0, 1, 0.0), cs)
    assert state.select_next("f-greedy") == int(np.argmax(np.abs(cs.values)))


def test_fgreedy_without_values():
    state = GreedyState(KernelSpec("gaussian", 1.0, 1, 0.0), grid_interval(0, 1, 5))
    with pytest.raises(ValueError):
        state.select_next("f-greedy")


def test_exhausted():
    state = GreedyState(KernelSpec("gaussian", 1.0, 1, 0.1), grid_interval(0, 1, 2))
    state.update(0)
    state.update(1)
    with pytest.raises(CandidatesExhausted):
        state.select_next("p-greedy")
    s = GreedyState(KernelSpec("gaussian", 1.0, 1, 0.1), grid_interval(0, 1, 2))
    s.update(0)
    with pytest.raises(ValueError, match="already selected"):
        s.update(0)


def test_rejects_lambda_zero_for_non_strict_kernel():
    spec = KernelSpec("gaussian", 1.0, 1, 0.0, strictly_pd=False)
    with pytest.raises(ValueError):
        GreedyState(spec, grid_interval(0, 1, 3))
    GreedyState(spec.with_lambda(1e-3), grid_interval(0, 1, 3))


def test_fig1_selection_maximizes_direct_q():
    spec = KernelSpec("gaussian", 4.0, 1, 0.1)
    cs = grid_interval(0, 1, 1001)
    state = GreedyState(spec, cs)
    for node in (0.1, 0.4, 0.7, 0.8):
        update_state(state, int(np.argmin(np.abs(cs.points[:, 0] - node))))
    idx = state.select_next("p-greedy")
    q2 = power_klambda2(spec, cs.points[state.selected], cs.points)
    assert q2[idx] == pytest.approx(q2.max(), rel=1e-10)


def test_first_update_single_point_formulas(rng):
    spec = KernelSpec("gaussian", 2.0, 1, 0.25)
    cs = _random_1d(rng, 50)
    state = GreedyState(spec, cs)
    state.update(7)
    k = kernel_lambda_cross(spec, cs.points, cs.points[7:8])[:, 0]
    np.testing.assert_allclose(state.newton_values[:, 0], k / np.sqrt(1.25), rtol=1e-14)
    assert state.newton_coeffs[0] == pytest.approx(cs.values[7] / np.sqrt(1.25), rel=1e-14)


@pytest.mark.parametrize("family", ["gaussian", "imq", "wendland"])
@pytest.mark.parametrize("lam", [0.0, 1e-6, 1e-2])
def test_state_matches_direct_formulas(family, lam, rng):
    spec = KernelSpec(family, 2.0, 1, lam)
    cs = _random_1d(rng, 150)
    state = GreedyState(spec, cs)
    for _ in range(25):
        state.update(state.select_next("f-greedy"))
        X = cs.points[state.selected]
        free = np.setdiff1d(np.arange(len(cs)), state.selected)
        q2 = power_klambda2(spec, X, cs.points)
        assert np.max(np.abs(state.power2 - np.maximum(q2, 0))) <= 1e-8
        model = state.to_model()
        r = cs.values[free] - predict(model, cs.points[free])
        assert np.max(np.abs(state.residual[free] - r)) <= 1e-8
        assert np.all(state.power2[state.selected] == 0.0)
        assert np.all(np.abs(state.residual[state.selected]) <= 1e-10)
        assert np.all(state.power2 >= 0.0)


def test_residual_reproduced_from_newton_basis(rng):
    cs = _random_1d(rng)
    state = GreedyState(KernelSpec("imq", 1.5, 1, 1e-4), cs)
    run(state, GreedyConfig("f-greedy", 30))
    recomputed = cs.values - state.newton_values @ state.newton_coeffs
    assert np.max(np.abs(state.residual - recomputed)) <= 1e-8


@pytest.mark.parametrize("rule", ["p-greedy", "f-greedy"])
def test_alpha_matches_dense_oracle(rule, rng):
    spec = KernelSpec("gaussian", 1.0, 1, 1e-6)
    cs = _random_1d(rng)
    model, _ = fit(spec, GreedyConfig(rule, 20), cs)
    assert model.n == 20
    sel = list(model.selection_order)
    dense = solve_regularized(spec, cs.points[sel], cs.values[sel])
    assert np.linalg.norm(model.alpha - dense) <= 1e-8 * np.linalg.norm(dense)


def test_nested_coefficients_bitwise(rng):
    cs = _random_1d(rng)
    state = GreedyState(KernelSpec("gaussian", 1.0, 1, 1e-3), cs)
    history = []
    for _ in range(20):
        state.update(state.select_next("f-greedy"))
        history.append(state.newton_coeffs.copy())
    for prev, cur in zip(history, history[1:]):
        assert np.array_equal(cur[: len(prev)], prev)


@pytest.mark.parametrize("rule", ["p-greedy", "f-greedy"])
def test_monotone_power_and_distinct_selection(rule, rng):
    cs = grid_unit_ball(20).with_values(rng.standard_normal(len(grid_unit_ball(20))))
    model, trace = fit(KernelSpec("wendland", 1.0, 2, 1e-8), GreedyConfig(rule, 80), cs)
    p = trace.column("max_power")
    assert np.all(np.diff(p) <= 0)
    assert len(set(model.selection_order)) == model.n
    n = trace.column("n")
    assert np.all(np.diff(n) == 1)
    assert np.all(np.diff(trace.column("fill_distance")) <= 0)


def test_stopping_reasons(rng):
    cs = _random_1d(rng)
    spec = KernelSpec("gaussian", 1.0, 1, 1e-3)
    assert fit(spec, GreedyConfig("p-greedy", 5), cs)[1].stop_reason == "max_points"
    _, t = fit(spec, GreedyConfig("f-greedy", 200, power_tol=None, residual_tol=0.05), cs)
    assert t.stop_reason == "residual_tol" and t.records[-1].max_residual <= 0.05
    _, t = fit(spec, GreedyConfig("p-greedy", 200, power_tol=spec.lam * 1.5), cs)
    assert t.stop_reason == "power_tol"
    _, t = fit(spec.with_lambda(0.0), GreedyConfig("p-greedy", 200), cs)
    assert t.stop_reason in ("not_positive_definite", "power_tol")


def test_predict_identities(rng):
    spec = KernelSpec("gaussian", 1.0, 1, 1.0)
    model, _ = fit(spec, GreedyConfig("p-greedy", 1), CandidateSet([[0.5]], [2.0]))
    assert model.alpha[0] == pytest.approx(1.0)
    assert predict(model, [[0.5]])[0] == pytest.approx(1.0)

    cs = _random_1d(rng, 60)
    for lam in (0.0, 1e-3):
        model, _ = fit(spec.with_lambda(lam), GreedyConfig("f-greedy", 15), cs)
        sel = list(model.selection_order)
        fx = cs.values[sel]
        np.testing.assert_allclose(predict(model, model.points) + lam * model.alpha, fx, atol=1e-8)
        if lam == 0:
            np.testing.assert_allclose(predict(model, model.points), fx, atol=1e-9)
        x = rng.uniform(0, 5, (100, 1))
        dense = kernel_cross(model.spec, x, model.points) @ solve_regularized(model.spec, model.points, fx)
        np.testing.assert_allclose(predict(model, x), dense, atol=1e-10 * max(1, np.abs(dense).max()))
        via_lagrange = lagrange_values(model.spec, model.points, lam, x) @ fx
        np.testing.assert_allclose(predict(model, x), via_lagrange, atol=1e-9)


def test_predict_dimension_mismatch(rng):
    model, _ = fit(KernelSpec("gaussian", 1.0, 1, 0.1), GreedyConfig("p-greedy", 3), _random_1d(rng, 10))
    with pytest.raises(ValueError):
        predict(model, np.zeros((2, 2)))


def test_newton_to_alpha():
    assert newton_to_alpha(np.array([[2.0]]), [3.0])[0] == 1.5
    np.testing.assert_array_equal(newton_to_alpha(np.eye(4), [1.0, 2.0, 3.0, 4.0]), [1, 2, 3, 4])
    with pytest.raises(ValueError):
        newton_to_alpha(np.eye(2), [1.0])


def test_newton_to_alpha_solves_system(rng):
    spec = KernelSpec("imq", 1.0, 2, 1e-2)
    X = rng.uniform(-1, 1, (10, 2))
    b = rng.standard_normal(10)
    M = kernel_matrix(spec, X, regularized=True)
    ch = IncrementalCholesky(spec.lam)
    for k in range(10):
        ch.append(M[k, :k], M[k, k])
    c = np.linalg.solve(ch.L, b)
    alpha = newton_to_alpha(ch, c)
    assert np.max(np.abs(M @ alpha - b)) <= 1e-9 * np.abs(b).max()
