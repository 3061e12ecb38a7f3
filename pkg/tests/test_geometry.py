import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regreedy.geometry import CandidateSet, fill_distance, grid_interval, grid_unit_ball, separation_distance


@pytest.mark.parametrize(
    "a,b,m,expected",
    [(0, 1, 2, [0, 1]), (0, 1, 5, [0, 0.25, 0.5, 0.75, 1]), (-1, 1, 3, [-1, 0, 1])],
)
def test_grid_interval(a, b, m, expected):
    g = grid_interval(a, b, m)
    assert g.dim == 1
    np.testing.assert_array_equal(g.points[:, 0], expected)


def test_grid_interval_too_small():
    with pytest.raises(ValueError):
        grid_interval(0, 1, 1)


def test_grid_unit_ball_m2_is_empty():
    with pytest.raises(ValueError, match="empty candidate set"):
        grid_unit_ball(2)


def test_grid_unit_ball_m3():
    pts = {tuple(p) for p in grid_unit_ball(3).points}
    assert pts == {(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)}


def test_grid_unit_ball_m160_count():
    N = len(grid_unit_ball(160))
    # lattice count vs pi/4 * m^2 = 20106
    assert abs(N - math.pi / 4 * 160**2) / N < 0.02
    assert abs(N - 20000) < 500


def test_candidate_set_validation():
    with pytest.raises(ValueError, match="duplicate"):
        CandidateSet([[0.0], [0.0]])
    with pytest.raises(ValueError):
        CandidateSet([[0.0], [1.0]], values=[1.0])
    cs = CandidateSet([0.0, 1.0], values=[1, 2])
    assert cs.dim == 1 and len(cs) == 2


def test_fill_distance_examples():
    assert fill_distance([[0.0]], [[0.0], [1.0]]) == 1.0
    assert fill_distance([[0.0], [1.0]], [[0.0], [0.5], [1.0]]) == 0.5
    g = grid_unit_ball(9)
    assert fill_distance(g.points, g) == 0.0
    with pytest.raises(ValueError):
        fill_distance(np.zeros((0, 1)), [[0.0]])


def test_separation_distance_examples(rng):
    assert separation_distance([[0.0], [1.0]]) == 0.5
    assert separation_distance([[0.0], [0.2], [1.0]]) == pytest.approx(0.1)
    with pytest.raises(ValueError):
        separation_distance([[0.0]])
    X = rng.uniform(-1, 1, (10, 2))
    brute = 0.5 * min(math.dist(a, b) for a, b in itertools.combinations(X.tolist(), 2))
    assert separation_distance(X) == pytest.approx(brute, rel=1e-14)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 80), min_size=2, max_size=15, unique=True))
def test_distances_non_increasing_when_appending(indices):
    g = grid_unit_ball(10)
    idx = [i % len(g) for i in indices]
    idx = list(dict.fromkeys(idx))
    fills = [fill_distance(g.points[idx[:k]], g) for k in range(1, len(idx) + 1)]
    assert all(b <= a for a, b in zip(fills, fills[1:]))
    if len(idx) >= 3:
        seps = [separation_distance(g.points[idx[:k]]) for k in range(2, len(idx) + 1)]
        assert all(b <= a for a, b in zip(seps, seps[1:]))


def test_fill_distance_zero_iff_all_selected():
    g = grid_interval(0, 1, 7)
    assert fill_distance(g.points, g) == 0.0
    assert fill_distance(g.points[:-1], g) > 0.0
