import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from metalens.errors import EmptyBisector, SceneError
from metalens.geometry import (
    Scene,
    bisector_conic,
    cost_gradient_inplane,
    cost_near,
    lift_weighted_points,
    phase_eval,
    polygon_area,
    separation_threshold,
    sheet_height,
    sheets_separated,
    weighted_costs,
)

from .helpers import SQUARE, make_scene

coord = st.floats(-2.0, 2.0, allow_nan=False)
point = st.tuples(coord, coord).map(np.array)


def test_cost_on_axis():
    s = make_scene([[0.0, 0.0]])
    assert cost_near([0.0, 0.0], [0.0, 0.0], s) == 2.0


def test_cost_vertical_offset_only():
    s = make_scene([[1.0, 0.0]])
    assert cost_near([1.0, 0.0], [1.0, 0.0], s) == pytest.approx(np.sqrt(2) + 1, abs=1e-15)


def test_cost_matches_high_precision():
    s = make_scene([[0.2, -0.1]])
    mpmath.mp.dps = 50
    ref = mpmath.sqrt(mpmath.mpf("0.5") ** 2 * 2 + 1) + mpmath.sqrt(
        (mpmath.mpf("0.5") - mpmath.mpf("0.2")) ** 2 + (mpmath.mpf("0.5") + mpmath.mpf("0.1")) ** 2 + 1)
    assert cost_near([0.5, 0.5], [0.2, -0.1], s) == pytest.approx(float(ref), rel=1e-15)


def test_gradient_special_values():
    s = make_scene([[0.0, 0.0]])
    np.testing.assert_array_equal(cost_gradient_inplane([0.0, 0.0], [0.0, 0.0], s), [0.0, 0.0])
    np.testing.assert_allclose(cost_gradient_inplane([1.0, 0.0], [1.0, 0.0], s), [1 / np.sqrt(2), 0.0])


def test_gradient_matches_central_differences(rng):
    s = make_scene([[0.0, 0.0]], alpha=0.7, beta=1.9)
    x = rng.uniform(-2, 2, (1000, 2))
    y = rng.uniform(-2, 2, (1000, 2))
    h = 1e-6
    fd = np.column_stack([
        (cost_near(x + h * e, y, s) - cost_near(x - h * e, y, s)) / (2 * h)
        for e in np.eye(2)
    ])
    assert np.abs(fd - cost_gradient_inplane(x, y, s)).max() < 1e-6


def test_phase_single_target():
    s = make_scene([[0.3, 0.1]])
    val, idx = phase_eval(np.array([0.2, -0.4]), s, np.array([0.7]))
    assert idx == 0
    assert val == pytest.approx(cost_near([0.2, -0.4], [0.3, 0.1], s) + 0.7)


def test_phase_tie_goes_to_lowest_index():
    s = make_scene([[-0.5, 0.0], [0.5, 0.0]])
    assert phase_eval(np.array([0.0, 0.3]), s, np.zeros(2))[1] == 0


def test_phase_matches_exhaustive_loop(rng):
    s = make_scene(rng.uniform(-1, 1, (5, 2)))
    b = rng.normal(0, 0.2, 5)
    x = rng.uniform(-1, 1, (200, 2))
    vals, idx = phase_eval(x, s, b)
    for k in range(len(x)):
        costs = [cost_near(x[k], s.targets[i], s) + b[i] for i in range(5)]
        assert idx[k] == int(np.argmin(costs))
        assert vals[k] == min(costs)


def test_phase_rejects_wrong_weight_count():
    s = make_scene([[0.0, 0.0], [0.5, 0.0]])
    with pytest.raises(ValueError):
        phase_eval(np.zeros(2), s, np.zeros(3))


@given(point, point, st.integers(0, 2**31))
def test_phase_is_2_lipschitz(x, xp, seed):
    r = np.random.default_rng(seed)
    s = make_scene(r.uniform(-1, 1, (4, 2)))
    b = r.normal(0, 0.3, 4)
    assert abs(phase_eval(x, s, b)[0] - phase_eval(xp, s, b)[0]) <= 2 * np.linalg.norm(x - xp) + 1e-12


def test_lift_examples():
    s = make_scene([[2.0, 3.0], [0.0, 0.0], [1.0, 0.0]], domain=np.array([[-3.0, -3], [3, -3], [3, 4], [-3, 4]]))
    lifted = lift_weighted_points(s, np.array([0.0, 1.0, -0.5]))
    np.testing.assert_array_equal(lifted[0].q, [2.0, 3.0, 0.0])
    assert lifted[0].omega == 0.0
    assert lifted[1].q[2] == -1.0 and lifted[1].omega == -2.0
    assert lifted[2].q[2] == 0.5 and lifted[2].omega == -0.5


@given(st.integers(0, 2**31))
def test_lift_round_trip(seed):
    r = np.random.default_rng(seed)
    s = make_scene(r.uniform(-1, 1, (6, 2)))
    b = r.normal(0, 1, 6)
    y, b2 = lift_weighted_points(s, b).recover()
    np.testing.assert_array_equal(y, s.targets)
    np.testing.assert_array_equal(b2, b)


def test_sheet_height_examples(rng):
    s = make_scene([[0.0, 0.0], [0.4, 0.2]])
    assert sheet_height(np.zeros(2), 0, s, np.zeros(2)) == 1.0
    assert sheet_height(np.zeros(2), 0, s, np.array([3.0, 0.0])) == 4.0
    x = rng.uniform(-1, 1, (50, 2))
    b = np.array([0.3, -0.2])
    X = np.sqrt((x ** 2).sum(1) + 1)
    np.testing.assert_allclose(sheet_height(x, 1, s, b), cost_near(x, s.targets[1], s) + b[1] - X, atol=1e-14)


def test_separation_coincident_projections():
    # targets 1e-12 apart behave like coincident projections
    s = make_scene([[0.0, 0.0], [1e-12, 0.0]])
    assert separation_threshold(0, 1, s) == 2.0
    assert sheets_separated(0, 1, s, np.array([0.0, 1.0]))
    assert not sheets_separated(0, 1, s, np.array([0.0, 2.0]))


def _grid_min_sum(s, i, j, n=801, half=3.0):
    xs = np.linspace(-half, half, n)
    X, Y = np.meshgrid(xs, xs)
    p = np.stack([X, Y], axis=-1)
    ri = np.sqrt(((p - s.targets[i]) ** 2).sum(-1) + s.delta ** 2)
    rj = np.sqrt(((p - s.targets[j]) ** 2).sum(-1) + s.delta ** 2)
    return (ri + rj).min(), xs[1] - xs[0]


def test_separation_matches_grid_minimum(rng):
    for _ in range(10):
        s = make_scene(rng.uniform(-1, 1, (2, 2)), beta=1 + rng.uniform(0.1, 2))
        m, h = _grid_min_sum(s, 0, 1)
        # the minimum of a 1-Lipschitz-per-axis sum lies within 2h of the grid minimum
        assert separation_threshold(0, 1, s) <= m + 1e-12
        assert m - separation_threshold(0, 1, s) <= 2 * h


def test_conic_symmetric_is_vertical_line():
    s = make_scene([[-0.5, 0.0], [0.5, 0.0]])
    c = bisector_conic(0, 1, s, np.zeros(2))
    pts = c.point(np.linspace(-2, 2, 41))
    np.testing.assert_allclose(pts[:, 0], 0.0, atol=1e-15)


def test_conic_points_have_equal_costs(rng):
    for _ in range(10):
        s = make_scene(rng.uniform(-1, 1, (2, 2)), beta=1 + rng.uniform(0.1, 2))
        d = np.linalg.norm(s.targets[0] - s.targets[1])
        b = np.array([0.0, rng.uniform(-0.95, 0.95) * d])
        c = bisector_conic(0, 1, s, b)
        p = c.point(np.linspace(-3, 3, 200))
        ci = cost_near(p, s.targets[0], s) + b[0]
        cj = cost_near(p, s.targets[1], s) + b[1]
        assert np.abs(ci - cj).max() <= 1e-9 * np.abs(ci).max()
        assert np.all(c.on_branch(p, 1e-9))
        assert np.abs(c.evaluate(p)).max() < 1e-9 * (1 + np.abs(p).max()) ** 4


def test_conic_left_side_belongs_to_first_index(rng):
    s = make_scene(rng.uniform(-1, 1, (2, 2)))
    c = bisector_conic(0, 1, s, np.array([0.0, 0.2]))
    t = np.linspace(-1, 1, 9)
    v = c.velocity(t)
    left = c.point(t) + 1e-3 * np.column_stack([-v[:, 1], v[:, 0]]) / np.linalg.norm(v, axis=1)[:, None]
    assert np.all(c.residual(left) < 0)


def test_conic_empty_when_one_cost_dominates():
    s = make_scene([[-0.5, 0.0], [0.5, 0.0]])
    with pytest.raises(EmptyBisector):
        bisector_conic(0, 1, s, np.array([0.0, 1.5]))


def test_weighted_costs_shape(rng):
    s = make_scene(rng.uniform(-1, 1, (3, 2)))
    assert weighted_costs(rng.uniform(-1, 1, (7, 2)), s, np.zeros(3)).shape == (7, 3)


@pytest.mark.parametrize("kwargs, word", [
    (dict(alpha=2.0, beta=1.0), "beta"),
    (dict(alpha=-1.0, beta=1.0), "alpha"),
])
def test_scene_rejects_bad_heights(kwargs, word):
    with pytest.raises(SceneError, match=word):
        Scene(kwargs["alpha"], kwargs["beta"], SQUARE, [[0.0, 0.0]], [1.0])


def test_scene_rejects_clockwise_domain():
    with pytest.raises(SceneError, match="counterclockwise"):
        Scene(1.0, 2.0, SQUARE[::-1], [[0.0, 0.0]], [1.0])


def test_scene_rejects_duplicate_targets():
    with pytest.raises(SceneError, match="distinct"):
        Scene(1.0, 2.0, SQUARE, [[0.0, 0.0], [0.0, 0.0]], [0.5, 0.5])


def test_scene_rejects_energy_imbalance():
    from metalens.distribution import SourceDensity

    with pytest.raises(SceneError, match="energy balance"):
        Scene(1.0, 2.0, SQUARE, [[0.0, 0.0]], [2.0], SourceDensity.constant(0.25))


def test_scene_default_source_balances_masses():
    s = Scene(1.0, 2.0, SQUARE, [[0.0, 0.0], [0.1, 0.0]], [1.0, 3.0])
    assert s.source.total_mass(SQUARE, 1.0) == pytest.approx(4.0)
    assert s.area == polygon_area(SQUARE) == 4.0
