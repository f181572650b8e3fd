import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from metalens.cells import (
    DomainArc,
    InteriorArc,
    argmin_labels,
    boundary_arcs,
    check_lift_condition,
    classify,
    grid_cells,
    laguerre_via_lifting,
    lifting_bounds,
    power_cell,
)
from metalens.distribution import refracted_distribution
from metalens.errors import LiftConditionViolated, OutsideDomain
from metalens.geometry import cost_near, lift_weighted_points, separation_threshold, weighted_costs
from metalens.presets import gaussian_scene

from .helpers import admissible_b, jittered_grid, make_scene

seeds = st.integers(0, 2**31)


def test_classify_single_target(rng):
    s = make_scene([[0.3, 0.3]])
    assert np.all(classify(rng.uniform(-1, 1, (100, 2)), s, np.zeros(1)) == 0)


def test_classify_projection_with_zero_weights(rng):
    s = make_scene(rng.uniform(-0.9, 0.9, (12, 2)))
    np.testing.assert_array_equal(classify(s.targets, s, np.zeros(12)), np.arange(12))


def test_classify_matches_exhaustive(rng):
    s = make_scene(rng.uniform(-1, 1, (10, 2)))
    b = rng.normal(0, 0.1, 10)
    x = rng.uniform(-1, 1, (300, 2))
    ref = [int(np.argmin([cost_near(p, y, s) + bi for y, bi in zip(s.targets, b)])) for p in x]
    np.testing.assert_array_equal(classify(x, s, b), ref)


def test_classify_scalar_and_outside():
    s = make_scene([[0.0, 0.0], [0.5, 0.0]])
    assert classify(np.array([0.6, 0.0]), s, np.zeros(2)) == 1
    with pytest.raises(OutsideDomain):
        classify(np.array([[0.0, 0.0], [1.5, 0.0]]), s, np.zeros(2))


def test_grid_single_target():
    g = grid_cells(make_scene([[0.1, 0.1]]), np.zeros(1), 64)
    assert np.all(g.labels == 0)


def test_grid_mirror_symmetric():
    s = make_scene([[-0.4, 0.1], [0.4, 0.1]])
    lab = grid_cells(s, np.zeros(2), 64).labels
    np.testing.assert_array_equal(lab[:, ::-1], 1 - lab)


def test_grid_fractions_match_masses():
    s = gaussian_scene(5)
    res = 512
    frac = grid_cells(s, np.zeros(25), res).counts(25) / res ** 2
    G = refracted_distribution(s, np.zeros(25)).G
    assert np.abs(frac - G / G.sum()).max() < 4.0 / res


def test_lift_condition_examples():
    s = make_scene([[0.0, 0.0], [1e-12, 0.0], [0.5, 0.5]])
    assert check_lift_condition(s, np.full(3, 7.0))
    assert not check_lift_condition(s, np.array([0.0, 2.0, 0.0]))


@given(seeds)
def test_nonempty_cells_imply_lift_condition(seed):
    r = np.random.default_rng(seed)
    s = make_scene(r.uniform(-1, 1, (6, 2)))
    b = r.normal(0, 1.0, 6)
    if np.all(grid_cells(s, b, 64).counts(6) > 0):
        assert check_lift_condition(s, b)


def test_violated_separation_empties_cell(rng):
    s = make_scene(rng.uniform(-0.8, 0.8, (4, 2)))
    b = np.zeros(4)
    b[2] = separation_threshold(0, 2, s) + 1e-9
    labels = argmin_labels(rng.uniform(-1, 1, (20000, 2)), s, b)
    assert not np.any(labels == 2)
    with pytest.raises(LiftConditionViolated):
        boundary_arcs(s, b)


def _power_box(lifted):
    return ((-2.0, -2.0, -5.0), (2.0, 2.0, 5.0))


def test_power_cell_single_point_is_box():
    s = make_scene([[0.0, 0.0]])
    p = power_cell(0, lift_weighted_points(s, np.zeros(1)), _power_box(None))
    assert p.volume() == pytest.approx(4 * 4 * 10)


def test_power_cell_symmetric_pair_halves_box():
    s = make_scene([[-0.5, 0.0], [0.5, 0.0]])
    lifted = lift_weighted_points(s, np.array([0.2, 0.2]))
    p = power_cell(0, lifted, _power_box(lifted))
    assert p.volume() == pytest.approx(80.0)
    assert np.all(p.vertices[:, 0] <= 1e-12)


def test_power_cell_inequalities(rng):
    s = make_scene(rng.uniform(-1, 1, (8, 2)))
    b = rng.normal(0, 0.3, 8)
    lifted = lift_weighted_points(s, b)
    q, w = lifted.q, lifted.omega
    for i in range(8):
        p = power_cell(i, lifted, _power_box(lifted))
        if p.is_empty:
            continue
        v = p.vertices
        pd = ((v[:, None, :] - q[None]) ** 2).sum(-1) + w
        assert np.all(pd[:, i] <= pd.min(axis=1) + 1e-9)
        lam = rng.dirichlet(np.ones(len(v)), 200)
        inner = lam @ v
        pd = ((inner[:, None, :] - q[None]) ** 2).sum(-1) + w
        assert np.all(np.argmin(pd, axis=1) == i)
        assert p.is_closed()


def test_lifting_contains_projection_at_zero_weights(rng):
    s = make_scene(rng.uniform(-0.9, 0.9, (9, 2)))
    for i in range(9):
        assert laguerre_via_lifting(i, s, np.zeros(9)).contains(s.targets[i][None])[0]


def test_lifting_symmetric_pair_mirror_images():
    s = make_scene([[-0.4, 0.2], [0.4, 0.2]])
    c0 = laguerre_via_lifting(0, s, np.zeros(2))
    c1 = laguerre_via_lifting(1, s, np.zeros(2))
    assert c0.area == pytest.approx(c1.area, abs=1e-13)
    x = np.random.default_rng(3).uniform(-1, 1, (500, 2))
    np.testing.assert_array_equal(c0.contains(x), c1.contains(x * [-1, 1]))


def test_lifting_agrees_with_grid_oracle(rng):
    s = make_scene(jittered_grid(rng, 5))
    b = admissible_b(rng, s)
    d = boundary_arcs(s, b)
    x = rng.uniform(-1, 1, (100_000, 2))
    lab, ref = d.label(x), argmin_labels(x, s, b)
    bad = lab != ref
    assert bad.mean() < 1e-3
    if bad.any():
        assert d.distance_to_boundary(x[bad]).max() <= 2 * s.arc_tol


def test_single_cell_is_domain():
    d = boundary_arcs(make_scene([[0.2, -0.1]]), np.zeros(1))
    arcs = d.cells[0].arcs
    assert all(isinstance(a, DomainArc) for a in arcs)
    assert len(arcs) == 4
    assert d.areas[0] == pytest.approx(4.0, abs=1e-14)


def test_symmetric_pair_single_straight_arc():
    d = boundary_arcs(make_scene([[-0.5, 0.0], [0.5, 0.0]]), np.zeros(2))
    arcs = list(d.interior_arcs())
    assert len(arcs) == 2  # one per side
    for a in arcs:
        pts = a.polyline(1e-4)
        np.testing.assert_allclose(pts[:, 0], 0.0, atol=1e-12)
        assert sorted([a.start[1], a.end[1]]) == pytest.approx([-1.0, 1.0])
    np.testing.assert_allclose(d.areas, [2.0, 2.0], atol=1e-13)


def test_arc_endpoints_are_triple_points_or_on_boundary(rng):
    s = make_scene(jittered_grid(rng, 5))
    b = admissible_b(rng, s)
    d = boundary_arcs(s, b)
    tol = 1e-9 * 10
    for a in d.interior_arcs():
        for p in (a.start, a.end):
            on_edge = np.abs(np.abs(p) - 1.0).min() < tol
            if on_edge:
                continue
            v = weighted_costs(p, s, b)
            k = np.argsort(v)[:3]
            assert v[k[2]] - v[k[0]] < tol


def test_arc_points_are_consistent(rng):
    s = make_scene(jittered_grid(rng, 4))
    b = admissible_b(rng, s)
    d = boundary_arcs(s, b)
    for a in d.interior_arcs():
        p = a.polyline(s.arc_tol)
        v = weighted_costs(p, s, b)
        assert np.abs(v[:, a.cell] - v[:, a.other]).max() <= 1e-9
        assert np.all(v[:, a.cell] <= v.min(axis=1) + 1e-9)


@given(seeds)
def test_partition_and_closed_loops(seed):
    r = np.random.default_rng(seed)
    s = make_scene(r.uniform(-0.9, 0.9, (6, 2)), beta=1 + r.uniform(0.2, 2.0))
    b = r.normal(0, 0.05, 6)
    if not check_lift_condition(s, b):
        return
    d = boundary_arcs(s, b)
    assert d.areas.sum() == pytest.approx(4.0, rel=1e-6)
    for c in d.cells:
        if not c.is_empty:
            assert c.loops_closed()
            assert all(np.allclose(loop[0], loop[-1]) for loop in c.loops)


def test_arcs_are_oriented_counterclockwise(rng):
    s = make_scene(jittered_grid(rng, 3))
    d = boundary_arcs(s, np.zeros(9))
    assert np.all(d.areas > 0)
    for c in d.cells:
        for a in c.arcs:
            if isinstance(a, InteriorArc):
                assert a.cell == c.index


def test_lifting_bounds_enclose_sheets(rng):
    s = make_scene(rng.uniform(-1, 1, (5, 2)))
    b = rng.normal(0, 0.3, 5)
    lo, hi = lifting_bounds(s, b)
    x = rng.uniform(-1, 1, (1000, 2))
    h = weighted_costs(x, s, b) - np.sqrt((x ** 2).sum(1) + 1)[:, None]
    assert lo < h.min() and h.max() < hi
