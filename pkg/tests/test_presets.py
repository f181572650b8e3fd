import numpy as np
import pytest

from metalens import presets


def _mirror_perm(points, sign):
    target = points * sign
    d = ((target[:, None, :] - points[None]) ** 2).sum(-1)
    perm = d.argmin(axis=1)
    assert d[np.arange(len(points)), perm].max() < 1e-20
    return perm


def test_grid_points():
    np.testing.assert_array_equal(presets.grid_points(1), [[0.0, 0.0]])
    p = presets.grid_points(3, (0.0, 1.0))
    assert p.shape == (9, 2) and p.min() == 0.0 and p.max() == 1.0
    p = presets.grid_points(2, (0.0, 1.0, 2.0, 4.0))
    np.testing.assert_array_equal(p, [[0, 2], [1, 2], [0, 4], [1, 4]])
    with pytest.raises(ValueError):
        presets.grid_points(0)


def test_gaussian_weights_peak_in_center():
    pts = presets.grid_points(5)
    w = presets.gaussian_weights(pts)
    assert len(w) == 25 and w.sum() == pytest.approx(1.0, abs=1e-15)
    assert w.argmax() == 12
    assert w[0] == pytest.approx(np.exp(-4.0) / np.exp(-2 * (pts ** 2).sum(1)).sum())


def test_single_gaussian_mass():
    s = presets.gaussian_scene(1)
    assert s.masses.tolist() == [1.0]


def test_sweep_scene():
    for d in presets.SWEEP_DELTAS:
        s = presets.sweep_scene(d)
        assert s.n_targets == 25 and s.delta == pytest.approx(d)
        np.testing.assert_allclose(s.masses, 1 / 25)
        assert s.targets.min() == 0.0 and s.targets.max() == 1.0
    with pytest.raises(ValueError):
        presets.sweep_scene(0.0)


@pytest.mark.parametrize("name", ["four_disks", "letter_h"])
def test_shape_scenes_are_symmetric_and_balanced(name):
    s = presets.shape_scene(name)
    n = s.n_targets
    np.testing.assert_allclose(s.masses, 1.0 / n)
    assert s.masses.sum() == pytest.approx(s.source.total_mass(s.domain, s.alpha))
    for sign in ([-1, 1], [1, -1]):
        _mirror_perm(s.targets, np.array(sign))


def test_four_disks_geometry():
    p = presets.four_disks_points()
    centers = np.array(presets.FOUR_DISKS["centers"])
    d = np.sqrt(((p[:, None, :] - centers[None]) ** 2).sum(-1)).min(axis=1)
    assert np.all(d <= presets.FOUR_DISKS["radius"] + 1e-12)
    assert abs(len(p) - 4 * presets.FOUR_DISKS["points_per_disk"]) <= 0.25 * len(p)


def test_letter_h_geometry():
    p = presets.letter_h_points()
    assert np.all(np.abs(p) <= 0.75 + 1e-12)
    legs = np.abs(p[:, 0]) >= 0.75 - 0.25 - 1e-12
    bar = np.abs(p[:, 1]) <= 0.125 + 1e-12
    assert np.all(legs | bar)
    assert abs(len(p) - presets.LETTER_H["points"]) <= 0.25 * len(p)


def test_unknown_shape():
    with pytest.raises(ValueError, match="unknown shape"):
        presets.shape_points("circle")
