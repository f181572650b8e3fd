import json
from pathlib import Path

import numpy as np
import pytest

from metalens.config import load_config, parse_config
from metalens.errors import ConfigError


def test_minimal_points_config():
    cfg = parse_config({"targets": {"points": [[0.1, 0.2]]}})
    assert cfg.scene.n_targets == 1
    assert cfg.scene.masses.tolist() == pytest.approx([1.0])
    assert cfg.solver.engine == "boundary"
    assert cfg.output.dir == Path("out")


def test_masses_rescaled_to_source_total():
    cfg = parse_config({
        "scene": {"source": {"kind": "constant", "value": 0.5}},
        "targets": {"points": [[0, 0], [0.5, 0]], "masses": [1, 3]},
    })
    np.testing.assert_allclose(cfg.scene.masses, [0.5, 1.5])


def test_gaussian_grid_targets():
    cfg = parse_config({"targets": {"grid": {"n": 3, "weights": {"gaussian": {"coef": 2.0}}}}})
    assert cfg.scene.n_targets == 9
    assert cfg.scene.masses.argmax() == 4


def test_shapes_targets():
    cfg = parse_config({"targets": {"shapes": {"letter_h": {"points": 50}}}})
    assert cfg.shape_params == {"letter_h": {"points": 50}}
    assert cfg.scene.n_targets > 30


def test_sphere_source():
    cfg = parse_config({"scene": {"source": {"kind": "sphere", "intensity": "cosine"}},
                        "targets": {"points": [[0, 0]]}, "solver": {"engine": "grid"}})
    assert not cfg.scene.source.is_constant
    assert cfg.solver.engine == "grid"


@pytest.mark.parametrize("data, fragment", [
    ({"bogus": 1}, "unknown key bogus"),
    ({"solver": {"tolerance": 1}}, "unknown key solver.tolerance"),
    ({"scene": {"alpha": 2, "beta": 1}, "targets": {"points": [[0, 0]]}}, "beta must be greater than alpha"),
    ({"targets": {"points": [[0, 0]], "grid": {"n": 2}}}, "exactly one"),
    ({"targets": {"points": [[0, 0]], "masses": [1, 2]}}, "2 masses for 1 points"),
    ({"targets": {"points": [[0, 0]], "masses": [-1]}}, "positive"),
    ({"targets": {"grid": {"n": 0}}}, "targets.grid.n"),
    ({"solver": {"engine": "magic"}}, "solver.engine"),
    ({"solver": {"target_error": -1}}, "solver.target_error"),
    ({"output": {"formats": ["png"]}}, "output.formats"),
    ({"trace": {"samples": 10}}, "trace.samples"),
    ({"sweep": {"deltas": [0.1, -2]}}, "sweep.deltas"),
    ({"seed": 1.5}, "seed"),
    ({"scene": {"source": {"kind": "laser"}}, "targets": {"points": [[0, 0]]}}, "scene.source.kind"),
    ({"targets": {"points": [[0, 0], [0, 0]]}}, "distinct"),
])
def test_rejections_name_the_field(data, fragment):
    with pytest.raises(ConfigError, match=fragment.replace(".", r"\.")):
        parse_config(data)


def test_overrides():
    cfg = parse_config({"targets": {"points": [[0, 0]]}, "seed": 3})
    cfg2 = cfg.with_overrides(resolution=128, engine="grid", seed=9, out_dir="x", target_error=1e-5)
    assert (cfg2.solver.resolution, cfg2.solver.engine, cfg2.seed) == (128, "grid", 9)
    assert cfg2.solver.target_error == 1e-5 and cfg2.output.dir == Path("x")
    assert cfg.seed == 3


def test_load_reports_syntax_position(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "seed": 1,\n  oops\n}')
    with pytest.raises(ConfigError, match=r"bad\.json:3:3"):
        load_config(p)


def test_load_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "none.json")


def test_parsing_is_deterministic(tmp_path):
    data = {"targets": {"grid": {"n": 4, "extent": [0, 1]}}, "seed": 2}
    p = tmp_path / "c.json"
    p.write_text(json.dumps(data))
    a, b = load_config(p), load_config(p)
    np.testing.assert_array_equal(a.scene.targets, b.scene.targets)
    np.testing.assert_array_equal(a.scene.masses, b.scene.masses)
