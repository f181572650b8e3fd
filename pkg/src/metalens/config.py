"""JSON run configurations.

A configuration has the blocks ``scene``, ``targets``, ``solver``,
``output``, ``trace`` and ``sweep`` (all optional except where a command
needs them) plus a top-level ``seed``. Unknown keys are rejected with the
dotted path of the offending field. Target masses are relative weights,
rescaled so their sum equals the total source mass.

Example::

    {
      "scene": {"alpha": 1.0, "beta": 2.0,
                "domain": [[-1, -1], [1, -1], [1, 1], [-1, 1]],
                "source": {"kind": "constant", "value": 0.25}},
      "targets": {"grid": {"n": 5, "extent": [-1, 1],
                           "weights": {"gaussian": {"coef": 2.0}}}},
      "solver": {"engine": "lifting", "target_error": 1e-8},
      "output": {"dir": "out"},
      "seed": 0
    }
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import presets
from .distribution import SourceDensity
from .errors import ConfigError, SceneError
from .geometry import Scene, polygon_area
from .solver import SolveConfig

DEFAULT_DOMAIN = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]
ENGINES = {"lifting": "boundary", "grid": "grid"}
FORMATS = ("weights", "convergence", "svg", "phase")

_SCHEMA = {
    "scene": {"alpha", "beta", "domain", "source"},
    "scene.source": {"kind", "value", "intensity"},
    "targets": {"points", "masses", "grid", "shapes"},
    "targets.grid": {"n", "extent", "weights"},
    "targets.grid.weights.gaussian": {"coef"},
    "targets.shapes": {"four_disks", "letter_h"},
    "targets.shapes.four_disks": {"centers", "radius", "points_per_disk"},
    "targets.shapes.letter_h": {"bbox", "stroke", "points"},
    "solver": {"resolution", "engine", "target_error", "max_iters", "ell_max"},
    "output": {"dir", "formats", "phase_resolution"},
    "trace": {"samples", "snell_points"},
    "sweep": {"deltas"},
    "": {"scene", "targets", "solver", "output", "trace", "sweep", "seed"},
}

INTENSITIES = {
    "uniform": lambda u: np.ones(u.shape[:-1]),
    "cosine": lambda u: u[..., 2],
}


@dataclass(frozen=True)
class OutputSpec:
    dir: Path = Path("out")
    formats: tuple[str, ...] = FORMATS
    phase_resolution: int = 256


@dataclass(frozen=True, eq=False)
class RunConfig:
    """Parsed configuration; ``scene`` is ``None`` when no targets were given."""

    scene: Scene | None
    solver: SolveConfig
    output: OutputSpec
    seed: int | None = None
    trace_samples: int = 1_000_000
    snell_points: int = 1000
    deltas: tuple[float, ...] = presets.SWEEP_DELTAS
    shape_params: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    def with_overrides(self, resolution=None, engine=None, seed=None, out_dir=None,
                       target_error=None) -> "RunConfig":
        """Apply command-line flags on top of the file values."""
        solver = self.solver
        if resolution is not None:
            solver = replace(solver, resolution=int(resolution))
        if engine is not None:
            solver = replace(solver, engine=_engine(engine, "--engine"))
        if target_error is not None:
            solver = replace(solver, target_error=float(target_error))
        output = self.output if out_dir is None else replace(self.output, dir=Path(out_dir))
        return replace(self, solver=solver, output=output,
                       seed=self.seed if seed is None else int(seed))


def _check_keys(block, path: str):
    if not isinstance(block, dict):
        raise ConfigError(f"{path or 'config'}: expected an object")
    allowed = _SCHEMA[path]
    unknown = sorted(set(block) - allowed)
    if unknown:
        where = f"{path}." if path else ""
        raise ConfigError(f"unknown key {where}{unknown[0]} (allowed: {', '.join(sorted(allowed))})")


def _number(block, key, path, default=None, positive=False):
    if key not in block:
        if default is None:
            raise ConfigError(f"{path}.{key}: required")
        return default
    v = block[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not np.isfinite(v):
        raise ConfigError(f"{path}.{key}: expected a finite number, got {v!r}")
    if positive and v <= 0:
        raise ConfigError(f"{path}.{key}: must be positive, got {v!r}")
    return float(v)


def _integer(block, key, path, default, minimum=1):
    v = block.get(key, default)
    if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
        raise ConfigError(f"{path}.{key}: expected an integer >= {minimum}, got {v!r}")
    return v


def _points(value, path, min_len=1):
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{path}: expected a list of [x, y] pairs") from None
    if arr.ndim != 2 or arr.shape[1] != 2 or len(arr) < min_len or not np.all(np.isfinite(arr)):
        raise ConfigError(f"{path}: expected at least {min_len} finite [x, y] pairs")
    return arr


def _engine(name, path):
    if name not in ENGINES:
        raise ConfigError(f"{path}: engine must be one of {sorted(ENGINES)}, got {name!r}")
    return ENGINES[name]


def _source(block, domain):
    if block is None:
        return SourceDensity.constant(1.0 / polygon_area(domain))
    _check_keys(block, "scene.source")
    kind = block.get("kind", "constant")
    if kind == "constant":
        return SourceDensity.constant(_number(block, "value", "scene.source", positive=True))
    if kind == "sphere":
        name = block.get("intensity", "uniform")
        if name not in INTENSITIES:
            raise ConfigError(f"scene.source.intensity: one of {sorted(INTENSITIES)}, got {name!r}")
        return SourceDensity.sphere(INTENSITIES[name])
    raise ConfigError(f"scene.source.kind: 'constant' or 'sphere', got {kind!r}")


def _targets(block):
    _check_keys(block, "targets")
    kinds = [k for k in ("points", "grid", "shapes") if k in block]
    if len(kinds) != 1:
        raise ConfigError("targets: give exactly one of points, grid, shapes")
    kind = kinds[0]
    if kind == "points":
        pts = _points(block["points"], "targets.points")
        masses = block.get("masses", [1.0] * len(pts))
        try:
            masses = np.asarray(masses, dtype=float).reshape(-1)
        except (TypeError, ValueError):
            raise ConfigError("targets.masses: expected a list of numbers") from None
        if len(masses) != len(pts):
            raise ConfigError(f"targets.masses: {len(masses)} masses for {len(pts)} points")
        return pts, masses
    if "masses" in block:
        raise ConfigError("targets.masses: only allowed with targets.points")
    if kind == "grid":
        g = block["grid"]
        _check_keys(g, "targets.grid")
        n = _integer(g, "n", "targets.grid", None)
        extent = g.get("extent", [-1.0, 1.0])
        if not (isinstance(extent, list) and len(extent) in (2, 4)):
            raise ConfigError("targets.grid.extent: [lo, hi] or [x0, x1, y0, y1]")
        weights = g.get("weights", "uniform")
        coef = None
        if isinstance(weights, dict):
            if set(weights) != {"gaussian"}:
                raise ConfigError("targets.grid.weights: 'uniform' or {\"gaussian\": {...}}")
            _check_keys(weights["gaussian"], "targets.grid.weights.gaussian")
            coef = _number(weights["gaussian"], "coef", "targets.grid.weights.gaussian",
                           default=presets.GAUSSIAN_COEF, positive=True)
        elif weights != "uniform":
            raise ConfigError(f"targets.grid.weights: 'uniform' or gaussian, got {weights!r}")
        pts = presets.grid_points(n, extent)
        masses = np.ones(len(pts)) if coef is None else presets.gaussian_weights(pts, coef)
        return pts, masses
    shapes = block["shapes"]
    _check_keys(shapes, "targets.shapes")
    if len(shapes) != 1:
        raise ConfigError("targets.shapes: give exactly one shape")
    (name, params), = shapes.items()
    pts = presets.shape_points(name, **_shape_params(name, params))
    return pts, np.ones(len(pts))


def _shape_params(name, params):
    path = f"targets.shapes.{name}"
    _check_keys(params, path)
    out = {}
    if name == "four_disks":
        if "centers" in params:
            out["centers"] = _points(params["centers"], f"{path}.centers")
        if "radius" in params:
            out["radius"] = _number(params, "radius", path, positive=True)
        if "points_per_disk" in params:
            out["points_per_disk"] = _integer(params, "points_per_disk", path, 1)
    else:
        if "bbox" in params:
            bbox = params["bbox"]
            if not (isinstance(bbox, list) and len(bbox) == 4):
                raise ConfigError(f"{path}.bbox: [x0, x1, y0, y1]")
            out["bbox"] = tuple(float(v) for v in bbox)
        if "stroke" in params:
            out["stroke"] = _number(params, "stroke", path, positive=True)
        if "points" in params:
            out["points"] = _integer(params, "points", path, 1)
    return out


def build_scene(scene_block, targets, masses) -> Scene:
    """Scene from a ``scene`` block and raw target weights (rescaled to the source mass)."""
    scene_block = scene_block or {}
    _check_keys(scene_block, "scene")
    alpha = _number(scene_block, "alpha", "scene", default=1.0)
    beta = _number(scene_block, "beta", "scene", default=2.0)
    domain = _points(scene_block.get("domain", DEFAULT_DOMAIN), "scene.domain", 3)
    source = _source(scene_block.get("source"), domain)
    masses = np.asarray(masses, dtype=float)
    if np.any(~np.isfinite(masses)) or np.any(masses <= 0):
        raise ConfigError("targets: masses must be positive")
    try:
        total = source.total_mass(domain, alpha)
        return Scene(alpha, beta, domain, targets, masses * (total / masses.sum()), source)
    except SceneError as exc:
        raise ConfigError(f"scene: {exc}") from exc


def parse_config(data: dict) -> RunConfig:
    """Validate a decoded configuration."""
    _check_keys(data, "")
    scene = None
    shape_params = {}
    if "targets" in data:
        pts, masses = _targets(data["targets"])
        scene = build_scene(data.get("scene"), pts, masses)
        shapes = data["targets"].get("shapes")
        if shapes:
            (name, params), = shapes.items()
            shape_params = {name: _shape_params(name, params)}
    elif "scene" in data:
        _check_keys(data["scene"], "scene")

    sb = data.get("solver", {})
    _check_keys(sb, "solver")
    try:
        solver = SolveConfig(
            max_iters=_integer(sb, "max_iters", "solver", 50, minimum=0),
            target_error=_number(sb, "target_error", "solver", default=1e-8, positive=True),
            resolution=_integer(sb, "resolution", "solver", 1024, minimum=2),
            engine=_engine(sb.get("engine", "lifting"), "solver.engine"),
            ell_max=_integer(sb, "ell_max", "solver", 30),
        )
    except ValueError as exc:
        raise ConfigError(f"solver: {exc}") from exc

    ob = data.get("output", {})
    _check_keys(ob, "output")
    out_dir = Path(ob.get("dir", "out"))
    formats = tuple(ob.get("formats", FORMATS))
    bad = [f for f in formats if f not in FORMATS]
    if bad:
        raise ConfigError(f"output.formats: unknown format {bad[0]!r} (allowed: {', '.join(FORMATS)})")
    output = OutputSpec(out_dir, formats, _integer(ob, "phase_resolution", "output", 256, 2))

    tb = data.get("trace", {})
    _check_keys(tb, "trace")
    samples = _integer(tb, "samples", "trace", 1_000_000, minimum=10_000)
    snell = _integer(tb, "snell_points", "trace", 1000)

    sw = data.get("sweep", {})
    _check_keys(sw, "sweep")
    deltas = sw.get("deltas", list(presets.SWEEP_DELTAS))
    if not isinstance(deltas, list) or not deltas or any(
            isinstance(d, bool) or not isinstance(d, (int, float)) or d <= 0 for d in deltas):
        raise ConfigError("sweep.deltas: expected a non-empty list of positive numbers")

    seed = data.get("seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
        raise ConfigError(f"seed: expected an integer, got {seed!r}")
    return RunConfig(scene, solver, output, seed, samples, snell,
                     tuple(float(d) for d in deltas), shape_params, data)


def load_config(path) -> RunConfig:
    """Read and validate a JSON configuration file.

    Raises
    ------
    ConfigError
        With the line and column of syntax errors or the path of the bad field.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return parse_config(data)
