"""Command-line entry point.

Subcommands::

    metalens solve <config>
    metalens sweep-delta <config>
    metalens gaussian <n>
    metalens shapes <four_disks|letter_h> <config>
    metalens trace <config> <weights.csv>
    metalens export-phase <config> <weights.csv>

Shared flags: ``--resolution``, ``--engine {grid,lifting}``, ``--seed``,
``--out-dir``, ``--target-error``. Exit status is 0 on success, 1 for an
invalid configuration or scene and 2 when the solver does not converge.

Files written to the output directory:

* ``weights.csv``: ``index,y1,y2,g,b_gauge0,b_pin1``
* ``convergence.csv``: ``iter,error,tau,ell,min_cell_mass``
* ``cells.svg``: the Laguerre cells (layout in :mod:`metalens.export`)
* ``phase.csv``: the phase sampled on a regular grid
* ``trace.csv``: ``index,fraction,expected`` of a ray trace

``sweep-delta`` writes ``delta_<d>/`` subdirectories that also hold
``voronoi.svg``, the diagram of the zero weights.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import export, presets
from .cells import boundary_arcs
from .config import RunConfig, load_config, parse_config
from .errors import (
    ConfigError,
    DegenerateGradient,
    InfeasibleStart,
    LiftConditionViolated,
    OutsideDomain,
    ProjectionOutsideDomain,
    SceneError,
    SingularSystem,
    StepFailure,
)
from .solver import NearFieldProblem, solve
from .trace import trace_verify

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2
INPUT_ERRORS = (ConfigError, SceneError, InfeasibleStart, ProjectionOutsideDomain, OutsideDomain)
SOLVER_ERRORS = (StepFailure, SingularSystem, LiftConditionViolated, DegenerateGradient)


class SolverFailed(Exception):
    """Raised internally when a run ends without convergence."""


def _flags(cfg: RunConfig, args) -> RunConfig:
    return cfg.with_overrides(args.resolution, args.engine, args.seed, args.out_dir, args.target_error)


def _load(args) -> RunConfig:
    return _flags(load_config(args.config), args)


def _log(msg: str):
    print(msg, flush=True)


def run_scene(scene, cfg: RunConfig, out: Path, label: str = "", phase=None) -> bool:
    """Solve ``scene`` and write the configured artifacts into ``out``."""
    problem = NearFieldProblem(scene, cfg.solver)
    report = solve(problem, cfg.solver)
    fmts = cfg.output.formats
    if "weights" in fmts:
        export.write_weights_csv(out / "weights.csv", scene.targets, scene.masses, report.b)
    if "convergence" in fmts:
        export.write_convergence_csv(out / "convergence.csv", report.history)
    if "svg" in fmts:
        export.write_text(out / "cells.svg", export.diagram_svg(problem.diagram(report.b)))
    if phase if phase is not None else "phase" in fmts:
        export.write_phase_csv(out / "phase.csv", scene, report.b, cfg.output.phase_resolution)
    status = "converged" if report.converged else "NOT converged"
    _log(f"{label}N={scene.n_targets} {status}: error {report.error:.3e} after "
         f"{report.iterations} iterations -> {out}")
    return report.converged


def _require_scene(cfg: RunConfig):
    if cfg.scene is None:
        raise ConfigError("targets: required for this command")
    return cfg.scene


def cmd_solve(args) -> bool:
    cfg = _load(args)
    return run_scene(_require_scene(cfg), cfg, cfg.output.dir)


def cmd_sweep(args) -> bool:
    cfg = _load(args)
    ok = True
    for d in cfg.deltas:
        scene = presets.sweep_scene(d)
        out = cfg.output.dir / f"delta_{d:g}"
        if "svg" in cfg.output.formats:
            start = boundary_arcs(scene, np.zeros(scene.n_targets))
            export.write_text(out / "voronoi.svg", export.diagram_svg(start))
        ok &= run_scene(scene, cfg, out, f"delta={d:g} ")
    return ok


def cmd_gaussian(args) -> bool:
    if not 1 <= args.n <= 100:
        raise ConfigError(f"n must be between 1 and 100, got {args.n}")
    cfg = _flags(parse_config({}), args)
    out = cfg.output.dir if args.out_dir else Path("out") / f"gaussian_{args.n}"
    return run_scene(presets.gaussian_scene(args.n), cfg, out, f"gaussian n={args.n} ")


def cmd_shapes(args) -> bool:
    cfg = _load(args)
    targets = cfg.raw.get("targets")
    if targets is None:
        scene = presets.shape_scene(args.name)
    else:
        shapes = targets.get("shapes", {})
        if args.name not in shapes:
            raise ConfigError(f"targets.shapes.{args.name}: required (config describes other targets)")
        scene = cfg.scene
    return run_scene(scene, cfg, cfg.output.dir, f"{args.name} ", phase=True)


def _solution(cfg: RunConfig, path):
    scene = _require_scene(cfg)
    data = export.read_weights_csv(path)
    if data["targets"].shape != scene.targets.shape or not np.allclose(data["targets"], scene.targets):
        raise ConfigError(f"{path}: targets do not match the configuration")
    return scene, data["b"]


def cmd_trace(args) -> bool:
    cfg = _load(args)
    if cfg.seed is None:
        raise ConfigError("seed: required for ray tracing (config field or --seed)")
    scene, b = _solution(cfg, args.weights)
    rep = trace_verify(scene, b, cfg.trace_samples, cfg.seed, cfg.snell_points)
    rows = [(i, export._num(f), export._num(e)) for i, (f, e) in enumerate(zip(rep.fractions, rep.expected))]
    export.write_text(cfg.output.dir / "trace.csv",
                      export._csv([f"samples: {rep.samples}"], ("index", "fraction", "expected"), rows))
    verdict = "consistent" if rep.consistent else "MISMATCH"
    _log(f"trace M={rep.samples}: max |fraction - g| = {rep.max_deviation:.3e} "
         f"(tolerance {rep.tolerance:.3e}), Snell residual max {rep.snell_max:.3e} "
         f"over {rep.snell_points} points: {verdict}")
    return True


def cmd_export_phase(args) -> bool:
    cfg = _load(args)
    scene, b = _solution(cfg, args.weights)
    path = export.write_phase_csv(cfg.output.dir / "phase.csv", scene, b, cfg.output.phase_resolution)
    _log(f"wrote {path}")
    return True


def build_parser() -> argparse.ArgumentParser:
    flags = argparse.ArgumentParser(add_help=False)
    flags.add_argument("--resolution", type=int, help="grid engine resolution per axis")
    flags.add_argument("--engine", choices=("grid", "lifting"), help="mass computation engine")
    flags.add_argument("--seed", type=int, help="random seed for sampling")
    flags.add_argument("--out-dir", help="output directory")
    flags.add_argument("--target-error", type=float, help="Newton stopping tolerance")

    parser = argparse.ArgumentParser(prog="metalens", description="Near-field metalens design")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("solve", parents=[flags], help="solve the scene of a config file")
    p.add_argument("config")
    p.set_defaults(func=cmd_solve)
    p = sub.add_parser("sweep-delta", parents=[flags], help="25-target sweep over target heights")
    p.add_argument("config")
    p.set_defaults(func=cmd_sweep)
    p = sub.add_parser("gaussian", parents=[flags], help="n x n grid with Gaussian masses")
    p.add_argument("n", type=int)
    p.set_defaults(func=cmd_gaussian)
    p = sub.add_parser("shapes", parents=[flags], help="uniform masses on a discretized shape")
    p.add_argument("name", choices=("four_disks", "letter_h"))
    p.add_argument("config")
    p.set_defaults(func=cmd_shapes)
    p = sub.add_parser("trace", parents=[flags], help="Monte-Carlo ray trace of a solution")
    p.add_argument("config")
    p.add_argument("weights")
    p.set_defaults(func=cmd_trace)
    p = sub.add_parser("export-phase", parents=[flags], help="sample the phase of a solution")
    p.add_argument("config")
    p.add_argument("weights")
    p.set_defaults(func=cmd_export_phase)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        ok = args.func(args)
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SOLVER_ERRORS as exc:
        print(f"solver failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK if ok else EXIT_SOLVER
