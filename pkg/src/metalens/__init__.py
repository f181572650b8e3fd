"""Design of near-field and far-field metalenses by semi-discrete optimal transport."""
from .cells import LaguerreDiagram, boundary_arcs, classify, grid_cells, laguerre_via_lifting
from .distribution import SourceDensity, jacobian, refracted_distribution
from .errors import *  # noqa: F401,F403
from .farfield import FarFieldScene, UnitDirection, solve_collimated, solve_point_source_far
from .geometry import Scene, cost_near, phase_eval
from .solver import SolveConfig, SolveReport, solve
from .trace import TraceReport, trace_verify

__all__ = [
    "FarFieldScene", "LaguerreDiagram", "Scene", "SolveConfig", "SolveReport",
    "SourceDensity", "TraceReport", "UnitDirection", "boundary_arcs", "classify",
    "cost_near", "grid_cells", "jacobian", "laguerre_via_lifting", "phase_eval",
    "refracted_distribution", "solve", "solve_collimated", "solve_point_source_far",
    "trace_verify",
]
