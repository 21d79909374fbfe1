"""Fictitious domain Poisson solver with a locally stabilized boundary multiplier."""
from .analysis import evaluate_solution, run_convergence_study
from .geometry import (
    GeometryError,
    MacroPartition,
    FinePartition,
    Point2,
    PolygonBoundary,
    StructuredMesh,
    build_macro_partition,
    build_structured_mesh,
    trace_boundary,
)
from .pipeline import discretize, solve_problem
from .problems import ProblemSpec, paper_problem
from .solver import SaddleSystem, SingularMatrixError, Solution, build_saddle_system, solve_saddle

__version__ = "0.1.0"
