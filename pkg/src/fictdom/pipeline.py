"""Mesh -> trace -> aggregate -> assemble -> solve for one problem configuration."""
from __future__ import annotations

from dataclasses import dataclass

import scipy.sparse as sp

from .assembly import (
    assemble_boundary_moments,
    assemble_coupling,
    assemble_load,
    assemble_stabilization,
    assemble_stiffness,
    macro_prolongation,
)
from .geometry import (
    FinePartition,
    MacroPartition,
    StructuredMesh,
    build_macro_partition,
    build_structured_mesh,
    trace_boundary,
)
from .problems import Problem, ProblemSpec
from .solver import SaddleSystem, Solution, build_saddle_system, solve_saddle
from .spaces import DofMap, build_dof_map


@dataclass
class Discretization:
    spec: ProblemSpec
    problem: Problem
    mesh: StructuredMesh
    fine: FinePartition
    macros: MacroPartition
    dofs: DofMap
    system: SaddleSystem


def discretize(spec: ProblemSpec) -> Discretization:
    problem = spec.problem()
    mesh = build_structured_mesh(problem.bbox, spec.n)
    fine = trace_boundary(mesh, problem.gamma)
    macros = build_macro_partition(fine, spec.h_ref, spec.kmin, spec.kmax)
    dofs = build_dof_map(mesh, fine)

    A = assemble_stiffness(mesh, dofs)
    C = assemble_coupling(mesh, fine, dofs)
    F = assemble_load(mesh, dofs, problem.f)
    G = assemble_boundary_moments(fine, problem.g)
    if spec.multiplier_space == "fine":
        S = assemble_stabilization(fine, macros, spec.c_s)
        system = build_saddle_system(A, C, S, F, G, dofs)
    else:
        # multipliers constant per macro edge have no fluctuation: S vanishes
        P = macro_prolongation(macros)
        S = sp.csr_matrix((len(macros), len(macros)))
        system = build_saddle_system(A, (P.T @ C).tocsr(), S, F, P.T @ G, dofs, P)
    return Discretization(spec, problem, mesh, fine, macros, dofs, system)


def solve_problem(spec: ProblemSpec) -> tuple[Discretization, Solution]:
    disc = discretize(spec)
    return disc, solve_saddle(disc.system)
