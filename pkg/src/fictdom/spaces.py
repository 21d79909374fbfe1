"""Degrees of freedom for the P1 primal space and the P0 multiplier space.

Primal unknowns live on mesh vertices off the box boundary (the discrete
field vanishes on the box boundary).  Multiplier unknowns are one constant per
fine boundary edge, ordered as the fine partition.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .geometry import BoundaryEdge, FinePartition, GeometryError, MacroPartition, StructuredMesh


@dataclass(frozen=True)
class DofMap:
    interior_index: np.ndarray = field(repr=False)  # -1 on box-boundary vertices
    n_u: int
    n_l: int

    @property
    def interior_vertices(self) -> np.ndarray:
        return np.flatnonzero(self.interior_index >= 0)

    def expand(self, U: np.ndarray) -> np.ndarray:
        """Nodal values on all vertices from interior unknowns (zero on the box boundary)."""
        u = np.zeros(self.interior_index.shape[0])
        u[self.interior_vertices] = U
        return u

    def restrict(self, u: np.ndarray) -> np.ndarray:
        return np.asarray(u)[self.interior_vertices]


def build_dof_map(mesh: StructuredMesh, fine: FinePartition) -> DofMap:
    interior = ~mesh.boundary_vertex_mask()
    index = np.full(mesh.n_vertices, -1, dtype=np.int64)
    index[interior] = np.arange(int(interior.sum()))
    index.setflags(write=False)
    return DofMap(index, int(interior.sum()), len(fine))


@dataclass(frozen=True)
class TraceFunction:
    """Restriction of the hat function of ``vertex`` to a boundary edge.

    Affine in arc length, with values ``v0`` at ``s0`` and ``v1`` at ``s1``.
    """

    vertex: int
    s0: float
    s1: float
    v0: float
    v1: float

    def __call__(self, s):
        t = (np.asarray(s, dtype=float) - self.s0) / (self.s1 - self.s0)
        return (1.0 - t) * self.v0 + t * self.v1

    def integral(self) -> float:
        return 0.5 * (self.s1 - self.s0) * (self.v0 + self.v1)


def p1_trace_on_edge(mesh: StructuredMesh, edge: BoundaryEdge, eps: Optional[float] = None) -> list[TraceFunction]:
    """Traces on ``edge`` of the three hat functions of its host triangle.

    The endpoint values are the barycentric coordinates of the edge endpoints;
    hat functions are affine on the triangle, hence on the edge.
    """
    if eps is None:
        eps = mesh.default_eps()
    tol = max(eps / mesh.width, 1e-13)
    bc = mesh.barycentric(edge.host_triangle, [edge.p0, edge.p1])
    if bc.min() < -tol or bc.max() > 1.0 + tol:
        raise GeometryError(f"edge endpoints leave host triangle {edge.host_triangle}")
    verts = mesh.triangles[edge.host_triangle]
    return [TraceFunction(int(verts[k]), edge.s0, edge.s1, float(bc[0, k]), float(bc[1, k])) for k in range(3)]


def apply_fluctuation(macros: MacroPartition, fine: FinePartition, mu: np.ndarray) -> np.ndarray:
    """Return ``mu - P mu`` where ``P`` is the length-weighted mean on each macro edge."""
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (len(fine),):
        raise ValueError(f"multiplier vector has shape {mu.shape}, expected ({len(fine)},)")
    ell = fine.lengths
    owner = macros.assignment
    mass = np.bincount(owner, weights=ell * mu, minlength=len(macros))
    means = mass / np.bincount(owner, weights=ell, minlength=len(macros))
    return mu - means[owner]
