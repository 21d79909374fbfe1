"""Background mesh, boundary tracing and boundary partitions.

The physical boundary is a closed polygon embedded in a structured
triangulation of a square box.  Tracing the polygon through the mesh gives
the fine partition (one boundary edge per piece of polygon side contained in
a single triangle); consecutive fine edges are then grouped into macro edges
that each span several background cells.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)


class GeometryError(ValueError):
    """Raised when the polygon and the mesh are inconsistent."""


class Point2(NamedTuple):
    x: float
    y: float


def _orient(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _segments_intersect(p1, p2, q1, q2) -> bool:
    d1 = _orient(q1, q2, p1)
    d2 = _orient(q1, q2, p2)
    d3 = _orient(p1, p2, q1)
    d4 = _orient(p1, p2, q2)
    if ((d1 > 0 > d2) or (d1 < 0 < d2)) and ((d3 > 0 > d4) or (d3 < 0 < d4)):
        return True

    def on_seg(a, b, c, d):
        return d == 0 and min(a[0], b[0]) <= c[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= c[1] <= max(a[1], b[1])

    return on_seg(q1, q2, p1, d1) or on_seg(q1, q2, p2, d2) or on_seg(p1, p2, q1, d3) or on_seg(p1, p2, q2, d4)


@dataclass(frozen=True)
class PolygonBoundary:
    """Closed, simple, counter-clockwise polygon.

    Side ``j`` runs from ``vertices[j]`` to ``vertices[(j + 1) % N]`` and is
    parameterized by arc length ``s`` in ``[0, side_lengths[j]]``.
    """

    vertices: tuple[Point2, ...]

    def __post_init__(self):
        verts = tuple(Point2(float(x), float(y)) for x, y in self.vertices)
        object.__setattr__(self, "vertices", verts)
        if len(verts) < 3:
            raise GeometryError("a polygon needs at least 3 vertices")
        if not all(math.isfinite(c) for p in verts for c in p):
            raise GeometryError("polygon vertices must be finite")
        N = len(verts)
        for j in range(N):
            if verts[j] == verts[(j + 1) % N]:
                raise GeometryError(f"consecutive vertices {j} and {(j + 1) % N} coincide")
        if self.signed_area() <= 0.0:
            raise GeometryError("polygon must be counter-clockwise")
        for j in range(N):
            for k in range(j + 1, N):
                # adjacent sides share a vertex by construction
                if k == j + 1 or (j == 0 and k == N - 1):
                    continue
                if _segments_intersect(*self.side(j), *self.side(k)):
                    raise GeometryError(f"polygon sides {j} and {k} intersect")

    @classmethod
    def from_points(cls, points: Sequence[Sequence[float]]) -> "PolygonBoundary":
        return cls(tuple(Point2(*p) for p in points))

    @property
    def n_sides(self) -> int:
        return len(self.vertices)

    def side(self, j: int) -> tuple[Point2, Point2]:
        return self.vertices[j], self.vertices[(j + 1) % len(self.vertices)]

    @property
    def side_lengths(self) -> np.ndarray:
        return np.array([math.dist(*self.side(j)) for j in range(self.n_sides)])

    @property
    def perimeter(self) -> float:
        return float(self.side_lengths.sum())

    def signed_area(self) -> float:
        v = np.asarray(self.vertices)
        return 0.5 * float(np.sum(v[:, 0] * np.roll(v[:, 1], -1) - np.roll(v[:, 0], -1) * v[:, 1]))

    def point_at(self, j: int, s: float) -> Point2:
        p, q = self.side(j)
        t = s / math.dist(p, q)
        return Point2(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y))


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class StructuredMesh:
    """Uniform triangulation of a square box.

    Vertex ``(i, j)`` has index ``j * (n + 1) + i``.  Cell ``(i, j)`` is cut by
    its lower-left to upper-right diagonal into triangles ``2c`` (below the
    diagonal) and ``2c + 1`` (above), with ``c = j * n + i``.
    """

    bbox: tuple[float, float, float, float]
    n: int
    vertices: np.ndarray = field(repr=False)
    triangles: np.ndarray = field(repr=False)

    @property
    def width(self) -> float:
        return (self.bbox[1] - self.bbox[0]) / self.n

    @property
    def h(self) -> float:
        return math.sqrt(2.0) * (self.bbox[1] - self.bbox[0]) / self.n

    @property
    def diameter(self) -> float:
        return math.sqrt(2.0) * (self.bbox[1] - self.bbox[0])

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]

    def default_eps(self) -> float:
        return 1e-12 * self.diameter

    def boundary_vertex_mask(self) -> np.ndarray:
        n = self.n
        i = np.arange(self.n_vertices) % (n + 1)
        j = np.arange(self.n_vertices) // (n + 1)
        return (i == 0) | (i == n) | (j == 0) | (j == n)

    def triangle_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        return 0.5 * ((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
                      - (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0]))

    def locate(self, x: float, y: float) -> int:
        """Index of a triangle whose closure contains ``(x, y)``.

        Points on shared edges resolve deterministically to one of the
        neighbours.  Raises GeometryError outside the box.
        """
        x0, x1, y0, y1 = self.bbox
        tol = self.default_eps()
        if not (x0 - tol <= x <= x1 + tol and y0 - tol <= y <= y1 + tol):
            raise GeometryError(f"point ({x!r}, {y!r}) lies outside the mesh box")
        w = self.width
        xi, eta = (x - x0) / w, (y - y0) / w
        i = min(max(int(math.floor(xi)), 0), self.n - 1)
        j = min(max(int(math.floor(eta)), 0), self.n - 1)
        c = j * self.n + i
        return 2 * c if (eta - j) <= (xi - i) else 2 * c + 1

    def barycentric(self, tri: int, points) -> np.ndarray:
        """Barycentric coordinates of ``points`` (shape (m, 2)) in triangle ``tri``."""
        a, b, c = self.vertices[self.triangles[tri]]
        T = np.array([[b[0] - a[0], c[0] - a[0]], [b[1] - a[1], c[1] - a[1]]])
        rel = np.atleast_2d(np.asarray(points, dtype=float)) - a
        lam12 = np.linalg.solve(T, rel.T).T
        return np.column_stack([1.0 - lam12.sum(axis=1), lam12])


def build_structured_mesh(bbox: Sequence[float], n: int) -> StructuredMesh:
    """Uniform ``n x n`` grid on ``bbox = (x0, x1, y0, y1)``, one diagonal per cell."""
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise GeometryError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    x0, x1, y0, y1 = map(float, bbox)
    if not (x1 > x0 and y1 > y0):
        raise GeometryError(f"degenerate bounding box {bbox!r}")
    if not math.isclose(x1 - x0, y1 - y0, rel_tol=1e-12):
        raise GeometryError(f"bounding box must be a square, got {bbox!r}")

    xs = np.linspace(x0, x1, n + 1)
    ys = np.linspace(y0, y1, n + 1)
    X, Y = np.meshgrid(xs, ys)
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    i, j = np.meshgrid(np.arange(n), np.arange(n))
    v00 = (j * (n + 1) + i).ravel()
    v10 = v00 + 1
    v01 = v00 + n + 1
    v11 = v01 + 1
    triangles = np.empty((2 * n * n, 3), dtype=np.int64)
    triangles[0::2] = np.column_stack([v00, v10, v11])
    triangles[1::2] = np.column_stack([v00, v11, v01])
    return StructuredMesh((x0, x1, y0, y1), n, _readonly(vertices), _readonly(triangles))


@dataclass(frozen=True)
class BoundaryEdge:
    side: int
    s0: float
    s1: float
    p0: Point2
    p1: Point2
    host_triangle: int

    @property
    def length(self) -> float:
        return self.s1 - self.s0

    @property
    def midpoint(self) -> Point2:
        return Point2(0.5 * (self.p0.x + self.p1.x), 0.5 * (self.p0.y + self.p1.y))


@dataclass(frozen=True)
class FinePartition:
    """Boundary partition induced by the background mesh, in traversal order."""

    edges: tuple[BoundaryEdge, ...]
    gamma: PolygonBoundary

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def lengths(self) -> np.ndarray:
        return np.array([e.length for e in self.edges])

    @property
    def sides(self) -> np.ndarray:
        return np.array([e.side for e in self.edges], dtype=np.int64)

    @property
    def hosts(self) -> np.ndarray:
        return np.array([e.host_triangle for e in self.edges], dtype=np.int64)

    @property
    def endpoints(self) -> np.ndarray:
        """Array of shape (n_edges, 2, 2): start and end point of each edge."""
        return np.array([[e.p0, e.p1] for e in self.edges], dtype=float).reshape(-1, 2, 2)

    @property
    def h_gamma(self) -> float:
        return float(self.lengths.max())


def _line_crossings(L: float, origin: float, w: float, n_lines: int, offset: float,
                    slope: float) -> list[float]:
    """Arc-length parameters where the side crosses a family of parallel lines.

    The family is ``g(x, y) = origin + k*w`` for ``k = 0..n_lines-1`` where
    ``g`` is affine along the side: ``g(s) = offset + slope * s``.
    """
    if slope == 0.0:
        return []
    g0, g1 = offset, offset + slope * L
    lo, hi = min(g0, g1), max(g0, g1)
    k_lo = max(int(math.ceil((lo - origin) / w)) - 1, 0)
    k_hi = min(int(math.floor((hi - origin) / w)) + 1, n_lines - 1)
    out = []
    for k in range(k_lo, k_hi + 1):
        s = (origin + k * w - offset) / slope
        if 0.0 <= s <= L:
            out.append(s)
    return out


def trace_boundary(mesh: StructuredMesh, gamma: PolygonBoundary, eps: Optional[float] = None) -> FinePartition:
    """Cut every side of ``gamma`` at its crossings with the mesh edges.

    Three line families are intersected: vertical and horizontal grid lines
    and the cell diagonals (lines ``y - x = const``).  A side lying on a grid
    line is parallel to that family and skipped there; the other families then
    cut it exactly at the mesh vertices on the side.  Points closer than
    ``eps`` in arc length are merged, so a crossing through a mesh vertex gives
    a single partition point.
    """
    if eps is None:
        eps = mesh.default_eps()
    if eps <= 0:
        raise GeometryError("eps must be positive")
    x0, x1, y0, y1 = mesh.bbox
    for v in gamma.vertices:
        if not (x0 + eps < v.x < x1 - eps and y0 + eps < v.y < y1 - eps):
            raise GeometryError(f"polygon vertex {tuple(v)} is not strictly inside the mesh box")

    w = mesh.width
    n = mesh.n
    bary_tol = max(eps / w, 1e-13)
    edges: list[BoundaryEdge] = []
    for j in range(gamma.n_sides):
        p, q = gamma.side(j)
        L = math.dist(p, q)
        u = np.array([q.x - p.x, q.y - p.y]) / L
        cuts = [0.0, L]
        cuts += _line_crossings(L, x0, w, n + 1, p.x, u[0])
        cuts += _line_crossings(L, y0, w, n + 1, p.y, u[1])
        # diagonals: y - x = (y0 - x0) + k*w, k = -n..n
        cuts += _line_crossings(L, (y0 - x0) - n * w, w, 2 * n + 1, p.y - p.x, u[1] - u[0])
        cuts.sort()

        kept = [0.0]
        for s in cuts[1:]:
            if s - kept[-1] > eps:
                kept.append(s)
        if L - kept[-1] <= eps:
            kept[-1] = L
        else:
            kept.append(L)

        pts = [gamma.point_at(j, s) for s in kept[:-1]] + [q]
        for k in range(len(kept) - 1):
            a, b = pts[k], pts[k + 1]
            mid = (0.5 * (a.x + b.x), 0.5 * (a.y + b.y))
            tri = mesh.locate(*mid)
            bc = mesh.barycentric(tri, [a, b, mid])
            if bc.min() < -bary_tol or bc.max() > 1.0 + bary_tol:
                raise GeometryError(f"fine edge {k} of side {j} is not contained in a single triangle")
            edges.append(BoundaryEdge(j, kept[k], kept[k + 1], a, b, tri))
    return FinePartition(tuple(edges), gamma)


@dataclass(frozen=True)
class MacroEdge:
    side: int
    start: int
    stop: int
    length: float
    degenerate: bool = False

    @property
    def fine_range(self) -> range:
        return range(self.start, self.stop)


@dataclass(frozen=True)
class MacroPartition:
    macros: tuple[MacroEdge, ...]
    fine: FinePartition = field(repr=False)
    kmin: float
    kmax: float
    h_ref: float

    def __len__(self) -> int:
        return len(self.macros)

    @property
    def lengths(self) -> np.ndarray:
        return np.array([m.length for m in self.macros])

    @property
    def assignment(self) -> np.ndarray:
        """Macro index of every fine edge."""
        out = np.empty(len(self.fine), dtype=np.int64)
        for k, m in enumerate(self.macros):
            out[m.start:m.stop] = k
        return out

    def max_fine_per_macro(self) -> int:
        return max(m.stop - m.start for m in self.macros)


def build_macro_partition(fine: FinePartition, h_ref: Optional[float] = None,
                          kmin: float = 3.0, kmax: float = 6.0) -> MacroPartition:
    """Group consecutive fine edges of each side into macro edges.

    Greedy sweep along each side: a macro edge is closed as soon as its length
    reaches ``kmin * h_ref``.  A trailing remainder shorter than that is merged
    into the previous macro edge of the side; a side that is too short as a
    whole becomes one macro edge flagged ``degenerate``.  ``h_ref`` defaults to
    the largest fine edge length.
    """
    if h_ref is None:
        h_ref = fine.h_gamma
    if not (kmin >= 1 and kmax > kmin and h_ref > 0):
        raise ValueError(f"invalid aggregation parameters kmin={kmin}, kmax={kmax}, h_ref={h_ref}")
    target = kmin * h_ref
    # absorbs round-off in summed lengths
    tol = 1e-12 * target

    lengths = fine.lengths
    sides = fine.sides
    macros: list[MacroEdge] = []
    start = 0
    while start < len(fine):
        side = sides[start]
        stop = start
        while stop < len(fine) and sides[stop] == side:
            stop += 1
        side_macros: list[list[int]] = []
        acc, first = 0.0, start
        for k in range(start, stop):
            acc += lengths[k]
            if acc >= target - tol:
                side_macros.append([first, k + 1])
                acc, first = 0.0, k + 1
        if first < stop:
            if side_macros:
                side_macros[-1][1] = stop
            else:
                side_macros.append([first, stop])
        for a, b in side_macros:
            length = float(lengths[a:b].sum())
            degenerate = length < target - tol
            if not degenerate and length > kmax * h_ref + tol:
                logger.warning("macro edge on side %d has length %.3g > kmax*h_ref = %.3g",
                               side, length, kmax * h_ref)
            macros.append(MacroEdge(int(side), a, b, length, degenerate))
        start = stop
    return MacroPartition(tuple(macros), fine, float(kmin), float(kmax), float(h_ref))
