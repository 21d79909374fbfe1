"""Assembly of the discrete blocks.

Block names follow the linear system

    [ A  -C^T ] [U]   [F]
    [ C   S   ] [L] = [G]

with ``A`` the P1 stiffness on interior vertices, ``C[e, i]`` the integral of
hat function ``i`` over boundary edge ``e``, ``S`` the fluctuation penalty on
macro edges, ``F`` the source load and ``G`` the boundary-datum moments.
"""
from __future__ import annotations

from typing import Callable

import numpy as np
import scipy.sparse as sp

from .geometry import FinePartition, MacroPartition, StructuredMesh
from .quadrature import gauss_segment, triangle_rule
from .spaces import DofMap, p1_trace_on_edge

LOAD_DEGREE = 4
SEGMENT_POINTS = 3


def _finalize(rows, cols, vals, shape) -> sp.csr_matrix:
    """COO -> CSR with duplicates summed in a fixed order."""
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    vals = np.asarray(vals, dtype=float)
    order = np.lexsort((cols, rows))
    M = sp.coo_matrix((vals[order], (rows[order], cols[order])), shape=shape).tocsr()
    M.sum_duplicates()
    M.sort_indices()
    return M


def local_stiffness(coords: np.ndarray) -> np.ndarray:
    """P1 stiffness matrix of one triangle given its (3, 2) vertex coordinates."""
    coords = np.asarray(coords, dtype=float)
    return local_stiffness_batch(coords[None])[0]


def _hat_gradients(P: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # edge opposite vertex k, rotated by +90 degrees, over twice the signed area
    e = np.roll(P, -2, axis=1) - np.roll(P, -1, axis=1)
    area = 0.5 * (e[:, 0, 0] * e[:, 1, 1] - e[:, 0, 1] * e[:, 1, 0])
    grads = np.stack([-e[..., 1], e[..., 0]], axis=-1) / (2.0 * area)[:, None, None]
    return grads, area


def local_stiffness_batch(P: np.ndarray) -> np.ndarray:
    grads, area = _hat_gradients(P)
    return np.einsum("tid,tjd->tij", grads, grads) * np.abs(area)[:, None, None]


def p1_gradients(mesh: StructuredMesh) -> tuple[np.ndarray, np.ndarray]:
    """Hat-function gradients per triangle, shape (T, 3, 2), and triangle areas."""
    return _hat_gradients(mesh.vertices[mesh.triangles])


def assemble_stiffness(mesh: StructuredMesh, dofs: DofMap) -> sp.csr_matrix:
    Ke = local_stiffness_batch(mesh.vertices[mesh.triangles])
    idx = dofs.interior_index[mesh.triangles]
    rows = np.repeat(idx, 3, axis=1).ravel()
    cols = np.tile(idx, (1, 3)).ravel()
    vals = Ke.ravel()
    keep = (rows >= 0) & (cols >= 0)
    return _finalize(rows[keep], cols[keep], vals[keep], (dofs.n_u, dofs.n_u))


def assemble_coupling(mesh: StructuredMesh, fine: FinePartition, dofs: DofMap) -> sp.csr_matrix:
    """Unsigned pairing matrix ``C[e, i] = int_e phi_i`` (trapezoid rule, exact)."""
    rows, cols, vals = [], [], []
    for k, edge in enumerate(fine.edges):
        for tr in p1_trace_on_edge(mesh, edge):
            i = dofs.interior_index[tr.vertex]
            if i >= 0:
                rows.append(k)
                cols.append(i)
                vals.append(tr.integral())
    return _finalize(rows, cols, vals, (len(fine), dofs.n_u))


def stabilization_block(lengths: np.ndarray, c_s: float) -> np.ndarray:
    """Dense penalty block of one macro edge: ``c_s |E| (diag(l) - l l^T / |E|)``."""
    ell = np.asarray(lengths, dtype=float)
    total = ell.sum()
    return c_s * total * (np.diag(ell) - np.outer(ell, ell) / total)


def assemble_stabilization(fine: FinePartition, macros: MacroPartition, c_s: float) -> sp.csr_matrix:
    if c_s < 0:
        raise ValueError(f"c_s must be non-negative, got {c_s!r}")
    ell = fine.lengths
    rows, cols, vals = [], [], []
    for m in macros.macros:
        if m.stop - m.start < 2:
            continue
        block = stabilization_block(ell[m.start:m.stop], c_s)
        r = np.arange(m.start, m.stop)
        rows.append(np.repeat(r, r.size))
        cols.append(np.tile(r, r.size))
        vals.append(block.ravel())
    n = len(fine)
    if not rows:
        return sp.csr_matrix((n, n))
    return _finalize(np.concatenate(rows), np.concatenate(cols), np.concatenate(vals), (n, n))


def assemble_load(mesh: StructuredMesh, dofs: DofMap, f: Callable, degree: int = LOAD_DEGREE) -> np.ndarray:
    """``F_i = int f phi_i`` with a triangle rule exact to ``degree``."""
    rule = triangle_rule(degree)
    bary = rule.barycentric  # (q, 3)
    P = mesh.vertices[mesh.triangles]  # (T, 3, 2)
    X = np.einsum("qk,tkd->tqd", bary, P)
    fx = f(X[..., 0], X[..., 1])  # (T, q)
    area = np.abs(mesh.triangle_areas())
    local = 2.0 * area[:, None] * np.einsum("tq,q,qk->tk", fx, rule.weights, bary)
    idx = dofs.interior_index[mesh.triangles].ravel()
    keep = idx >= 0
    return np.bincount(idx[keep], weights=local.ravel()[keep], minlength=dofs.n_u)


def assemble_boundary_moments(fine: FinePartition, g: Callable, n_points: int = SEGMENT_POINTS) -> np.ndarray:
    """``G_e = int_e g`` with Gauss-Legendre on every fine edge."""
    if len(fine) == 0:
        return np.zeros(0)
    rule = gauss_segment(n_points)
    ends = fine.endpoints  # (E, 2, 2)
    X = ends[:, None, 0, :] + rule.points[None, :, None] * (ends[:, None, 1, :] - ends[:, None, 0, :])
    gx = g(X[..., 0], X[..., 1])
    return fine.lengths * (gx @ rule.weights)


def macro_prolongation(macros: MacroPartition) -> sp.csr_matrix:
    """Indicator matrix (n_fine x n_macro) mapping macro constants to fine edges."""
    n_fine = len(macros.fine)
    return sp.csr_matrix((np.ones(n_fine), (np.arange(n_fine), macros.assignment)),
                         shape=(n_fine, len(macros)))
