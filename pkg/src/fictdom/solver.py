"""Saddle-point system and its direct solution.

The system is factored by block elimination: a sparse LU of the stiffness
block, then a diagonally pivoted Cholesky factorization of the (dense,
symmetric positive semidefinite) multiplier Schur complement

    Sigma = S + C A^{-1} C^T.

These are the pivots of an LDL^T factorization of the symmetric form
``[[A, -C^T], [-C, -S]]`` in block order, so a pivot below
``SINGULAR_TOL * max|diag|`` marks a rank-deficient system.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg.lapack import dpstrf

from .spaces import DofMap

logger = logging.getLogger(__name__)

SINGULAR_TOL = 1e-12
WARN_TOL = 1e-9
RESIDUAL_TOL = 1e-10


class SingularMatrixError(RuntimeError):
    """The saddle-point matrix is numerically rank deficient."""

    def __init__(self, message: str, pivot: float = 0.0, scale: float = 1.0, rank: int = -1, size: int = -1):
        super().__init__(message)
        self.pivot = pivot
        self.scale = scale
        self.rank = rank
        self.size = size
        self.n: Optional[int] = None


@dataclass
class SaddleSystem:
    A: sp.csr_matrix
    C: sp.csr_matrix
    S: sp.csr_matrix
    F: np.ndarray
    G: np.ndarray
    dofs: Optional[DofMap] = field(default=None, repr=False)
    # maps multiplier unknowns to per-fine-edge values (macro multipliers)
    prolongation: Optional[sp.csr_matrix] = field(default=None, repr=False)

    def __post_init__(self):
        self.A = sp.csr_matrix(self.A)
        self.C = sp.csr_matrix(self.C)
        self.S = sp.csr_matrix(self.S)
        self.F = np.asarray(self.F, dtype=float)
        self.G = np.asarray(self.G, dtype=float)
        n_u, n_l = self.A.shape[0], self.S.shape[0]
        if self.A.shape != (n_u, n_u):
            raise ValueError(f"A must be square, got {self.A.shape}")
        if self.S.shape != (n_l, n_l):
            raise ValueError(f"S must be square, got {self.S.shape}")
        if self.C.shape != (n_l, n_u):
            raise ValueError(f"C has shape {self.C.shape}, expected {(n_l, n_u)}")
        if self.F.shape != (n_u,) or self.G.shape != (n_l,):
            raise ValueError(f"load shapes {self.F.shape}, {self.G.shape} do not match ({n_u}, {n_l})")

    @property
    def n_u(self) -> int:
        return self.A.shape[0]

    @property
    def n_l(self) -> int:
        return self.S.shape[0]

    def block_matrix(self) -> sp.csr_matrix:
        """``[[A, -C^T], [C, S]]``, the operator of the discrete bilinear form."""
        return sp.bmat([[self.A, -self.C.T], [self.C, self.S]], format="csr")

    def symmetric_matrix(self) -> sp.csr_matrix:
        """``[[A, -C^T], [-C, -S]]``, to be paired with :meth:`symmetric_rhs`."""
        return sp.bmat([[self.A, -self.C.T], [-self.C, -self.S]], format="csr")

    def symmetric_rhs(self) -> np.ndarray:
        return np.concatenate([self.F, -self.G])

    def rhs(self) -> np.ndarray:
        return np.concatenate([self.F, self.G])

    def apply(self, U: np.ndarray, L: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self.A @ U - self.C.T @ L, self.C @ U + self.S @ L

    def quadratic_form(self, V: np.ndarray, M: np.ndarray) -> float:
        """``B[(V, M), (V, M)]`` evaluated through the unsymmetrized operator."""
        r_u, r_l = self.apply(V, M)
        return float(V @ r_u + M @ r_l)

    def residual(self, U: np.ndarray, L: np.ndarray) -> float:
        r_u, r_l = self.apply(U, L)
        return float(np.linalg.norm(np.concatenate([r_u - self.F, r_l - self.G])))

    def diagonal_scale(self) -> float:
        d = np.concatenate([np.abs(self.A.diagonal()), np.abs(self.S.diagonal())])
        return float(d.max()) if d.size else 1.0


def build_saddle_system(A, C, S, F, G, dofs: Optional[DofMap] = None, prolongation=None) -> SaddleSystem:
    return SaddleSystem(A, C, S, F, G, dofs, prolongation)


@dataclass
class SolveReport:
    n_u: int
    n_l: int
    scale: float
    min_pivot: float
    rank: int
    refinement_steps: int
    near_singular: bool

    @property
    def relative_min_pivot(self) -> float:
        return self.min_pivot / self.scale


@dataclass
class Solution:
    u: np.ndarray  # nodal values on all vertices when a DofMap is attached
    U: np.ndarray = field(repr=False)
    multipliers: np.ndarray = field(repr=False)
    lam: np.ndarray = field(repr=False)  # per fine edge
    residual_norm: float
    report: SolveReport


def _min_lu_pivot(lu) -> float:
    d = np.abs(lu.U.diagonal())
    return float(d.min()) if d.size else np.inf


def solve_saddle(system: SaddleSystem) -> Solution:
    """Solve the block system; raise SingularMatrixError on a rank-deficient matrix."""
    n_u, n_l = system.n_u, system.n_l
    scale = system.diagonal_scale()
    thresh = SINGULAR_TOL * scale

    if n_u > 0:
        lu = spla.splu(system.A.tocsc())
        min_pivot = _min_lu_pivot(lu)
        if min_pivot < thresh:
            raise SingularMatrixError(f"singular stiffness block (pivot {min_pivot:.3e})",
                                      min_pivot, scale, size=n_u + n_l)
        solve_A = lu.solve
    else:
        min_pivot = np.inf

        def solve_A(b):
            return np.zeros_like(b, dtype=float)

    rank = n_u
    chol = None
    if n_l > 0:
        Ct = system.C.T.toarray()
        X = solve_A(Ct) if n_u > 0 else np.zeros((0, n_l))
        Sigma = system.S.toarray() + system.C @ X
        Sigma = 0.5 * (Sigma + Sigma.T)
        c, piv, r, info = dpstrf(Sigma, tol=thresh, lower=0)
        if info < 0:
            raise RuntimeError(f"dpstrf failed with info={info}")
        piv = piv - 1
        pivots = np.diag(c)[:r] ** 2
        rank += r
        if r < n_l:
            trailing = Sigma[np.ix_(piv[r:], piv[r:])] - c[:r, r:].T @ c[:r, r:] if r else Sigma
            pivot = float(np.abs(np.diag(trailing)).max()) if trailing.size else 0.0
            raise SingularMatrixError(
                f"singular saddle-point matrix: rank {rank} of {n_u + n_l}, "
                f"pivot {pivot:.3e} below {thresh:.3e}", pivot, scale, rank, n_u + n_l)
        min_pivot = min(min_pivot, float(pivots.min()))
        chol = (np.triu(c), piv)

    def solve_blocks(rf: np.ndarray, rg: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        y = solve_A(rf) if n_u > 0 else np.zeros(0)
        if n_l == 0:
            return y, np.zeros(0)
        R, p = chol
        b = rg - system.C @ y
        z = np.empty(n_l)
        z[p] = la.cho_solve((R, False), b[p])
        return (solve_A(rf + system.C.T @ z) if n_u > 0 else np.zeros(0)), z

    U, L = solve_blocks(system.F, system.G)
    target = RESIDUAL_TOL * (np.linalg.norm(system.F) + np.linalg.norm(system.G) + 1.0)
    res = system.residual(U, L)
    steps = 0
    while res > target and steps < 3:
        r_u, r_l = system.apply(U, L)
        dU, dL = solve_blocks(system.F - r_u, system.G - r_l)
        U, L = U + dU, L + dL
        res = system.residual(U, L)
        steps += 1
    if res > target:
        logger.warning("residual %.3e exceeds target %.3e after %d refinement steps", res, target, steps)

    near = bool(min_pivot < WARN_TOL * scale)
    if near:
        logger.warning("near-singular system: relative pivot %.3e", min_pivot / scale)
    report = SolveReport(n_u, n_l, scale, float(min_pivot), rank, steps, near)

    u = system.dofs.expand(U) if system.dofs is not None else U
    lam = system.prolongation @ L if system.prolongation is not None else L
    return Solution(u, U, L, np.asarray(lam), res, report)
