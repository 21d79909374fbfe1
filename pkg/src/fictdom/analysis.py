"""Error norms, diagnostic norms and convergence studies."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .assembly import p1_gradients
from .geometry import FinePartition, MacroPartition, StructuredMesh
from .problems import ProblemSpec
from .quadrature import gauss_segment, triangle_rule
from .solver import SaddleSystem, SingularMatrixError
from .spaces import apply_fluctuation

logger = logging.getLogger(__name__)

ERROR_DEGREE = 6


def h1_seminorm_error(mesh: StructuredMesh, u_h: np.ndarray, grad_u_exact: Callable,
                      degree: int = ERROR_DEGREE) -> float:
    """``|u - u_h|_1`` over the box, ``u_h`` given by nodal values on all vertices."""
    grads, area = p1_gradients(mesh)
    gh = np.einsum("tk,tkd->td", np.asarray(u_h)[mesh.triangles], grads)  # (T, 2)
    rule = triangle_rule(degree)
    X = np.einsum("qk,tkd->tqd", rule.barycentric, mesh.vertices[mesh.triangles])
    ge = grad_u_exact(X[..., 0], X[..., 1])  # (T, q, 2)
    diff2 = np.sum((ge - gh[:, None, :]) ** 2, axis=-1)
    return float(np.sqrt(np.sum(2.0 * np.abs(area) * (diff2 @ rule.weights))))


def h1_seminorm(mesh: StructuredMesh, v_h: np.ndarray) -> float:
    grads, area = p1_gradients(mesh)
    gh = np.einsum("tk,tkd->td", np.asarray(v_h)[mesh.triangles], grads)
    return float(np.sqrt(np.sum(np.abs(area) * np.sum(gh ** 2, axis=1))))


def l2_boundary_error(fine: FinePartition, lambda_h: np.ndarray,
                      lambda_exact: Optional[Callable] = None, n_points: int = 3) -> float:
    """``||lambda - lambda_h||_{0,gamma}``; ``lambda_exact=None`` means zero."""
    lambda_h = np.asarray(lambda_h, dtype=float)
    if len(fine) == 0:
        return 0.0
    rule = gauss_segment(n_points)
    if lambda_exact is None:
        vals = np.zeros((len(fine), rule.points.size))
    else:
        ends = fine.endpoints
        X = ends[:, None, 0, :] + rule.points[None, :, None] * (ends[:, None, 1, :] - ends[:, None, 0, :])
        vals = lambda_exact(X[..., 0], X[..., 1])
    sq = ((vals - lambda_h[:, None]) ** 2) @ rule.weights
    return float(np.sqrt(np.sum(fine.lengths * sq)))


def fluctuation_norm(macros: MacroPartition, mu: np.ndarray, c_s: float) -> float:
    """``(sum_E c_s |E| ||mu - P mu||^2_{0,E})^{1/2}`` computed from the fluctuation."""
    fine = macros.fine
    fl = apply_fluctuation(macros, fine, mu)
    per_fine = fine.lengths * fl ** 2
    macro_len = macros.lengths[macros.assignment]
    return float(np.sqrt(c_s * np.sum(macro_len * per_fine)))


def dual_surrogate(fine: FinePartition, mu: np.ndarray) -> float:
    """Mesh-weighted stand-in for the H^{-1/2} norm: ``(sum_e |e| ||mu||^2_{0,e})^{1/2}``."""
    ell = fine.lengths
    return float(np.sqrt(np.sum(ell ** 2 * np.asarray(mu, dtype=float) ** 2)))


@dataclass(frozen=True)
class AnalysisConfig:
    beta: float = 1.0
    dual_surrogate: bool = True

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta!r}")


def discrete_norm(mesh: StructuredMesh, macros: MacroPartition, v_h: np.ndarray, mu_h: np.ndarray,
                  config: AnalysisConfig = AnalysisConfig(), c_s: float = 0.1) -> float:
    """Diagnostic version of the mesh-dependent norm on the product space.

    The dual-norm term is replaced by :func:`dual_surrogate`; this is not the
    exact H^{-1/2} norm and only serves to monitor trends.
    """
    if not config.dual_surrogate:
        raise NotImplementedError("only the surrogate dual norm is available")
    v_term = h1_seminorm(mesh, v_h) ** 2
    mu_term = config.beta ** 2 * dual_surrogate(macros.fine, mu_h) ** 2
    fl_term = fluctuation_norm(macros, mu_h, c_s) ** 2
    return float(np.sqrt(v_term + mu_term + fl_term))


def energy_identity_residual(system: SaddleSystem, vectors: Iterable[tuple[np.ndarray, np.ndarray]]) -> float:
    """Largest ``|B[(V,M),(V,M)] - (V^T A V + M^T S M)| / (1 + |V^T A V|)`` over ``vectors``."""
    worst = 0.0
    for V, M in vectors:
        q = system.quadratic_form(V, M)
        vav = float(V @ (system.A @ V))
        msm = float(M @ (system.S @ M))
        worst = max(worst, abs(q - (vav + msm)) / (1.0 + abs(vav)))
    return worst


def _energy_vectors(system: SaddleSystem, U: np.ndarray, L: np.ndarray, n_random: int = 5, seed: int = 0):
    yield U, L
    rng = np.random.default_rng(seed)
    for _ in range(n_random):
        yield rng.standard_normal(system.n_u), rng.standard_normal(system.n_l)


def fit_rate(pairs: Sequence[tuple[float, float]]) -> float:
    """Least-squares slope of ``log(err)`` against ``log(h)``."""
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 2 or arr.shape[1] != 2:
        raise ValueError("need at least two (h, err) pairs")
    if np.any(~(arr > 0)):
        raise ValueError("h and err must be positive")
    lh, le = np.log(arr[:, 0]), np.log(arr[:, 1])
    lh_c = lh - lh.mean()
    return float(np.dot(lh_c, le - le.mean()) / np.dot(lh_c, lh_c))


@dataclass
class ConvergenceRow:
    n: int
    h: float
    h_gamma: float
    err_h1: float
    err_l2_gamma: float
    fluct_norm: float
    energy_residual: float

    FIELDS = ("n", "h", "h_gamma", "err_h1", "err_l2_gamma", "fluct_norm", "energy_residual")

    def as_tuple(self) -> tuple:
        return tuple(getattr(self, k) for k in self.FIELDS)


@dataclass
class ConvergenceReport:
    rows: list[ConvergenceRow]
    slope_h1: float
    slope_l2_gamma: float
    config: ProblemSpec = field(repr=False)

    def pairwise_rates(self, attr: str) -> list[float]:
        out = []
        for r0, r1 in zip(self.rows, self.rows[1:]):
            e0, e1 = getattr(r0, attr), getattr(r1, attr)
            if e0 > 0 and e1 > 0:
                out.append(float(np.log(e0 / e1) / np.log(r0.h / r1.h)))
            else:
                out.append(float("nan"))
        return out


def evaluate_solution(disc, sol) -> ConvergenceRow:
    """Errors and diagnostics of one solved configuration."""
    problem = disc.problem
    return ConvergenceRow(
        n=disc.mesh.n,
        h=disc.mesh.h,
        h_gamma=disc.fine.h_gamma,
        err_h1=h1_seminorm_error(disc.mesh, sol.u, problem.grad_u),
        err_l2_gamma=l2_boundary_error(disc.fine, sol.lam, problem.lam),
        fluct_norm=fluctuation_norm(disc.macros, sol.lam, disc.spec.c_s),
        energy_residual=energy_identity_residual(disc.system, _energy_vectors(disc.system, sol.U, sol.multipliers)),
    )


def run_convergence_study(spec: ProblemSpec, n_list: Sequence[int]) -> ConvergenceReport:
    """Solve ``spec`` on every mesh in ``n_list`` and fit convergence rates."""
    from .pipeline import solve_problem

    n_list = [int(n) for n in n_list]
    if len(n_list) < 3:
        raise ValueError("a convergence study needs at least 3 levels")
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("n_list must be strictly increasing")

    rows = []
    for n in n_list:
        try:
            disc, sol = solve_problem(replace(spec, n=n))
        except SingularMatrixError as exc:
            exc.n = n
            raise
        row = evaluate_solution(disc, sol)
        logger.info("n=%d h=%.4g err_h1=%.4e err_l2_gamma=%.4e", n, row.h, row.err_h1, row.err_l2_gamma)
        rows.append(row)
    rows.sort(key=lambda r: -r.h)
    slope_h1 = fit_rate([(r.h, r.err_h1) for r in rows])
    slope_l2 = fit_rate([(r.h, r.err_l2_gamma) for r in rows])
    return ConvergenceReport(rows, slope_h1, slope_l2, spec)
