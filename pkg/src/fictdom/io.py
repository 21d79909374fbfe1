"""CSV output with round-trip float precision."""
from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .geometry import FinePartition, StructuredMesh

SOLUTION_HEADER = ("x", "y", "u_h")
MULTIPLIER_HEADER = ("edge", "side", "s0", "s1", "lambda_h")
CONVERGENCE_HEADER = ("n", "h", "h_gamma", "err_h1", "err_l2_gamma", "fluct_norm", "energy_residual")


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def read_csv(path) -> tuple[list[str], list[list[float]]]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r)
        return header, [[float(v) for v in row] for row in r]


def write_solution(path, mesh: StructuredMesh, u: np.ndarray) -> Path:
    return write_csv(path, SOLUTION_HEADER, ((x, y, val) for (x, y), val in zip(mesh.vertices, u)))


def write_multiplier(path, fine: FinePartition, lam: np.ndarray) -> Path:
    rows = ((k, e.side, e.s0, e.s1, lam[k]) for k, e in enumerate(fine.edges))
    return write_csv(path, MULTIPLIER_HEADER, rows)


def write_convergence(path, rows) -> Path:
    return write_csv(path, CONVERGENCE_HEADER, (r.as_tuple() for r in rows))
