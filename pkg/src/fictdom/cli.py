"""Command-line entry point.

    fictdom solve --config FILE --out DIR
    fictdom convergence --config FILE --out DIR [--svg]
    fictdom singular-demo --config FILE

Exit codes: 0 success, 1 configuration error, 2 singular system, 3 the
singular/solvable pattern of ``singular-demo`` deviates from the expected one.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

from .analysis import evaluate_solution, run_convergence_study
from .geometry import GeometryError
from .io import write_convergence, write_csv, write_multiplier, write_solution
from .pipeline import solve_problem
from .plot import convergence_svg
from .problems import ProblemSpec
from .solver import SingularMatrixError

EXIT_OK, EXIT_CONFIG, EXIT_SINGULAR, EXIT_PATTERN = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    problem_id: str = "paper"
    a: float = 0.5
    n: int = 16
    c_s: float = 0.1
    multiplier_space: str = "fine"
    kmin: float = 3.0
    kmax: float = 6.0
    h_ref: Optional[float] = None
    n_list: list = field(default_factory=lambda: [8, 16, 32, 64, 128])
    c_s_list: list = field(default_factory=list)
    plot: bool = False

    @classmethod
    def from_mapping(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
        return cls.from_mapping(data)

    def validate(self) -> None:
        def number(name, allow_none=False):
            v = getattr(self, name)
            if v is None and allow_none:
                return
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"{name} must be a number, got {v!r}")

        for name in ("a", "c_s", "kmin", "kmax"):
            number(name)
        number("h_ref", allow_none=True)
        if isinstance(self.n, bool) or not isinstance(self.n, int):
            raise ConfigError(f"n must be an integer, got {self.n!r}")
        if not isinstance(self.problem_id, str) or not isinstance(self.multiplier_space, str):
            raise ConfigError("problem_id and multiplier_space must be strings")
        if not isinstance(self.plot, bool):
            raise ConfigError(f"plot must be true or false, got {self.plot!r}")
        if not isinstance(self.n_list, list) or any(isinstance(v, bool) or not isinstance(v, int) for v in self.n_list):
            raise ConfigError("n_list must be a list of integers")
        if any(v < 1 for v in self.n_list):
            raise ConfigError("n_list entries must be positive")
        if not isinstance(self.c_s_list, list) or any(
                isinstance(v, bool) or not isinstance(v, (int, float)) or v < 0 for v in self.c_s_list):
            raise ConfigError("c_s_list must be a list of non-negative numbers")
        try:
            self.spec()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def spec(self, **overrides) -> ProblemSpec:
        d = dict(a=float(self.a), n=self.n, c_s=float(self.c_s), multiplier_space=self.multiplier_space,
                 kmin=float(self.kmin), kmax=float(self.kmax), problem_id=self.problem_id,
                 h_ref=None if self.h_ref is None else float(self.h_ref))
        d.update(overrides)
        return ProblemSpec(**d)


def _singular_message(spec: ProblemSpec, exc: SingularMatrixError) -> str:
    where = f" at n={exc.n}" if exc.n is not None else f" at n={spec.n}"
    return (f"singular matrix{where} with C_s={spec.c_s:g} and multiplier space "
            f"'{spec.multiplier_space}': {exc}")


def cmd_solve(cfg: RunConfig, out: Path) -> int:
    spec = cfg.spec()
    try:
        disc, sol = solve_problem(spec)
    except SingularMatrixError as exc:
        print(_singular_message(spec, exc), file=sys.stderr)
        return EXIT_SINGULAR
    row = evaluate_solution(disc, sol)
    out.mkdir(parents=True, exist_ok=True)
    write_solution(out / "solution.csv", disc.mesh, sol.u)
    write_multiplier(out / "multiplier.csv", disc.fine, sol.lam)
    summary = {
        "problem_id": spec.problem_id,
        "a": spec.a,
        "n": spec.n,
        "c_s": spec.c_s,
        "multiplier_space": spec.multiplier_space,
        "h": row.h,
        "h_gamma": row.h_gamma,
        "n_u": disc.system.n_u,
        "n_l": disc.system.n_l,
        "n_macro": len(disc.macros),
        "err_h1": row.err_h1,
        "err_l2_gamma": row.err_l2_gamma,
        "fluct_norm": row.fluct_norm,
        "residual_norm": sol.residual_norm,
        "energy_residual": row.energy_residual,
        "relative_min_pivot": sol.report.relative_min_pivot,
        "near_singular": sol.report.near_singular,
    }
    lines = [f"{k} = {v!r}" if isinstance(v, float) else f"{k} = {v}" for k, v in summary.items()]
    (out / "summary.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"err_h1 = {row.err_h1:.6e}  err_l2_gamma = {row.err_l2_gamma:.6e}  "
          f"residual = {sol.residual_norm:.3e}  energy_residual = {row.energy_residual:.3e}")
    return EXIT_OK


def cmd_convergence(cfg: RunConfig, out: Path, svg: bool = False) -> int:
    if len(cfg.n_list) < 3:
        raise ConfigError("n_list needs at least 3 levels")
    if any(b <= a for a, b in zip(cfg.n_list, cfg.n_list[1:])):
        raise ConfigError("n_list must be strictly increasing")
    spec = cfg.spec()
    try:
        report = run_convergence_study(spec, cfg.n_list)
    except SingularMatrixError as exc:
        print(_singular_message(spec, exc), file=sys.stderr)
        return EXIT_SINGULAR
    out.mkdir(parents=True, exist_ok=True)
    write_convergence(out / "convergence.csv", report.rows)

    print(f"{'n':>5} {'h':>10} {'err_h1':>12} {'rate':>6} {'err_l2_gamma':>13} {'rate':>6}")
    r1 = [float("nan")] + report.pairwise_rates("err_h1")
    r2 = [float("nan")] + report.pairwise_rates("err_l2_gamma")
    for row, a, b in zip(report.rows, r1, r2):
        print(f"{row.n:>5} {row.h:>10.4g} {row.err_h1:>12.4e} {a:>6.2f} {row.err_l2_gamma:>13.4e} {b:>6.2f}")
    print(f"slope_h1 = {report.slope_h1:.4f}")
    print(f"slope_l2_gamma = {report.slope_l2_gamma:.4f}")

    if svg or cfg.plot:
        text = convergence_svg([r.h for r in report.rows],
                               {"|u - u_h|_1": [r.err_h1 for r in report.rows],
                                "||lambda - lambda_h||_0": [r.err_l2_gamma for r in report.rows]},
                               title=f"{spec.problem_id}, C_s = {spec.c_s:g}")
        (out / "convergence.svg").write_text(text, encoding="utf-8")

    if cfg.c_s_list:
        sweep = []
        for c_s in cfg.c_s_list:
            try:
                disc, sol = solve_problem(replace(spec, c_s=float(c_s)))
            except SingularMatrixError as exc:
                print(_singular_message(replace(spec, c_s=float(c_s)), exc), file=sys.stderr)
                return EXIT_SINGULAR
            row = evaluate_solution(disc, sol)
            sweep.append((float(c_s), spec.n, row.err_h1, row.err_l2_gamma))
        write_csv(out / "cs_sweep.csv", ("c_s", "n", "err_h1", "err_l2_gamma"), sweep)
    return EXIT_OK


DEMO_VARIANTS = ((0.1, "fine"), (0.0, "fine"), (0.0, "macro"), (0.1, "macro"))
EXPECTED_PATTERN = ("OK", "SINGULAR", "OK", "OK")


def singular_pattern(cfg: RunConfig) -> list[tuple[float, str, str, float]]:
    """Solvability of the four (C_s, multiplier space) variants at ``cfg.n``."""
    rows = []
    for c_s, space in DEMO_VARIANTS:
        spec = cfg.spec(c_s=c_s, multiplier_space=space)
        try:
            _, sol = solve_problem(spec)
            rows.append((c_s, space, "OK", sol.report.relative_min_pivot))
        except SingularMatrixError as exc:
            rows.append((c_s, space, "SINGULAR", exc.pivot / exc.scale))
    return rows


def cmd_singular_demo(cfg: RunConfig) -> int:
    rows = singular_pattern(cfg)
    print(f"n = {cfg.n}, a = {cfg.a:g}")
    print(f"{'C_s':>6}  {'multiplier':<10}  {'status':<8}  relative pivot")
    for c_s, space, status, piv in rows:
        print(f"{c_s:>6g}  {space:<10}  {status:<8}  {piv:.3e}")
    observed = tuple(r[2] for r in rows)
    if observed != EXPECTED_PATTERN:
        print(f"pattern {observed} differs from expected {EXPECTED_PATTERN}", file=sys.stderr)
        return EXIT_PATTERN
    print("pattern reproduced: only the unstabilized fine multiplier space is singular")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fictdom", description="Stabilized fictitious domain Poisson solver")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="single solve")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("convergence", help="convergence study")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--svg", action="store_true", help="write convergence.svg")

    p = sub.add_parser("singular-demo", help="stabilized vs unstabilized solvability table")
    p.add_argument("--config", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = RunConfig.load(args.config)
        if args.command == "solve":
            return cmd_solve(cfg, Path(args.out))
        if args.command == "convergence":
            return cmd_convergence(cfg, Path(args.out), svg=args.svg)
        return cmd_singular_demo(cfg)
    except (ConfigError, GeometryError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
