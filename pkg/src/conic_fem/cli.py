"""Command-line entry point ``conic-fem``.

Exit codes: 0 on success, 2 on invalid input or an inadmissible mesh,
3 when a linear or eigenvalue solver fails.
"""

from __future__ import annotations

import argparse
import re
import sys

from .errors import ConicFemError, MeshValidationError, SolverError, UsageError
from .experiments import ExperimentSpec, emit_table, run
from .mds import build_mds, classical_dimension
from .mesh import load_mesh, validate_conditions

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_SOLVER = 3

PROBLEM_ALIASES = {
    "ellipse": "ellipse", "ellipse_poisson": "ellipse",
    "disk-eigen": "disk-eigen", "disk_eigen": "disk-eigen",
    "conic": "conic", "conic_poisson": "conic",
}


def parse_degrees(text: str) -> tuple[int, ...]:
    """``"2..8"``, ``"2-8"`` or ``"2,4,6"`` to a tuple of degrees."""
    text = text.strip()
    m = re.fullmatch(r"(\d+)\s*(?:\.\.|-|:)\s*(\d+)", text)
    if m:
        lo, hi = int(m.group(1)), int(m.group(2))
        if hi < lo:
            raise argparse.ArgumentTypeError(f"empty degree range {text!r}")
        return tuple(range(lo, hi + 1))
    try:
        return tuple(int(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse degree range {text!r}") from None


def _problem(text: str) -> str:
    try:
        return PROBLEM_ALIASES[text]
    except KeyError:
        raise argparse.ArgumentTypeError(
            f"unknown problem {text!r} (choose ellipse, disk-eigen or conic)") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conic-fem",
        description="Finite elements on domains bounded by conic arcs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a convergence study and write a CSV table")
    p_run.add_argument("--problem", type=_problem, required=True,
                       help="ellipse, disk-eigen or conic")
    p_run.add_argument("--degree", type=int, default=3, help="polynomial degree for --study h")
    p_run.add_argument("--degrees", type=parse_degrees, default=(),
                       help="degree range for --study p, e.g. 2..8")
    p_run.add_argument("--levels", type=int, default=None,
                       help="number of meshes (h) or refinement level of the fixed mesh (p)")
    p_run.add_argument("--study", choices=("h", "p"), default="h")
    p_run.add_argument("--quad", type=int, default=None,
                       help="quadrature order (default: degree + 2)")
    p_run.add_argument("--tol", type=float, default=1e-12, help="linear solver tolerance")
    p_run.add_argument("--out", default="-", help="output CSV path ('-' for stdout)")
    p_run.add_argument("--mesh", default=None, help="JSON mesh replacing the built-in one")

    p_val = sub.add_parser("validate", help="check a mesh for admissibility")
    p_val.add_argument("--mesh", required=True)

    p_dims = sub.add_parser("dims", help="report the number of degrees of freedom")
    p_dims.add_argument("--mesh", required=True)
    p_dims.add_argument("--degree", type=int, required=True)
    return parser


def cmd_run(args) -> int:
    spec = ExperimentSpec(problem=args.problem, degree=args.degree, degrees=args.degrees,
                          levels=args.levels, study=args.study, quad=args.quad,
                          tol=args.tol, out=args.out, mesh=args.mesh)
    if args.degree < 2 or any(d < 2 for d in args.degrees):
        raise UsageError("degrees must be at least 2")
    table = run(spec)
    emit_table(table, sys.stdout if args.out == "-" else args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    mesh = load_mesh(args.mesh, strict=False)
    violations = validate_conditions(mesh)
    counts = mesh.counts()
    print(f"vertices={mesh.n_vertices} triangles={mesh.n_triangles} "
          + " ".join(f"{k}={v}" for k, v in counts.items()))
    for v in violations:
        print(v)
    if violations:
        print(f"{len(violations)} violation(s)")
        return EXIT_INVALID
    print("ok")
    return EXIT_OK


def cmd_dims(args) -> int:
    mesh = load_mesh(args.mesh)
    if args.degree < 2:
        raise UsageError("degree must be at least 2")
    table = build_mds(mesh, args.degree)
    print(f"N={table.N}")
    if not mesh.arcs:
        print(f"classical={classical_dimension(mesh, args.degree)}")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "validate": cmd_validate, "dims": cmd_dims}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        return COMMANDS[args.command](args)
    except MeshValidationError as exc:
        print("mesh validation failed:", file=sys.stderr)
        for v in exc.violations:
            print(f"  {v}", file=sys.stderr)
        return EXIT_INVALID
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ConicFemError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
