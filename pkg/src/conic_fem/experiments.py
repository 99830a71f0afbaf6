"""Convergence studies on the built-in domains and CSV output."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import domains
from .assembly import PdeCoefficients, assemble, error_norms, solve_eigs, solve_poisson
from .bessel import disk_eigenvalues
from .errors import UsageError
from .mds import build_mds
from .mesh import CurvedTriangulation, load_mesh, refine_uniform

POISSON_HEADER = ("level", "degree", "N", "h", "L2", "H1")
EIGEN_HEADER = ("level", "degree", "N", "h", "eig_index", "lambda", "abs_error")
N_EIGS = 15
P_STUDY_LEVEL = 2


@dataclass
class ExperimentSpec:
    """Parameters of one study.

    ``levels`` is the number of meshes for ``study='h'`` (refinement levels
    ``0 .. levels-1``) and the refinement level of the fixed mesh for
    ``study='p'`` (default 2).
    """

    problem: str
    degree: int = 3
    degrees: tuple = ()
    levels: int | None = None
    study: str = "h"
    quad: int | None = None
    tol: float = 1e-12
    out: str | None = None
    mesh: str | None = None

    def __post_init__(self):
        if self.study not in ("h", "p"):
            raise UsageError(f"study must be 'h' or 'p', got {self.study!r}")
        if self.levels is not None and self.levels < 0:
            raise UsageError("levels must be non-negative")
        if self.study == "p" and not self.degrees:
            raise UsageError("a p-refinement study needs a degree range")

    def runs(self):
        """``(level, degree)`` pairs in output order."""
        if self.study == "h":
            levels = 3 if self.levels is None else self.levels
            return [(lev, self.degree) for lev in range(levels)]
        level = P_STUDY_LEVEL if self.levels is None else self.levels
        return [(level, d) for d in self.degrees]


@dataclass
class ConvergenceTable:
    header: tuple
    rows: list = field(default_factory=list)


class MeshLadder:
    """Uniform refinements of an initial mesh, computed on demand."""

    def __init__(self, base: CurvedTriangulation):
        self._meshes = [base]

    def __getitem__(self, level: int) -> CurvedTriangulation:
        while len(self._meshes) <= level:
            self._meshes.append(refine_uniform(self._meshes[-1]))
        return self._meshes[level]


# -- manufactured solutions ---------------------------------------------------

def ellipse_solution():
    """``u = exp((x^2 + 6.25 y^2)/2) - exp(1/2)``, its gradient and ``-Laplace(u)``."""
    def g(p):
        return np.exp(0.5 * (p[:, 0] ** 2 + 6.25 * p[:, 1] ** 2))

    def u(p):
        return g(p) - np.exp(0.5)

    def grad(p):
        return g(p)[:, None] * np.column_stack([p[:, 0], 6.25 * p[:, 1]])

    def rhs(p):
        return -g(p) * (7.25 + p[:, 0] ** 2 + 39.0625 * p[:, 1] ** 2)

    return u, grad, rhs


def conic_solution():
    """``u = (y^2 - 4)(x^2 - (y^2 - 6)^2)/100`` with gradient and ``-Laplace(u)``."""
    def u(p):
        x, y = p[:, 0], p[:, 1]
        return (y * y - 4) * (x * x - (y * y - 6) ** 2) / 100

    def grad(p):
        x, y = p[:, 0], p[:, 1]
        a, b = y * y - 4, x * x - (y * y - 6) ** 2
        return np.column_stack([2 * x * a, 2 * y * b - 4 * y * (y * y - 6) * a]) / 100

    def rhs(p):
        x, y = p[:, 0], p[:, 1]
        a = y * y - 4
        lap = (2 * a + 2 * x * x - 2 * (y * y - 6) ** 2 - 16 * y * y * (y * y - 6)
               + a * (24 - 12 * y * y))
        return -lap / 100

    return u, grad, rhs


# -- studies ----------------------------------------------------------------------

def _base_mesh(spec: ExperimentSpec, default):
    return load_mesh(spec.mesh) if spec.mesh else default()


def _poisson_study(spec: ExperimentSpec, base, solution) -> ConvergenceTable:
    u, grad, rhs = solution
    ladder = MeshLadder(base)
    table = ConvergenceTable(POISSON_HEADER)
    coeffs = PdeCoefficients(f=rhs)
    for level, d in spec.runs():
        mesh = ladder[level]
        dofs = build_mds(mesh, d)
        system = assemble(dofs, coeffs, spec.quad, which="SL")
        x = solve_poisson(system.S, system.L, spec.tol)
        l2, h1 = error_norms(dofs, x, u, grad, spec.quad)
        table.rows.append((level, d, dofs.N, mesh.h, l2, h1))
    return table


def run_ellipse_poisson(spec: ExperimentSpec) -> ConvergenceTable:
    """Poisson problem on the ellipse ``x^2 + 6.25 y^2 < 1``."""
    return _poisson_study(spec, _base_mesh(spec, domains.ellipse_mesh), ellipse_solution())


def run_conic_poisson(spec: ExperimentSpec) -> ConvergenceTable:
    """Poisson problem between two lines and two parabolas."""
    return _poisson_study(spec, _base_mesh(spec, domains.conic_mesh), conic_solution())


def run_disk_eigen(spec: ExperimentSpec, k: int = N_EIGS) -> ConvergenceTable:
    """Smallest ``k`` Dirichlet eigenvalues of the unit disk against Bessel zeros."""
    exact = [lam for lam, _, _ in disk_eigenvalues(k)]
    ladder = MeshLadder(_base_mesh(spec, domains.disk_mesh))
    table = ConvergenceTable(EIGEN_HEADER)
    coeffs = PdeCoefficients(c=1.0)
    for level, d in spec.runs():
        mesh = ladder[level]
        dofs = build_mds(mesh, d)
        system = assemble(dofs, coeffs, spec.quad, which="SM")
        lam, _ = solve_eigs(system.S, system.M, min(k, dofs.N))
        for i, (val, ref) in enumerate(zip(lam, exact), start=1):
            table.rows.append((level, d, dofs.N, mesh.h, i, float(val), abs(float(val) - ref)))
    return table


PROBLEMS = {
    "ellipse": run_ellipse_poisson,
    "disk-eigen": run_disk_eigen,
    "conic": run_conic_poisson,
}


def run(spec: ExperimentSpec) -> ConvergenceTable:
    try:
        runner = PROBLEMS[spec.problem]
    except KeyError:
        raise UsageError(f"unknown problem {spec.problem!r}; choose from {sorted(PROBLEMS)}") from None
    return runner(spec)


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.17g}"


def emit_table(table: ConvergenceTable, path) -> None:
    """Write the table as CSV with 17 significant digits.

    ``path`` may also be an open text stream.
    """
    if hasattr(path, "write"):
        _write_rows(table, path)
        return
    with open(path, "w", newline="") as fh:
        _write_rows(table, fh)


def _write_rows(table: ConvergenceTable, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(table.header)
    for row in table.rows:
        writer.writerow([_fmt(v) for v in row])
