import io

import numpy as np
import pytest

from conic_fem import domains
from conic_fem.errors import UsageError
from conic_fem.experiments import (EIGEN_HEADER, POISSON_HEADER, ConvergenceTable, ExperimentSpec,
                                   conic_solution, ellipse_solution, emit_table, run)

from sampling import boundary_points

SOLUTIONS = {"ellipse": (ellipse_solution, domains.ellipse_mesh),
             "conic": (conic_solution, domains.conic_mesh)}


def fd_check(u, grad, rhs, pts, h=1e-4):
    ex, ey = np.array([h, 0.0]), np.array([0.0, h])
    gx = (u(pts + ex) - u(pts - ex)) / (2 * h)
    gy = (u(pts + ey) - u(pts - ey)) / (2 * h)
    np.testing.assert_allclose(grad(pts), np.column_stack([gx, gy]), rtol=1e-6, atol=1e-7)
    lap = (u(pts + ex) + u(pts - ex) + u(pts + ey) + u(pts - ey) - 4 * u(pts)) / h ** 2
    np.testing.assert_allclose(rhs(pts), -lap, rtol=1e-4, atol=1e-4)


def test_ellipse_center_value():
    u, _, _ = ellipse_solution()
    assert u(np.zeros((1, 2)))[0] == pytest.approx(1 - np.exp(0.5), rel=1e-15)


@pytest.mark.parametrize("name", sorted(SOLUTIONS))
def test_solution_derivatives(name):
    u, grad, rhs = SOLUTIONS[name][0]()
    rng = np.random.default_rng(0)
    fd_check(u, grad, rhs, rng.uniform(-0.5, 0.5, (20, 2)))


@pytest.mark.parametrize("name", sorted(SOLUTIONS))
def test_solution_vanishes_on_boundary(name):
    make, mesh = SOLUTIONS[name]
    u, _, _ = make()
    assert np.abs(u(boundary_points(mesh()))).max() <= 1e-12


def test_empty_table_writes_header():
    buf = io.StringIO()
    emit_table(ConvergenceTable(POISSON_HEADER), buf)
    assert buf.getvalue() == "level,degree,N,h,L2,H1\n"


def test_two_level_run(tmp_path):
    table = run(ExperimentSpec("ellipse", degree=2, levels=2))
    assert [r[0] for r in table.rows] == [0, 1]
    assert table.rows[1][2] > table.rows[0][2]
    assert table.rows[1][4] < table.rows[0][4]
    path = tmp_path / "out.csv"
    emit_table(table, path)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(POISSON_HEADER) and len(lines) == 3


def test_eigen_rows():
    table = run(ExperimentSpec("disk-eigen", degree=2, levels=1))
    assert table.header == EIGEN_HEADER
    assert [r[4] for r in table.rows] == list(range(1, 16))
    lam = [r[5] for r in table.rows]
    assert lam == sorted(lam)


def test_p_study_decays_on_coarse_disk():
    table = run(ExperimentSpec("disk-eigen", study="p", degrees=tuple(range(2, 7)), levels=0))
    err = [r[6] for r in table.rows if r[4] == 1]
    assert all(b < a for a, b in zip(err, err[1:]))
    assert err[-1] < 1e-7


def test_p_study_needs_degrees():
    with pytest.raises(UsageError):
        ExperimentSpec("conic", study="p")


def test_unknown_problem():
    with pytest.raises(UsageError):
        run(ExperimentSpec("square"))


def test_runs_order():
    assert ExperimentSpec("conic", degree=4, levels=3).runs() == [(0, 4), (1, 4), (2, 4)]
    assert ExperimentSpec("conic", study="p", degrees=(2, 3)).runs() == [(2, 2), (2, 3)]
