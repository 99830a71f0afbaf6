"""Built-in initial triangulations of the experiment domains."""

from __future__ import annotations

import numpy as np

from .conic import fit_arc
from .errors import UsageError
from .mesh import CurvedTriangulation


def _assemble(vertices, triangles, arcs_by_tri) -> CurvedTriangulation:
    tri_arc = np.full(len(triangles), -1, dtype=np.int64)
    arcs = []
    for t, arc in sorted(arcs_by_tri.items()):
        tri_arc[t] = len(arcs)
        arcs.append(arc)
    return CurvedTriangulation(np.asarray(vertices, dtype=float),
                               np.asarray(triangles, dtype=np.int64), tuple(arcs), tri_arc)


def _ellipse_arc(a, b, th0, th1):
    def point(th):
        return np.array([a * np.cos(th), b * np.sin(th)])

    def tangent(th):
        return np.array([-a * np.sin(th), b * np.cos(th)])

    return fit_arc(point(th0), point(th1), tangent(th0), tangent(th1),
                   lambda x: 1.0 - (x[0] / a) ** 2 - (x[1] / b) ** 2)


def disk_fan() -> CurvedTriangulation:
    """Unit disk split into four quarter-disk pie triangles around the origin."""
    verts = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)]
    tris, arcs = [], {}
    for i in range(4):
        tris.append((1 + i, 1 + (i + 1) % 4, 0))
        arcs[i] = _ellipse_arc(1.0, 1.0, 0.5 * np.pi * i, 0.5 * np.pi * (i + 1))
    return _assemble(verts, tris, arcs)


def ring_mesh(a: float, b: float, n: int, inner: float = 0.5) -> CurvedTriangulation:
    """Ellipse ``(x/a)^2 + (y/b)^2 <= 1`` with ``n`` arcs, a buffer ring and a central fan.

    Vertices: the center, ``n`` boundary points at parameter angles
    ``2 pi i / n`` and ``n`` inner points at the mid-angles scaled by ``inner``.
    """
    th = 2.0 * np.pi * np.arange(n) / n
    mid = th + np.pi / n
    outer = np.column_stack([a * np.cos(th), b * np.sin(th)])
    ring = inner * np.column_stack([a * np.cos(mid), b * np.sin(mid)])
    verts = np.vstack([[0.0, 0.0], outer, ring])
    o = 1 + np.arange(n)
    r = 1 + n + np.arange(n)
    tris, arcs = [], {}
    for i in range(n):
        i1 = (i + 1) % n
        arcs[len(tris)] = _ellipse_arc(a, b, th[i], th[i] + 2.0 * np.pi / n)
        tris.append((o[i], o[i1], r[i]))
    for i in range(n):
        i1 = (i + 1) % n
        tris.append((o[i1], r[i1], r[i]))
    for i in range(n):
        i1 = (i + 1) % n
        tris.append((0, r[i], r[i1]))
    return _assemble(verts, tris, arcs)


def ellipse_mesh() -> CurvedTriangulation:
    """Domain ``x^2 + 6.25 y^2 <= 1`` with 8 boundary arcs."""
    return ring_mesh(1.0, 0.4, 8, inner=0.75)


def disk_mesh(n: int = 10) -> CurvedTriangulation:
    """Unit disk with ``n`` boundary arcs and a buffer ring."""
    return ring_mesh(1.0, 1.0, n, inner=0.75)


def conic_mesh() -> CurvedTriangulation:
    """Domain between ``y = +-2`` and the parabolas ``x = +-(y^2 - 6)``."""
    verts = [(0.0, 0.0), (3.0, 0.0), (-3.0, 0.0),
             (2.0, 2.0), (-2.0, 2.0), (-2.0, -2.0), (2.0, -2.0),
             (6.0, 0.0), (-6.0, 0.0), (0.0, 2.0), (0.0, -2.0)]
    c, r, l, A, B, C, D, E, F, top, bot = range(11)

    def parabola_arc(y0, y1, sign):
        p0 = np.array([sign * (6.0 - y0 * y0), y0])
        p2 = np.array([sign * (6.0 - y1 * y1), y1])
        return fit_arc(p0, p2, np.array([-2.0 * sign * y0, 1.0]), np.array([-2.0 * sign * y1, 1.0]),
                       lambda x: 6.0 - x[1] ** 2 - sign * x[0])

    tris = [(D, E, r), (E, A, r), (B, F, l), (F, C, l),
            (A, top, r), (D, r, bot), (B, l, top), (C, bot, l),
            (r, top, c), (top, l, c), (l, bot, c), (bot, r, c)]
    arcs = {0: parabola_arc(-2.0, 0.0, 1.0), 1: parabola_arc(0.0, 2.0, 1.0),
            2: parabola_arc(2.0, 0.0, -1.0), 3: parabola_arc(0.0, -2.0, -1.0)}
    return _assemble(verts, tris, arcs)


def square_mesh(n: int = 2, size: float = 1.0) -> CurvedTriangulation:
    """Straight ``n x n`` grid on ``[0, size]^2`` with alternating cell diagonals.

    For even ``n`` no triangle has two boundary edges, so every refinement
    stays admissible.
    """
    if n < 2 or n % 2:
        raise UsageError(f"grid size must be even, got {n}")
    xs = np.linspace(0.0, size, n + 1)
    verts = np.array([(x, y) for y in xs for x in xs])
    tris = []
    for j in range(n):
        for i in range(n):
            a = j * (n + 1) + i
            b, c, d = a + 1, a + n + 1, a + n + 2
            if (i + j) % 2 == 0:
                tris += [(a, b, d), (a, d, c)]
            else:
                tris += [(a, b, c), (b, d, c)]
    return _assemble(verts, tris, {})
