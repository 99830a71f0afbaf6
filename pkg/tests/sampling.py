"""Random geometry shared by the test modules."""

import numpy as np

from conic_fem.assembly import PdeCoefficients
from conic_fem.conic import RationalArc, eval_arc, implicitize, ray_height
from conic_fem.errors import GeometryError


def random_arc_and_form(rng, beta_range=(0.3, 3.0)):
    """A random arc with a pie apex ``v3`` for which the implicit form is positive."""
    while True:
        p0 = rng.uniform(-1, 1, 2)
        p2 = rng.uniform(-1, 1, 2)
        if np.linalg.norm(p2 - p0) < 0.2:
            continue
        chord = p2 - p0
        normal = np.array([-chord[1], chord[0]])
        p1 = 0.5 * (p0 + p2) + rng.uniform(-0.6, 0.6) * chord + rng.uniform(0.1, 1.0) * normal
        v3 = 0.5 * (p0 + p2) - rng.uniform(0.3, 1.5) * normal + rng.uniform(-0.3, 0.3) * chord
        arc = RationalArc(p0, p1, p2, rng.uniform(*beta_range))
        try:
            q = implicitize(arc, v3)
        except GeometryError:
            continue
        return arc, q


def interior_points(mesh, n, rng):
    """Random points in the domain, drawn per triangle along the Duffy rays."""
    pts = []
    for _ in range(n):
        t = rng.integers(mesh.n_triangles)
        tri = mesh.companions[t]
        q = mesh.qforms[t]
        tau, s = rng.uniform(0.02, 0.98, 2)
        if q is None:
            b = np.array([(1 - tau) * s, tau * s, 1 - s])
            pts.append(b @ tri.vertices)
        else:
            pts.append(q.ray(tau, s * ray_height(q, tau)))
    return np.array(pts)


def boundary_points(mesh, per_edge=10):
    pts = []
    for t in range(mesh.n_triangles):
        arc = mesh.arc_of(t)
        if arc is not None:
            pts.append(eval_arc(arc, np.linspace(0, 1, per_edge)))
    for eid in np.flatnonzero(mesh.boundary_edges):
        if mesh.edge_arc[eid] < 0:
            a, b = mesh.vertices[mesh.edges[eid]]
            s = np.linspace(0, 1, per_edge)[:, None]
            pts.append((1 - s) * a + s * b)
    return np.vstack(pts)


def smooth_coefficients(rng):
    """Random smooth coefficients with ``A`` uniformly positive definite."""
    a = rng.uniform(0.5, 1.5, 3)

    def A(x):
        s = 1.0 + 0.3 * np.sin(x[:, 0] + a[0] * x[:, 1])
        off = 0.2 * np.cos(a[1] * x[:, 0])
        return np.stack([np.stack([s, off], -1), np.stack([off, 2.0 + x[:, 1] ** 2], -1)], -2)

    return PdeCoefficients(
        A=A,
        b=lambda x: np.column_stack([np.cos(x[:, 1]), a[2] * x[:, 0]]),
        c=lambda x: 1.0 + np.exp(-x[:, 0] ** 2),
        f=lambda x: np.sin(3 * x[:, 0]) * x[:, 1] + 1.0,
    )
