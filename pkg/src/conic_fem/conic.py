"""Rational quadratic Bezier boundary arcs and their implicit quadratic forms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .bernstein import BBPatch, Triangle, grad_bb
from .errors import GeometryError

ROOT_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class RationalArc:
    """Quadratic rational Bezier curve in standard form (end weights 1).

    ``B(t) = (P0 B0(t) + beta P1 B1(t) + P2 B2(t)) / (B0(t) + beta B1(t) + B2(t))``
    """

    p0: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    beta: float

    def __post_init__(self):
        for name in ("p0", "p1", "p2"):
            pt = np.array(getattr(self, name), dtype=float).reshape(2)
            pt.setflags(write=False)
            object.__setattr__(self, name, pt)
        if not self.beta > 0:
            raise GeometryError(f"arc weight must be positive, got {self.beta}")
        object.__setattr__(self, "beta", float(self.beta))

    @property
    def kind(self) -> str:
        """``'parabola'``, ``'ellipse'`` or ``'hyperbola'`` according to the weight."""
        if abs(self.beta - 1.0) <= 1e-12:
            return "parabola"
        return "ellipse" if self.beta < 1.0 else "hyperbola"

    @property
    def shoulder(self) -> np.ndarray:
        s = self.beta / (self.beta + 1.0)
        return (1.0 - s) * 0.5 * (self.p0 + self.p2) + s * self.p1

    def reversed(self) -> "RationalArc":
        return RationalArc(self.p2, self.p1, self.p0, self.beta)

    def __call__(self, t):
        return eval_arc(self, t)


@dataclass(frozen=True)
class StraightSegment:
    a: tuple
    b: tuple

    def __post_init__(self):
        if np.allclose(self.a, self.b, rtol=0, atol=0):
            raise GeometryError("straight segment with coincident endpoints")


def eval_arc(arc: RationalArc, t):
    """Point(s) of ``arc`` at parameter(s) ``t`` in [0, 1]."""
    t = np.asarray(t, dtype=float)
    s = 1.0 - t
    w0, w1, w2 = s * s, 2.0 * arc.beta * s * t, t * t
    den = w0 + w1 + w2
    num = (w0[..., None] * arc.p0 + w1[..., None] * arc.p1 + w2[..., None] * arc.p2)
    return num / den[..., None]


def subdivide_arc(arc: RationalArc) -> tuple[RationalArc, RationalArc]:
    """Split at ``t = 1/2``; both halves are returned in standard form.

    The projective de Casteljau step leaves the halves with weights
    ``(1, w, w)`` and ``(w, w, 1)``, ``w = (1 + beta)/2``; the standard-form
    weight is ``w1 / sqrt(w0 w2) = sqrt(w)``.
    """
    b = arc.beta
    left_mid = (arc.p0 + b * arc.p1) / (1.0 + b)
    right_mid = (b * arc.p1 + arc.p2) / (1.0 + b)
    split = (arc.p0 + 2.0 * b * arc.p1 + arc.p2) / (2.0 + 2.0 * b)
    beta_child = np.sqrt(0.5 * (1.0 + b))
    return (RationalArc(arc.p0, left_mid, split, beta_child),
            RationalArc(split, right_mid, arc.p2, beta_child))


@dataclass(frozen=True, eq=False)
class QuadraticForm:
    """``q = 2(w110 b1 b2 + w101 b1 b3 + w011 b2 b3) + b3^2`` over ``triangle``.

    The triangle is the straight companion ``T* = <v1, v2, v3>`` of a pie
    triangle: ``v1, v2`` are the arc end points and ``v3`` the interior vertex,
    so ``q(v1) = q(v2) = 0`` and ``q(v3) = 1``.
    """

    omega110: float
    omega101: float
    omega011: float
    triangle: Triangle
    mu: float | None = None

    omega002 = 1.0

    @property
    def omegas(self) -> tuple[float, float, float]:
        return (self.omega110, self.omega101, self.omega011)

    def as_patch(self) -> BBPatch:
        c = np.array([0.0, self.omega110, self.omega101, 0.0, self.omega011, 1.0])
        return BBPatch(2, c, self.triangle)

    def at_barycentric(self, b) -> np.ndarray:
        b = np.asarray(b, dtype=float)
        b1, b2, b3 = b[..., 0], b[..., 1], b[..., 2]
        return 2.0 * (self.omega110 * b1 * b2 + self.omega101 * b1 * b3
                      + self.omega011 * b2 * b3) + b3 * b3

    def __call__(self, x) -> np.ndarray:
        return self.at_barycentric(self.triangle.barycentric(x))

    def gradient(self, x) -> np.ndarray:
        return grad_bb(self.as_patch(), self.triangle.barycentric(x))

    def ray(self, tau, t) -> np.ndarray:
        """The Duffy point ``v3 + t((1 - tau) v1 + tau v2 - v3)``."""
        v = self.triangle.vertices
        tau = np.asarray(tau, dtype=float)
        t = np.asarray(t, dtype=float)
        base = (1.0 - tau)[..., None] * v[0] + tau[..., None] * v[1]
        return v[2] + t[..., None] * (base - v[2])


def implicitize(arc: RationalArc, v3) -> QuadraticForm:
    """Implicit normalized quadratic of the conic carrying ``arc``.

    ``alpha`` are the barycentric coordinates of ``P1`` with respect to
    ``T* = <P0, P2, v3>``; ``mu = 2 beta^2 alpha3 / (1 - 4 beta^2 alpha1 alpha2)``.
    """
    tri = Triangle.from_points(arc.p0, arc.p2, v3)
    a1, a2, a3 = tri.barycentric(arc.p1)
    if abs(a3) <= 1e-13 * max(1.0, abs(a1), abs(a2)):
        raise GeometryError("control point on the chord: the arc is a straight segment")
    bb = arc.beta * arc.beta
    den = 1.0 - 4.0 * bb * a1 * a2
    if abs(den) <= 1e-13 * max(1.0, 4.0 * bb * abs(a1 * a2)):
        raise GeometryError("the conic passes through the interior vertex")
    mu = 2.0 * bb * a3 / den
    if not mu > 0:
        raise GeometryError(f"quadratic form not positive inside the pie triangle (mu = {mu:.3e})")
    return QuadraticForm(float(-a3 * mu), float(a2 * mu), float(a1 * mu), tri, float(mu))


def quadratic_roots_first_positive(a, b, c) -> np.ndarray:
    """Smallest root > ROOT_FLOOR of ``a t^2 + b t + c`` (NaN if none)."""
    a, b, c = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (a, b, c)))
    scale = np.maximum(np.abs(b), np.abs(c))
    lin = np.abs(a) <= 1e-15 * np.maximum(scale, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        r_lin = np.where(lin & (b != 0), -c / np.where(b != 0, b, 1.0), np.nan)
        disc = b * b - 4.0 * a * c
        sq = np.sqrt(np.where(disc >= 0, disc, np.nan))
        qq = -0.5 * (b + np.copysign(sq, b))
        r1 = qq / a
        r2 = c / qq
    roots = np.stack([np.where(lin, r_lin, r1), np.where(lin, np.nan, r2)])
    roots = np.where(roots > ROOT_FLOOR, roots, np.inf)
    best = roots.min(axis=0)
    return np.where(np.isfinite(best), best, np.nan)


def ray_height(q: QuadraticForm, tau) -> np.ndarray | float:
    """First positive root ``phi(tau)`` of ``q`` restricted to the Duffy ray.

    ``q~(t) = (1-t)^2 + (w101 (1-tau) + w011 tau) 2t(1-t) + 2 w110 (1-tau) tau t^2``
    """
    tau_arr = np.asarray(tau, dtype=float)
    mid = q.omega101 * (1.0 - tau_arr) + q.omega011 * tau_arr
    top = 2.0 * q.omega110 * (1.0 - tau_arr) * tau_arr
    # power-basis coefficients of q~
    a = 1.0 - 2.0 * mid + top
    b = 2.0 * mid - 2.0
    phi = quadratic_roots_first_positive(a, b, np.ones_like(a))
    if np.any(np.isnan(phi)):
        raise GeometryError("ray from the interior vertex does not meet the arc "
                            "(pie triangle not star-shaped)")
    return float(phi) if np.ndim(phi) == 0 else phi


def line_intersection(p, u, r, w) -> np.ndarray:
    """Intersection of the lines ``p + s u`` and ``r + t w``."""
    mat = np.column_stack([u, -np.asarray(w, dtype=float)])
    if abs(np.linalg.det(mat)) <= 1e-14 * np.linalg.norm(u) * np.linalg.norm(w):
        raise GeometryError("parallel tangents: the arc spans half a conic or more")
    s, _ = np.linalg.solve(mat, np.asarray(r, dtype=float) - np.asarray(p, dtype=float))
    return np.asarray(p, dtype=float) + s * np.asarray(u, dtype=float)


def fit_arc(p0, p2, tangent0, tangent2, conic, xtol: float = 1e-14) -> RationalArc:
    """Rational Bezier form of the piece of a conic between ``p0`` and ``p2``.

    ``P1`` is the intersection of the end tangents and ``beta`` is chosen so
    that the shoulder point ``(1-s) M + s P1`` lies on the zero set of the
    Cartesian quadratic ``conic(x)``.
    """
    p0 = np.asarray(p0, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    p1 = line_intersection(p0, tangent0, p2, tangent2)
    mid = 0.5 * (p0 + p2)

    def g(s):
        return conic((1.0 - s) * mid + s * p1)

    lo, hi = 1e-9, 1.0 - 1e-9
    if g(lo) * g(hi) > 0:
        raise GeometryError("no shoulder point found between chord midpoint and P1")
    s = brentq(g, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200)
    return RationalArc(p0, p1, p2, s / (1.0 - s))
