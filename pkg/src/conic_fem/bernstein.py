"""Bivariate Bernstein-Bezier kernels on a triangle.

Coefficient vectors of degree ``d`` are indexed by the multi-indices
``(i, j, k)``, ``i + j + k = d``, ordered lexicographically with ``i``
descending first and ``j`` descending second::

    d = 2:  (2,0,0) (1,1,0) (1,0,1) (0,2,0) (0,1,1) (0,0,2)

With ``s = j + k`` the position of ``(i, j, k)`` is ``s*(s+1)/2 + k``, which
does not depend on ``d``.  Every module of the package uses this ordering.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb, factorial

import numpy as np

from .errors import GeometryError, UsageError

_DEGENERATE_REL = 1e-14


def dim(d: int) -> int:
    """Number of Bernstein polynomials of degree ``d``."""
    return (d + 1) * (d + 2) // 2


def rank(i: int, j: int, k: int) -> int:
    s = j + k
    return s * (s + 1) // 2 + k


@lru_cache(maxsize=None)
def multi_indices(d: int) -> np.ndarray:
    """All ``(i, j, k)`` with ``i + j + k = d`` as an ``(dim(d), 3)`` array."""
    out = [(d - s, s - k, k) for s in range(d + 1) for k in range(s + 1)]
    arr = np.array(out, dtype=np.int64).reshape(-1, 3)
    arr.setflags(write=False)
    return arr


@lru_cache(maxsize=None)
def multinomials(d: int) -> np.ndarray:
    idx = multi_indices(d)
    out = np.array([factorial(d) // (factorial(i) * factorial(j) * factorial(k))
                    for i, j, k in idx], dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Triangle:
    """A non-degenerate planar triangle ``<v1, v2, v3>``."""

    vertices: np.ndarray
    signed_area: float = field(init=False)

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float).reshape(3, 2)
        v.setflags(write=False)
        e1, e2 = v[1] - v[0], v[2] - v[0]
        area = 0.5 * (e1[0] * e2[1] - e1[1] * e2[0])
        scale = max(np.dot(e1, e1), np.dot(e2, e2), np.dot(v[2] - v[1], v[2] - v[1]))
        if scale == 0.0 or abs(area) <= _DEGENERATE_REL * scale:
            raise GeometryError(f"degenerate triangle {v.tolist()}")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "signed_area", float(area))

    @classmethod
    def from_points(cls, v1, v2, v3) -> "Triangle":
        return cls(np.array([v1, v2, v3], dtype=float))

    @property
    def v1(self) -> np.ndarray:
        return self.vertices[0]

    @property
    def v2(self) -> np.ndarray:
        return self.vertices[1]

    @property
    def v3(self) -> np.ndarray:
        return self.vertices[2]

    @property
    def area(self) -> float:
        return abs(self.signed_area)

    @property
    def jacobian(self) -> np.ndarray:
        """Columns ``v2 - v1`` and ``v3 - v1``."""
        v = self.vertices
        return np.column_stack([v[1] - v[0], v[2] - v[0]])

    def barycentric(self, p) -> np.ndarray:
        """Barycentric coordinates of one point ``(2,)`` or many ``(n, 2)``."""
        p = np.asarray(p, dtype=float)
        v = self.vertices
        e1, e2 = v[1] - v[0], v[2] - v[0]
        r = p.reshape(-1, 2) - v[0]
        # Cramer's rule reproduces the vertices exactly
        den = e1[0] * e2[1] - e1[1] * e2[0]
        b2 = (r[:, 0] * e2[1] - r[:, 1] * e2[0]) / den
        b3 = (e1[0] * r[:, 1] - e1[1] * r[:, 0]) / den
        out = np.column_stack([1.0 - b2 - b3, b2, b3])
        return out.reshape(p.shape[:-1] + (3,))

    def cartesian(self, b) -> np.ndarray:
        return np.asarray(b, dtype=float) @ self.vertices

    def barycentric_gradients(self) -> np.ndarray:
        """Rows are the constant gradients of ``b1, b2, b3``."""
        jinv = np.linalg.inv(self.jacobian)  # rows: grad b2, grad b3
        g = np.empty((3, 2))
        g[1:] = jinv
        g[0] = -jinv.sum(axis=0)
        return g

    def domain_points(self, d: int) -> np.ndarray:
        return multi_indices(d) @ self.vertices / d


def barycentric(tri: Triangle, p) -> np.ndarray:
    return tri.barycentric(p)


@dataclass(frozen=True, eq=False)
class BBPatch:
    """A polynomial of degree ``degree`` in BB-form over ``triangle``."""

    degree: int
    coeffs: np.ndarray
    triangle: Triangle | None = None

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float).ravel()
        if self.degree < 0 or c.size != dim(self.degree):
            raise UsageError(
                f"degree {self.degree} needs {dim(max(self.degree, 0))} coefficients, got {c.size}")
        object.__setattr__(self, "coeffs", c)

    def coefficient(self, i: int, j: int, k: int) -> float:
        return float(self.coeffs[rank(i, j, k)])

    def __call__(self, b) -> np.ndarray:
        return eval_bb(self, b)


def _triangular(coeffs: np.ndarray, d: int) -> np.ndarray:
    """Coefficients rearranged as ``C[..., i, j]``; entries with i+j > d unused."""
    idx = multi_indices(d)
    out = np.zeros(coeffs.shape[:-1] + (d + 1, d + 1))
    out[..., idx[:, 0], idx[:, 1]] = coeffs
    return out


def de_casteljau(coeffs: np.ndarray, d: int, b) -> np.ndarray:
    """Evaluate BB-form(s) of degree ``d`` at barycentric points ``b`` (..., 3)."""
    b = np.asarray(b, dtype=float)
    c = _triangular(np.asarray(coeffs, dtype=float), d)
    # broadcast points over the triangular array
    b1 = b[..., 0, None, None]
    b2 = b[..., 1, None, None]
    b3 = b[..., 2, None, None]
    if d == 0:
        return c[..., 0, 0] * np.ones(b.shape[:-1])
    for _ in range(d):
        c = b1 * c[..., 1:, :-1] + b2 * c[..., :-1, 1:] + b3 * c[..., :-1, :-1]
    return c[..., 0, 0]


def eval_bb(patch: BBPatch, b) -> np.ndarray | float:
    """Value of ``patch`` at barycentric point(s) ``b`` by de Casteljau."""
    out = de_casteljau(patch.coeffs, patch.degree, b)
    return float(out) if np.ndim(out) == 0 else out


def bernstein_values(d: int, b) -> np.ndarray:
    """All ``B^d_{ijk}`` at barycentric points ``b`` (n, 3) -> (n, dim(d))."""
    b = np.atleast_2d(np.asarray(b, dtype=float))
    idx = multi_indices(d)
    pw = b[:, None, :] ** idx[None, :, :]
    return multinomials(d) * pw.prod(axis=2)


def bernstein_1d(n: int, t) -> np.ndarray:
    """Univariate ``B^n_nu(t) = C(n, nu) t^nu (1-t)^(n-nu)``, shape (len(t), n+1)."""
    t = np.asarray(t, dtype=float).reshape(-1, 1)
    nu = np.arange(n + 1)
    binom = np.array([comb(n, v) for v in nu], dtype=float)
    return binom * t ** nu * (1.0 - t) ** (n - nu)


@lru_cache(maxsize=None)
def raise_matrix(d: int) -> np.ndarray:
    """Matrix mapping degree-``d`` coefficients to degree ``d+1``."""
    hi = multi_indices(d + 1)
    out = np.zeros((dim(d + 1), dim(d)))
    for row, (i, j, k) in enumerate(hi):
        if i:
            out[row, rank(i - 1, j, k)] += i / (d + 1)
        if j:
            out[row, rank(i, j - 1, k)] += j / (d + 1)
        if k:
            out[row, rank(i, j, k - 1)] += k / (d + 1)
    out.setflags(write=False)
    return out


def degree_raise(patch: BBPatch) -> BBPatch:
    return BBPatch(patch.degree + 1, raise_matrix(patch.degree) @ patch.coeffs, patch.triangle)


@lru_cache(maxsize=None)
def product_table(d: int, q: int) -> tuple[np.ndarray, np.ndarray]:
    """Target ranks and weights for ``B^d_a * B^q_b = w B^{d+q}_{a+b}``.

    Both arrays have shape ``(dim(d), dim(q))``.
    """
    a = multi_indices(d)
    b = multi_indices(q)
    tot = a[:, None, :] + b[None, :, :]
    s = tot[..., 1] + tot[..., 2]
    target = s * (s + 1) // 2 + tot[..., 2]
    num = np.ones(target.shape)
    for ax in range(3):
        num *= np.vectorize(comb)(tot[..., ax], a[:, None, ax])
    weights = num / comb(d + q, d)
    target.setflags(write=False)
    weights.setflags(write=False)
    return target, weights


def bb_product(p: BBPatch, r: BBPatch) -> BBPatch:
    """BB-form of the product ``p * r`` (degree ``p.degree + r.degree``)."""
    if p.triangle is not None and r.triangle is not None and p.triangle is not r.triangle:
        if not np.allclose(p.triangle.vertices, r.triangle.vertices, rtol=0, atol=0):
            raise UsageError("BB product of patches on different triangles")
    target, weights = product_table(p.degree, r.degree)
    out = np.zeros(dim(p.degree + r.degree))
    np.add.at(out, target, weights * np.outer(p.coeffs, r.coeffs))
    return BBPatch(p.degree + r.degree, out, p.triangle or r.triangle)


def qmult_matrix(omega110: float, omega101: float, omega011: float, d: int) -> np.ndarray:
    """Matrix of ``c -> a`` for ``q * p``, ``p`` of degree ``d-1``, result degree ``d+1``.

    ``q = w110 B_110 + w101 B_101 + w011 B_011 + B_002`` (quadratic, q(v3) = 1).
    Column ``(i,j,k)`` holds the four nonzeros at ``(i+1,j+1,k)``,
    ``(i+1,j,k+1)``, ``(i,j+1,k+1)`` and ``(i,j,k+2)``.
    """
    if d < 1:
        raise UsageError("multiplication by q needs d >= 1")
    den = d * (d + 1)
    out = np.zeros((dim(d + 1), dim(d - 1)))
    for col, (i, j, k) in enumerate(multi_indices(d - 1)):
        out[rank(i + 1, j + 1, k), col] += 2 * (i + 1) * (j + 1) * omega110 / den
        out[rank(i + 1, j, k + 1), col] += 2 * (i + 1) * (k + 1) * omega101 / den
        out[rank(i, j + 1, k + 1), col] += 2 * (j + 1) * (k + 1) * omega011 / den
        out[rank(i, j, k + 2), col] += (k + 1) * (k + 2) / den
    return out


def multiply_quadratic(q, p: BBPatch) -> BBPatch:
    """BB-coefficients of ``q * p`` on the pie triangle's companion ``T*``.

    ``q`` is a normalized quadratic form (``omega200 = omega020 = 0``,
    ``omega002 = 1``) exposing ``omega110``, ``omega101``, ``omega011``.
    """
    d = p.degree + 1
    mat = qmult_matrix(q.omega110, q.omega101, q.omega011, d)
    return BBPatch(d + 1, mat @ p.coeffs, p.triangle)


def directional_derivative(coeffs: np.ndarray, d: int, u) -> np.ndarray:
    """BB-coefficients (degree d-1) of the derivative along directional coords ``u``."""
    if d == 0:
        return np.zeros(1)
    coeffs = np.asarray(coeffs, dtype=float)
    lo = multi_indices(d - 1)
    out = np.zeros(coeffs.shape[:-1] + (dim(d - 1),))
    for ax in range(3):
        if u[ax] == 0:
            continue
        shifted = lo.copy()
        shifted[:, ax] += 1
        s = shifted[:, 1] + shifted[:, 2]
        out += u[ax] * coeffs[..., s * (s + 1) // 2 + shifted[:, 2]]
    return d * out


def grad_bb(patch: BBPatch, b) -> np.ndarray:
    """Cartesian gradient of ``patch`` at barycentric point(s) ``b``."""
    if patch.triangle is None:
        raise UsageError("gradient needs the patch's triangle")
    d = patch.degree
    # derivatives along v2 - v1 and v3 - v1
    d1 = de_casteljau(directional_derivative(patch.coeffs, d, (-1, 1, 0)), max(d - 1, 0), b)
    d2 = de_casteljau(directional_derivative(patch.coeffs, d, (-1, 0, 1)), max(d - 1, 0), b)
    rhs = np.stack([np.atleast_1d(d1), np.atleast_1d(d2)])
    g = np.linalg.solve(patch.triangle.jacobian.T, rhs).T
    return g[0] if np.ndim(d1) == 0 else g
