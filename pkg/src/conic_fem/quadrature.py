"""Gauss rules on [0, 1], the Duffy map and quadrature on (curved) triangles.

A pie triangle ``T`` with boundary vertices ``v1, v2`` and interior vertex
``v3`` is the image of ``{0 <= t1 <= 1, 0 <= t2 <= phi(t1)}`` under the
collapsed-square map ``Phi``.  Gauss-Legendre in ``t1`` and Gauss-Jacobi
(weight ``s``) in ``t2 / phi(t1)`` give a tensor rule with positive weights.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import mpmath
from scipy.special import roots_jacobi

from .bernstein import Triangle, bernstein_1d, dim
from .conic import QuadraticForm, ray_height
from .errors import UsageError

KINDS = ("legendre", "jacobi_s")


@dataclass(frozen=True, eq=False)
class Rule1D:
    nodes: np.ndarray
    weights: np.ndarray
    kind: str

    def __len__(self):
        return self.nodes.size


def _jacobi_poly(n: int, a: int, b: int, x):
    """``P_n^{(a, b)}(x)`` by the three-term recurrence (works for mpmath numbers)."""
    if n == 0:
        return x * 0 + 1
    p0, p1 = x * 0 + 1, (a + 1) + (a + b + 2) * (x - 1) / 2
    for k in range(2, n + 1):
        s = 2 * k + a + b
        c1 = 2 * k * (k + a + b) * (s - 2)
        c2 = (s - 1) * (s * (s - 2) * x + a * a - b * b)
        c3 = 2 * (k + a - 1) * (k + b - 1) * s
        p0, p1 = p1, (c2 * p1 - c3 * p0) / c1
    return p1


def _polished_jacobi(q: int, alpha: int, beta: int):
    """Gauss-Jacobi nodes and weights on [-1, 1] correct to double precision.

    scipy's rules lose a few digits for moderate ``q``; each node is refined
    by Newton steps in 40-digit arithmetic and the weights follow from
    ``w = c / ((1 - x^2) P_q'(x)^2)``.
    """
    x0, _ = roots_jacobi(q, alpha, beta)
    # a private context: mpmath's global precision is not thread-safe
    ctx = mpmath.MPContext()
    ctx.dps = 40
    c = (ctx.mpf(2) ** (alpha + beta + 1) * ctx.gamma(q + alpha + 1)
         * ctx.gamma(q + beta + 1)
         / (ctx.gamma(q + alpha + beta + 1) * ctx.factorial(q)))
    nodes, weights = [], []
    for start in x0:
        x = ctx.mpf(float(start))
        for _ in range(8):
            p = _jacobi_poly(q, alpha, beta, x)
            dp = (q + alpha + beta + 1) / ctx.mpf(2) * _jacobi_poly(q - 1, alpha + 1, beta + 1, x)
            step = p / dp
            x -= step
            if abs(step) < ctx.mpf(10) ** -36:
                break
        dp = (q + alpha + beta + 1) / ctx.mpf(2) * _jacobi_poly(q - 1, alpha + 1, beta + 1, x)
        nodes.append(x)
        weights.append(c / ((1 - x * x) * dp * dp))
    # map to [0, 1] before rounding
    t = np.array([float((x + 1) / 2) for x in nodes])
    w = np.array([float(v / ctx.mpf(2) ** (alpha + beta + 1)) for v in weights])
    return t, w


@lru_cache(maxsize=None)
def rule_1d(kind: str, q: int) -> Rule1D:
    """``q``-point Gauss rule on [0, 1] for weight 1 (``legendre``) or ``s`` (``jacobi_s``).

    Exact for polynomials of degree ``2q - 1`` against the weight.
    """
    if q < 1:
        raise UsageError(f"quadrature needs at least one point, got q={q}")
    if kind == "legendre":
        nodes, w = _polished_jacobi(q, 0, 0)
    elif kind == "jacobi_s":
        # weight (1 + x) on [-1, 1] becomes 4 s on [0, 1]
        nodes, w = _polished_jacobi(q, 0, 1)
    else:
        raise UsageError(f"unknown rule kind {kind!r}; expected one of {KINDS}")
    nodes.setflags(write=False)
    w.setflags(write=False)
    return Rule1D(nodes, w, kind)


def duffy(tri: Triangle, t1, t2) -> np.ndarray:
    """``Phi(t1, t2) = b1 v1 + b2 v2 + b3 v3`` with ``b = ((1-t1) t2, t1 t2, 1-t2)``."""
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    b = np.stack([(1.0 - t1) * t2, t1 * t2, 1.0 - t2], axis=-1)
    return b @ tri.vertices


@dataclass(frozen=True, eq=False)
class CurvedRule:
    """Tensor rule with ``len(t1) * len(t2)`` centers, ordered ``[mu, nu]``.

    ``phi`` is the ray height per ``t1`` node (ones on straight triangles) and
    ``bary`` the barycentric coordinates of the centers w.r.t. ``triangle``.
    """

    triangle: Triangle
    t1: Rule1D
    t2: Rule1D
    phi: np.ndarray
    centers: np.ndarray
    weights: np.ndarray
    bary: np.ndarray

    def integrate(self, values) -> np.ndarray:
        return np.asarray(values) @ self.weights


@lru_cache(maxsize=None)
def _unit_rule(q1: int, q2: int):
    r1, r2 = rule_1d("legendre", q1), rule_1d("jacobi_s", q2)
    return r1, r2


def curved_rule(tri: Triangle, q_form: QuadraticForm | None, q: int,
                q1: int | None = None) -> CurvedRule:
    """Positive rule for ``T`` (curved when ``q_form`` is given).

    ``q`` is the number of points in ``t2``; ``q1`` (default ``q``) in ``t1``.
    On a straight triangle it is exact for polynomials of degree ``2 min(q, q1) - 1``.
    """
    q1 = q if q1 is None else q1
    if q < 1 or q1 < 1:
        raise UsageError("quadrature orders must be positive")
    r1, r2 = _unit_rule(q1, q)
    if q_form is None:
        phi = np.ones(q1)
    else:
        if q_form.triangle is not tri and not np.array_equal(q_form.triangle.vertices, tri.vertices):
            raise UsageError("quadratic form is defined on a different triangle")
        phi = np.asarray(ray_height(q_form, r1.nodes), dtype=float)
    t1 = np.repeat(r1.nodes, q)
    t2 = (phi[:, None] * r2.nodes[None, :]).ravel()
    bary = np.stack([(1.0 - t1) * t2, t1 * t2, 1.0 - t2], axis=-1)
    centers = bary @ tri.vertices
    weights = 2.0 * tri.area * ((r1.weights * phi ** 2)[:, None] * r2.weights[None, :]).ravel()
    return CurvedRule(tri, r1, r2, phi, centers, weights, bary)


@lru_cache(maxsize=64)
def _rank_blocks(m: int):
    """For each k: target ranks of ``(m-j-k, j, k)``, ``j = 0..m-k``."""
    out = []
    for k in range(m + 1):
        s = np.arange(m - k + 1) + k
        out.append(s * (s + 1) // 2 + k)
    return out


def moments_from_values(rule: CurvedRule, m: int, values) -> np.ndarray:
    """Sum-factorized BB-moments of degree ``m`` from values at the rule centers.

    ``values`` has shape ``(..., n_centers)``; the result ``(..., dim(m))``.
    Uses ``B^m_{ijk}(Phi(t1, t2)) = B^{m-k}_j(t1) * C(m, k) t2^(m-k) (1-t2)^k``.
    """
    values = np.asarray(values, dtype=float)
    lead = values.shape[:-1]
    n1, n2 = len(rule.t1), len(rule.t2)
    f = values.reshape(lead + (n1, n2))
    # inner stage: sigma[mu, k], O(q^2 m)
    bt2 = bernstein_1d(m, (rule.phi[:, None] * rule.t2.nodes[None, :]).ravel())
    bt2 = bt2.reshape(n1, n2, m + 1)[..., ::-1]
    sigma = np.einsum("n,...un,unk->...uk", rule.t2.weights, f, bt2, optimize=True)
    # outer stage, O(q m^2)
    scale = 2.0 * rule.triangle.area * rule.t1.weights * rule.phi ** 2
    out = np.zeros(lead + (dim(m),))
    blocks = _rank_blocks(m)
    for k in range(m + 1):
        bt1 = bernstein_1d(m - k, rule.t1.nodes)            # (n1, m-k+1) over j
        out[..., blocks[k]] = np.einsum("u,...u,uj->...j", scale, sigma[..., k], bt1)
    return out


def sum_factorization_cost(q1: int, q2: int, m: int) -> tuple[int, int]:
    """Multiply-add counts of the inner and outer moment stages."""
    inner = q1 * q2 * (m + 1)
    outer = q1 * sum(m - k + 1 for k in range(m + 1))
    return inner, outer


def bb_moments(tri: Triangle, q_form: QuadraticForm | None, m: int, f, q: int,
               q1: int | None = None) -> np.ndarray:
    """Moments ``int_T f B^m_{ijk} dx`` over ``D_{m,T*}`` (``f`` maps (n,2) -> (n,)).

    On straight triangles the result is exact for ``f`` of degree
    ``2q - m - 1`` provided ``q > m / 2``.
    """
    if 2 * q <= m:
        warnings.warn(f"q={q} <= m/2={m / 2}: moment rule is not exact for any degree",
                      stacklevel=2)
    rule = curved_rule(tri, q_form, q, q1)
    vals = np.asarray(f(rule.centers), dtype=float)
    if vals.ndim == 0:
        vals = np.full(rule.centers.shape[0], float(vals))
    return moments_from_values(rule, m, vals)
