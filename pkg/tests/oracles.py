"""Independent exact oracles used by the tests.

Simplex integrals are computed symbolically with rational arithmetic:
``int_T b1^a b2^b b3^c dx = 2 |T| a! b! c! / (a + b + c + 2)!``.
"""

from fractions import Fraction
from math import comb, factorial

import numpy as np
import sympy as sp

B1, B2, X, Y = sp.symbols("b1 b2 x y")


def rational_triangle(rng, denom=8):
    """Random non-degenerate triangle with rational vertices ``k / denom``."""
    while True:
        v = [[Fraction(int(k), denom) for k in rng.integers(-2 * denom, 2 * denom, 2)]
             for _ in range(3)]
        area2 = (v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[1][1] - v[0][1]) * (v[2][0] - v[0][0])
        if abs(area2) >= Fraction(1, 2):
            return v, abs(area2) / 2


def random_polynomial(rng, degree):
    """``{(r, s): coeff}`` for ``sum coeff x^r y^s`` with small integer coefficients."""
    return {(r, s): int(rng.integers(-5, 6)) for r in range(degree + 1)
            for s in range(degree + 1 - r)}


def eval_polynomial(poly, pts):
    pts = np.asarray(pts, dtype=float)
    out = np.zeros(len(pts))
    for (r, s), c in poly.items():
        out += c * pts[:, 0] ** r * pts[:, 1] ** s
    return out


def _monomial_integral(a, b, c, area):
    return 2 * area * Fraction(factorial(a) * factorial(b) * factorial(c), factorial(a + b + c + 2))


def exact_bb_moments(verts, area, poly, m):
    """``int_T f B^m_{ijk}`` for all ``i + j + k = m`` in the package's ordering, exactly."""
    b3 = 1 - B1 - B2
    x = sp.Rational(verts[0][0]) * B1 + sp.Rational(verts[1][0]) * B2 + sp.Rational(verts[2][0]) * b3
    y = sp.Rational(verts[0][1]) * B1 + sp.Rational(verts[1][1]) * B2 + sp.Rational(verts[2][1]) * b3
    xp, yp = sp.Poly(x, B1, B2, domain="QQ"), sp.Poly(y, B1, B2, domain="QQ")
    xpow, ypow = [xp ** 0], [yp ** 0]
    deg = max(r + s for r, s in poly)
    for _ in range(deg):
        xpow.append(xpow[-1] * xp)
        ypow.append(ypow[-1] * yp)
    f = sp.Poly(0, B1, B2, domain="QQ")
    for (r, s), c in poly.items():
        if c:
            f += xpow[r] * ypow[s] * c
    terms = [(a, b, Fraction(int(c.p), int(c.q))) for (a, b), c in f.terms()]
    out = []
    for s_ in range(m + 1):
        for k in range(s_ + 1):
            j = s_ - k
            i = m - j - k
            mult = comb(m, i) * comb(m - i, j)
            out.append(mult * sum(c * _monomial_integral(a + i, b + j, k, area) for a, b, c in terms))
    return out
