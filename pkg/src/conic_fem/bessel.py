"""Zeros of Bessel functions ``J_m`` and the Dirichlet eigenvalues of the unit disk."""

from __future__ import annotations

from functools import lru_cache

import mpmath

_DPS = 30


def bessel_j(m: int, x) -> mpmath.mpf:
    """``J_m(x)`` from the ascending series, summed in 30-digit arithmetic."""
    with mpmath.workdps(_DPS):
        x = mpmath.mpf(x)
        half = x / 2
        term = half ** m / mpmath.factorial(m)
        total = term
        k = 0
        while True:
            k += 1
            term *= -half * half / (k * (k + m))
            total += term
            if abs(term) < mpmath.mpf(10) ** (-_DPS) * max(abs(total), 1):
                break
        return +total


@lru_cache(maxsize=None)
def bessel_zeros(m: int, xmax: float, step: float = 0.1) -> tuple[float, ...]:
    """Positive zeros of ``J_m`` below ``xmax``, bracketed on a grid and bisected."""
    out = []
    with mpmath.workdps(_DPS):
        a = mpmath.mpf(step)
        fa = bessel_j(m, a)
        while a < xmax:
            b = a + step
            fb = bessel_j(m, b)
            if fa == 0:
                out.append(float(a))
            elif fa * fb < 0:
                lo, hi, flo = a, b, fa
                for _ in range(200):
                    mid = (lo + hi) / 2
                    fm = bessel_j(m, mid)
                    if flo * fm <= 0:
                        hi = mid
                    else:
                        lo, flo = mid, fm
                    if hi - lo < mpmath.mpf(10) ** -20:
                        break
                out.append(float((lo + hi) / 2))
            a, fa = b, fb
    return tuple(out)


def disk_eigenvalues(k: int) -> list[tuple[float, int, int]]:
    """The ``k`` smallest Dirichlet eigenvalues of the unit disk with multiplicity.

    Returns ``(lambda, m, n)`` with ``lambda = j_{m,n}^2``; every ``m > 0``
    appears twice (the ``cos`` and ``sin`` modes).
    """
    xmax = 4.0
    while True:
        values = []
        m = 0
        while True:
            zeros = bessel_zeros(m, xmax)
            if not zeros:
                break
            for n, z in enumerate(zeros, start=1):
                values += [(z * z, m, n)] * (1 if m == 0 else 2)
            m += 1
        values.sort()
        if len(values) >= k and values[k - 1][0] < (xmax - 1.0) ** 2:
            return values[:k]
        xmax *= 1.5
