import numpy as np
import pytest
from scipy.special import jn_zeros, jv

from conic_fem.bessel import bessel_j, bessel_zeros, disk_eigenvalues


def scipy_eigenvalues(k):
    vals = []
    for m in range(12):
        for z in jn_zeros(m, 6):
            vals += [z * z] * (1 if m == 0 else 2)
    return sorted(vals)[:k]


def test_first_eigenvalue():
    assert disk_eigenvalues(1)[0][0] == pytest.approx(5.783185962947, abs=1e-11)


def test_first_fifteen_match_scipy():
    ours = np.array([lam for lam, _, _ in disk_eigenvalues(15)])
    np.testing.assert_allclose(ours, scipy_eigenvalues(15), rtol=1e-13)


def test_multiplicities():
    ms = [m for _, m, _ in disk_eigenvalues(15)]
    assert ms == [0, 1, 1, 2, 2, 0, 3, 3, 1, 1, 4, 4, 2, 2, 0]


@pytest.mark.parametrize("m", [0, 1, 3, 7])
def test_series_matches_scipy(m):
    for x in (0.5, 3.0, 11.0, 20.0):
        assert float(bessel_j(m, x)) == pytest.approx(jv(m, x), abs=1e-14)


def test_zeros_match_scipy():
    for m in (0, 2, 5):
        zs = bessel_zeros(m, 20.0)
        np.testing.assert_allclose(zs, jn_zeros(m, len(zs)), rtol=1e-14)
