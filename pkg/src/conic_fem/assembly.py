"""Element matrices, global assembly, linear and eigenvalue solves, error norms.

The bilinear form is ``a(u, v) = int A grad u . grad v + v b . grad u + c u v``
and the load ``(f, v)``, so the strong problem reads
``-div(A grad u) + b . grad u + c u = f`` with ``u = 0`` on the boundary.

Element matrices are built from BB-moments of the coefficients combined
with the product formula ``B^m_a B^n_b = w(a, b) B^{m+n}_{a+b}``; the direct
evaluation at quadrature centers is kept as an independent check.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.io import mmwrite

from .bernstein import Triangle, bernstein_values, dim, multi_indices, product_table
from .conic import QuadraticForm
from .errors import SolverError, UsageError
from .mds import DofTable
from .quadrature import CurvedRule, curved_rule, moments_from_values

DIRECT_LIMIT = 200_000
DENSE_EIG_LIMIT = 4000
SYMMETRY_TOL = 1e-12


def curved_points(q: int) -> int:
    """Gauss points along the arc direction of a pie triangle.

    The ray height is not polynomial in that direction, so the count is
    raised well above ``q``; with this choice the area of a quarter disk is
    exact to roundoff already for small ``q``.
    """
    return 2 * q + 12


def element_rule(tri: Triangle, qform: QuadraticForm | None, q: int) -> CurvedRule:
    return curved_rule(tri, qform, q, None if qform is None else curved_points(q))


def _field(value, n_out: tuple) -> Callable:
    """Turn a constant or a callable into a callable returning ``(n,) + n_out``."""
    if value is None:
        return lambda x: np.zeros((len(x),) + n_out)
    if callable(value):
        def wrapped(x):
            out = np.asarray(value(x), dtype=float)
            return np.broadcast_to(out, (len(x),) + n_out)
        return wrapped
    arr = np.asarray(value, dtype=float)
    if arr.shape != n_out:
        raise UsageError(f"coefficient of shape {arr.shape}, expected {n_out}")
    return lambda x: np.broadcast_to(arr, (len(x),) + n_out)


@dataclass(frozen=True)
class PdeCoefficients:
    """Coefficient fields; each is a constant or a callable of points ``(n, 2)``.

    ``A`` maps to ``(n, 2, 2)``, ``b`` to ``(n, 2)``, ``c`` and ``f`` to ``(n,)``.
    """

    A: object = None
    b: object = None
    c: object = None
    f: object = None

    def A_at(self, x):
        if self.A is None:
            return np.broadcast_to(np.eye(2), (len(x), 2, 2))
        return _field(self.A, (2, 2))(x)

    def b_at(self, x):
        return _field(self.b, (2,))(x)

    def c_at(self, x):
        return _field(self.c, ())(x)

    def f_at(self, x):
        return _field(self.f, ())(x)


@dataclass(frozen=True, eq=False)
class ElementMatrices:
    S: np.ndarray
    B: np.ndarray
    M: np.ndarray
    L: np.ndarray
    degree: int


@lru_cache(maxsize=None)
def _shifts(n: int) -> np.ndarray:
    """``shift[l, r]`` = rank of ``a + e_l`` for the ``r``-th index ``a`` of degree ``n - 1``."""
    lo = multi_indices(n - 1)
    out = np.empty((3, dim(n - 1)), dtype=np.int64)
    for ax in range(3):
        up = lo.copy()
        up[:, ax] += 1
        s = up[:, 1] + up[:, 2]
        out[ax] = s * (s + 1) // 2 + up[:, 2]
    out.setflags(write=False)
    return out


def _from_moments(mu: np.ndarray, d1: int, d2: int) -> np.ndarray:
    """``[w(a, b) mu[a + b]]`` for indices of degrees ``d1`` and ``d2``."""
    target, weights = product_table(d1, d2)
    return weights * mu[..., target]


def element_matrices(tri: Triangle, coeffs: PdeCoefficients, n: int, q: int,
                     qform: QuadraticForm | None = None, rule: CurvedRule | None = None,
                     which: str = "SBML") -> ElementMatrices:
    """Element matrices over ``D_{n,T*}`` from BB-moments of the coefficients.

    Parameters
    ----------
    tri : Triangle
        The triangle, or the companion ``T*`` of a pie triangle.
    coeffs : PdeCoefficients
    n : int
        Polynomial degree on the element (``d`` or ``d+1``).
    q : int
        Gauss points per direction.
    qform : QuadraticForm, optional
        Implicit form of the arc for pie triangles.
    which : str
        Subset of ``"SBML"`` to compute; the others are returned as None.
    """
    rule = rule or element_rule(tri, qform, q)
    x = rule.centers
    grads = tri.barycentric_gradients()                 # (3, 2)
    S = B = M = L = None
    if "S" in which:
        A = coeffs.A_at(x)
        ga = np.einsum("li,nij,mj->lmn", grads, A, grads)    # (3, 3, nc)
        mu = moments_from_values(rule, 2 * n - 2, ga)
        K = _from_moments(mu, n - 1, n - 1)                  # (3, 3, dn1, dn1)
        sh = _shifts(n)
        S = np.zeros((dim(n), dim(n)))
        for l in range(3):
            for m in range(3):
                S[np.ix_(sh[l], sh[m])] += K[l, m]
        S *= n * n
    if "B" in which:
        bx = coeffs.b_at(x)
        gb = np.einsum("mi,ni->mn", grads, bx)               # (3, nc)
        mu = moments_from_values(rule, 2 * n - 1, gb)
        K = _from_moments(mu, n, n - 1)                      # (3, dn, dn1)
        sh = _shifts(n)
        B = np.zeros((dim(n), dim(n)))
        for m in range(3):
            B[:, sh[m]] += K[m]
        B *= n
    if "M" in which:
        mu = moments_from_values(rule, 2 * n, coeffs.c_at(x))
        M = _from_moments(mu, n, n)
    if "L" in which:
        L = moments_from_values(rule, n, coeffs.f_at(x))
    return ElementMatrices(S, B, M, L, n)


def _bb_gradients(n: int, bary: np.ndarray, grads: np.ndarray) -> np.ndarray:
    """Cartesian gradients of all ``B^n`` at ``bary``: ``(npts, dim(n), 2)``."""
    low = bernstein_values(n - 1, bary)                      # (npts, dim(n-1))
    sh = _shifts(n)
    out = np.zeros((bary.shape[0], dim(n), 2))
    for l in range(3):
        out[:, sh[l], :] += n * low[:, :, None] * grads[l][None, None, :]
    return out


def element_matrices_direct(tri: Triangle, coeffs: PdeCoefficients, n: int, q: int,
                            qform: QuadraticForm | None = None,
                            rule: CurvedRule | None = None) -> ElementMatrices:
    """Same matrices by summing basis products at the quadrature centers."""
    rule = rule or element_rule(tri, qform, q)
    x, w = rule.centers, rule.weights
    vals = bernstein_values(n, rule.bary)
    gr = _bb_gradients(n, rule.bary, tri.barycentric_gradients())
    A = coeffs.A_at(x)
    S = np.einsum("p,pai,pij,pbj->ab", w, gr, A, gr)
    B = np.einsum("p,pa,pi,pbi->ab", w, vals, coeffs.b_at(x), gr)
    M = np.einsum("p,pa,pb->ab", w * coeffs.c_at(x), vals, vals)
    L = np.einsum("p,pa->a", w * coeffs.f_at(x), vals)
    return ElementMatrices(S, B, M, L, n)


# -- global assembly ----------------------------------------------------------

def thread_count() -> int:
    raw = os.environ.get("CONIC_FEM_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = os.cpu_count() or 1
    return max(1, n)


@dataclass(frozen=True, eq=False)
class System:
    S: sp.csr_matrix
    B: sp.csr_matrix
    M: sp.csr_matrix
    L: np.ndarray


def _to_csr(blocks, dofs_list, N) -> sp.csr_matrix:
    rows = np.concatenate([np.repeat(d, d.size) for d in dofs_list])
    cols = np.concatenate([np.tile(d, d.size) for d in dofs_list])
    vals = np.concatenate([b.ravel() for b in blocks])
    out = sp.coo_matrix((vals, (rows, cols)), shape=(N, N)).tocsr()
    out.sum_duplicates()
    out.sort_indices()
    return out


def _symmetrized(mat: sp.csr_matrix, name: str, scale: float) -> sp.csr_matrix:
    """``(X + X^t)/2`` after checking the deviation against ``scale``."""
    dev = abs(mat - mat.T).max() if mat.nnz else 0.0
    if dev > SYMMETRY_TOL * max(scale, 1e-300):
        raise SolverError(f"{name} is not symmetric (max deviation {dev:.3e})")
    out = ((mat + mat.T) * 0.5).tocsr()
    out.sort_indices()
    return out


def assemble(table: DofTable, coeffs: PdeCoefficients, q: int | None = None,
             which: str = "SBML", threads: int | None = None) -> System:
    """Global matrices ``T^t diag(X_T) T`` and load ``T^t L_T``.

    Per-triangle work runs on a thread pool (``CONIC_FEM_THREADS``); results
    are gathered in triangle order so the output does not depend on the
    number of threads.
    """
    mesh = table.mesh
    d = table.degree
    q = d + 2 if q is None else q
    threads = thread_count() if threads is None else threads

    def job(t):
        n = table.working_degree(t)
        em = element_matrices(mesh.companions[t], coeffs, n, q, mesh.qforms[t], which=which)
        P = table.local[t].matrix
        Pa = np.abs(P)
        out = tuple(None if X is None else (P.T @ X @ P if X.ndim == 2 else P.T @ X)
                    for X in (em.S, em.B, em.M, em.L))
        # magnitude of the summands, the yardstick for the symmetry check
        size = tuple(0.0 if X is None else float((Pa.T @ np.abs(X) @ Pa).max())
                     for X in (em.S, em.M))
        return out + (size,)

    idx = range(mesh.n_triangles)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(job, idx))
    else:
        results = [job(t) for t in idx]

    N = table.N
    dofs = [lm.dofs for lm in table.local]
    empty = sp.csr_matrix((N, N))
    s_scale = max((r[4][0] for r in results), default=0.0)
    m_scale = max((r[4][1] for r in results), default=0.0)
    S = _symmetrized(_to_csr([r[0] for r in results], dofs, N), "S", s_scale) if "S" in which else empty
    B = _to_csr([r[1] for r in results], dofs, N) if "B" in which else empty
    M = _symmetrized(_to_csr([r[2] for r in results], dofs, N), "M", m_scale) if "M" in which else empty
    L = np.zeros(N)
    if "L" in which:
        for dd, r in zip(dofs, results):
            np.add.at(L, dd, r[3])
    return System(S, B, M, L)


def dump_matrix(mat, path) -> None:
    """Write a sparse matrix in MatrixMarket coordinate format."""
    mmwrite(str(path), sp.coo_matrix(mat), precision=17)


# -- solvers --------------------------------------------------------------------

def solve_poisson(S, L, tol: float = 1e-12, refine_steps: int = 5) -> np.ndarray:
    """Solve ``S x = L`` for symmetric positive definite ``S``.

    Sparse LU with diagonal pivoting for ``N <= 200000`` (a non-positive
    pivot flags an indefinite matrix) followed by iterative refinement;
    Jacobi-preconditioned CG above that size.
    """
    S = sp.csc_matrix(S)
    L = np.asarray(L, dtype=float)
    N = S.shape[0]
    if S.shape != (N, N) or L.shape != (N,):
        raise UsageError("matrix and right-hand side sizes differ")
    nrm = np.linalg.norm(L)
    if nrm == 0.0:
        return np.zeros(N)
    if N <= DIRECT_LIMIT:
        try:
            lu = spla.splu(S, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                           options={"SymmetricMode": True})
        except RuntimeError as exc:
            raise SolverError(f"factorization failed: {exc}") from exc
        piv = lu.U.diagonal()
        if np.any(piv <= 0) or not np.all(np.isfinite(piv)):
            raise SolverError("matrix is not positive definite")
        x = lu.solve(L)
        for _ in range(refine_steps):
            r = L - S @ x
            if np.linalg.norm(r) <= tol * nrm:
                break
            x = x + lu.solve(r)
    else:
        diag = S.diagonal()
        if np.any(diag <= 0):
            raise SolverError("matrix is not positive definite")
        pre = spla.LinearOperator((N, N), matvec=lambda v: v / diag)
        x, info = spla.cg(S, L, rtol=tol, maxiter=10 * N, M=pre)
        if info != 0:
            raise SolverError(f"CG did not converge within {10 * N} iterations")
    return x


def residual(S, x, L) -> float:
    nrm = np.linalg.norm(L)
    return float(np.linalg.norm(S @ x - L) / (nrm if nrm else 1.0))


def solve_eigs(S, M, k: int) -> tuple[np.ndarray, np.ndarray]:
    """``k`` smallest eigenpairs of ``S v = lambda M v`` (M-orthonormal vectors)."""
    N = S.shape[0]
    if not 1 <= k <= N:
        raise UsageError(f"cannot compute {k} eigenpairs of a {N}x{N} problem")
    if N <= DENSE_EIG_LIMIT:
        try:
            lam, vec = sla.eigh(S.toarray(), M.toarray(), subset_by_index=[0, k - 1])
        except np.linalg.LinAlgError as exc:
            raise SolverError(f"generalized eigenproblem failed: {exc}") from exc
    else:
        try:
            lam, vec = spla.eigsh(sp.csc_matrix(S), k=k, M=sp.csc_matrix(M), sigma=0.0,
                                  which="LM", tol=1e-14)
        except (spla.ArpackError, RuntimeError) as exc:
            raise SolverError(f"shift-invert Lanczos failed: {exc}") from exc
        order = np.argsort(lam)
        lam, vec = lam[order], vec[:, order]
        for c in range(k):
            vec[:, c] /= np.sqrt(vec[:, c] @ (M @ vec[:, c]))
    Sv = S @ vec
    res = np.linalg.norm(Sv - (M @ vec) * lam, axis=0)
    if np.any(res > 1e-9 * np.linalg.norm(Sv, axis=0)):
        raise SolverError(f"eigenpair residual too large ({res.max():.3e})")
    return lam, vec


# -- errors --------------------------------------------------------------------

def error_norms(table: DofTable, dofs, u_exact, grad_u_exact, q: int | None = None):
    """``L2`` and full ``H1`` norms of ``u - u_N`` by per-triangle quadrature.

    The rule uses ``q + 2`` points per direction (``q`` defaults to ``d + 2``).
    """
    mesh = table.mesh
    q = (table.degree + 2 if q is None else q) + 2
    blocks = table.apply_T(dofs)
    l2 = semi = 0.0
    for t in range(mesh.n_triangles):
        tri = mesh.companions[t]
        rule = element_rule(tri, mesh.qforms[t], q)
        n = table.working_degree(t)
        uh = bernstein_values(n, rule.bary) @ blocks[t]
        guh = np.einsum("pai,a->pi", _bb_gradients(n, rule.bary, tri.barycentric_gradients()), blocks[t])
        eu = np.asarray(u_exact(rule.centers), dtype=float) - uh
        eg = np.asarray(grad_u_exact(rule.centers), dtype=float) - guh
        l2 += rule.integrate(eu * eu)
        semi += rule.integrate((eg * eg).sum(axis=1))
    return float(np.sqrt(l2)), float(np.sqrt(l2 + semi))
