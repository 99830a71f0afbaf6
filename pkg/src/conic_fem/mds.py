"""Minimal determining set and the global-to-local coefficient map.

The spline space on a curved triangulation holds polynomials of degree ``d``
on ordinary triangles, degree ``d+1`` on buffer triangles and ``q p`` with
``p`` of degree ``d-1`` on pie triangles, glued continuously and vanishing on
the boundary.  Its degrees of freedom are

* BB-coefficients of degree ``d`` on ordinary triangles (off the boundary),
* the coefficients of ``p`` (degree ``d-1``) on pie triangles,
* degree ``d+1`` coefficients of buffer triangles that are not fixed by a
  neighbor or by the boundary.

Points shared by several triangles are identified through the edge table.
Each triangle stores a small dense matrix ``P_T`` mapping its global DOFs to
its BB-coefficients at the working degree (``d`` ordinary, ``d+1`` otherwise).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import IntEnum

import numpy as np
import scipy.sparse as sp

from .bernstein import de_casteljau, dim, multi_indices, qmult_matrix, rank
from .errors import GeometryError, MeshValidationError, UsageError
from .mesh import CurvedTriangulation, TriKind, validate_conditions


class DofKind(IntEnum):
    ORDINARY = 0
    PIE_STAR = 1
    BUFFER = 2


@dataclass(frozen=True, order=True)
class DofKey:
    """Canonical representative of a DOF: a domain point of ``owner``.

    The index ``ijk`` refers to degree ``d`` (ordinary), ``d-1`` (pie, the
    coefficients of ``p``) or ``d+1`` (buffer).
    """

    kind: DofKind
    owner: int
    ijk: tuple


@dataclass(frozen=True, eq=False)
class LocalMap:
    dofs: np.ndarray     # global DOF numbers
    matrix: np.ndarray   # (dim(n_T), len(dofs))


class DofTable:
    """Global DOF numbering with one :class:`LocalMap` per triangle."""

    def __init__(self, mesh: CurvedTriangulation, degree: int, keys, local, qmats):
        self.mesh = mesh
        self.degree = degree
        self.keys = tuple(keys)
        self.local = tuple(local)
        self._qmats = qmats
        self._qpinv = {t: np.linalg.pinv(m) for t, m in qmats.items()}
        self.tri_degree = np.where(mesh.kinds == TriKind.ORDINARY, degree, degree + 1)

    @property
    def N(self) -> int:
        return len(self.keys)

    def __len__(self):
        return self.N

    def working_degree(self, t: int) -> int:
        return int(self.tri_degree[t])

    # -- T and its transpose -----------------------------------------------

    def apply_T(self, x) -> list[np.ndarray]:
        """Per-triangle BB-coefficient blocks of the spline with DOF vector ``x``."""
        x = np.asarray(x, dtype=float)
        if x.shape[:1] != (self.N,):
            raise UsageError(f"expected {self.N} DOFs, got shape {x.shape}")
        return [lm.matrix @ x[lm.dofs] for lm in self.local]

    def apply_T_transpose(self, blocks) -> np.ndarray:
        if len(blocks) != len(self.local):
            raise UsageError("one block per triangle required")
        out = np.zeros(self.N)
        for lm, blk in zip(self.local, blocks):
            blk = np.asarray(blk, dtype=float)
            if blk.shape != (lm.matrix.shape[0],):
                raise UsageError(f"block of shape {blk.shape}, expected {(lm.matrix.shape[0],)}")
            np.add.at(out, lm.dofs, lm.matrix.T @ blk)
        return out

    def sparse_T(self) -> sp.csr_matrix:
        """``T`` as an explicit sparse matrix (debugging and tests only)."""
        rows, cols, vals = [], [], []
        offset = 0
        for lm in self.local:
            r, c = np.nonzero(lm.matrix)
            rows.append(r + offset)
            cols.append(lm.dofs[c])
            vals.append(lm.matrix[r, c])
            offset += lm.matrix.shape[0]
        return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                             shape=(offset, self.N))

    # -- functionals and evaluation ----------------------------------------

    def _read(self, key: DofKey, block: np.ndarray) -> np.ndarray:
        if key.kind == DofKind.PIE_STAR:
            return (self._qpinv[key.owner] @ block)[rank(*key.ijk)]
        return block[rank(*key.ijk)]

    def functionals(self, blocks) -> np.ndarray:
        """Values of all DOF functionals on the spline given by ``blocks``."""
        return np.array([self._read(k, np.asarray(blocks[k.owner])) for k in self.keys])

    def duality_matrix(self) -> np.ndarray:
        """``[lambda_zeta(s_xi)]`` for all pairs (identity for a valid table)."""
        out = np.zeros((self.N, self.N))
        for z, key in enumerate(self.keys):
            lm = self.local[key.owner]
            out[z, lm.dofs] = self._read(key, lm.matrix)
        return out

    def support(self, xi: int) -> list[int]:
        return [t for t, lm in enumerate(self.local) if np.any(lm.dofs == xi)]

    def column(self, xi: int) -> dict[int, np.ndarray]:
        """Nonzero BB blocks of the basis spline ``s_xi``."""
        out = {}
        for t, lm in enumerate(self.local):
            hit = np.flatnonzero(lm.dofs == xi)
            if hit.size:
                out[t] = lm.matrix[:, hit[0]].copy()
        return out

    def evaluate(self, x, points) -> np.ndarray:
        """Values of the spline with DOF vector ``x`` at Cartesian ``points``."""
        blocks = self.apply_T(x)
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.empty(len(pts))
        for n, p in enumerate(pts):
            t, b = self.mesh.locate(p)
            out[n] = de_casteljau(blocks[t], self.working_degree(t), b)
        return out

    def evaluation_matrix(self, points) -> np.ndarray:
        """``E[n, xi] = s_xi(points[n])`` for all basis splines."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.zeros((len(pts), self.N))
        for n, p in enumerate(pts):
            t, b = self.mesh.locate(p)
            lm = self.local[t]
            out[n, lm.dofs] = de_casteljau(lm.matrix.T, self.working_degree(t), b)
        return out

    def basis_eval(self, xi: int, p) -> float:
        """Value of the basis spline ``s_xi`` at ``p``."""
        if not 0 <= xi < self.N:
            raise UsageError(f"DOF {xi} out of range")
        t, b = self.mesh.locate(p)
        lm = self.local[t]
        hit = np.flatnonzero(lm.dofs == xi)
        if hit.size == 0:
            return 0.0
        return float(de_casteljau(lm.matrix[:, hit[0]], self.working_degree(t), b))

    # -- debug output -------------------------------------------------------

    def triplets(self):
        for t, lm in enumerate(self.local):
            r, c = np.nonzero(lm.matrix)
            for a, b in zip(r, c):
                yield t, int(a), int(lm.dofs[b]), float(lm.matrix[a, b])

    def dump_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["triangle", "local_index", "dof", "weight"])
            for t, a, xi, val in self.triplets():
                w.writerow([t, a, xi, repr(val)])


# -- construction ---------------------------------------------------------------

def _point_site(mesh, t, n, ijk):
    """Vertex, edge or interior site of local point ``ijk`` (degree ``n``) of ``t``."""
    nz = [a for a in range(3) if ijk[a]]
    tri = mesh.triangles[t]
    if len(nz) == 1:
        return ("v", int(tri[nz[0]]))
    if len(nz) == 2:
        z = 3 - nz[0] - nz[1]
        eid = int(mesh.tri_edges[t, z])
        hi = mesh.edges[eid][1]
        m = ijk[list(tri).index(hi)]
        return ("e", eid, n, int(m))
    return ("t", t, rank(*ijk))


def _local_index(mesh, t, n, eid, m):
    """Local rank in ``t`` at degree ``n`` of the point ``m`` steps from the edge's low end."""
    lo, hi = mesh.edges[eid]
    tri = list(mesh.triangles[t])
    ijk = [0, 0, 0]
    ijk[tri.index(hi)] = m
    ijk[tri.index(lo)] = n - m
    return rank(*ijk), tuple(ijk)


def _edge_kinds(mesh, eid):
    return sorted(int(mesh.kinds[t]) for t in mesh.edge_tris[eid])


def _check_pie_pairs(mesh, d):
    for eid, tris in enumerate(mesh.edge_tris):
        if len(tris) != 2 or not all(mesh.kinds[t] == TriKind.PIE for t in tris):
            continue
        vals = []
        for t in tris:
            q = mesh.qforms[t]
            z = list(mesh.tri_edges[t]).index(eid)
            vals.append(q.omega011 if z == 0 else q.omega101)
        if abs(vals[0] - vals[1]) > 1e-10 * max(1.0, abs(vals[0])):
            raise GeometryError(
                f"pie triangles {tris} sharing edge {tuple(mesh.edges[eid])} carry different "
                f"quadratic forms on it ({vals[0]:.15g} vs {vals[1]:.15g})")


def build_mds(mesh: CurvedTriangulation, d: int) -> DofTable:
    """Degrees of freedom and per-triangle coefficient maps of the spline space.

    Parameters
    ----------
    mesh : CurvedTriangulation
        Admissible mesh (validated here).
    d : int
        Spline degree, ``d >= 2``.
    """
    if int(d) != d or d < 2:
        raise UsageError(f"spline degree must be an integer >= 2, got {d}")
    d = int(d)
    violations = validate_conditions(mesh)
    if violations:
        raise MeshValidationError(violations)
    _check_pie_pairs(mesh, d)

    kinds = mesh.kinds
    bverts = mesh.boundary_vertices
    bedges = mesh.boundary_edges
    nt = mesh.n_triangles
    O, P, B = TriKind.ORDINARY, TriKind.PIE, TriKind.BUFFER

    # -- collect sites and their canonical keys --------------------------------
    sites: dict[tuple, DofKey] = {}

    def add(site, kind, owner, n):
        if site in sites:
            return
        if site[0] == "t":
            ijk = tuple(int(x) for x in multi_indices(n)[site[2]])
        elif site[0] == "e":
            ijk = _local_index(mesh, owner, n, site[1], site[3])[1]
        else:
            tri = list(mesh.triangles[owner])
            ijk = [0, 0, 0]
            ijk[tri.index(site[1])] = n
            ijk = tuple(ijk)
        sites[site] = DofKey(DofKind(kind), int(owner), tuple(int(x) for x in ijk))

    vert_tris: dict[int, list[int]] = {}
    for t, tri in enumerate(mesh.triangles):
        for v in tri:
            vert_tris.setdefault(int(v), []).append(t)

    for v in range(mesh.n_vertices):
        if bverts[v] or v not in vert_tris:
            continue
        ts = vert_tris[v]
        ords = [t for t in ts if kinds[t] == O]
        pies = [t for t in ts if kinds[t] == P and mesh.triangles[t][2] == v]
        bufs = [t for t in ts if kinds[t] == B]
        if ords:
            add(("v", v), DofKind.ORDINARY, min(ords), d)
        elif pies:
            add(("v", v), DofKind.PIE_STAR, min(pies), d - 1)
        else:
            add(("v", v), DofKind.BUFFER, min(bufs), d + 1)

    for eid, tris in enumerate(mesh.edge_tris):
        if len(tris) != 2:
            continue
        ek = _edge_kinds(mesh, eid)
        if ek in ([O, O], [O, B]):
            owner = min(t for t in tris if kinds[t] == O)
            for m in range(1, d):
                add(("e", eid, d, m), DofKind.ORDINARY, owner, d)
        elif ek == [B, B]:
            for m in range(1, d + 1):
                add(("e", eid, d + 1, m), DofKind.BUFFER, min(tris), d + 1)
        elif ek == [P, P]:
            owner = min(tris)
            v3 = mesh.triangles[owner][2]
            lo, hi = mesh.edges[eid]
            for m in range(d):
                at_v3 = (m == 0 and lo == v3) or (m == d - 1 and hi == v3)
                if not at_v3:
                    add(("e", eid, d - 1, m), DofKind.PIE_STAR, owner, d - 1)

    for t in range(nt):
        if kinds[t] == O:
            for r, ijk in enumerate(multi_indices(d)):
                if min(ijk) > 0:
                    add(("t", t, r), DofKind.ORDINARY, t, d)
        elif kinds[t] == B:
            for r, ijk in enumerate(multi_indices(d + 1)):
                if min(ijk) > 0:
                    add(("t", t, r), DofKind.BUFFER, t, d + 1)

    pie_sites = {}
    for t in np.flatnonzero(kinds == P):
        rows = []
        for r, ijk in enumerate(multi_indices(d - 1)):
            site = _pie_site(mesh, t, d, ijk)
            if site[0] == "t":
                add(site, DofKind.PIE_STAR, t, d - 1)
            rows.append(site)
        pie_sites[int(t)] = rows

    keys = sorted(sites.values())
    number = {k: n for n, k in enumerate(keys)}
    dof_of = {s: number[k] for s, k in sites.items()}
    if len(dof_of) != len(set(dof_of.values())):
        raise AssertionError("two sites share one key")

    # -- per-triangle rows ----------------------------------------------------
    def site_row(site):
        if site is None:
            return {}
        xi = dof_of.get(site)
        return {} if xi is None else {xi: 1.0}

    def plain_site(t, n, ijk):
        site = _point_site(mesh, t, n, ijk)
        if site[0] == "v" and bverts[site[1]]:
            return None
        if site[0] == "e" and bedges[site[1]]:
            return None
        return site

    rows_of: list[list[dict] | None] = [None] * nt
    qmats = {}
    for t, psites in pie_sites.items():
        q = mesh.qforms[t]
        qm = qmult_matrix(q.omega110, q.omega101, q.omega011, d)
        qmats[t] = qm
        prow = [site_row(s) for s in psites]
        rows = []
        for r in range(dim(d + 1)):
            acc: dict[int, float] = {}
            for c in np.flatnonzero(qm[r]):
                for xi, w in prow[c].items():
                    acc[xi] = acc.get(xi, 0.0) + qm[r, c] * w
            rows.append(acc)
        rows_of[t] = rows

    for t in np.flatnonzero(kinds == O):
        rows_of[t] = [site_row(plain_site(t, d, ijk)) for ijk in multi_indices(d)]

    def vertex_row(v):
        return {} if bverts[v] else {dof_of[("v", int(v))]: 1.0}

    for t in np.flatnonzero(kinds == B):
        rows = []
        for ijk in multi_indices(d + 1):
            site = _point_site(mesh, t, d + 1, ijk)
            if site[0] != "e":
                rows.append(site_row(plain_site(t, d + 1, ijk)))
                continue
            eid, m = site[1], site[3]
            if bedges[eid]:
                rows.append({})
                continue
            other = [s for s in mesh.edge_tris[eid] if s != t][0]
            if kinds[other] == B:
                rows.append(site_row(site))
            elif kinds[other] == P:
                r_other, _ = _local_index(mesh, other, d + 1, eid, m)
                rows.append(dict(rows_of[other][r_other]))
            else:
                lo, hi = mesh.edges[eid]

                def coarse(mu):
                    if mu == 0:
                        return vertex_row(lo)
                    if mu == d:
                        return vertex_row(hi)
                    return site_row(("e", eid, d, mu))

                acc: dict[int, float] = {}
                for mu, w in ((m - 1, m / (d + 1)), (m, (d + 1 - m) / (d + 1))):
                    for xi, val in coarse(mu).items():
                        acc[xi] = acc.get(xi, 0.0) + w * val
                rows.append(acc)
        rows_of[t] = rows

    local = []
    for t in range(nt):
        rows = rows_of[t]
        dofs = np.array(sorted({xi for row in rows for xi in row}), dtype=np.int64)
        pos = {xi: c for c, xi in enumerate(dofs)}
        mat = np.zeros((len(rows), dofs.size))
        for r, row in enumerate(rows):
            for xi, w in row.items():
                mat[r, pos[xi]] += w
        dofs.setflags(write=False)
        mat.setflags(write=False)
        local.append(LocalMap(dofs, mat))
    return DofTable(mesh, d, keys, local, qmats)


def _pie_site(mesh, t, d, ijk):
    """Site of the ``p``-coefficient ``ijk`` (degree ``d-1``) of pie triangle ``t``."""
    tri = mesh.triangles[t]
    i, j, k = ijk
    if i == 0 and j == 0:
        return ("v", int(tri[2]))
    # local edge 1 is (v3, v1), local edge 0 is (v2, v3)
    for z, on_edge in ((1, j == 0), (0, i == 0)):
        if not on_edge:
            continue
        eid = int(mesh.tri_edges[t, z])
        other = mesh.neighbor(t, z)
        if other >= 0 and mesh.kinds[other] == TriKind.PIE:
            hi = mesh.edges[eid][1]
            return ("e", eid, d - 1, int(ijk[list(tri).index(hi)]))
    return ("t", int(t), rank(i, j, k))


def classical_dimension(mesh: CurvedTriangulation, d: int) -> int:
    """Dimension of continuous degree-``d`` splines vanishing on the boundary (straight meshes)."""
    n_iv = int((~mesh.boundary_vertices).sum())
    n_ie = int((~mesh.boundary_edges).sum())
    return n_iv + (d - 1) * n_ie + (d - 1) * (d - 2) // 2 * mesh.n_triangles


def count_dofs(mesh: CurvedTriangulation, d: int) -> int:
    """Number of DOFs from combinatorial counting alone (no key table)."""
    k = mesh.kinds
    n = int((~mesh.boundary_vertices).sum())
    for eid, tris in enumerate(mesh.edge_tris):
        if len(tris) != 2:
            continue
        ek = _edge_kinds(mesh, eid)
        if ek in ([0, 0], [0, 2]):
            n += d - 1
        elif ek == [2, 2]:
            n += d
        elif ek == [1, 1]:
            n += d - 1
    n += int((k == TriKind.ORDINARY).sum()) * (d - 1) * (d - 2) // 2
    n += int((k == TriKind.BUFFER).sum()) * d * (d - 1) // 2
    for t in np.flatnonzero(k == TriKind.PIE):
        # p-coefficients minus the interior vertex and the points on pie-pie edges
        shared = sum(1 for z in (0, 1) if mesh.neighbor(t, z) >= 0
                     and k[mesh.neighbor(t, z)] == TriKind.PIE)
        n += dim(d - 1) - 1 - shared * (d - 1)
    return n
