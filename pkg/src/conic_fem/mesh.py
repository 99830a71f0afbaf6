"""Curved triangulations: topology, classification, admissibility and refinement.

A triangle is *pie-shaped* when one of its edges is a conic boundary arc,
*buffer* when it is straight and shares an edge with a pie triangle, and
*ordinary* otherwise.  Pie triangles are stored as ``(v1, v2, v3)`` with the
arc running from ``v1`` to ``v2`` and ``v3`` the interior vertex.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import IntEnum
from functools import cached_property

import numpy as np
from scipy.optimize import minimize

from .bernstein import Triangle
from .conic import (QuadraticForm, RationalArc, StraightSegment, eval_arc,
                    implicitize, ray_height, subdivide_arc)
from .errors import GeometryError, MeshValidationError, UsageError

COINCIDE_TOL = 1e-12
STAR_SAMPLES = 64
POSITIVITY_SAMPLES = 16


class TriKind(IntEnum):
    ORDINARY = 0
    PIE = 1
    BUFFER = 2


# local edge e joins local vertices LOCAL_EDGES[e]; edge 2 of a pie is the arc
LOCAL_EDGES = ((1, 2), (2, 0), (0, 1))


@dataclass(frozen=True, eq=False)
class CurvedTriangulation:
    """Immutable curved triangulation.

    Parameters
    ----------
    vertices : (nv, 2) array
    triangles : (nt, 3) int array
        Vertex indices; for pie triangles ``(v1, v2, v3)`` with the arc from
        ``v1`` to ``v2``.
    arcs : tuple of RationalArc
        Boundary arcs, each oriented from ``v1`` to ``v2`` of its triangle.
    tri_arc : (nt,) int array
        Arc index per triangle, ``-1`` for straight triangles.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    arcs: tuple
    tri_arc: np.ndarray
    edges: np.ndarray = field(init=False, repr=False)
    edge_tris: tuple = field(init=False, repr=False)
    edge_arc: np.ndarray = field(init=False, repr=False)
    tri_edges: np.ndarray = field(init=False, repr=False)
    kinds: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float).reshape(-1, 2)
        t = np.array(self.triangles, dtype=np.int64).reshape(-1, 3)
        ta = np.array(self.tri_arc, dtype=np.int64).reshape(-1)
        arcs = tuple(self.arcs)
        if ta.size != t.shape[0]:
            raise UsageError("tri_arc must have one entry per triangle")
        if t.size and (t.min() < 0 or t.max() >= v.shape[0]):
            raise UsageError("triangle references a missing vertex")
        if np.any((t[:, 0] == t[:, 1]) | (t[:, 1] == t[:, 2]) | (t[:, 0] == t[:, 2])):
            raise UsageError("triangle with repeated vertex")
        used = ta[ta >= 0]
        if used.size != np.unique(used).size or (used.size and used.max() >= len(arcs)):
            raise UsageError("each arc must belong to exactly one triangle")
        _check_duplicates(v)
        for arr in (v, t, ta):
            arr.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)
        object.__setattr__(self, "tri_arc", ta)
        object.__setattr__(self, "arcs", arcs)
        self._build_topology()

    def _build_topology(self):
        table: dict[tuple[int, int], int] = {}
        edges, edge_tris, edge_arc = [], [], []
        tri_edges = np.empty(self.triangles.shape, dtype=np.int64)
        for ti, tri in enumerate(self.triangles):
            for e, (a, b) in enumerate(LOCAL_EDGES):
                key = (min(tri[a], tri[b]), max(tri[a], tri[b]))
                curved = e == 2 and self.tri_arc[ti] >= 0
                if key not in table:
                    table[key] = len(edges)
                    edges.append(key)
                    edge_tris.append([])
                    edge_arc.append(-1)
                eid = table[key]
                if curved or edge_arc[eid] >= 0:
                    if edge_tris[eid]:
                        raise UsageError(f"curved edge {key} shared by several triangles")
                    edge_arc[eid] = self.tri_arc[ti] if curved else edge_arc[eid]
                edge_tris[eid].append(ti)
                if len(edge_tris[eid]) > 2:
                    raise UsageError(f"edge {key} has more than two adjacent triangles")
                tri_edges[ti, e] = eid
        edges = np.array(edges, dtype=np.int64).reshape(-1, 2)
        edge_arc = np.array(edge_arc, dtype=np.int64)
        kinds = np.full(len(self.triangles), TriKind.ORDINARY, dtype=np.int64)
        kinds[self.tri_arc >= 0] = TriKind.PIE
        for tris in edge_tris:
            if len(tris) == 2:
                a, b = tris
                if kinds[a] == TriKind.PIE and kinds[b] != TriKind.PIE:
                    kinds[b] = TriKind.BUFFER
                elif kinds[b] == TriKind.PIE and kinds[a] != TriKind.PIE:
                    kinds[a] = TriKind.BUFFER
        for arr in (edges, edge_arc, tri_edges, kinds):
            arr.setflags(write=False)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "edge_tris", tuple(tuple(x) for x in edge_tris))
        object.__setattr__(self, "edge_arc", edge_arc)
        object.__setattr__(self, "tri_edges", tri_edges)
        object.__setattr__(self, "kinds", kinds)

    # -- basic queries -----------------------------------------------------

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]

    @cached_property
    def boundary_edges(self) -> np.ndarray:
        return np.array([len(t) == 1 for t in self.edge_tris], dtype=bool)

    @cached_property
    def boundary_vertices(self) -> np.ndarray:
        out = np.zeros(self.n_vertices, dtype=bool)
        out[self.edges[self.boundary_edges].ravel()] = True
        return out

    @cached_property
    def segments(self) -> tuple:
        """Straight boundary edges as :class:`StraightSegment`."""
        out = []
        for e in np.flatnonzero(self.boundary_edges & (self.edge_arc < 0)):
            a, b = self.edges[e]
            out.append(StraightSegment(tuple(self.vertices[a]), tuple(self.vertices[b])))
        return tuple(out)

    def tag(self, t: int) -> str:
        return TriKind(self.kinds[t]).name.lower()

    def counts(self) -> dict:
        return {k.name.lower(): int(np.sum(self.kinds == k)) for k in TriKind}

    def neighbor(self, t: int, e: int) -> int:
        """Triangle across local edge ``e`` of ``t`` (``-1`` on the boundary)."""
        tris = self.edge_tris[self.tri_edges[t, e]]
        if len(tris) == 1:
            return -1
        return tris[1] if tris[0] == t else tris[0]

    @cached_property
    def companions(self) -> tuple:
        """Straight triangle per element (``T*`` for pies, shared with its quadratic form)."""
        return tuple(Triangle(self.vertices[tri]) if q is None else q.triangle
                     for tri, q in zip(self.triangles, self.qforms))

    @cached_property
    def qforms(self) -> tuple:
        """Normalized implicit quadratic per pie triangle (None elsewhere or if invalid)."""
        out = []
        for ti, tri in enumerate(self.triangles):
            a = self.tri_arc[ti]
            if a < 0:
                out.append(None)
                continue
            try:
                out.append(implicitize(self.arcs[a], self.vertices[tri[2]]))
            except GeometryError:
                out.append(None)
        return tuple(out)

    def arc_of(self, t: int) -> RationalArc | None:
        a = self.tri_arc[t]
        return None if a < 0 else self.arcs[a]

    def diameters(self, samples: int = 64) -> np.ndarray:
        """Diameter of each (curved) triangle, arcs sampled at ``samples`` points."""
        out = np.empty(self.n_triangles)
        for ti, tri in enumerate(self.triangles):
            pts = self.vertices[tri]
            arc = self.arc_of(ti)
            if arc is not None:
                pts = np.vstack([pts, eval_arc(arc, np.linspace(0.0, 1.0, samples))])
            diff = pts[:, None, :] - pts[None, :, :]
            out[ti] = np.sqrt((diff ** 2).sum(-1).max())
        return out

    @property
    def h(self) -> float:
        return float(self.diameters().max())

    def locate(self, p, tol: float = 1e-10) -> tuple[int, np.ndarray]:
        """Triangle containing ``p`` and its barycentric coordinates w.r.t. ``T*``."""
        p = np.asarray(p, dtype=float)
        for ti in range(self.n_triangles):
            tri = self.companions[ti]
            b = tri.barycentric(p)
            q = self.qforms[ti]
            if q is None:
                if b.min() >= -tol:
                    return ti, b
                continue
            if b[0] < -tol or b[1] < -tol or b[2] > 1.0 + tol:
                continue
            t = 1.0 - b[2]
            if t <= tol:
                return ti, b
            tau = min(max(b[1] / (b[0] + b[1]), 0.0), 1.0)
            if t <= ray_height(q, tau) * (1.0 + tol) + tol:
                return ti, b
        raise GeometryError(f"point {p.tolist()} lies outside the domain")

    # -- serialization -----------------------------------------------------

    def to_document(self) -> dict:
        tris = []
        for ti, tri in enumerate(self.triangles):
            entry = {"v": [int(x) for x in tri]}
            if self.tri_arc[ti] >= 0:
                entry["arc"] = {"index": int(self.tri_arc[ti]), "reversed": False}
            tris.append(entry)
        return {
            "vertices": [[float(x), float(y)] for x, y in self.vertices],
            "arcs": [{"p0": a.p0.tolist(), "p1": a.p1.tolist(), "p2": a.p2.tolist(),
                      "beta": a.beta} for a in self.arcs],
            "triangles": tris,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_document(), indent=1)


def _check_duplicates(v: np.ndarray):
    if v.shape[0] < 2:
        return
    scale = max(1.0, float(np.abs(v).max()))
    order = np.lexsort((v[:, 1], v[:, 0]))
    sv = v[order]
    for a in range(len(sv)):
        b = a + 1
        while b < len(sv) and sv[b, 0] - sv[a, 0] <= COINCIDE_TOL * scale:
            if np.linalg.norm(sv[b] - sv[a]) <= COINCIDE_TOL * scale:
                raise UsageError(f"duplicate vertices {order[a]} and {order[b]}")
            b += 1


# -- loading ------------------------------------------------------------------

_SCHEMA = {
    "type": "object",
    "required": ["vertices", "triangles"],
    "properties": {
        "vertices": {"type": "array", "items": {
            "type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}},
        "arcs": {"type": "array", "items": {
            "type": "object", "required": ["p0", "p1", "p2", "beta"],
            "properties": {
                "p0": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                "p1": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                "p2": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                "beta": {"type": "number", "exclusiveMinimum": 0}}}},
        "triangles": {"type": "array", "items": {
            "type": "object", "required": ["v"],
            "properties": {
                "v": {"type": "array", "items": {"type": "integer", "minimum": 0},
                      "minItems": 3, "maxItems": 3},
                "arc": {"type": "object", "required": ["index"],
                        "properties": {"index": {"type": "integer", "minimum": 0},
                                       "reversed": {"type": "boolean"}}}}}},
    },
}


def load_mesh(document, strict: bool = True) -> CurvedTriangulation:
    """Build a mesh from a JSON document (dict, JSON text or path).

    With ``strict`` a :class:`MeshValidationError` is raised when any of the
    admissibility conditions fails; otherwise the violations are available
    through :func:`validate_conditions`.
    """
    import jsonschema

    if isinstance(document, (str, bytes)) and not str(document).lstrip().startswith("{"):
        with open(document) as fh:
            document = json.load(fh)
    elif isinstance(document, (str, bytes)):
        document = json.loads(document)
    try:
        jsonschema.validate(document, _SCHEMA)
    except jsonschema.ValidationError as exc:
        raise UsageError(f"mesh document does not match the schema: {exc.message}") from exc

    verts = np.array(document["vertices"], dtype=float).reshape(-1, 2)
    raw_arcs = [RationalArc(a["p0"], a["p1"], a["p2"], a["beta"]) for a in document.get("arcs", [])]
    tris, tri_arc, arcs = [], [], list(raw_arcs)
    for entry in document["triangles"]:
        i, j, k = entry["v"]
        spec = entry.get("arc")
        if spec is None:
            tris.append((i, j, k))
            tri_arc.append(-1)
            continue
        idx = spec["index"]
        if idx >= len(raw_arcs):
            raise UsageError(f"arc index {idx} out of range")
        if spec.get("reversed", False):
            arcs[idx] = raw_arcs[idx].reversed()
        tris.append((i, j, k))
        tri_arc.append(idx)
    mesh = CurvedTriangulation(verts, np.array(tris, dtype=np.int64).reshape(-1, 3),
                               tuple(arcs), np.array(tri_arc, dtype=np.int64))
    if strict:
        violations = validate_conditions(mesh)
        if violations:
            raise MeshValidationError(violations)
    return mesh


def save_mesh(mesh: CurvedTriangulation, path) -> None:
    with open(path, "w") as fh:
        fh.write(mesh.dumps())


# -- admissibility ------------------------------------------------------------

def cartesian_coefficients(q: QuadraticForm) -> np.ndarray:
    """Coefficients of ``q`` in the monomials ``1, x, y, x^2, xy, y^2``."""
    tri = q.triangle
    pts = np.vstack([tri.vertices, 0.5 * (tri.vertices + np.roll(tri.vertices, -1, axis=0))])
    x, y = pts[:, 0], pts[:, 1]
    mat = np.column_stack([np.ones(6), x, y, x * x, x * y, y * y])
    return np.linalg.solve(mat, q(pts))


def _line_coefficients(a, b) -> np.ndarray:
    (x0, y0), (x1, y1) = a, b
    nx, ny = y1 - y0, x0 - x1
    return np.array([-(nx * x0 + ny * y0), nx, ny, 0.0, 0.0, 0.0])


def same_curve(c1: np.ndarray, c2: np.ndarray, tol: float = 1e-10) -> bool:
    """Whether two implicit coefficient vectors agree up to a scalar factor."""
    u = c1 / np.linalg.norm(c1)
    w = c2 / np.linalg.norm(c2)
    return min(np.abs(u - w).max(), np.abs(u + w).max()) <= tol


def _boundary_loop_violations(mesh: CurvedTriangulation) -> list[str]:
    bedges = np.flatnonzero(mesh.boundary_edges)
    if bedges.size == 0:
        return ["boundary: mesh has no boundary"]
    adj: dict[int, list[int]] = {}
    for e in bedges:
        a, b = mesh.edges[e]
        adj.setdefault(a, []).append(e)
        adj.setdefault(b, []).append(e)
    bad = [v for v, es in adj.items() if len(es) != 2]
    if bad:
        return [f"boundary: vertex {v} has {len(adj[v])} boundary edges" for v in bad]
    start = bedges[0]
    seen = {start}
    v = mesh.edges[start][1]
    e = start
    while True:
        e = adj[v][0] if adj[v][0] != e else adj[v][1]
        if e == start:
            break
        seen.add(e)
        a, b = mesh.edges[e]
        v = b if a == v else a
    if len(seen) != bedges.size:
        return ["boundary: boundary edges do not form a single closed loop"]
    return []


def _pie_samples(q: QuadraticForm, n: int, inner: bool = True) -> np.ndarray:
    """Points of the pie region on an ``n x n`` Duffy grid (strictly inside if ``inner``)."""
    tau = (np.arange(n) + 0.5) / n
    frac = (np.arange(n) + 0.5) / n if inner else np.linspace(0.0, 1.0, n)
    phi = np.asarray(ray_height(q, tau))
    t = phi[:, None] * frac[None, :]
    return q.ray(np.repeat(tau, n), t.ravel())


def _curve_signature(mesh, e) -> np.ndarray:
    arc = mesh.edge_arc[e]
    if arc < 0:
        a, b = mesh.edges[e]
        return _line_coefficients(mesh.vertices[a], mesh.vertices[b])
    t = mesh.edge_tris[e][0]
    q = mesh.qforms[t]
    return None if q is None else cartesian_coefficients(q)


def validate_conditions(mesh: CurvedTriangulation) -> list[str]:
    """List of violated admissibility conditions ``(a)``-``(e)`` (empty if admissible)."""
    out = _boundary_loop_violations(mesh)
    scale = max(1.0, float(np.abs(mesh.vertices).max()))
    bverts = mesh.boundary_vertices

    for ti in np.flatnonzero(mesh.kinds == TriKind.PIE):
        arc = mesh.arc_of(ti)
        v1, v2, v3 = mesh.triangles[ti]
        # (a) arc end points are the triangle's boundary vertices
        if (np.linalg.norm(arc.p0 - mesh.vertices[v1]) > 1e-10 * scale
                or np.linalg.norm(arc.p2 - mesh.vertices[v2]) > 1e-10 * scale):
            out.append(f"(a) triangle {ti}: arc end points are not its vertices {v1}, {v2}")
        if bverts[v3]:
            out.append(f"(b) triangle {ti}: interior vertex {v3} of a pie triangle lies on the boundary")
        q = mesh.qforms[ti]
        if q is None:
            out.append(f"(e) triangle {ti}: implicit form invalid or not positive (mu <= 0)")
            continue
        # (d) star-shaped: every ray from v3 meets the arc
        tau = np.linspace(0.0, 1.0, STAR_SAMPLES)
        try:
            phi = np.asarray(ray_height(q, tau))
        except GeometryError:
            out.append(f"(d) triangle {ti}: not star-shaped w.r.t. its interior vertex")
            continue
        hits = q.ray(tau, phi)
        dense = eval_arc(arc, np.linspace(0.0, 1.0, 2049))
        gap = np.sqrt(((hits[:, None, :] - dense[None, :, :]) ** 2).sum(-1)).min(axis=1)
        tri_scale = np.ptp(q.triangle.vertices, axis=0).max()
        if gap.max() > 1e-3 * tri_scale:
            out.append(f"(d) triangle {ti}: rays from the interior vertex leave through another branch")
            continue
        # (e) q > 0 away from the arc
        vals = q(_pie_samples(q, POSITIVITY_SAMPLES))
        if vals.min() <= 0:
            out.append(f"(e) triangle {ti}: q not positive inside the triangle")

    # (b) interior edges with both end points on the boundary
    for e, tris in enumerate(mesh.edge_tris):
        if len(tris) == 2 and bverts[mesh.edges[e]].all():
            out.append(f"(b) interior edge {tuple(int(x) for x in mesh.edges[e])} joins two boundary vertices")

    # (c) corners between different curves with a conic need a buffer triangle
    inc: dict[int, list[int]] = {}
    for e in np.flatnonzero(mesh.boundary_edges):
        for v in mesh.edges[e]:
            inc.setdefault(int(v), []).append(int(e))
    buffer_at = np.zeros(mesh.n_vertices, dtype=bool)
    for ti in np.flatnonzero(mesh.kinds == TriKind.BUFFER):
        buffer_at[mesh.triangles[ti]] = True
    for v, es in sorted(inc.items()):
        if len(es) != 2:
            continue
        e1, e2 = es
        if mesh.edge_arc[e1] < 0 and mesh.edge_arc[e2] < 0:
            continue
        c1, c2 = _curve_signature(mesh, e1), _curve_signature(mesh, e2)
        if c1 is None or c2 is None:
            continue
        if not same_curve(c1, c2) and not buffer_at[v]:
            out.append(f"(c) corner vertex {v} joins different curves but has no buffer triangle")
    return out


# -- refinement ---------------------------------------------------------------

def refine_uniform(mesh: CurvedTriangulation, check: bool = True) -> CurvedTriangulation:
    """Split every triangle into four through its edge midpoints.

    Curved edges are split at the arc parameter 1/2 and the arc is replaced by
    its two halves; vertices are identified by index only.
    """
    nv = mesh.n_vertices
    mids = np.empty((mesh.n_edges, 2))
    for e, (a, b) in enumerate(mesh.edges):
        arc = mesh.edge_arc[e]
        if arc >= 0:
            mids[e] = eval_arc(mesh.arcs[arc], 0.5)
        else:
            mids[e] = 0.5 * (mesh.vertices[a] + mesh.vertices[b])
    vertices = np.vstack([mesh.vertices, mids])
    tris, tri_arc, arcs = [], [], []
    for ti, (a, b, c) in enumerate(mesh.triangles):
        m_bc, m_ca, m_ab = nv + mesh.tri_edges[ti]
        children = [(a, m_ab, m_ca), (m_ab, b, m_bc), (m_ca, m_bc, c), (m_bc, m_ca, m_ab)]
        tris.extend(children)
        arc = mesh.arc_of(ti)
        if arc is None:
            tri_arc.extend([-1] * 4)
        else:
            left, right = subdivide_arc(arc)
            tri_arc.extend([len(arcs), len(arcs) + 1, -1, -1])
            arcs.extend([left, right])
    out = CurvedTriangulation(vertices, np.array(tris, dtype=np.int64), tuple(arcs),
                              np.array(tri_arc, dtype=np.int64))
    if check:
        violations = validate_conditions(out)
        if violations:
            raise MeshValidationError(violations)
    return out


# -- shape diagnostics --------------------------------------------------------

@dataclass(frozen=True)
class ShapeReport:
    R: float
    A: float
    B: float


def _segment_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = b - a
    t = np.clip(((p[:, None, :] - a) * ab).sum(-1) / (ab * ab).sum(-1), 0.0, 1.0)
    proj = a + t[..., None] * ab
    return np.sqrt(((p[:, None, :] - proj) ** 2).sum(-1)).min(axis=1)


def _inside_polygon(p: np.ndarray, poly: np.ndarray) -> np.ndarray:
    x, y = p[:, 0:1], p[:, 1:2]
    x0, y0 = poly[:, 0], poly[:, 1]
    x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
    cond = (y0 > y) != (y1 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
    return (cond & (x < xint)).sum(axis=1) % 2 == 1


def inscribed_radius(poly: np.ndarray, seeds: np.ndarray) -> float:
    """Radius of the largest disk inside a simple polygon (local search from seeds)."""
    a, b = poly, np.roll(poly, -1, axis=0)

    def neg_radius(c):
        c = np.asarray(c).reshape(1, 2)
        if not _inside_polygon(c, poly)[0]:
            return 0.0
        return -float(_segment_distance(c, a, b)[0])

    seeds = seeds[_inside_polygon(seeds, poly)]
    if seeds.size == 0:
        return 0.0
    dist = _segment_distance(seeds, a, b)
    best = seeds[np.argmax(dist)]
    res = minimize(neg_radius, best, method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 2000})
    return max(float(dist.max()), -float(res.fun))


def shape_constants(mesh: CurvedTriangulation) -> ShapeReport:
    """Shape-regularity constants ``R``, ``A``, ``B`` estimated by sampling.

    ``R = max h_T / rho_T``; for pie triangles ``rho_T`` is the inradius of
    ``T`` intersected with ``T*``.  ``A = max q(z) / q(v)`` over pie
    triangles (256 points each) and ``B = min d_{v-z} q(z)`` over 128 points
    of each arc.
    """
    diam = mesh.diameters()
    R, A, B = 0.0, 1.0, np.inf
    for ti in range(mesh.n_triangles):
        tri = mesh.companions[ti]
        q = mesh.qforms[ti]
        v = tri.vertices
        if q is None:
            perim = sum(np.linalg.norm(v[i] - v[i - 1]) for i in range(3))
            rho = 2.0 * tri.area / perim
        else:
            arc = mesh.arc_of(ti)
            alpha3 = tri.barycentric(arc.p1)[2]
            if alpha3 < 0:
                perim = sum(np.linalg.norm(v[i] - v[i - 1]) for i in range(3))
                rho = 2.0 * tri.area / perim
            else:
                poly = np.vstack([eval_arc(arc, np.linspace(0.0, 1.0, 65)), v[2]])
                rho = inscribed_radius(poly, _pie_samples(q, 12))
            pts = np.vstack([_pie_samples(q, 16, inner=False), v[2]])
            A = max(A, float(q(pts).max()))
            z = eval_arc(arc, np.linspace(0.0, 1.0, 128))
            grad = q.gradient(z)
            B = min(B, float(((v[2] - z) * grad).sum(axis=1).min()))
        R = max(R, diam[ti] / rho)
    return ShapeReport(float(R), float(A), float(B) if np.isfinite(B) else float("nan"))
