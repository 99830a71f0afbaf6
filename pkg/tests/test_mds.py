import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from conic_fem import domains
from conic_fem.bernstein import de_casteljau, rank
from conic_fem.errors import UsageError
from conic_fem.mds import DofKind, build_mds, classical_dimension, count_dofs
from conic_fem.mesh import LOCAL_EDGES, TriKind, refine_uniform

from sampling import boundary_points, interior_points

MESHES = {
    "disk_fan": domains.disk_fan,
    "ellipse": domains.ellipse_mesh,
    "conic": domains.conic_mesh,
    "square": lambda: domains.square_mesh(2),
}


@pytest.fixture(scope="module", params=[(m, d) for m in MESHES for d in (2, 3, 4)],
                ids=lambda p: f"{p[0]}-d{p[1]}")
def table(request):
    name, d = request.param
    return build_mds(MESHES[name](), d)


def test_duality(table):
    np.testing.assert_allclose(table.duality_matrix(), np.eye(table.N), atol=1e-12)


def test_counts_agree(table):
    assert table.N == count_dofs(table.mesh, table.degree)


def test_boundary_vanishing(table):
    pts = boundary_points(table.mesh)
    assert np.abs(table.evaluation_matrix(pts)).max() <= 1e-11


def test_continuity_across_edges(table):
    mesh = table.mesh
    rng = np.random.default_rng(0)
    blocks = table.apply_T(rng.normal(size=table.N))
    worst = 0.0
    for eid, tris in enumerate(mesh.edge_tris):
        if len(tris) != 2:
            continue
        a, b = mesh.vertices[mesh.edges[eid]]
        s = np.linspace(0, 1, 10)[:, None]
        pts = (1 - s) * a + s * b
        vals = []
        for t in tris:
            bary = mesh.companions[t].barycentric(pts)
            vals.append(de_casteljau(blocks[t], table.working_degree(t), bary))
        worst = max(worst, np.abs(vals[0] - vals[1]).max())
    assert worst <= 1e-12


def test_adjoint(table):
    rng = np.random.default_rng(1)
    for _ in range(20):
        x = rng.normal(size=table.N)
        y = [rng.normal(size=lm.matrix.shape[0]) for lm in table.local]
        lhs = sum(a @ b for a, b in zip(table.apply_T(x), y))
        rhs = x @ table.apply_T_transpose(y)
        assert lhs == pytest.approx(rhs, rel=1e-13, abs=1e-13)


def test_rank(table):
    rng = np.random.default_rng(2)
    pts = interior_points(table.mesh, 3 * table.N, rng)
    assert np.linalg.matrix_rank(table.evaluation_matrix(pts)) == table.N


def test_evaluation_matrix_matches_basis_eval(table):
    rng = np.random.default_rng(7)
    pts = interior_points(table.mesh, 5, rng)
    ev = table.evaluation_matrix(pts)
    for n, p in enumerate(pts):
        for xi in range(0, table.N, 3):
            assert ev[n, xi] == pytest.approx(table.basis_eval(xi, p), abs=1e-14)


def test_support_locality(table):
    mesh = table.mesh
    for xi in range(0, table.N, max(1, table.N // 7)):
        key = table.keys[xi]
        supp = set(table.support(xi))
        assert key.owner in supp
        owner_verts = set(mesh.triangles[key.owner])
        for t in supp:
            # every triangle of the support touches the owner triangle
            assert owner_verts & set(mesh.triangles[t])


# -- specific structures ----------------------------------------------------------

def test_disk_fan_d2_has_five_dofs():
    t = build_mds(domains.disk_fan(), 2)
    assert t.N == 5
    rng = np.random.default_rng(3)
    pts = interior_points(t.mesh, 50, rng)
    ev = np.array([[t.basis_eval(xi, p) for xi in range(5)] for p in pts])
    assert np.linalg.matrix_rank(ev) == 5


def test_straight_mesh_classical_count():
    for n in (2, 4):
        mesh = domains.square_mesh(n)
        for d in (2, 3, 4, 5):
            assert build_mds(mesh, d).N == classical_dimension(mesh, d)


def test_ordinary_unit_vector():
    t = build_mds(domains.square_mesh(2), 3)
    xi = next(i for i, k in enumerate(t.keys) if k.kind == DofKind.ORDINARY and 0 not in k.ijk)
    e = np.zeros(t.N)
    e[xi] = 1.0
    blocks = t.apply_T(e)
    owner = t.keys[xi].owner
    for tri, blk in enumerate(blocks):
        expected = np.zeros_like(blk)
        if tri == owner:
            expected[rank(*t.keys[xi].ijk)] = 1.0
        np.testing.assert_array_equal(blk, expected)


def test_pie_apex_column_quarter_circle():
    # q = 1 - x^2 - y^2 has omega110 = omega101 = omega011 = 1
    d = 2
    t = build_mds(domains.disk_fan(), d)
    xi = next(i for i, k in enumerate(t.keys)
              if k.kind == DofKind.PIE_STAR and k.ijk == (0, 0, d - 1))
    col = t.column(xi)
    assert sorted(col) == [0, 1, 2, 3]
    den = d * (d + 1)
    for blk in col.values():
        expected = np.zeros_like(blk)
        expected[rank(1, 1, d - 1)] = 2 / den
        expected[rank(1, 0, d)] = 2 * d / den
        expected[rank(0, 1, d)] = 2 * d / den
        expected[rank(0, 0, d + 1)] = 1.0
        np.testing.assert_allclose(blk, expected, atol=1e-15)


def test_shared_pie_edges_consistent():
    mesh = refine_uniform(domains.disk_fan())
    rng = np.random.default_rng(4)
    t = build_mds(mesh, 3)
    blocks = t.apply_T(rng.normal(size=t.N))
    n = 4
    for eid, tris in enumerate(mesh.edge_tris):
        if len(tris) == 2 and all(mesh.kinds[x] == TriKind.PIE for x in tris):
            vals = []
            a, b = mesh.vertices[mesh.edges[eid]]
            pts = a + np.linspace(0, 1, 7)[:, None] * (b - a)
            for x in tris:
                vals.append(de_casteljau(blocks[x], n, mesh.companions[x].barycentric(pts)))
            np.testing.assert_allclose(vals[0], vals[1], atol=1e-12)


def test_gram_positive_and_symmetric():
    t = build_mds(domains.ellipse_mesh(), 3)
    T = t.sparse_T()
    rng = np.random.default_rng(5)
    blocks = []
    for lm in t.local:
        a = rng.normal(size=(lm.matrix.shape[0],) * 2)
        blocks.append(a @ a.T + np.eye(len(a)))
    G = (T.T @ sp.block_diag(blocks) @ T).toarray()
    np.testing.assert_allclose(G, G.T, atol=1e-12 * np.abs(G).max())
    assert np.all(np.diag(G) > 0)


@settings(max_examples=6, deadline=None)
@given(st.sampled_from(sorted(MESHES)), st.integers(2, 5))
def test_count_after_refinement(name, d):
    mesh = refine_uniform(MESHES[name]())
    assert build_mds(mesh, d).N == count_dofs(mesh, d)


def test_evaluate_matches_basis_sum():
    t = build_mds(domains.conic_mesh(), 2)
    rng = np.random.default_rng(6)
    x = rng.normal(size=t.N)
    pts = interior_points(t.mesh, 8, rng)
    direct = np.array([sum(x[i] * t.basis_eval(i, p) for i in range(t.N)) for p in pts])
    np.testing.assert_allclose(t.evaluate(x, pts), direct, rtol=1e-12, atol=1e-12)


def test_triplet_dump(tmp_path):
    t = build_mds(domains.disk_fan(), 2)
    path = tmp_path / "t.csv"
    t.dump_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "triangle,local_index,dof,weight"
    assert len(lines) - 1 == t.sparse_T().nnz


def test_errors():
    with pytest.raises(UsageError):
        build_mds(domains.disk_fan(), 1)
    t = build_mds(domains.disk_fan(), 2)
    with pytest.raises(UsageError):
        t.apply_T(np.ones(t.N + 1))
    with pytest.raises(UsageError):
        t.basis_eval(t.N, (0.1, 0.1))


def test_keys_sorted():
    t = build_mds(domains.ellipse_mesh(), 3)
    assert list(t.keys) == sorted(t.keys)
    assert LOCAL_EDGES[2] == (0, 1)


def test_pie_division_ratio_diagnostic():
    # sampled max|r| / max|r q| on pie triangles; reported, finite, not held to a constant
    from conic_fem.bernstein import BBPatch, eval_bb, multiply_quadratic

    mesh = domains.ellipse_mesh()
    rng = np.random.default_rng(8)
    pts = interior_points(mesh, 400, rng)
    ratios = []
    for t in np.flatnonzero(mesh.kinds == TriKind.PIE):
        q = mesh.qforms[t]
        tri = mesh.companions[t]
        inside = [p for p in pts if mesh.locate(p)[0] == t]
        b = tri.barycentric(np.array(inside))
        for _ in range(5):
            r = BBPatch(3, rng.normal(size=10))
            ratios.append(np.abs(eval_bb(r, b)).max()
                          / np.abs(eval_bb(multiply_quadratic(q, r), b)).max())
    print(f"max |r| / |rq| sampled ratio: {max(ratios):.3g}")
    assert np.all(np.isfinite(ratios)) and min(ratios) >= 1.0 - 1e-12
