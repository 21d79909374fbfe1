import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from fictdom.geometry import PolygonBoundary, build_macro_partition, build_structured_mesh, trace_boundary
from fictdom.spaces import apply_fluctuation, build_dof_map, p1_trace_on_edge

UNIT_SQUARE = PolygonBoundary.from_points([(0, 0), (1, 0), (1, 1), (0, 1)])


def setup(a=0.5, n=8, gamma=UNIT_SQUARE):
    mesh = build_structured_mesh((-a, 1 + a, -a, 1 + a), n)
    fine = trace_boundary(mesh, gamma)
    return mesh, fine, build_macro_partition(fine)


def test_dof_counts():
    mesh = build_structured_mesh((-0.5, 1.5, -0.5, 1.5), 1)
    dofs = build_dof_map(mesh, trace_boundary(build_structured_mesh((-0.5, 1.5, -0.5, 1.5), 8), UNIT_SQUARE))
    assert dofs.n_u == 0
    mesh, fine, _ = setup()
    dofs = build_dof_map(mesh, fine)
    assert dofs.n_u == 49
    assert dofs.n_l == 16
    idx = dofs.interior_index
    assert np.all(idx[mesh.boundary_vertex_mask()] == -1)
    assert sorted(idx[idx >= 0]) == list(range(49))


def test_expand_zero_on_box_boundary():
    mesh, fine, _ = setup()
    dofs = build_dof_map(mesh, fine)
    u = dofs.expand(np.arange(1.0, dofs.n_u + 1))
    assert np.all(u[mesh.boundary_vertex_mask()] == 0)
    np.testing.assert_array_equal(dofs.restrict(u), np.arange(1.0, dofs.n_u + 1))


def test_trace_on_full_triangle_side():
    mesh, fine, _ = setup()
    # aligned case: every fine edge is a full mesh edge
    e = fine.edges[0]
    traces = p1_trace_on_edge(mesh, e)
    vals = sorted((round(t.v0, 14), round(t.v1, 14)) for t in traces)
    assert vals == [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0)]
    s = np.linspace(e.s0, e.s1, 5)
    t = (s - e.s0) / e.length
    start = next(tr for tr in traces if tr.v0 == pytest.approx(1.0))
    np.testing.assert_allclose(start(s), 1 - t, atol=1e-14)


def test_trace_interior_edge_matches_barycentric_oracle():
    gamma = PolygonBoundary.from_points([(0.13, 0.07), (0.91, 0.29), (0.62, 0.88), (0.05, 0.55)])
    mesh, fine, _ = setup(0.25, 11, gamma)
    rng = np.random.default_rng(3)
    for e in fine.edges:
        traces = p1_trace_on_edge(mesh, e)
        s = rng.uniform(e.s0, e.s1, size=10)
        total = sum(tr(s) for tr in traces)
        np.testing.assert_allclose(total, 1.0, atol=1e-13)
        # oracle: solve for barycentric coordinates of sample points directly
        A, B, C = mesh.vertices[mesh.triangles[e.host_triangle]]
        t = (s - e.s0) / e.length
        pts = np.outer(1 - t, e.p0) + np.outer(t, e.p1)
        M = np.array([[A[0], B[0], C[0]], [A[1], B[1], C[1]], [1.0, 1.0, 1.0]])
        bary = np.linalg.solve(M, np.vstack([pts.T, np.ones_like(t)]))
        for k, tr in enumerate(traces):
            np.testing.assert_allclose(tr(s), bary[k], atol=1e-12)


def test_fluctuation_examples():
    mesh, fine, macros = setup(0.3, 8)
    mu = np.zeros(len(fine))
    m = macros.macros[0]
    mu[m.start:m.stop] = 2.5
    np.testing.assert_allclose(apply_fluctuation(macros, fine, mu), 0.0, atol=1e-15)


def test_fluctuation_two_equal_edges():
    from fictdom.geometry import FinePartition, MacroEdge, MacroPartition
    _, fine, _ = setup(0.5, 8)
    first_two = FinePartition(fine.edges[:2], fine.gamma)
    macros = MacroPartition((MacroEdge(0, 0, 2, 0.5),), first_two, 3.0, 6.0, 0.25)
    a, b = 3.0, -1.0
    np.testing.assert_allclose(apply_fluctuation(macros, first_two, np.array([a, b])),
                               [(a - b) / 2, (b - a) / 2], atol=1e-15)


def test_fluctuation_weighted_mean():
    from fictdom.geometry import BoundaryEdge, FinePartition, MacroEdge, MacroPartition, Point2
    edges = (BoundaryEdge(0, 0.0, 0.1, Point2(0, 0), Point2(0.1, 0), 0),
             BoundaryEdge(0, 0.1, 0.4, Point2(0.1, 0), Point2(0.4, 0), 0))
    fine = FinePartition(edges, UNIT_SQUARE)
    macros = MacroPartition((MacroEdge(0, 0, 2, 0.4),), fine, 3.0, 6.0, 0.1)
    np.testing.assert_allclose(apply_fluctuation(macros, fine, np.array([1.0, 0.0])), [0.75, -0.25], atol=1e-15)


def test_fluctuation_rejects_wrong_length():
    mesh, fine, macros = setup()
    with pytest.raises(ValueError):
        apply_fluctuation(macros, fine, np.zeros(3))


@pytest.fixture(scope="module")
def unaligned():
    gamma = PolygonBoundary.from_points([(0.13, 0.07), (0.91, 0.29), (0.62, 0.88), (0.05, 0.55)])
    return setup(0.25, 23, gamma)


@settings(max_examples=50, deadline=None)
@given(data=st.data())
def test_fluctuation_properties(unaligned, data):
    mesh, fine, macros = unaligned
    mu = data.draw(arrays(np.float64, len(fine), elements=st.floats(-1e3, 1e3)))
    fl = apply_fluctuation(macros, fine, mu)
    scale = 1.0 + np.abs(mu).max()
    # idempotence
    np.testing.assert_allclose(apply_fluctuation(macros, fine, fl), fl, atol=1e-13 * scale)
    # mass orthogonality on every macro edge
    mass = np.bincount(macros.assignment, weights=fine.lengths * fl)
    assert np.abs(mass).max() <= 1e-13 * scale
    # locality
    k = data.draw(st.integers(0, len(macros) - 1))
    m = macros.macros[k]
    bumped = mu.copy()
    bumped[m.start:m.stop] += data.draw(st.floats(-10, 10))
    diff = apply_fluctuation(macros, fine, bumped) - fl
    outside = np.ones(len(fine), bool)
    outside[m.start:m.stop] = False
    assert np.all(diff[outside] == 0)
