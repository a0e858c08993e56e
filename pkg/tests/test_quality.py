import numpy as np
import pytest

from gfo.grasp import Contact
from gfo.quality import (
    QualityReport,
    WrenchSet,
    cone_edges,
    contact_wrenches,
    grasp_wrench_set,
    min_norm_point,
    q_lrw_exact,
    q_lrw_sampled,
)

CROSS_POLYTOPE = np.vstack([np.eye(6), -np.eye(6)])

CROSS_Q = 1.0 / np.sqrt(6.0)


def symmetric_cloud(rng, half_count):
    half = rng.normal(size=(half_count, 6))
    return np.vstack([half, -half])


def test_min_norm_single_point():
    p, d = min_norm_point(np.array([[3.0, 4.0, 0.0, 0.0, 0.0, 0.0]]))
    assert d == 5.0
    assert np.array_equal(p, [3, 4, 0, 0, 0, 0])


def test_min_norm_opposite_pair_hits_origin():
    _, d = min_norm_point(np.array([[1.0, 0, 0, 0, 0, 0], [-1.0, 0, 0, 0, 0, 0]]))
    assert d <= 1e-9


def test_min_norm_cross_polytope_contains_origin():
    _, d = min_norm_point(CROSS_POLYTOPE)
    assert d <= 1e-9


def test_min_norm_offset_segment():
    seg = np.zeros((2, 6))
    seg[0, :2] = [2.0, 1.0]
    seg[1, :2] = [2.0, -3.0]
    p, d = min_norm_point(seg)
    assert d == pytest.approx(2.0, abs=1e-9)
    assert p[0] == pytest.approx(2.0, abs=1e-9)
    assert abs(p[1]) < 1e-8


def test_min_norm_optimality_condition():
    # the minimizer x must satisfy x.p >= ||x||^2 for every hull point
    rng = np.random.default_rng(0)
    for _ in range(40):
        pts = rng.normal(size=(int(rng.integers(2, 25)), 6)) + 0.5 * rng.normal(size=6)
        x, d = min_norm_point(pts)
        assert np.all(pts @ x >= x @ x - 1e-7)
        assert d == pytest.approx(np.linalg.norm(x))


def test_min_norm_empty_rejected():
    with pytest.raises(ValueError):
        min_norm_point(np.zeros((0, 6)))


def test_cone_edges_square_pyramid():
    edges = cone_edges(Contact((0, 0, 0), (0, 0, 1), 1.0), 4)
    got = {tuple(np.round(e, 12)) for e in edges}
    assert got == {
        (1.0, 0.0, 1.0),
        (-1.0, 0.0, 1.0),
        (0.0, 1.0, 1.0),
        (0.0, -1.0, 1.0),
    }


def test_cone_edges_lie_on_boundary():
    for mu in (0.2, 0.8, 1.7):
        c = Contact((0, 0, 0), (0, 0, 1), mu)
        for e in cone_edges(c, 7):
            margin = e @ c.axis - np.linalg.norm(e) / np.sqrt(mu**2 + 1.0)
            assert abs(margin) < 1e-12


def test_cone_edges_tiny_mu_collapses_to_axis():
    c = Contact((0, 0, 0), (0, 0, 1), 1e-9)
    for e in cone_edges(c, 5):
        assert np.linalg.norm(e - np.array([0, 0, 1.0])) < 2e-9


def test_cone_edges_tilted_axis_count_and_normal_component():
    axis = np.array([1.0, 2.0, 2.0]) / 3.0
    c = Contact((0, 0, 0), axis, 0.6)
    edges = cone_edges(c, 9)
    assert len(edges) == 9
    for e in edges:
        assert e @ axis == pytest.approx(1.0, abs=1e-12)


def test_cone_edges_validation():
    with pytest.raises(ValueError):
        cone_edges(Contact((0, 0, 0), (0, 0, 1), 0.5), 2)
    with pytest.raises(ValueError):
        cone_edges(Contact((0, 0, 0), (0, 0, 1), 0.0), 4)


def test_contact_wrenches_zero_arm():
    c = Contact((0, 0, 0), (0, 0, 1), 0.5)
    for w in contact_wrenches(c, cone_edges(c, 6)):
        assert np.array_equal(w[3:], np.zeros(3))


def test_contact_wrenches_cross_product():
    c = Contact((1, 0, 0), (0, 0, 1), 0.5)
    w = contact_wrenches(c, [np.array([0.0, 0.0, 1.0])], lam=1.0)
    assert np.allclose(w[0], [0, 0, 1, 0, -1, 0])
    w2 = contact_wrenches(c, [np.array([0.0, 0.0, 1.0])], lam=4.0)
    assert np.allclose(w2[0], [0, 0, 1, 0, -0.25, 0])


def test_contact_wrenches_rejects_bad_scale():
    c = Contact((1, 0, 0), (0, 0, 1), 0.5)
    with pytest.raises(ValueError):
        contact_wrenches(c, [np.array([0.0, 0.0, 1.0])], lam=0.0)


def test_grasp_wrench_set_point_count():
    contacts = [
        Contact((1, 0, 0), (-1, 0, 0), 0.5),
        Contact((-1, 0, 0), (1, 0, 0), 0.5),
        Contact((0, 1, 0), (0, -1, 0), 0.5),
    ]
    ws = grasp_wrench_set(contacts, m=8)
    assert ws.points.shape == (24, 6)


def test_wrench_set_validation_and_scaling():
    with pytest.raises(ValueError):
        WrenchSet(np.zeros((0, 6)))
    with pytest.raises(ValueError):
        WrenchSet(np.full((2, 6), np.nan))
    with pytest.raises(ValueError):
        WrenchSet(np.ones((2, 6)), lam=0.0)
    ws = WrenchSet(np.ones((2, 6)), lam=2.0)
    scaled = ws.scaled_points()
    assert np.array_equal(scaled[:, :3], np.ones((2, 3)))
    assert np.array_equal(scaled[:, 3:], np.full((2, 3), 0.5))
    # original untouched
    assert np.array_equal(ws.points, np.ones((2, 6)))


def test_quality_report_consistency_guard():
    with pytest.raises(ValueError):
        QualityReport(0.3, False, "exact")


def test_exact_cross_polytope():
    rep = q_lrw_exact(CROSS_POLYTOPE)
    assert rep.q_lrw == pytest.approx(CROSS_Q, abs=1e-9)
    assert rep.contains_origin
    assert rep.method == "exact"
    assert rep.facet_count == 64


def test_exact_origin_outside():
    rep = q_lrw_exact(CROSS_POLYTOPE + np.array([2.0, 0, 0, 0, 0, 0]))
    assert rep.q_lrw == 0.0
    assert not rep.contains_origin


def test_exact_positive_homogeneity():
    for s in (0.5, 3.0, 20.0):
        rep = q_lrw_exact(s * CROSS_POLYTOPE)
        assert rep.q_lrw == pytest.approx(s * CROSS_Q, rel=1e-9)


def test_exact_rotation_invariance():
    rng = np.random.default_rng(23)
    base = q_lrw_exact(CROSS_POLYTOPE).q_lrw
    for _ in range(3):
        q, _ = np.linalg.qr(rng.normal(size=(6, 6)))
        rep = q_lrw_exact(CROSS_POLYTOPE @ q.T)
        assert rep.q_lrw == pytest.approx(base, abs=1e-9)


def test_exact_non_spanning_scores_zero():
    flat = np.vstack([np.eye(6)[:5], -np.eye(6)[:5]])
    rep = q_lrw_exact(flat)
    assert rep.q_lrw == 0.0
    assert not rep.contains_origin


def test_exact_point_cap():
    with pytest.raises(ValueError):
        q_lrw_exact(np.ones((31, 6)))


def test_sampled_cross_polytope_band():
    rep = q_lrw_sampled(CROSS_POLYTOPE, 100_000, seed=0)
    assert CROSS_Q <= rep.q_lrw <= 1.05 * CROSS_Q
    assert rep.direction_count == 100_000
    assert rep.method == "sampled"


def test_sampled_deterministic():
    a = q_lrw_sampled(CROSS_POLYTOPE, 5000, seed=42)
    b = q_lrw_sampled(CROSS_POLYTOPE, 5000, seed=42)
    assert a.q_lrw == b.q_lrw


def test_sampled_single_direction_upper_bounds():
    for seed in range(5):
        rep = q_lrw_sampled(CROSS_POLYTOPE, 1, seed=seed)
        assert rep.q_lrw >= CROSS_Q


def test_sampled_origin_outside_skips_sampling():
    rep = q_lrw_sampled(CROSS_POLYTOPE + np.array([2.0, 0, 0, 0, 0, 0]), 100, seed=0)
    assert rep.q_lrw == 0.0
    assert not rep.contains_origin
    assert rep.direction_count == 0


def test_sampled_rejects_zero_directions():
    with pytest.raises(ValueError):
        q_lrw_sampled(CROSS_POLYTOPE, 0, seed=0)


def test_sampled_upper_bounds_exact_on_random_sets():
    rng = np.random.default_rng(6)
    for _ in range(5):
        pts = symmetric_cloud(rng, int(rng.integers(6, 11)))
        exact = q_lrw_exact(pts)
        sampled = q_lrw_sampled(pts, 2000, seed=int(rng.integers(0, 1000)))
        assert exact.contains_origin and sampled.contains_origin
        assert sampled.q_lrw >= exact.q_lrw - 1e-12


def test_sphere_grasp_pipeline_positive_quality():
    angles = (0.0, 2.0 * np.pi / 3.0, 4.0 * np.pi / 3.0)
    contacts = [
        Contact((np.cos(t), np.sin(t), 0.0), (-np.cos(t), -np.sin(t), 0.0), 0.8)
        for t in angles
    ]
    ws = grasp_wrench_set(contacts, m=8, lam=1.0)
    rep = q_lrw_exact(ws.scaled_points())
    assert rep.contains_origin
    assert rep.q_lrw > 0.0
