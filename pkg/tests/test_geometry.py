"""Grids, distance fields, admissible sets, blow-up domains."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ballopt import geometry as G
from ballopt.limit import ball_radius


def test_unit_square_interior_count():
    dom = G.build_domain(G.Rectangle((0, 0), (1, 1)), 1 / 64)
    assert dom.interior_count() == 63 * 63
    assert G._connected(dom.interior_mask)


def test_disk_area_converges():
    dom = G.build_domain(G.Disk((0, 0), 1.0), 1 / 64)
    area = dom.discrete_volume()
    assert abs(area - math.pi) < 4 * (1 / 64) * (2 * math.pi)


def test_lshape_area_and_connectivity():
    dom = G.build_domain(G.lshape(2.0, 1.0), 1 / 32)
    assert abs(dom.discrete_volume() - 3.0) < 10 * (1 / 32)
    assert G._connected(dom.interior_mask)


def test_degenerate_grid_raises():
    # two disks with no neck disconnect at any resolution
    shape = G.ShapeUnion((G.Disk((0, 0), 0.3), G.Disk((1.0, 0), 0.3)))
    with pytest.raises(ValueError, match="degenerate grid"):
        G.build_domain(shape, 1 / 32)


def test_extents_too_small():
    with pytest.raises(ValueError, match="at least 3"):
        G.GridSpec(dim=1, h=1.0, origin=(0.0,), counts=(2,))


@pytest.mark.parametrize("shape,expect", [
    (G.Rectangle((0, 0), (1, 1)), 0.5),
    (G.Disk((0, 0), 1.0), 1.0),
])
def test_distance_analytic_shapes(shape, expect):
    dom = G.build_domain(shape, 1 / 64)
    q, d_max = G.incenter(dom)
    assert d_max == pytest.approx(expect, abs=1 / 64)


def test_square_center_distance():
    dom = G.build_domain(G.Rectangle((0, 0), (1, 1)), 1 / 64)
    pts = np.array([[0.5, 0.5]])
    assert dom.shape.distance(pts)[0] == pytest.approx(0.5)


def test_disk_radial_distance():
    shp = G.Disk((0, 0), 1.0)
    rho = 0.3
    assert shp.distance(np.array([[rho, 0.0]]))[0] == pytest.approx(1.0 - rho)


def test_lshape_point_distance_brute_force():
    shp = G.lshape(2.0, 1.0)
    # brute-force min over densely sampled boundary points
    segs = list(shp.vertices) + [shp.vertices[0]]
    samples = []
    for a, b in zip(segs, segs[1:]):
        a, b = np.asarray(a, float), np.asarray(b, float)
        for t in np.linspace(0, 1, 4000):
            samples.append(a + t * (b - a))
    samples = np.asarray(samples)
    p = np.array([0.5, 0.5])
    brute = np.min(np.linalg.norm(samples - p, axis=1))
    assert shp.distance(p.reshape(1, -1))[0] == pytest.approx(brute, abs=1e-3)
    assert brute == pytest.approx(0.5, abs=1e-3)


def test_ellipse_distance_against_finite_differences():
    shp = G.Ellipse((0, 0), (1.0, 0.6))
    # generic interior points off the major-axis ridge, where grad d exists
    pts = np.array([[0.2, 0.1], [0.45, 0.15], [0.0, 0.3], [-0.4, -0.2]])
    d = shp.distance(pts)
    assert np.all(d > 0)
    # distance function has unit gradient toward the boundary
    for p, d0 in zip(pts, d):
        g = np.zeros(2)
        for i in range(2):
            dp = np.zeros(2)
            dp[i] = 1e-5
            g[i] = (shp.distance((p + dp).reshape(1, -1))[0]
                    - shp.distance((p - dp).reshape(1, -1))[0]) / 2e-5
        assert np.linalg.norm(g) == pytest.approx(1.0, abs=1e-3)


def test_incenter_square():
    dom = G.build_domain(G.Rectangle((0, 0), (1, 1)), 1 / 64)
    q, d_max = G.incenter(dom)
    assert np.allclose(q, [0.5, 0.5], atol=1e-12)
    assert d_max == pytest.approx(0.5)


def test_incenter_rectangle_2x1_plateau():
    # the deepest set is a segment; the reported point is its centroid node
    dom = G.build_domain(G.Rectangle((0, 0), (2, 1)), 1 / 64)
    q, d_max = G.incenter(dom)
    assert np.allclose(q, [1.0, 0.5], atol=1e-12)
    assert d_max == pytest.approx(0.5)


def test_incenter_dumbbell_in_big_disk():
    dom = G.build_domain(G.dumbbell(), 1 / 64)
    q, d_max = G.incenter(dom)
    # grid argmax oracle
    flat = np.argmax(dom.dist)
    assert dom.dist.ravel()[flat] == pytest.approx(d_max)
    assert np.linalg.norm(q - np.array([0.0, 0.0])) <= 2 / 64
    assert d_max == pytest.approx(0.5, abs=2 / 64)


def test_incenter_translation_invariance():
    base = G.build_domain(G.Rectangle((0, 0), (2, 1)), 1 / 32)
    shift = np.array([0.3, 0.7])
    moved = G.build_domain(G.Rectangle((0, 0), (2, 1)).translated(shift), 1 / 32)
    qb, db = G.incenter(base)
    qm, dm = G.incenter(moved)
    assert dm == pytest.approx(db, abs=1e-12)
    assert np.allclose(qm, qb + shift, atol=1e-9)


def test_admissible_centers_square():
    dom = G.build_domain(G.Rectangle((0, 0), (1, 1)), 1 / 64)
    eps = math.pi * 0.25 ** 2  # r(eps) = 0.25
    mask = G.admissible_centers(dom, eps)
    pts = dom.node_coords()[mask.ravel()]
    assert np.all(pts >= 0.25 - 1e-9)
    assert np.all(pts <= 0.75 + 1e-9)


def test_admissible_centers_disk_radial():
    dom = G.build_domain(G.Disk((0, 0), 1.0), 1 / 64)
    eps = math.pi * 0.5 ** 2
    mask = G.admissible_centers(dom, eps)
    pts = dom.node_coords()[mask.ravel()]
    assert np.all(np.linalg.norm(pts, axis=1) <= 0.5 + 1e-9)


def test_admissible_empty_raises():
    dom = G.build_domain(G.Rectangle((0, 0), (1, 1)), 1 / 32)
    with pytest.raises(ValueError, match="epsilon too large"):
        G.admissible_centers(dom, math.pi * 0.9 ** 2)


@settings(max_examples=20, deadline=None)
@given(st.floats(min_value=0.01, max_value=0.2), st.floats(min_value=1.05, max_value=3.0))
def test_admissible_monotone_in_eps(eps1, factor):
    dom = G.build_domain(G.Rectangle((0, 0), (1, 1)), 1 / 32)
    eps2 = eps1 * factor
    m1 = G.admissible_centers(dom, eps1)
    try:
        m2 = G.admissible_centers(dom, eps2)
    except ValueError:
        return
    assert np.all(m1 | ~m2)  # set(eps2) subset of set(eps1)


def test_volume_close_for_three_shapes():
    for shape, vol, per in [
        (G.Rectangle((0, 0), (1, 1)), 1.0, 4.0),
        (G.Disk((0, 0), 1.0), math.pi, 2 * math.pi),
        (G.lshape(2.0, 1.0), 3.0, 8.0),
    ]:
        dom = G.build_domain(shape, 1 / 48)
        assert abs(dom.discrete_volume() - vol) <= 2.5 * (1 / 48) * per


def test_blow_up_square_center_full_window():
    dom = G.build_domain(G.Rectangle((0, 0), (1, 1)), 1 / 64)
    bu = G.blow_up_domain(dom, (0.5, 0.5), k=0.1, window=2.0, h_blow=0.05)
    # d/k = 5 > 2 sqrt(2): the window is entirely interior
    assert bu.interior_mask.all()


def test_blow_up_near_boundary_truncated():
    dom = G.build_domain(G.Rectangle((0, 0), (1, 1)), 1 / 64)
    bu = G.blow_up_domain(dom, (0.15, 0.5), k=0.1, window=2.0, h_blow=0.05)
    assert not bu.interior_mask.all()
    mask = bu.interior_mask
    # half-plane-like: clipped on the left side only
    assert mask[:, -1].all()
    assert not mask[:, 0].all()


def test_blow_up_disk_scaling():
    dom = G.build_domain(G.Disk((0, 0), 1.0), 1 / 64)
    bu = G.blow_up_domain(dom, (0.0, 0.0), k=0.5, window=3.0, h_blow=0.05)
    pts = bu.node_coords()
    inside = bu.interior_mask.ravel()
    r = np.linalg.norm(pts, axis=1)
    assert np.all(r[inside] < 2.0 + 1e-9)
    assert np.all(r[~inside] > 2.0 - 0.1)


def test_blow_up_round_trip_mask():
    dom = G.build_domain(G.Rectangle((0, 0), (1, 1)), 1 / 64)
    k = 0.25
    bu = G.blow_up_domain(dom, (0.5, 0.5), k=k, window=2.5, h_blow=1 / 64 / k)
    pts = bu.node_coords()
    phys = np.array([0.5, 0.5]) + k * pts
    expect = dom.shape.contains(phys)
    assert np.array_equal(bu.interior_mask.ravel(), expect)


def test_blow_up_memory_budget():
    dom = G.build_domain(G.Rectangle((0, 0), (1, 1)), 1 / 64)
    with pytest.raises(MemoryError, match="nodes"):
        G.blow_up_domain(dom, (0.5, 0.5), k=0.1, window=2.0, h_blow=1e-4,
                         memory_budget=10_000)


def test_chamfer_against_exact_distance():
    # chamfer transform on a polygon rasterization vs exact segment distance:
    # one-sided (paths through exterior nodes cannot undershoot) and within
    # the (1, sqrt 2) metric overshoot of 8.2% plus a node-offset cell
    h = 1 / 48
    poly = G.Polygon(((0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)))
    dom = G.build_domain(poly, h, chamfer=True)
    exact = poly.distance(dom.node_coords()).reshape(dom.dist.shape)
    inside = dom.interior_mask
    signed = (dom.dist - exact)[inside]
    assert signed.min() >= -1e-9
    assert np.all(signed <= 0.09 * exact[inside] + 1.5 * h)
    assert np.median(np.abs(signed)) <= 1.1 * h


def test_distance_csv_export():
    dom = G.build_domain(G.Rectangle((0, 0), (1, 1)), 0.25)
    text = G.export_distance_csv(dom)
    lines = text.strip().split("\n")
    assert lines[0] == "x,y,d"
    assert len(lines) == 1 + dom.interior_mask.size
