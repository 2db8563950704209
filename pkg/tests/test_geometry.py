import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from clumpsplit import geometry as geo
from oracles import N4, disc, exterior_boundary, flood_components, hull_mask

masks = arrays(bool, st.tuples(st.integers(1, 12), st.integers(1, 12)))


def clump_of(mask):
    (c,) = geo.label_components(mask)
    return c


# -- components and centroid -------------------------------------------------


def test_label_empty():
    assert geo.label_components(np.zeros((4, 4), bool)) == []


def test_label_single_pixel():
    m = np.zeros((5, 5), bool)
    m[3, 2] = True
    (c,) = geo.label_components(m)
    assert c.label == 1 and c.area == 1 and c.centroid == (2.0, 3.0)


def test_label_diagonal_gap_gives_two():
    m = np.zeros((4, 4), bool)
    m[0, 0] = m[3, 3] = True
    assert len(geo.label_components(m)) == 2


def test_label_diagonal_touch_is_one():
    m = np.eye(4, dtype=bool)
    assert len(geo.label_components(m)) == 1


@settings(max_examples=150, deadline=None)
@given(masks)
def test_label_matches_flood_fill(m):
    got = geo.label_components(m)
    want = flood_components(m)
    assert [c.label for c in got] == list(range(1, len(want) + 1))
    assert [set(map(tuple, c.pixels.tolist())) for c in got] == want
    assert sum(c.area for c in got) == m.sum()
    for c in got:
        assert np.allclose(c.centroid, c.pixels.mean(axis=0), atol=1e-9)


@pytest.mark.parametrize(
    "pixels, expected",
    [
        ([(5, 7)], (5.0, 7.0)),
        ([(0, 0), (1, 0), (0, 1), (1, 1)], (0.5, 0.5)),
        ([(0, 0), (1, 0), (2, 0)], (1.0, 0.0)),
    ],
)
def test_centroid(pixels, expected):
    assert geo.centroid(pixels) == pytest.approx(expected, abs=1e-12)


def test_centroid_empty():
    with pytest.raises(geo.EmptyClumpError, match="empty clump"):
        geo.centroid([])


def test_clump_rejects_empty():
    with pytest.raises(geo.EmptyClumpError):
        geo.Clump(1, np.empty((0, 2)))


def test_clump_bbox_and_local_mask():
    c = geo.Clump(1, [(3, 4), (5, 4), (4, 6)])
    assert c.bbox(pad=1) == (2, 3, 5, 5)
    local, origin = c.local_mask(pad=1)
    assert origin == (2, 3)
    assert local.sum() == 3 and local[1, 1] and local[1, 3] and local[3, 2]


# -- contours ----------------------------------------------------------------


def is_closed_8_path(points):
    d = np.abs(np.diff(np.vstack([points, points[:1]]), axis=0))
    return bool(np.all(d.max(axis=1) == 1))


def test_contour_single_pixel():
    c = geo.trace_contour(geo.Clump(1, [(4, 4)]))
    assert c.points.tolist() == [[4, 4]]


def test_contour_square_ring():
    m = np.zeros((5, 5), bool)
    m[1:4, 1:4] = True
    c = geo.trace_contour(clump_of(m))
    assert len(c) == 8
    assert set(map(tuple, c.points.tolist())) == {
        (x, y) for x in range(1, 4) for y in range(1, 4) if (x, y) != (2, 2)
    }


def test_contour_circle_r20():
    m = disc((50, 50), 25, 25, 20)
    clump = clump_of(m)
    c = geo.trace_contour(clump)
    pts = set(map(tuple, c.points.tolist()))
    # frozen from the brute-force boundary scan in tests/oracles.py
    assert len(c) == 112
    assert pts == exterior_boundary(clump.pixels)
    step = np.diff(np.vstack([c.points, c.points[:1]]), axis=0)
    length = np.hypot(*step.T).sum()
    assert 2 * math.pi * 20 * 0.9 <= length <= 2 * math.pi * 20 * 1.5
    assert is_closed_8_path(c.points)


def test_contour_ignores_holes():
    m = np.zeros((9, 9), bool)
    m[1:8, 1:8] = True
    m[4, 4] = False
    c = geo.trace_contour(clump_of(m))
    assert len(c) == 24


def test_contour_is_counterclockwise_in_xy():
    m = disc((30, 30), 15, 15, 8)
    c = geo.trace_contour(clump_of(m))
    assert geo._signed_area(c.points) > 0


def test_contour_ignores_other_clumps():
    m = np.zeros((6, 10), bool)
    m[1:4, 1:4] = True
    m[1:4, 6:9] = True
    a, b = geo.label_components(m)
    assert set(map(tuple, geo.trace_contour(a, m).points.tolist())) <= set(
        map(tuple, a.pixels.tolist())
    )


@settings(max_examples=200, deadline=None)
@given(masks)
def test_contour_properties(m):
    for clump in geo.label_components(m):
        c = geo.trace_contour(clump)
        pts = set(map(tuple, c.points.tolist()))
        assert pts == exterior_boundary(clump.pixels)
        if len(c) > 1:
            assert is_closed_8_path(c.points)


# -- hull and concave parts --------------------------------------------------


def test_hull_of_rectangle_is_itself():
    m = np.zeros((8, 9), bool)
    m[2:6, 1:8] = True
    assert np.array_equal(geo.convex_hull_mask(clump_of(m), m.shape), m)


def test_hull_of_l_shape_follows_pixel_centres():
    # the 3x3 square minus a corner is already convex on pixel centres, so
    # the missing corner stays out of the hull
    m = np.ones((3, 3), bool)
    m[0, 2] = False
    hull = geo.convex_hull_mask(clump_of(m), m.shape)
    assert np.array_equal(hull, hull_mask(np.argwhere(m)[:, ::-1], m.shape))
    assert np.array_equal(hull, m)


def test_hull_of_big_l_restores_square_corner_region():
    m = np.zeros((6, 6), bool)
    m[:, :2] = True
    m[4:, :] = True
    hull = geo.convex_hull_mask(clump_of(m), m.shape)
    assert np.array_equal(hull, hull_mask(np.argwhere(m)[:, ::-1], m.shape))
    assert hull.sum() > m.sum()


def test_hull_fills_dumbbell_neck(dumbbell):
    clump = clump_of(dumbbell)
    hull = geo.convex_hull_mask(clump, dumbbell.shape)
    assert np.array_equal(hull, hull_mask(clump.pixels, dumbbell.shape))
    assert hull[40 - 20, 55] and not dumbbell[40 - 20, 55]


@settings(max_examples=150, deadline=None)
@given(masks)
def test_hull_matches_qhull_and_covers_clump(m):
    for clump in geo.label_components(m):
        hull = geo.convex_hull_mask(clump, m.shape)
        assert np.array_equal(hull, hull_mask(clump.pixels, m.shape))
        assert np.all(hull[clump.pixels[:, 1], clump.pixels[:, 0]])


def test_degenerate_hulls():
    line = geo.Clump(1, [(1, 1), (2, 2), (3, 3)])
    hull = geo.convex_hull_mask(line, (5, 5))
    assert np.array_equal(hull, np.eye(5, dtype=bool) & (np.arange(5) >= 1)[:, None] & (np.arange(5) <= 3)[:, None])
    one = geo.convex_hull_mask(geo.Clump(1, [(2, 3)]), (5, 5))
    assert one.sum() == 1 and one[3, 2]


def test_concave_convex_clump_has_none():
    m = disc((30, 30), 15, 15, 10)
    clump = clump_of(m)
    cs = geo.concave_parts(clump, geo.convex_hull_mask(clump, m.shape), min_area=3)
    assert cs.count == 0


def test_concave_plus_sign_four_equal_parts():
    m = np.zeros((11, 11), bool)
    m[4:7, 1:10] = True
    m[1:10, 4:7] = True
    clump = clump_of(m)
    cs = geo.concave_parts(clump, geo.convex_hull_mask(clump, m.shape))
    assert cs.count == 4
    assert [p.area for p in cs.parts] == [3, 3, 3, 3]


def test_concave_dumbbell_two_necks(dumbbell):
    clump = clump_of(dumbbell)
    hull = geo.convex_hull_mask(clump, dumbbell.shape)
    cs = geo.concave_parts(clump, hull, min_area=3)
    # frozen from qhull hull minus clump, 4-connected flood fill (tests/oracles.py)
    assert [p.area for p in cs.parts] == [77, 77]
    oracle = flood_components(hull & ~dumbbell, N4)
    assert sorted(map(frozenset, oracle), key=min) == sorted(
        (frozenset(map(tuple, p.pixels.tolist())) for p in cs.parts), key=min
    )
    tops = sorted(p.pixels[:, 1].mean() for p in cs.parts)
    assert tops[0] < 40 < tops[1]


@settings(max_examples=150, deadline=None)
@given(masks, st.integers(1, 4))
def test_concave_parts_partition_hull_minus_clump(m, min_area):
    for clump in geo.label_components(m):
        hull = geo.convex_hull_mask(clump, m.shape)
        cs = geo.concave_parts(clump, hull, min_area=min_area)
        diff = hull & ~clump.to_mask(m.shape)
        oracle = [c for c in flood_components(diff, N4)]
        kept = [c for c in oracle if len(c) >= min_area]
        noise = sum(len(c) for c in oracle if len(c) < min_area)
        assert sorted(map(len, kept), reverse=True) == [p.area for p in cs.parts]
        assert sum(p.area for p in cs.parts) == diff.sum() - noise
        seen = set()
        for p in cs.parts:
            s = set(map(tuple, p.pixels.tolist()))
            assert not seen & s
            seen |= s


def test_concave_depth_filter(dumbbell):
    clump = clump_of(dumbbell)
    parts = geo.local_concave_parts(clump, min_area=3).parts
    assert [p.depth for p in parts] == pytest.approx([5.0, 5.0])
    assert geo.local_concave_parts(clump, min_area=3, min_depth=5.0).count == 0


def test_local_concave_matches_global(dumbbell):
    clump = clump_of(dumbbell)
    a = geo.local_concave_parts(clump, 3)
    b = geo.concave_parts(clump, geo.convex_hull_mask(clump, dumbbell.shape), 3)
    assert [p.pixels.tolist() for p in a.parts] == [p.pixels.tolist() for p in b.parts]


def test_lid_normal_points_into_clump(dumbbell):
    parts = geo.local_concave_parts(clump_of(dumbbell), 3).parts
    for p in parts:
        nx, ny = p.normal
        assert math.hypot(nx, ny) == pytest.approx(1.0)
        # the upper notch opens upward, so its inward normal points down (+y)
        expected = 1.0 if p.pixels[:, 1].mean() < 40 else -1.0
        assert ny == pytest.approx(expected, abs=1e-9)


# -- lines and cuts ----------------------------------------------------------


@given(st.tuples(st.integers(-20, 20), st.integers(-20, 20)), st.tuples(st.integers(-20, 20), st.integers(-20, 20)))
def test_bresenham_properties(p1, p2):
    pts = geo.bresenham(p1, p2)
    assert tuple(pts[0]) == p1 and tuple(pts[-1]) == p2
    assert len(pts) == max(abs(p2[0] - p1[0]), abs(p2[1] - p1[1])) + 1
    if len(pts) > 1:
        assert np.all(np.abs(np.diff(pts, axis=0)).max(axis=1) == 1)
    # every point lies within half a pixel of the ideal line along the minor axis
    dx, dy = p2[0] - p1[0], p2[1] - p1[1]
    for x, y in pts:
        if abs(dx) >= abs(dy) and dx:
            assert abs(p1[1] + dy * (x - p1[0]) / dx - y) <= 0.5 + 1e-12
        elif dy:
            assert abs(p1[0] + dx * (y - p1[1]) / dy - x) <= 0.5 + 1e-12


def test_cut_square_in_two():
    m = np.ones((5, 5), bool)
    out = geo.cut_line(m, (0, 2), (4, 2))
    comps = flood_components(out)
    assert sorted(map(len, comps)) == [10, 10]


def test_cut_degenerate_segment():
    m = np.zeros((3, 4), bool)
    m[1, 1:3] = True
    with pytest.raises(geo.CutIneffective, match="cut ineffective"):
        geo.cut_line(m, (1, 1), (1, 1))


def test_cut_out_of_bounds():
    with pytest.raises(ValueError):
        geo.cut_line(np.ones((3, 3), bool), (0, 0), (5, 1))


def test_cut_dumbbell_neck(dumbbell):
    top = (55, 27)
    bottom = (55, 53)
    out = geo.cut_line(dumbbell, top, bottom)
    comps = flood_components(out)
    assert len(comps) == 2
    assert all(len(c) >= 0.4 * dumbbell.sum() for c in comps)


def test_cut_diagonal_uses_thick_retry():
    m = np.ones((6, 6), bool)
    out = geo.cut_line(m, (0, 0), (5, 5))
    # a one-pixel diagonal leaks under 8-connectivity; the retry doubles it
    assert m.sum() - out.sum() == 6 + 5
    assert len(flood_components(out)) == 2


@settings(max_examples=150, deadline=None)
@given(masks, st.data())
def test_cut_never_creates_foreground(m, data):
    h, w = m.shape
    p1 = (data.draw(st.integers(0, w - 1)), data.draw(st.integers(0, h - 1)))
    p2 = (data.draw(st.integers(0, w - 1)), data.draw(st.integers(0, h - 1)))
    try:
        out = geo.cut_line(m, p1, p2)
    except geo.CutIneffective:
        return
    assert not np.any(out & ~m)
