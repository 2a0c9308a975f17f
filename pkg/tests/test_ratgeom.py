import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subreg.ratgeom import (FaceCapExceeded, GeometryError, HCone, VCone, as_v, cone_equal, contains,
                            dd_h_to_v, dd_v_to_h, dot, faces, intersect, is_trivial, linear_image,
                            linear_preimage, nearest_point, polar, project_onto_cone, relint_point, to_fraction)


def grid(n, lo=-2, hi=2):
    return list(itertools.product(range(lo, hi + 1), repeat=n))


# --- rationals


def test_fraction_lowest_terms():
    q = to_fraction("-6/4")
    assert (q.numerator, q.denominator) == (-3, 2)


def test_decimal_strings_are_exact():
    assert to_fraction("0.1") == Fraction(1, 10)


@pytest.mark.parametrize("bad", [float("nan"), float("inf"), True])
def test_rejects_non_finite_and_bool(bad):
    with pytest.raises((ValueError, TypeError)):
        to_fraction(bad)


# --- double description


def test_quadrant_rays():
    v = dd_h_to_v(HCone([(-1, 0), (0, -1)], (), 2))
    assert set(v.rays) == {(1, 0), (0, 1)} and not v.lines


def test_axis_is_lineality():
    v = dd_h_to_v(HCone((), [(0, 1)], 2))
    assert not v.rays and v.lines == ((1, 0),)


def test_two_halfplanes_rays_and_back():
    c = HCone([(1, 1), (1, -1)], (), 2)
    v = dd_h_to_v(c)
    assert set(v.rays) == {(-1, 1), (-1, -1)}
    for r in v.rays:
        assert all(dot(a, r) <= 0 for a in c.ineq)
    assert cone_equal(dd_v_to_h(v), c)


def test_v_to_h_quadrant():
    h = dd_v_to_h(VCone([(1, 0), (0, 1)], (), 2))
    assert set(h.ineq) == {(-1, 0), (0, -1)} and not h.eq


def test_v_to_h_trivial_cone():
    h = dd_v_to_h(VCone((), (), 2))
    assert len(h.eq) == 2 and is_trivial(h)


def test_v_to_h_single_ray_grid_oracle():
    h = dd_v_to_h(VCone([(1, 1)], (), 2))
    for y in grid(2):
        on_ray = y[0] == y[1] and y[0] >= 0
        assert h.contains(y) == on_ray


# --- polarity


def test_polar_quadrant():
    assert cone_equal(polar(HCone([(-1, 0), (0, -1)], (), 2)), HCone([(1, 0), (0, 1)], (), 2))


def test_polar_of_zero_is_full():
    assert cone_equal(polar(HCone.zero(2)), HCone.full(2))


def test_polar_of_ray():
    p = polar(VCone([(1, 1)], (), 2))
    for g in dd_h_to_v(p).generators():
        assert dot(g, (1, 1)) <= 0
    assert cone_equal(p, HCone([(1, 1)], (), 2))


# --- faces and relative interiors


def test_faces_counts():
    assert len(faces(HCone([(-1, 0), (0, -1)], (), 2))) == 4
    assert len(faces(HCone((), [(0, 1)], 2))) == 1


def test_faces_simplicial_3d_oracle():
    c = HCone([(-1, 0, 0), (0, -1, 0), (-1, -1, 1)], (), 3)
    got = faces(c)
    # oracle: every active subset, deduplicated by cone equality
    brute = []
    for k in range(4):
        for S in itertools.combinations(range(3), k):
            f = HCone([a for j, a in enumerate(c.ineq) if j not in S], [c.ineq[j] for j in S], 3)
            if not any(cone_equal(f, g) for g in brute):
                brute.append(f)
    assert len(got) == len(brute) == 8


def test_face_cap():
    with pytest.raises(FaceCapExceeded):
        faces(HCone([(-1, 0, 0), (0, -1, 0), (0, 0, -1)], (), 3), cap=3)


def test_relint_points():
    assert relint_point(VCone([(1, 0)], (), 2)) == (1, 0)
    assert relint_point(HCone([(-1, 0), (0, -1)], (), 2)) == (1, 1)
    p = relint_point(HCone([(1, 1), (1, -1)], (), 2))
    assert p == (-2, 0)
    assert all(dot(a, p) < 0 for a in [(1, 1), (1, -1)])


def test_relint_of_zero_raises():
    with pytest.raises(GeometryError, match="no relative interior"):
        relint_point(HCone.zero(2))


# --- maps and intersections


def test_trivial_and_maps():
    assert is_trivial(HCone([(1,), (-1,)], (), 1))
    assert cone_equal(linear_preimage([(1, 0)], HCone([(1,)], (), 1)), HCone([(1, 0)], (), 2))
    assert cone_equal(intersect(HCone([(1, 0)], (), 2), HCone([(-1, 0)], (), 2)), HCone((), [(1, 0)], 2))
    img = linear_image([(1, 1)], HCone([(-1, 0), (0, -1)], (), 2))
    assert img.rays == ((1,),) and not img.lines


def test_dimension_mismatch():
    with pytest.raises(GeometryError):
        HCone([(1, 0)], (), 2).contains((1, 2, 3))


def test_nearest_point_and_cone_projection():
    assert nearest_point((2, 2), [(1, 0)], (1,)) == (1, 2)
    assert nearest_point((0,), [(1,), (-1,)], (-1, -1)) is None
    assert project_onto_cone((1, 1), HCone([(-1, 0)], [(0, 1)], 2)) == (1, 0)


# --- properties

small = st.integers(-2, 2)


@st.composite
def hcones(draw, dim=None):
    n = dim or draw(st.integers(1, 3))
    ineq = draw(st.lists(st.tuples(*[small] * n), max_size=4))
    eq = draw(st.lists(st.tuples(*[small] * n), max_size=1))
    return HCone(ineq, eq, n)


@settings(max_examples=60, deadline=None)
@given(hcones())
def test_round_trip_membership(c):
    back = dd_v_to_h(dd_h_to_v(c))
    for y in grid(c.dim):
        assert contains(c, y) == contains(back, y)
    for g in dd_h_to_v(c).generators():
        assert contains(c, g) and contains(back, g)


@settings(max_examples=60, deadline=None)
@given(hcones())
def test_polar_involution(c):
    assert cone_equal(polar(polar(c)), c)


@settings(max_examples=40, deadline=None)
@given(hcones())
def test_face_lattice_closed(c):
    fs = faces(c)
    for f in fs:
        for g in faces(f.as_cone):
            assert any(cone_equal(g.as_cone, h.as_cone) for h in fs)
        if f.generators.rays or f.generators.lines:
            p = relint_point(f)
            assert c.rows_active(p) == f.active_set


@settings(max_examples=60, deadline=None)
@given(hcones())
def test_trivial_iff_no_generators(c):
    v = as_v(c)
    assert is_trivial(c) == (not v.rays and not v.lines)
