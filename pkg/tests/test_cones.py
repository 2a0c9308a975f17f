import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gen import polyunion_around, rng_for
from subreg import (ComplFactor, ConeUnion, HCone, InfeasiblePoint, Orthant, PolyUnion, Polyhedron,
                    StructuredSet, ZeroSet, directional_normal_cone, limiting_normal_cone, regular_normal_cone,
                    tangent_cone)
from subreg.cones import union_subset
from subreg.ratgeom import as_v, cone_equal, dot

H = Fraction(1, 1000)


def grid(n, lo=-2, hi=2):
    return list(itertools.product(range(lo, hi + 1), repeat=n))


def tangent_oracle(S, s, d):
    # polyhedral sets are locally conic, so a short step decides tangency
    return S.contains([a + H * b for a, b in zip(s, d)])


def regular_normal_oracle(S, s, z):
    return all(dot(z, d) <= 0 for d in grid(S.dim) if tangent_oracle(S, s, d))


COMPL = StructuredSet([ComplFactor()])


# --- complementarity set, all three branches


@pytest.mark.parametrize("point", [(0, 0), (0, 3), (2, 0)])
def test_compl_tangent_and_regular_normal_match_grid_oracle(point):
    T = tangent_cone(COMPL, point)
    Nr = regular_normal_cone(COMPL, point)
    for y in grid(2):
        assert T.contains(y) == tangent_oracle(COMPL, point, y)
        assert Nr.contains(y) == regular_normal_oracle(COMPL, point, y)


def test_compl_limiting_normal_at_origin():
    N = limiting_normal_cone(COMPL, (0, 0))
    # normals are -(gamma, nu): gamma nu = 0 or both positive
    expect = ConeUnion([HCone((), [(1, 0)], 2), HCone((), [(0, 1)], 2), HCone([(1, 0), (0, 1)], (), 2)], 2)
    assert N.same_set(expect)
    assert N.contains((-1, -1)) and N.contains((0, 5)) and not N.contains((1, 1)) and not N.contains((-1, 1))


def test_compl_directional_normal():
    assert directional_normal_cone(COMPL, (0, 0), (1, 0)).same_set(ConeUnion([HCone((), [(1, 0)], 2)], 2))
    assert directional_normal_cone(COMPL, (0, 0), (0, 0)).same_set(limiting_normal_cone(COMPL, (0, 0)))
    assert directional_normal_cone(COMPL, (0, 0), (1, 1)).is_empty


def test_compl_branch_labels():
    assert [ComplFactor.branch(p) for p in [(0, 0), (0, 1), (1, 0)]] == ["a=b=0", "0=a<b", "a>b=0"]


# --- catalog factors


def test_zero_set_cones():
    S = StructuredSet([ZeroSet(2)])
    assert tangent_cone(S, (0, 0)).same_set(ConeUnion([HCone.zero(2)], 2))
    assert cone_equal(regular_normal_cone(S, (0, 0)), HCone.full(2))


def test_orthant_cones():
    S = StructuredSet([Orthant(2, -1)])
    assert cone_equal(regular_normal_cone(S, (0, -1)), HCone([(-1, 0)], [(0, 1)], 2))
    for y in grid(2):
        assert tangent_cone(S, (0, -1)).contains(y) == tangent_oracle(S, (0, -1), y)


def test_infeasible_point():
    with pytest.raises(InfeasiblePoint, match="factor 0"):
        tangent_cone(COMPL, (1, 1))


def test_polyunion_two_halfplanes_nonconvex():
    # union of {y1 <= 0} and {y2 <= 0}
    S = StructuredSet([PolyUnion(2, [Polyhedron([[1, 0]], [0]), Polyhedron([[0, 1]], [0])])])
    assert cone_equal(regular_normal_cone(S, (0, 0)), HCone.zero(2))
    N = limiting_normal_cone(S, (0, 0))
    assert N.contains((1, 0)) and N.contains((0, 1)) and not N.contains((1, 1))
    assert N.contains((0, 0))


# --- the two-halfplane union {y2 <= 0} u {y2 <= y1}

EX41 = StructuredSet([PolyUnion(2, [Polyhedron([[0, 1]], [0]), Polyhedron([[-1, 1]], [0])])])


def test_example_tangent_is_the_set():
    T = tangent_cone(EX41, (0, 0))
    for y in grid(2):
        assert T.contains(y) == EX41.contains(y)


def test_example_limiting_normal():
    expect = ConeUnion([HCone([(0, -1)], [(1, 0)], 2), HCone([(0, -1)], [(1, 1)], 2)], 2)
    assert limiting_normal_cone(EX41, (0, 0)).same_set(expect)


def test_example_directional_normals():
    assert directional_normal_cone(EX41, (0, 0), (-1, 0)).same_set(ConeUnion([HCone([(0, -1)], [(1, 0)], 2)], 2))
    assert directional_normal_cone(EX41, (0, 0), (1, 0)).same_set(ConeUnion([HCone.zero(2)], 2))


def test_interior_point_and_convex_piece():
    S = StructuredSet([PolyUnion(2, [Polyhedron([[1, 0], [0, 1]], [1, 1])])])
    assert cone_equal(regular_normal_cone(S, (0, 0)), HCone.zero(2))
    N = limiting_normal_cone(S, (1, 0))
    assert N.same_set(ConeUnion([regular_normal_cone(S, (1, 0))], 2))


def sampled_normals(S, s, h=Fraction(1, 8), k=4):
    # regular normals at grid points of the set near s
    out = []
    for off in grid(S.dim, -k, k):
        p = [a + h * b for a, b in zip(s, off)]
        if S.contains(p):
            out.append(regular_normal_cone(S, p))
    return out


def test_limiting_normal_matches_sampling_oracle_on_example():
    N = limiting_normal_cone(EX41, (0, 0))
    near = sampled_normals(EX41, (0, 0))
    for c in near:
        for g in as_v(c).generators():
            assert N.contains(g)
    for piece in N.pieces:
        for g in as_v(piece).generators():
            assert any(c.contains(g) for c in near)


# --- properties


@st.composite
def union_points(draw):
    rng = rng_for(draw(st.integers(0, 10**6)))
    d = rng.randint(1, 2)
    pt = [rng.randint(-1, 1) for _ in range(d)]
    f = polyunion_around(rng, d, pt)
    return StructuredSet([f]), tuple(pt)


@settings(max_examples=40, deadline=None)
@given(union_points())
def test_tangent_and_regular_normal_oracles(sp):
    S, s = sp
    T = tangent_cone(S, s)
    Nr = regular_normal_cone(S, s)
    for y in grid(S.dim):
        assert T.contains(y) == tangent_oracle(S, s, y)
        assert Nr.contains(y) == regular_normal_oracle(S, s, y)


@settings(max_examples=40, deadline=None)
@given(union_points(), st.data())
def test_directional_inside_limiting(sp, data):
    S, s = sp
    N = limiting_normal_cone(S, s)
    d = data.draw(st.tuples(*[st.integers(-2, 2)] * S.dim))
    Nd = directional_normal_cone(S, s, d)
    assert union_subset(Nd, N)
    assert union_subset(ConeUnion([regular_normal_cone(S, s)], S.dim), N)
    if not tangent_cone(S, s).contains(d):
        assert Nd.is_empty


@settings(max_examples=40, deadline=None)
@given(union_points())
def test_zero_direction_gives_limiting(sp):
    S, s = sp
    assert directional_normal_cone(S, s, (0,) * S.dim).same_set(limiting_normal_cone(S, s))


@settings(max_examples=25, deadline=None)
@given(union_points(), st.sampled_from([(0, 0), (0, 1), (2, 0)]))
def test_product_consistency(sp, cpt):
    S, s = sp
    prod = StructuredSet(list(S.factors) + [ComplFactor()])
    y = s + cpt
    N = limiting_normal_cone(prod, y)
    Na, Nb = limiting_normal_cone(S, s), limiting_normal_cone(COMPL, cpt)
    for a in grid(S.dim, -1, 1):
        for b in grid(2, -1, 1):
            assert N.contains(a + b) == (Na.contains(a) and Nb.contains(b))
    Nr = regular_normal_cone(prod, y)
    for a in grid(S.dim, -1, 1):
        for b in grid(2, -1, 1):
            assert Nr.contains(a + b) == (regular_normal_cone(S, s).contains(a)
                                          and regular_normal_cone(COMPL, cpt).contains(b))
