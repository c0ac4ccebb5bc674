"""Hull kernel against a brute-force facet/vertex oracle, plus helpers."""

import random
from fractions import Fraction
from itertools import combinations, product

import pytest

from cubex.complexes import ComplexBuilder, f_vector, verify_cubical
from cubex.geometry import (
    Hyperplane,
    apply_projective,
    cone_hull,
    convex_hull,
    convex_hull_with_map,
    halfspace_intersection,
    upper_faces,
    vertex_is_extreme,
)
from cubex.rational import affine_rank, hyperplane_through, rank

F = Fraction


def oracle_hull(pts, d):
    """All facet planes (outward) and vertices by exhaustive enumeration."""
    planes = set()
    for sub in combinations(range(len(pts)), d):
        got = hyperplane_through([pts[i] for i in sub])
        if got is None:
            continue
        h = Hyperplane(*got)
        evs = [h.eval(p) for p in pts]
        if all(e <= 0 for e in evs):
            planes.add(h)
        elif all(e >= 0 for e in evs):
            planes.add(h.flipped())
    verts = set()
    for p in pts:
        tight = [h.normal for h in planes if h.eval(p) == 0]
        if rank(tight) == d:
            verts.add(p)
    return planes, verts


def check_against_oracle(pts, d):
    planes, verts = oracle_hull(pts, d)
    poly = convex_hull(pts)
    assert poly.dim == d
    assert {h for _, h in poly.facets} == planes
    assert set(poly.vertices) == verts
    # facet incidences match the oracle planes exactly
    for vs, h in poly.facets:
        assert vs == frozenset(
            i for i, v in enumerate(poly.vertices) if h.eval(v) == 0
        )
    poly.validate_boundary()
    return poly


def test_cube_and_octahedron():
    cube = [tuple(map(F, p)) for p in product((0, 1), repeat=3)]
    poly = check_against_oracle(cube, 3)
    assert poly.f_vector() == (8, 12, 6)
    octa = [tuple(map(F, p)) for p in
            [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]]
    poly = check_against_oracle(octa, 3)
    assert poly.f_vector() == (6, 12, 8)


def test_square_pyramid_merges_coplanar_base():
    pts = [tuple(map(F, p)) for p in
           [(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0), (0, 0, 2)]]
    poly = check_against_oracle(pts, 3)
    assert poly.f_vector() == (5, 8, 5)
    base = [vs for vs, h in poly.facets if len(vs) == 4]
    assert len(base) == 1
    assert poly.edge_cycle(base[0]) in ([0, 1, 2, 3], [0, 3, 2, 1])


def test_interior_and_duplicate_points_dropped():
    pts = [tuple(map(F, p)) for p in product((0, 2), repeat=2)]
    pts += [(F(1), F(1)), (F(0), F(0)), (F(1), F(0))]
    poly, vmap = convex_hull_with_map(pts)
    assert poly.f_vector() == (4, 4)
    assert vmap[4] is None and vmap[6] is None
    assert vmap[5] == vmap[0]


def test_four_cube_lattice():
    pts = [tuple(map(F, p)) for p in product((0, 1), repeat=4)]
    poly = convex_hull(pts)
    assert poly.f_vector() == (16, 32, 24, 8)
    poly.validate_boundary()


def test_low_dimensional_inputs_use_charts():
    square_in_3d = [tuple(map(F, (x, y, x + y))) for x, y in
                    [(0, 0), (1, 0), (0, 1), (1, 1)]]
    poly = convex_hull(square_in_3d)
    assert poly.dim == 2
    assert poly.f_vector() == (4, 4)
    collinear = [(F(t), F(2 * t), F(0)) for t in range(4)]
    seg = convex_hull(collinear)
    assert seg.dim == 1
    assert set(seg.vertices) == {collinear[0], collinear[3]}
    point = convex_hull([(F(5), F(5))] * 3)
    assert point.dim == 0


@pytest.mark.parametrize(
    "d,n,span,rounds",
    [(2, 9, 3, 40), (3, 11, 2, 25), (4, 10, 1, 12)],
)
def test_random_hulls_match_oracle(d, n, span, rounds):
    rng = random.Random(1000 * d + 7)
    done = 0
    while done < rounds:
        pts = list(
            {
                tuple(F(rng.randint(-span, span + 1)) for _ in range(d))
                for _ in range(n)
            }
        )
        if affine_rank(pts) != d:
            continue
        check_against_oracle(sorted(pts), d)
        done += 1


def test_upper_faces_of_separable_concave_lift():
    pts = []
    for x in range(3):
        for y in range(3):
            h = -((x - 1) ** 2) - (y - 1) ** 2
            pts.append((F(x), F(y), F(h)))
    poly, upper = upper_faces(pts)
    assert len(upper) == 4
    assert all(len(f) == 4 for f in upper)
    # each upper facet projects to a unit square of the grid
    for f in upper:
        xs = sorted({pts[i][0] for i in f})
        ys = sorted({pts[i][1] for i in f})
        assert xs[1] - xs[0] == 1 and ys[1] - ys[0] == 1


def test_upper_faces_rejects_non_extreme_lifted_point():
    flat = [(F(0), F(0)), (F(1), F(0)), (F(2), F(0))]
    with pytest.raises(ValueError):
        upper_faces(flat)
    with pytest.raises(ValueError):
        upper_faces([(F(0), F(0)), (F(0), F(0))])


def test_halfspace_intersection_cube():
    hs = []
    for i in range(3):
        for s in (1, -1):
            n = [0, 0, 0]
            n[i] = s
            hs.append((tuple(map(F, n)), F(1) if s == 1 else F(0)))
    poly = halfspace_intersection(hs, 3)
    assert poly.f_vector() == (8, 12, 6)
    with pytest.raises(ValueError):
        halfspace_intersection(hs[:5], 3)  # open top: unbounded
    hs_empty = hs + [((F(1), F(0), F(0)), F(-5))]
    with pytest.raises(ValueError):
        halfspace_intersection(hs_empty, 3)


def test_cone_hull_square_pyramid():
    base = [tuple(map(F, p)) + (F(0),) for p in product((0, 1), repeat=2)]
    poly = cone_hull((F(1, 2), F(1, 2), F(3)), base)
    assert poly.f_vector() == (5, 8, 5)


def test_apply_projective():
    pts = [(F(1), F(2)), (F(0), F(0))]
    ident = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    assert apply_projective(ident, pts) == pts
    shift = [[1, 0, 3], [0, 1, -1], [0, 0, 1]]
    assert apply_projective(shift, pts)[0] == (F(4), F(1))
    squash = [[1, 0, 0], [0, 1, 0], [1, 0, 1]]  # w = x + 1
    assert apply_projective(squash, [(F(1), F(4))]) == [(F(1, 2), F(2))]
    with pytest.raises(ValueError):
        apply_projective(squash, [(F(-1), F(0))])


def test_vertex_extremeness():
    square = [tuple(map(F, p)) for p in product((0, 2), repeat=2)]
    assert vertex_is_extreme((F(0), F(0)), square[1:])
    assert not vertex_is_extreme((F(1), F(1)), square)
    assert not vertex_is_extreme((F(0), F(1)), square)  # edge midpoint


def test_position_queries():
    cube = [tuple(map(F, p)) for p in product((0, 1), repeat=3)]
    poly = convex_hull(cube)
    assert poly.position((F(1, 2), F(1, 2), F(1, 2))) == "interior"
    assert poly.position((F(0), F(1, 2), F(1, 2))) == "boundary"
    assert poly.position((F(2), F(0), F(0))) == "outside"
    assert poly.position((F(1, 2), F(1, 2), F(5))) == "outside"


def test_polytope_to_complex_roundtrip():
    cube = [tuple(map(F, p)) for p in product((0, 1), repeat=3)]
    poly = convex_hull(cube)
    bd = poly.boundary_to_complex()
    assert f_vector(bd) == (8, 12, 6)
    assert verify_cubical(bd).ok
    b = ComplexBuilder(3)
    key = poly.as_cell_into(b)
    c = b.finalize()
    assert key[0] == 3
    assert f_vector(c) == (8, 12, 6, 1)
