"""Prisms, caps, joins, connected sums, tents, and hexhoop cubifications."""

from fractions import Fraction
import random

import pytest

from cubex.complexes import (
    ComplexBuilder,
    boundary_complex,
    dehn_sommerville_check,
    f_vector,
    verify_cubical,
)
from cubex.constructions import (
    connected_sum,
    connector_cube,
    hexhoop_cubify,
    join_balls,
    lifted_prism,
    lifted_prism_two_balls,
    prism_f_vector,
    schlegel_cap,
    symmetric_tent,
)
from cubex.geometry import Hyperplane, convex_hull
from cubex.lifting import (
    LiftedBall,
    LiftedBoundarySubdivision,
    convexify,
    interval_ball,
    patch,
    pile_of_cubes,
    product,
    verify_boundary_subdivision,
    verify_regular,
)

F = Fraction


def unit_cube_points(d):
    return [
        tuple(F(b) for b in bits)
        for bits in sorted(
            [tuple(int(c) for c in format(i, f"0{d}b"))[::-1] for i in range(2**d)]
        )
    ]


def cube_polytope(d):
    return convex_hull(unit_cube_points(d))


def shifted_cube_ball(offset):
    """Unit 3-cube ball translated by ``offset``, flat heights."""
    base = pile_of_cubes([1, 1, 1])
    pts = [
        tuple(c + o for c, o in zip(p, offset)) for p in base.complex.vertices
    ]
    return LiftedBall(base.complex.replace_vertices(pts), base.heights)


# -- lifted prisms -----------------------------------------------------------


def test_prism_over_flat_square_is_cube():
    out = lifted_prism(pile_of_cubes([1, 1]))
    assert f_vector(out.ball.complex) == (8, 12, 6, 1)
    assert verify_cubical(out.ball.complex).ok
    assert out.polytope is not None
    fd = out.polytope.faces_by_dim()
    assert tuple(len(fd[k]) for k in range(3)) == (8, 12, 6)


def test_prism_over_pile_ball_only():
    # the pile's wall heights are affine along each side, so wall quads of
    # the prism merge into single hull facets and no polytope is reported
    out = lifted_prism(pile_of_cubes([2, 2]))
    assert f_vector(out.ball.complex) == (18, 33, 20, 4)
    assert out.polytope is None


def test_prism_over_convexified_pile_has_polytope():
    ball = convexify(pile_of_cubes([2, 2])).ball
    out = lifted_prism(ball)
    assert f_vector(out.ball.complex) == (18, 33, 20, 4)
    assert out.polytope is not None
    fd = out.polytope.faces_by_dim()
    assert tuple(len(fd[k]) for k in range(3)) == (18, 32, 16)


@pytest.mark.parametrize("seed", [1, 2, 3, 4])
def test_prism_ball_is_product_with_interval(seed):
    rng = random.Random(871 + seed)
    lengths = [rng.randint(1, 3) for _ in range(rng.randint(1, 3))]
    ball = pile_of_cubes(lengths)
    out = lifted_prism(ball)
    want = f_vector(product(ball, interval_ball(1)).complex)
    assert f_vector(out.ball.complex) == want
    # per-dimension identity f_k(B x I) = 2 f_k(B) + f_{k-1}(B)
    fb = f_vector(ball.complex) + (0,)
    for k, fk in enumerate(f_vector(out.ball.complex)):
        assert fk == 2 * fb[k] + (fb[k - 1] if k else 0)


# -- prisms over two balls ---------------------------------------------------


def test_two_ball_prism_of_flat_cube_is_tesseract():
    ball = pile_of_cubes([1, 1, 1])
    p = lifted_prism_two_balls(ball, ball)
    fd = p.faces_by_dim()
    fv = tuple(len(fd[k]) for k in range(4))
    assert fv == (16, 32, 24, 8)
    assert fv == prism_f_vector(ball, ball)
    assert dehn_sommerville_check(fv).ok


def test_two_ball_prism_over_pile():
    ball = pile_of_cubes([2, 2])
    p = lifted_prism_two_balls(ball, ball)
    fd = p.faces_by_dim()
    assert tuple(len(fd[k]) for k in range(3)) == (18, 32, 16)
    assert tuple(len(fd[k]) for k in range(3)) == prism_f_vector(ball, ball)


def test_two_ball_prism_3d_pile_satisfies_relations():
    ball = pile_of_cubes([2, 1, 1])
    p = lifted_prism_two_balls(ball, ball)
    fd = p.faces_by_dim()
    fv = tuple(len(fd[k]) for k in range(4))
    assert fv == prism_f_vector(ball, ball) == (24, 52, 42, 14)
    assert dehn_sommerville_check(fv).ok


def pyramid_split_square(apex_height):
    """Unit square cut into four triangles at its center; zero on the rim."""
    b = ComplexBuilder(2)
    corners = [
        b.add_vertex(p)
        for p in [(F(0), F(0)), (F(1), F(0)), (F(1), F(1)), (F(0), F(1))]
    ]
    center = b.add_vertex((F(1, 2), F(1, 2)))
    for i in range(4):
        p, q = corners[i], corners[(i + 1) % 4]
        for e in [(p, q), (p, center), (q, center)]:
            b.add_face(1, tuple(sorted(e)), [])
        b.add_face(
            2,
            sorted([p, q, center]),
            [tuple(sorted(e)) for e in [(p, q), (p, center), (q, center)]],
        )
    c = b.finalize(dim=2)
    heights = tuple(
        apex_height if p == (F(1, 2), F(1, 2)) else F(0) for p in c.vertices
    )
    return LiftedBall(c, heights)


def test_two_ball_prism_distinct_interiors():
    # same boundary, different interior lifts
    outer = pile_of_cubes([1, 1])
    b1 = patch(outer, {0: pyramid_split_square(F(1))}, eps=F(1, 2))
    b2 = patch(outer, {0: pyramid_split_square(F(3))}, eps=F(1, 2))
    assert b1.heights != b2.heights
    p = lifted_prism_two_balls(b1, b2)
    fd = p.faces_by_dim()
    fv = tuple(len(fd[k]) for k in range(3))
    assert fv == prism_f_vector(b1, b2) == (10, 20, 12)


def test_two_ball_prism_rejects_boundary_mismatch():
    with pytest.raises(ValueError):
        lifted_prism_two_balls(pile_of_cubes([2, 2]), pile_of_cubes([2, 3]))


# -- Schlegel caps ------------------------------------------------------------


def test_cap_over_cube_facet():
    cube = cube_polytope(3)
    cap = schlegel_cap(cube, 0)
    assert f_vector(cap.complex) == (16, 32, 22, 5)
    assert verify_cubical(cap.complex).ok
    assert verify_regular(cap).ok


def test_cap_over_tesseract_facet():
    cube = cube_polytope(4)
    cap = schlegel_cap(cube, 2)
    assert f_vector(cap.complex) == (32, 80, 80, 38, 7)
    assert verify_cubical(cap.complex).ok
    assert verify_regular(cap).ok


@pytest.mark.parametrize("facet", [0, 1, 5])
def test_cap_is_prism_over_schlegel_complex(facet):
    cube = cube_polytope(3)
    cap = schlegel_cap(cube, facet)
    bd = boundary_complex(cube.boundary_to_complex()) if False else None
    # the Schlegel complex: boundary cells minus the chosen facet
    full = cube.boundary_to_complex()
    keep = []
    fpts = {cube.vertices[v] for v in cube.facets[facet][0]}
    for ci, vids in enumerate(full.faces(full.dim)):
        if {full.vertices[v] for v in vids} != fpts:
            keep.append((full.dim, ci))
    schlegel = full.subcomplex(keep)
    fs = f_vector(schlegel) + (0,)
    fc = f_vector(cap.complex)
    assert fc[0] == 2 * fs[0]
    for k in range(1, len(fc) - 1):
        assert fc[k] == 2 * fs[k] + fs[k - 1]
    assert fc[-1] == fs[len(fc) - 2]


# -- joins --------------------------------------------------------------------


def test_join_two_cubes():
    b1 = shifted_cube_ball((F(0), F(0), F(0)))
    b2 = shifted_cube_ball((F(1), F(0), F(0)))
    out = join_balls(b1, b2)
    assert f_vector(out.complex) == (12, 20, 11, 2)
    assert verify_regular(out).ok
    assert verify_cubical(out.complex).ok


def test_join_chain_matches_pile():
    out = join_balls(
        shifted_cube_ball((F(0), F(0), F(0))),
        shifted_cube_ball((F(1), F(0), F(0))),
    )
    out = join_balls(out, shifted_cube_ball((F(2), F(0), F(0))))
    assert f_vector(out.complex) == f_vector(pile_of_cubes([3, 1, 1]).complex)
    assert verify_regular(out).ok


def test_join_rejects_disjoint_balls():
    b1 = shifted_cube_ball((F(0), F(0), F(0)))
    b2 = shifted_cube_ball((F(5), F(0), F(0)))
    with pytest.raises(ValueError):
        join_balls(b1, b2)


# -- connector cubes ----------------------------------------------------------


def unit_square_facet_coords():
    return {
        (x, y, F(0), t)
        for x in (F(0), F(1))
        for y in (F(0), F(1))
        for t in (F(0), F(1))
    }


def test_connector_over_unit_cube():
    conn = connector_cube(cube_polytope(3))
    fd = conn.faces_by_dim()
    assert len(conn.vertices) == 16
    assert len(conn.facets) == 8
    assert dehn_sommerville_check(tuple(len(fd[k]) for k in range(4))).ok
    coords = [{conn.vertices[v] for v in vs} for vs, _ in conn.facets]
    assert unit_square_facet_coords() in coords


def test_connector_over_projective_cube():
    # a projective image of the unit cube: x -> x / (1 + x0/3 + x1/5)
    pts = []
    for p in unit_cube_points(3):
        w = 1 + p[0] / 3 + p[1] / 5
        pts.append(tuple(c / w for c in p))
    poly = convex_hull(pts)
    assert len(poly.facets) == 6
    conn = connector_cube(poly)
    assert len(conn.vertices) == 16
    assert len(conn.facets) == 8
    coords = [{conn.vertices[v] for v in vs} for vs, _ in conn.facets]
    assert unit_square_facet_coords() in coords


# -- connected sums -----------------------------------------------------------


@pytest.mark.parametrize("fa,fb", [(0, 0), (0, 5), (3, 7)])
def test_sum_of_two_tesseracts(fa, fb):
    s = connected_sum(cube_polytope(4), fa, cube_polytope(4), fb)
    fd = s.faces_by_dim()
    fv = tuple(len(fd[k]) for k in range(4))
    assert fv == (24, 52, 42, 14)
    assert dehn_sommerville_check(fv).ok


def test_sum_preserves_faces_of_shared_facet():
    cube = cube_polytope(4)
    s = connected_sum(cube, 0, cube_polytope(4), 0)
    fd = s.faces_by_dim()
    index = {pt: i for i, pt in enumerate(s.vertices)}
    fpoly = convex_hull([cube.vertices[v] for v in sorted(cube.facets[0][0])])
    sub = fpoly.faces_by_dim()
    for k in (0, 1, 2):
        have = {frozenset(face) for face in fd[k]}
        for face in sub[k]:
            mapped = frozenset(index[fpoly.vertices[v]] for v in face)
            assert mapped in have


def tilted_box_prism():
    """4-polytope with a combinatorial-cube facet that is not a projective
    image of the regular cube, to force connector mediation."""
    pts3 = []
    for x in (0, 2):
        for y in (0, 2):
            pts3.append((F(x), F(y), F(0)))
            pts3.append((F(x), F(y), F(2) + F(x, 4) + F(y, 7)))
    return convex_hull(
        [p + (F(0),) for p in pts3] + [p + (F(1),) for p in pts3]
    )


def test_sum_mediated_by_connectors():
    p4 = tilted_box_prism()
    fa = next(
        j
        for j, (vs, _) in enumerate(p4.facets)
        if all(p4.vertices[v][3] == 0 for v in vs)
    )
    s = connected_sum(p4, fa, cube_polytope(4), 0)
    fd = s.faces_by_dim()
    fv = tuple(len(fd[k]) for k in range(4))
    # a chain of four summands: the two inputs and two connector cubes
    assert fv == (40, 92, 78, 26)
    assert dehn_sommerville_check(fv).ok


def test_sum_rejects_non_cube_facets():
    simplex = convex_hull(
        [
            (F(0), F(0), F(0), F(0)),
            (F(1), F(0), F(0), F(0)),
            (F(0), F(1), F(0), F(0)),
            (F(0), F(0), F(1), F(0)),
            (F(0), F(0), F(0), F(1)),
        ]
    )
    with pytest.raises(ValueError, match="combinatorial cube"):
        connected_sum(simplex, 0, cube_polytope(4), 0)


# -- symmetric tents ----------------------------------------------------------


def six_edge_square(mid_height):
    """Boundary of [-1,1]^2 split at the top and bottom midpoints."""
    sq = convex_hull([(F(-1), F(-1)), (F(1), F(-1)), (F(-1), F(1)), (F(1), F(1))])
    b = ComplexBuilder(2)
    pts = {
        name: b.add_vertex(p)
        for name, p in {
            "sw": (F(-1), F(-1)),
            "se": (F(1), F(-1)),
            "ne": (F(1), F(1)),
            "nw": (F(-1), F(1)),
            "n": (F(0), F(1)),
            "s": (F(0), F(-1)),
        }.items()
    }
    for a, c in [
        ("sw", "s"),
        ("s", "se"),
        ("se", "ne"),
        ("ne", "n"),
        ("n", "nw"),
        ("nw", "sw"),
    ]:
        b.add_cube((pts[a], pts[c]))
    s = b.finalize(dim=1)
    psi = tuple(
        mid_height if p in ((F(0), F(1)), (F(0), F(-1))) else F(0)
        for p in s.vertices
    )
    return LiftedBoundarySubdivision(sq, s, psi)


MIRROR_X = Hyperplane.make((F(1), F(0)), F(0))


def test_tent_over_six_edge_square():
    base = six_edge_square(F(1))
    assert verify_boundary_subdivision(base).ok
    tent = symmetric_tent(base, MIRROR_X)
    assert len(tent.left_cells) == 3
    assert len(tent.right_cells) == 3
    assert len(tent.equator_ridges) == 2
    fd = tent.polytope.faces_by_dim()
    assert tuple(len(fd[k]) for k in range(3)) == (8, 17, 11)
    # apexes mirror each other through the symmetry plane
    al, ar = tent.spec.apex_left, tent.spec.apex_right
    assert al[0] == -ar[0] and al[1:] == ar[1:]
    assert tent.spec.height > max(base.heights)


@pytest.mark.parametrize("factor", [2, 4])
def test_tent_apexes_can_move_higher(factor):
    # the upper-facet combinatorics is stable above the minimal height
    base = six_edge_square(F(1))
    tent = symmetric_tent(base, MIRROR_X)
    lifted = [
        p + (h,) for p, h in zip(base.complex.vertices, base.heights)
    ]
    taller = [
        tent.spec.apex_left[:-1] + (tent.spec.height * factor,),
        tent.spec.apex_right[:-1] + (tent.spec.height * factor,),
    ]
    hull = convex_hull(lifted + taller)
    upper = [vs for vs, hp in hull.facets if hp.normal[-1] > 0]
    assert len(upper) == len(tent.left_cells) + len(tent.right_cells) + len(
        tent.equator_ridges
    )


def test_tent_rejects_cell_crossing_the_plane():
    # undivided square: top and bottom edges cross the symmetry plane
    sq = convex_hull([(F(-1), F(-1)), (F(1), F(-1)), (F(-1), F(1)), (F(1), F(1))])
    b = ComplexBuilder(2)
    ids = [
        b.add_vertex(p)
        for p in [(F(-1), F(-1)), (F(1), F(-1)), (F(1), F(1)), (F(-1), F(1))]
    ]
    for i in range(4):
        b.add_cube((ids[i], ids[(i + 1) % 4]))
    s = b.finalize(dim=1)
    base = LiftedBoundarySubdivision(sq, s, (F(0),) * 4)
    with pytest.raises(ValueError, match="crosses"):
        symmetric_tent(base, MIRROR_X)


def test_tent_allows_unequal_heights_on_the_plane():
    # the two midpoints sit on the symmetry plane, so unequal heights there
    # stay mirror symmetric
    base = six_edge_square(F(1))
    psi = list(base.heights)
    north = base.complex.vertices.index((F(0), F(1)))
    psi[north] = F(2)
    ok = LiftedBoundarySubdivision(base.polytope, base.complex, tuple(psi))
    tent = symmetric_tent(ok, MIRROR_X)
    assert len(tent.equator_ridges) == 2


def test_tent_rejects_asymmetric_heights():
    base = six_edge_square(F(1))
    psi = list(base.heights)
    for corner in ((F(1), F(1)), (F(1), F(-1))):
        psi[base.complex.vertices.index(corner)] = F(1, 2)
    bad = LiftedBoundarySubdivision(base.polytope, base.complex, tuple(psi))
    assert verify_boundary_subdivision(bad).ok
    with pytest.raises(ValueError, match="mirror symmetric"):
        symmetric_tent(bad, MIRROR_X)


def test_tent_rejects_flat_heights():
    base = six_edge_square(F(0))
    with pytest.raises(ValueError, match="not strictly folded"):
        symmetric_tent(base, MIRROR_X)


def test_tent_rejects_offside_apex():
    base = six_edge_square(F(1))
    with pytest.raises(ValueError, match="positive side"):
        symmetric_tent(base, MIRROR_X, q_left=(F(-1, 2), F(0)))


# -- hexhoop cubification -----------------------------------------------------


def test_hexhoop_over_six_edge_square():
    base = six_edge_square(F(1))
    out = hexhoop_cubify(base, MIRROR_X)
    cx = out.cubification.complex
    # two cells per boundary cell plus one per equator ridge
    assert cx.n_faces(2) == 2 * 6 + 2
    assert verify_cubical(cx).ok
    assert verify_regular(out.cubification).ok
    assert len(out.sphere_components) == 2
    assert len(out.extended_components) == 3


@pytest.mark.parametrize("mid", [F(1), F(2), F(1, 2)])
def test_hexhoop_square_census_stable_in_heights(mid):
    out = hexhoop_cubify(six_edge_square(mid), MIRROR_X)
    assert out.cubification.complex.n_faces(2) == 14


def split_cube_boundary(mid_height):
    """Boundary of [-1,1]^3 with the four side facets split at x = 0."""
    cube = convex_hull(
        [
            (F(x), F(y), F(z))
            for x in (-1, 1)
            for y in (-1, 1)
            for z in (-1, 1)
        ]
    )
    b = ComplexBuilder(3)

    def vid(p):
        return b.add_vertex(tuple(F(c) for c in p))

    corners = {
        (x, y, z): vid((x, y, z))
        for x in (-1, 1)
        for y in (-1, 1)
        for z in (-1, 1)
    }
    mids = {(y, z): vid((0, y, z)) for y in (-1, 1) for z in (-1, 1)}
    for x in (-1, 1):
        b.add_cube(
            (
                corners[(x, -1, -1)],
                corners[(x, 1, -1)],
                corners[(x, -1, 1)],
                corners[(x, 1, 1)],
            )
        )
    for y in (-1, 1):
        for x0, x1 in ((-1, 0), (0, 1)):
            def pt(x, z):
                return mids[(y, z)] if x == 0 else corners[(x, y, z)]

            b.add_cube((pt(x0, -1), pt(x1, -1), pt(x0, 1), pt(x1, 1)))
    for z in (-1, 1):
        for x0, x1 in ((-1, 0), (0, 1)):
            def pt(x, y):
                return mids[(y, z)] if x == 0 else corners[(x, y, z)]

            b.add_cube((pt(x0, -1), pt(x1, -1), pt(x0, 1), pt(x1, 1)))
    s = b.finalize(dim=2)
    psi = tuple(mid_height if p[0] == 0 else F(0) for p in s.vertices)
    return LiftedBoundarySubdivision(cube, s, psi)


def test_hexhoop_over_split_cube():
    base = split_cube_boundary(F(1))
    assert verify_boundary_subdivision(base).ok
    out = hexhoop_cubify(base, Hyperplane.make((F(1), F(0), F(0)), F(0)))
    cx = out.cubification.complex
    assert f_vector(cx) == (36, 88, 77, 24)
    assert cx.n_faces(3) == 2 * 10 + 4
    assert verify_cubical(cx).ok
    assert verify_regular(out.cubification).ok
    assert len(out.sphere_components) == 2
    assert len(out.extended_components) == 3


def test_hexhoop_boundary_is_untouched():
    base = six_edge_square(F(1))
    out = hexhoop_cubify(base, MIRROR_X)
    cx = out.cubification.complex
    bd = boundary_complex(cx)
    want = {
        frozenset(base.complex.vertices[v] for v in vids)
        for vids in base.complex.faces(1)
    }
    got = {
        frozenset(bd.vertices[v] for v in vids) for vids in bd.faces(1)
    }
    assert want == got
