"""Regular balls: fold certificates against the hull-based definition."""

from fractions import Fraction

import pytest

from cubex.complexes import ComplexBuilder, f_vector, verify_cubical
from cubex.lifting import (
    LiftedBall,
    Convexified,
    convexify,
    convexify_pair,
    in_convex_position,
    interval_ball,
    patch,
    pile_of_cubes,
    product,
    regular_via_hull,
    support_folds_strict,
    verify_regular,
)

F = Fraction


def grid_ball(nx, ny, height_fn):
    b = ComplexBuilder(2)
    vid = {}
    for x in range(nx + 1):
        for y in range(ny + 1):
            vid[(x, y)] = b.add_vertex((F(x), F(y)))
    for x in range(nx):
        for y in range(ny):
            b.add_cube(
                [vid[(x, y)], vid[(x + 1, y)], vid[(x, y + 1)], vid[(x + 1, y + 1)]]
            )
    c = b.finalize()
    return LiftedBall(c, tuple(height_fn(*p) for p in c.vertices))


def test_interval_and_pile_f_vectors():
    assert f_vector(interval_ball(3).complex) == (4, 3)
    p = pile_of_cubes([2, 3])
    assert f_vector(p.complex) == (12, 17, 6)
    q = pile_of_cubes([2, 1, 2])
    assert f_vector(q.complex) == (3 * 2 * 3, 2 * 2 * 3 + 3 * 1 * 3 + 3 * 2 * 2,
                                   2 * 1 * 3 + 2 * 2 * 2 + 3 * 1 * 2, 4)
    assert verify_cubical(q.complex).ok


def test_pile_heights_are_separable():
    p = pile_of_cubes([2, 2])
    for v, pt in enumerate(p.complex.vertices):
        x, y = pt
        assert p.heights[v] == x * (2 - x) + y * (2 - y)


@pytest.mark.parametrize("lengths", [[1], [3], [2, 2], [1, 3], [2, 1, 2]])
def test_piles_regular_both_routes(lengths):
    p = pile_of_cubes(lengths)
    assert verify_regular(p).ok
    assert regular_via_hull(p)


def test_product_of_intervals_is_pile():
    a = product(interval_ball(2), interval_ball(3))
    b = pile_of_cubes([2, 3])
    assert f_vector(a.complex) == f_vector(b.complex)
    assert dict(zip(a.complex.vertices, a.heights)) == dict(
        zip(b.complex.vertices, b.heights)
    )


def test_flat_fold_rejected():
    ball = grid_ball(2, 1, lambda x, y: F(0))
    rep = verify_regular(ball)
    assert not rep.ok
    assert any("flat" in m for m in rep.messages)
    assert not regular_via_hull(ball)


def test_convex_fold_rejected():
    ball = grid_ball(2, 1, lambda x, y: x * x)  # affine per cell, wrong bend
    rep = verify_regular(ball)
    assert not rep.ok
    assert any("convex" in m for m in rep.messages)
    assert not regular_via_hull(ball)


def test_non_affine_cell_rejected():
    def h(x, y):
        return F(1) if (x, y) == (1, 1) else F(0)

    ball = grid_ball(1, 1, h)
    rep = verify_regular(ball)
    assert not rep.ok
    assert "not affine" in rep.messages[0]


def test_nonconvex_support_rejected():
    # an L of three squares: reflex corner breaks support convexity
    b = ComplexBuilder(2)
    vid = {}
    for x in range(3):
        for y in range(3):
            if (x, y) == (2, 2):
                continue
            vid[(x, y)] = b.add_vertex((F(x), F(y)))
    for sq in [(0, 0), (1, 0), (0, 1)]:
        x, y = sq
        b.add_cube(
            [vid[(x, y)], vid[(x + 1, y)], vid[(x, y + 1)], vid[(x + 1, y + 1)]]
        )
    c = b.finalize()
    heights = tuple(x * (2 - x) + y * (2 - y) for x, y in c.vertices)
    rep = verify_regular(LiftedBall(c, heights))
    assert not rep.ok
    assert any("support" in m for m in rep.messages)


def scaled_quarter_pile(x0, y0):
    """Pile(2,2) scaled by 1/2 and shifted: subdivides a unit square."""
    p = pile_of_cubes([2, 2])
    pts = [(x / 2 + x0, y / 2 + y0) for x, y in p.complex.vertices]
    return LiftedBall(p.complex.replace_vertices(pts), p.heights)


def test_patch_single_cell():
    outer = pile_of_cubes([1, 1])
    patched = patch(outer, {0: scaled_quarter_pile(F(0), F(0))})
    assert f_vector(patched.complex) == (9, 12, 4)
    assert verify_regular(patched).ok
    assert regular_via_hull(patched)


def test_patch_two_cells_compatible():
    outer = pile_of_cubes([2, 1])
    reps = {}
    for i, f in enumerate(outer.complex.faces(2)):
        x0 = min(outer.complex.vertices[v][0] for v in f)
        reps[i] = scaled_quarter_pile(x0, F(0))
    patched = patch(outer, reps)
    assert f_vector(patched.complex) == (15, 22, 8)
    assert verify_regular(patched).ok
    assert regular_via_hull(patched)
    assert verify_cubical(patched.complex).ok


def test_patch_partial_keeps_unreplaced_cells():
    outer = pile_of_cubes([1, 1, 1])
    inner = pile_of_cubes([2, 2, 2])
    half = LiftedBall(
        inner.complex.replace_vertices(
            [tuple(c / 2 for c in p) for p in inner.complex.vertices]
        ),
        inner.heights,
    )
    patched = patch(outer, {0: half})
    assert f_vector(patched.complex) == (27, 54, 36, 8)
    assert verify_regular(patched).ok
    assert regular_via_hull(patched)


def test_patch_rejects_height_mismatch():
    outer = pile_of_cubes([2, 1])
    good = {}
    for i, f in enumerate(outer.complex.faces(2)):
        x0 = min(outer.complex.vertices[v][0] for v in f)
        good[i] = scaled_quarter_pile(x0, F(0))
    bad0 = good[0]
    bad = {
        0: LiftedBall(bad0.complex, tuple(h * 3 for h in bad0.heights)),
        1: good[1],
    }
    with pytest.raises(ValueError, match="disagree"):
        patch(outer, bad)


def test_patch_rejects_leaked_replacement():
    outer = pile_of_cubes([2, 1])
    big = scaled_quarter_pile(F(0), F(0))
    wide = LiftedBall(
        big.complex.replace_vertices(
            [(x * 3, y) for x, y in big.complex.vertices]
        ),
        big.heights,
    )
    with pytest.raises(ValueError):
        patch(outer, {0: wide, 1: scaled_quarter_pile(F(1), F(0))})


def test_convexify_pile():
    ball = pile_of_cubes([2, 2])
    out = convexify(ball)
    assert isinstance(out, Convexified)
    assert out.lam >= 2
    assert in_convex_position(out.ball).ok
    assert support_folds_strict(out.ball)
    assert regular_via_hull(out.ball)
    # combinatorics untouched
    assert f_vector(out.ball.complex) == f_vector(ball.complex)


def test_convexify_needs_folded_boundary():
    # one cell only: boundary folds within its (whole-edge) support facets
    # are vacuous, so convex position holds right away
    out = convexify(pile_of_cubes([1, 1]))
    assert in_convex_position(out.ball).ok


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


def test_convexify_pair_shares_boundary():
    # two patched balls whose replacement lifts vanish on the square's rim:
    # the patched boundary heights agree, the interiors differ
    outer = pile_of_cubes([1, 1])
    b1 = patch(outer, {0: pyramid_split_square(F(1))}, eps=F(1, 2))
    b2 = patch(outer, {0: pyramid_split_square(F(3))}, eps=F(1, 2))
    assert b1.heights != b2.heights
    o1, o2 = convexify_pair(b1, b2)
    assert o1.lam == o2.lam and o1.shift == o2.shift
    assert in_convex_position(o1.ball).ok and in_convex_position(o2.ball).ok
    # any coordinate surviving in both images carries the same height
    m1 = dict(zip(o1.ball.complex.vertices, o1.ball.heights))
    m2 = dict(zip(o2.ball.complex.vertices, o2.ball.heights))
    common = set(m1) & set(m2)
    rim = [p for p in common if m1[p] == 0 and m2[p] == 0]
    assert len(rim) == 4 and all(m1[p] == m2[p] for p in rim)
    # both apexes land over the viewpoint axis but at different heights
    origin = (F(0), F(0))
    assert m1[origin] != m2[origin]


def test_convexify_pair_rejects_mismatched_boundary():
    b1 = pile_of_cubes([2, 2])
    b2 = pile_of_cubes([2, 3])
    with pytest.raises(ValueError):
        convexify_pair(b1, b2)
