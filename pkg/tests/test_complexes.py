"""Complex data structure, cube recognition, and f-vector bookkeeping."""

from fractions import Fraction

import pytest

from cubex.complexes import (
    ComplexBuilder,
    boundary_complex,
    complex_from_data,
    complex_to_data,
    dehn_sommerville_check,
    euler_characteristic,
    f_vector,
    verify_cubical,
)

F = Fraction


def unit_cube_complex():
    b = ComplexBuilder(3)
    vids = [
        b.add_vertex((F(x), F(y), F(z)))
        for z in (0, 1)
        for y in (0, 1)
        for x in (0, 1)
    ]
    # binary order over axes (x, y, z)
    order = [vids[4 * z + 2 * y + x] for z in (0, 1) for y in (0, 1) for x in (0, 1)]
    b.add_cube(order)
    return b.finalize()


def square_strip(n):
    """n unit squares in a row."""
    b = ComplexBuilder(2)
    for i in range(n):
        v00 = b.add_vertex((F(i), F(0)))
        v10 = b.add_vertex((F(i + 1), F(0)))
        v01 = b.add_vertex((F(i), F(1)))
        v11 = b.add_vertex((F(i + 1), F(1)))
        b.add_cube([v00, v10, v01, v11])
    return b.finalize()


def test_unit_cube_f_vector_and_euler():
    c = unit_cube_complex()
    assert f_vector(c) == (8, 12, 6, 1)
    assert euler_characteristic(c) == 1
    assert verify_cubical(c).ok


def test_cube_boundary_is_a_2_sphere():
    c = unit_cube_complex()
    bd = boundary_complex(c)
    assert f_vector(bd) == (8, 12, 6)
    assert euler_characteristic(bd) == 2
    assert bd.is_closed_pseudomanifold()
    assert bd.top_connected()
    assert verify_cubical(bd).ok


def test_square_strip_counts_and_boundary():
    c = square_strip(2)
    assert f_vector(c) == (6, 7, 2)
    bd = boundary_complex(c)
    assert f_vector(bd) == (6, 6)
    assert euler_characteristic(bd) == 0
    assert bd.top_connected()


def test_shared_faces_dedupe():
    c = square_strip(3)
    assert f_vector(c) == (8, 10, 3)
    # interior edges are covered twice, so the boundary drops them
    assert len(c.boundary_faces()) == 8


def test_cube_order_recovered_after_roundtrip():
    c = unit_cube_complex()
    data = complex_to_data(c)
    c2 = complex_from_data(data)
    assert f_vector(c2) == f_vector(c)
    assert verify_cubical(c2).ok
    order = c2.cube_order((3, 0))
    pts = [c2.vertices[v] for v in order]
    # binary-order axes: vertices at bit-distance 1 differ in one coordinate
    for i in (1, 2, 4):
        diffs = sum(a != b for a, b in zip(pts[0], pts[i]))
        assert diffs == 1


def test_roundtrip_preserves_heights_field():
    c = square_strip(1)
    data = complex_to_data(c, heights=[F(1, 3)] * 4)
    assert data["heights"] == ["1/3"] * 4
    c2 = complex_from_data(data)
    assert f_vector(c2) == (4, 4, 1)


def test_triangle_is_not_cubical():
    b = ComplexBuilder(2)
    v = [b.add_vertex(p) for p in [(F(0), F(0)), (F(1), F(0)), (F(0), F(1))]]
    e01 = b.add_face(1, (v[0], v[1]), [])
    e12 = b.add_face(1, (v[1], v[2]), [])
    e02 = b.add_face(1, (v[0], v[2]), [])
    b.add_face(2, (v[0], v[1], v[2]), [b._faces[1][i[1]] for i in (e01, e12, e02)])
    c = b.finalize()
    rep = verify_cubical(c)
    assert not rep.ok
    assert (2, 0) in rep.offending


def test_nonconvex_quad_rejected():
    b = ComplexBuilder(2)
    v = [
        b.add_vertex(p)
        for p in [(F(0), F(0)), (F(1), F(0)), (F(0), F(1)), (F(1, 4), F(1, 4))]
    ]
    b.add_cube(v)
    rep = verify_cubical(b.finalize())
    assert not rep.ok


def test_nonplanar_quad_rejected():
    b = ComplexBuilder(3)
    v = [
        b.add_vertex(p)
        for p in [
            (F(0), F(0), F(0)),
            (F(1), F(0), F(0)),
            (F(0), F(1), F(0)),
            (F(1), F(1), F(1)),
        ]
    ]
    b.add_cube(v)
    rep = verify_cubical(b.finalize())
    assert not rep.ok


def test_bad_intersection_detected():
    # two squares meeting in a diagonal vertex pair, not a common face
    b = ComplexBuilder(2)
    a = [
        b.add_vertex(p)
        for p in [(F(0), F(0)), (F(1), F(0)), (F(0), F(1)), (F(1), F(1))]
    ]
    b.add_cube(a)
    c00, c11 = a[0], a[3]
    west = b.add_vertex((F(2), F(-1)))
    east = b.add_vertex((F(3), F(0)))
    b.add_cube([c00, west, c11, east])
    rep = verify_cubical(b.finalize())
    assert not rep.ok
    assert any("non-face" in m for m in rep.messages)


def test_dehn_sommerville():
    ok = dehn_sommerville_check((72, 196, 186, 62))
    assert ok.ok and ok.eq1 and ok.eq2 and ok.parity
    bad = dehn_sommerville_check((32, 80, 96, 48))
    assert bad.eq1 and not bad.eq2
    odd = dehn_sommerville_check((9, 18, 27, 9))
    assert not odd.parity
    with pytest.raises(ValueError):
        dehn_sommerville_check((8, 12, 6))


def test_duplicate_cube_and_mixed_dim_guard():
    b = ComplexBuilder(2)
    v = [
        b.add_vertex(p)
        for p in [(F(0), F(0)), (F(1), F(0)), (F(0), F(1)), (F(1), F(1))]
    ]
    k1 = b.add_cube(v)
    k2 = b.add_cube(v)
    assert k1 == k2
    with pytest.raises(ValueError):
        b.add_face(3, v, [])


def test_vertex_dedupe_is_exact():
    b = ComplexBuilder(1)
    assert b.add_vertex((F(1, 3),)) == b.add_vertex(("1/3",))
    assert b.add_vertex((F(2, 3),)) != b.add_vertex((F(1, 3),))
