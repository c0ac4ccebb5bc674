"""Constructions of cubical balls and cubical polytopes.

The builders here assemble their outputs cell by cell and then certify them
with exact checks, instead of deriving combinatorics from one large convex
hull: a prism over a regular ball, the prism over two regular balls sharing a
boundary, the cap over an almost-cubical polytope, connector cubes and
projective connected sums, symmetric tents over lifted boundary subdivisions,
and the hexhoop cubification of a symmetric lifted boundary.

For the two-ball prism the certificate is local convexity: both balls are
regular with strictly folded support, share their boundary exactly, and carry
positive heights.  The boundary of the prism body is then a closed, locally
strictly convex polyhedral hypersurface, so it bounds a convex polytope whose
facets are exactly the top cells, the bottom cells, and one vertical wall per
shared boundary cell.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .complexes import (
    ComplexBuilder,
    CubicalComplex,
    boundary_complex,
    verify_cubical,
)
from .dualmanifolds import derivative_complex, dual_manifold_components
from .geometry import (
    Chart,
    ConvexPolytope,
    Hyperplane,
    convex_hull,
    plane_through,
)
from .lifting import (
    LiftedBall,
    LiftedBoundarySubdivision,
    boundary_restriction,
    convexify_pair,
    register_complex,
    verify_boundary_subdivision,
    verify_regular,
)
from .rational import (
    ONE,
    ZERO,
    Vec,
    affine_fit,
    nullspace,
    rat,
    solve,
    vadd,
    vdot,
    vscale,
    vsub,
)

__all__ = [
    "PrismResult",
    "TentSpec",
    "TentResult",
    "HexhoopResult",
    "lifted_prism",
    "lifted_prism_two_balls",
    "prism_f_vector",
    "schlegel_cap",
    "join_balls",
    "connector_cube",
    "connected_sum",
    "symmetric_tent",
    "hexhoop_cubify",
    "reflect_point",
]


def _mean(points: list[Vec]) -> Vec:
    n = Fraction(len(points))
    return tuple(sum(col, ZERO) / n for col in zip(*points))


def reflect_point(h: Hyperplane, x: Vec) -> Vec:
    """Mirror image of a point across a hyperplane."""
    n = h.normal
    scale = 2 * h.eval(x) / vdot(n, n)
    return vsub(tuple(rat(c) for c in x), vscale(scale, n))


def _identity_chart(dim: int) -> Chart:
    return Chart(
        origin=(ZERO,) * dim,
        dirs=tuple(
            tuple(ONE if i == j else ZERO for i in range(dim))
            for j in range(dim)
        ),
    )


def _fit_eval(fit, x: Vec) -> Fraction:
    return vdot(fit[0], x) + fit[1]


# -- prisms ---------------------------------------------------------------


@dataclass
class PrismResult:
    ball: LiftedBall
    polytope: ConvexPolytope | None


def _positive_heights(*balls: LiftedBall) -> list[list[Fraction]]:
    low = min(min(b.heights) for b in balls)
    shift = ONE - low if low <= 0 else ZERO
    return [[x + shift for x in b.heights] for b in balls]


def lifted_prism(lb: LiftedBall) -> PrismResult:
    """Prism over a regular ball: cells swept between the two lifted copies.

    The ball's heights are shifted to be strictly positive, every cell F is
    replaced by the prism between the graphs of -h and +h over F, and the
    input heights pull back to a lifting of the prism ball.  When the ball
    does not subdivide the boundary of its support, the convex hull of the
    two lifted copies is returned as well, cross-checked facet by facet.
    """
    rep = verify_regular(lb)
    if not rep.ok:
        raise ValueError("input ball is not regular: " + "; ".join(rep.messages))
    c = lb.complex
    d = c.dim
    (h,) = _positive_heights(lb)
    b = ComplexBuilder(d + 1)
    low = [b.add_vertex(p + (-h[i],)) for i, p in enumerate(c.vertices)]
    up = [b.add_vertex(p + (h[i],)) for i, p in enumerate(c.vertices)]
    for ci in range(c.n_faces(d)):
        order = c.cube_order((d, ci))
        b.add_cube(tuple(low[v] for v in order) + tuple(up[v] for v in order))
    cx = b.finalize(dim=d + 1)
    hmap = {}
    for i, p in enumerate(c.vertices):
        hmap[p + (-h[i],)] = lb.heights[i]
        hmap[p + (h[i],)] = lb.heights[i]
    ball = LiftedBall(cx, tuple(hmap[v] for v in cx.vertices))
    check = verify_regular(ball, check_support=False)
    if not check.ok:
        raise AssertionError(
            "prism ball lost regularity: " + "; ".join(check.messages)
        )

    support = convex_hull(c.vertices)
    bd_sets = {
        frozenset(c.vertices[v] for v in c.faces(d - 1)[bi])
        for bi in c.boundary_faces()
    }
    hull_sets = {
        frozenset(support.vertices[v] for v in vs) for vs, _ in support.facets
    }
    polytope = None
    if bd_sets == hull_sets:
        pts = [p + (-h[i],) for i, p in enumerate(c.vertices)]
        pts += [p + (h[i],) for i, p in enumerate(c.vertices)]
        polytope = convex_hull(pts)
        expected = {
            frozenset(c.vertices[v] + (sign * h[v],) for v in c.faces(d)[ci])
            for ci in range(c.n_faces(d))
            for sign in (-1, 1)
        }
        expected |= {
            frozenset(
                c.vertices[v] + (sign * h[v],)
                for v in c.faces(d - 1)[bi]
                for sign in (-1, 1)
            )
            for bi in c.boundary_faces()
        }
        got = {
            frozenset(polytope.vertices[v] for v in vs)
            for vs, _ in polytope.facets
        }
        if got != expected:
            raise AssertionError("prism polytope facets differ from cells")
        f_ball = c.f_vector()
        f_bd = boundary_complex(c).f_vector()
        want = [2 * f_ball[0]]
        want += [2 * f_ball[k] + f_bd[k - 1] for k in range(1, d + 1)]
        if tuple(want) != polytope.f_vector():
            raise AssertionError("prism polytope f-vector identity failed")
    return PrismResult(ball=ball, polytope=polytope)


def prism_f_vector(b1: LiftedBall, b2: LiftedBall) -> tuple[int, ...]:
    """f-vector of the prism over two balls, from the complexes alone."""
    f1 = b1.complex.f_vector()
    f2 = b2.complex.f_vector()
    fb = boundary_complex(b1.complex).f_vector()
    d = b1.complex.dim
    out = [f1[0] + f2[0]]
    out += [f1[k] + f2[k] + fb[k - 1] for k in range(1, d + 1)]
    return tuple(out)


def lifted_prism_two_balls(
    b1: LiftedBall, b2: LiftedBall, validate: bool = True
) -> ConvexPolytope:
    """Convex polytope whose upper facets are b1's cells and lower b2's.

    Both balls must be regular and share their boundary complex and boundary
    heights exactly.  They are convexified with a shared viewpoint, heights
    are shifted positive by a shared constant, and the polytope is assembled
    directly: cells of b1 lifted up, cells of b2 lifted down, and a vertical
    wall over every shared boundary cell.  With ``validate`` every facet
    plane is checked against every vertex; otherwise the local convexity
    certificate from the convexification is relied on, which keeps large
    instances affordable.
    """
    for name, b in (("first", b1), ("second", b2)):
        rep = verify_regular(b, check_support=False)
        if not rep.ok:
            raise ValueError(
                f"{name} ball is not regular: " + "; ".join(rep.messages)
            )
    bd1, hh1 = boundary_restriction(b1)
    bd2, hh2 = boundary_restriction(b2)
    m1 = dict(zip(bd1.vertices, hh1))
    m2 = dict(zip(bd2.vertices, hh2))
    if m1 != m2:
        for coord in sorted(set(m1) | set(m2)):
            if m1.get(coord) != m2.get(coord):
                raise ValueError(
                    f"boundary mismatch at vertex {coord}: "
                    f"{m1.get(coord)} vs {m2.get(coord)}"
                )
    c1, c2 = convexify_pair(b1, b2)
    t1, t2 = c1.ball, c2.ball
    h1, h2 = _positive_heights(t1, t2)
    s1 = LiftedBall(t1.complex, tuple(h1))
    s2 = LiftedBall(t2.complex, tuple(h2))

    d = t1.complex.dim
    verts: list[Vec] = []
    vmap: dict[Vec, int] = {}

    def add(pt: Vec) -> int:
        if pt not in vmap:
            vmap[pt] = len(verts)
            verts.append(pt)
        return vmap[pt]

    upper = [
        add(p + (h1[i],)) for i, p in enumerate(t1.complex.vertices)
    ]
    lower = [
        add(p + (-h2[i],)) for i, p in enumerate(t2.complex.vertices)
    ]
    low_at = {p: lower[i] for i, p in enumerate(t2.complex.vertices)}

    facets: list[tuple[frozenset[int], Hyperplane]] = []
    for ci in range(t1.complex.n_faces(d)):
        fit = s1.cell_fit(ci)
        hp = Hyperplane.make(tuple(-a for a in fit[0]) + (ONE,), fit[1])
        vset = frozenset(upper[v] for v in t1.complex.faces(d)[ci])
        facets.append((vset, hp))
    for ci in range(t2.complex.n_faces(d)):
        fit = s2.cell_fit(ci)
        hp = Hyperplane.make(tuple(-a for a in fit[0]) + (-ONE,), fit[1])
        vset = frozenset(lower[v] for v in t2.complex.faces(d)[ci])
        facets.append((vset, hp))
    inner = _mean(list(t1.complex.vertices))
    for bi in t1.complex.boundary_faces():
        vids = t1.complex.faces(d - 1)[bi]
        pts = [t1.complex.vertices[v] for v in vids]
        base = plane_through(pts, away_from=inner)
        hp = Hyperplane.make(base.normal + (ZERO,), base.offset)
        vset = frozenset(upper[v] for v in vids) | frozenset(
            low_at[t1.complex.vertices[v]] for v in vids
        )
        facets.append((vset, hp))

    poly = ConvexPolytope(
        ambient_dim=d + 1,
        dim=d + 1,
        vertices=tuple(verts),
        local=tuple(verts),
        chart=_identity_chart(d + 1),
        facets=facets,
    )
    if validate:
        for vset, hp in facets:
            for i, pt in enumerate(verts):
                e = hp.eval(pt)
                if e > 0:
                    raise AssertionError("vertex beyond a prism facet plane")
                if (e == 0) != (i in vset):
                    raise AssertionError("prism facet tight set mismatch")
        poly.validate_boundary()
    return poly


# -- caps over almost cubical polytopes -----------------------------------


def schlegel_cap(
    p: ConvexPolytope,
    facet: int,
    x0: Vec | None = None,
    h: Hyperplane | None = None,
) -> LiftedBall:
    """Regular cubical ball over the facets of p other than one.

    ``x0`` must lie beyond the chosen facet and beneath all others; ``h``
    must separate x0 from p.  Every other facet G pairs with its image G'
    under the involution that fixes h and exchanges x0 with infinity, and
    conv(G, G') becomes a cell; the ball is combinatorially the prism over
    the Schlegel complex of (p, facet).  Defaults: x0 sits over the facet
    barycenter at a height found by exact halving, h is parallel to the
    facet halfway to x0.
    """
    if not p.chart.is_identity:
        raise ValueError("polytope must be full-dimensional in its ambient space")
    d = p.dim
    f0_set, f0_plane = p.facets[facet]

    bd = p.boundary_to_complex()
    cells = {
        frozenset(vs): i for i, vs in enumerate(bd.faces(d - 1))
    }
    coord_id = {pt: i for i, pt in enumerate(bd.vertices)}
    facet_cell = []
    for j, (vs, _) in enumerate(p.facets):
        key = frozenset(coord_id[p.vertices[v]] for v in vs)
        facet_cell.append(cells[key])
    for j in range(len(p.facets)):
        if j == facet:
            continue
        try:
            bd.cube_order((d - 1, facet_cell[j]))
        except ValueError as e:
            raise ValueError(f"facet {j} is not a combinatorial cube") from e

    if x0 is None:
        center = _mean([p.vertices[v] for v in sorted(f0_set)])
        delta = ONE
        while True:
            cand = vadd(center, vscale(delta, f0_plane.normal))
            if all(
                hp.eval(cand) < 0
                for j, (_, hp) in enumerate(p.facets)
                if j != facet
            ):
                x0 = cand
                break
            delta /= 2
    else:
        x0 = tuple(rat(c) for c in x0)
        if f0_plane.eval(x0) <= 0:
            raise ValueError("x0 is not beyond the chosen facet")
        for j, (_, hp) in enumerate(p.facets):
            if j != facet and hp.eval(x0) >= 0:
                raise ValueError(f"x0 is not beneath facet {j}")
    if h is None:
        e0 = f0_plane.eval(x0)
        h = Hyperplane.make(f0_plane.normal, f0_plane.offset + e0 / 2)
    else:
        if h.eval(x0) < 0:
            h = h.flipped()
        if h.eval(x0) == 0:
            raise ValueError("separator passes through x0")
    for v in p.vertices:
        if h.eval(v) >= 0:
            raise ValueError("separator does not separate x0 from the polytope")

    # The involution fixing h and swapping x0 with infinity; images land
    # strictly beyond h, so the fold heights are just |h.eval| everywhere.
    e = h.eval(x0)
    reflected: dict[int, Vec] = {}
    for vid, y in enumerate(p.vertices):
        ly = h.eval(y)
        factor = e / (e - 2 * ly)
        reflected[vid] = vadd(x0, vscale(factor, vsub(y, x0)))
        if h.eval(reflected[vid]) <= 0:
            raise AssertionError("reflected vertex did not cross the separator")

    b = ComplexBuilder(d)
    orig_ids = {}
    refl_ids = {}
    for vid, y in enumerate(p.vertices):
        orig_ids[vid] = b.add_vertex(y)
        refl_ids[vid] = b.add_vertex(reflected[vid])
    poly_vid = {coord_id[y]: i for i, y in enumerate(p.vertices)}
    for j in range(len(p.facets)):
        if j == facet:
            continue
        order = bd.cube_order((d - 1, facet_cell[j]))
        base = [poly_vid[v] for v in order]
        b.add_cube(
            tuple(orig_ids[v] for v in base)
            + tuple(refl_ids[v] for v in base)
        )
    cx = b.finalize(dim=d)
    ball = LiftedBall(cx, tuple(abs(h.eval(pt)) for pt in cx.vertices))
    rep = verify_regular(ball)
    if not rep.ok:
        raise ValueError("cap is not regular: " + "; ".join(rep.messages))

    schlegel = bd.subcomplex(
        [(d - 1, facet_cell[j]) for j in range(len(p.facets)) if j != facet]
    )
    fs = schlegel.f_vector()
    fc = cx.f_vector()
    want = [2 * fs[0]]
    want += [2 * fs[k] + fs[k - 1] for k in range(1, d - 1 + 1)]
    want += [fs[d - 1]]
    if tuple(fc) != tuple(want):
        raise AssertionError(
            f"cap is not the prism over the Schlegel complex: {fc} vs {want}"
        )
    return ball


def join_balls(b1: LiftedBall, b2: LiftedBall) -> LiftedBall:
    """Union of two regular balls meeting in exactly one boundary cell.

    The second ball's heights are corrected by an affine function so both
    liftings agree on the shared cell, then sharpened across it by an exact
    multiple of the shared cell's plane; the union is verified regular.
    """
    for name, b in (("first", b1), ("second", b2)):
        rep = verify_regular(b, check_support=False)
        if not rep.ok:
            raise ValueError(
                f"{name} ball is not regular: " + "; ".join(rep.messages)
            )
    d = b1.complex.dim
    coords1 = set(b1.complex.vertices)
    coords2 = set(b2.complex.vertices)
    shared = coords1 & coords2
    cell1 = _boundary_cell_with_coords(b1.complex, shared)
    cell2 = _boundary_cell_with_coords(b2.complex, shared)
    if cell1 is None or cell2 is None:
        raise ValueError("balls do not meet in a single boundary cell")

    qpts = sorted(shared)
    h1 = dict(zip(b1.complex.vertices, b1.heights))
    h2 = dict(zip(b2.complex.vertices, b2.heights))
    normal = plane_through(qpts, away_from=_mean(list(coords2 - shared)))
    fit = affine_fit(
        qpts + [vadd(qpts[0], normal.normal)],
        [h1[q] - h2[q] for q in qpts] + [h1[qpts[0]] - h2[qpts[0]]],
    )
    if fit is None:
        raise AssertionError("height correction is not affine")
    corrected = {
        pt: h2[pt] + _fit_eval(fit, pt) for pt in b2.complex.vertices
    }
    for q in qpts:
        if corrected[q] != h1[q]:
            raise AssertionError("height correction failed on the shared cell")

    # sharpen the fold across the shared cell if needed
    fit1 = _cell_fit_of(b1, cell1)
    vids2 = b2.complex.faces(d)[cell2]
    fit2 = affine_fit(
        [b2.complex.vertices[v] for v in vids2],
        [corrected[b2.complex.vertices[v]] for v in vids2],
    )
    if fit1 is None or fit2 is None:
        raise AssertionError("cell heights are not affine")
    zeta = normal  # vanishes on the shared cell, negative on b2's side
    mu = ZERO
    for v in vids2:
        pt = b2.complex.vertices[v]
        if pt in shared:
            continue
        zv = zeta.eval(pt)
        if zv >= 0:
            raise AssertionError("shared-cell plane oriented wrongly")
        need = (_fit_eval(fit2, pt) - _fit_eval(fit1, pt)) / (-zv)
        if need >= mu:
            mu = need + ONE
    for v in b1.complex.faces(d)[cell1]:
        pt = b1.complex.vertices[v]
        if pt in shared:
            continue
        zv = zeta.eval(pt)
        if zv <= 0:
            raise AssertionError("balls lie on the same side of the shared cell")
        need = (_fit_eval(fit1, pt) - _fit_eval(fit2, pt)) / zv
        if need >= mu:
            mu = need + ONE

    b = ComplexBuilder(d)
    register_complex(b, b1.complex)
    register_complex(b, b2.complex)
    cx = b.finalize(dim=d)
    heights = []
    for pt in cx.vertices:
        if pt in h1:
            heights.append(h1[pt])
        else:
            heights.append(corrected[pt] + mu * zeta.eval(pt))
    joined = LiftedBall(cx, tuple(heights))
    rep = verify_regular(joined)
    if not rep.ok:
        raise ValueError("joined ball is not regular: " + "; ".join(rep.messages))
    return joined


def _boundary_cell_with_coords(c: CubicalComplex, coords: set) -> int | None:
    d = c.dim
    hits = []
    for bi in c.boundary_faces():
        vids = c.faces(d - 1)[bi]
        if {c.vertices[v] for v in vids} == coords:
            hits.append(bi)
    if len(hits) != 1:
        return None
    bi = hits[0]
    cof = [
        ci
        for ci in range(c.n_faces(d))
        if bi in c.subface_ids((d, ci))
    ]
    return cof[0] if len(cof) == 1 else None


def _cell_fit_of(b: LiftedBall, ci: int):
    vids = b.complex.faces(b.complex.dim)[ci]
    return affine_fit(
        [b.complex.vertices[v] for v in vids],
        [b.heights[v] for v in vids],
    )


# -- connectors and connected sums ----------------------------------------


def _projectivity_to_unit_square(corners: list[Vec]) -> list[list[Fraction]]:
    """3x3 homogeneous map sending four 2d points to the unit square cycle."""
    targets = [(ZERO, ZERO), (ONE, ZERO), (ONE, ONE), (ZERO, ONE)]
    rows = []
    for (u, v), (a, bb) in zip(corners, targets):
        rows.append([u, v, ONE, ZERO, ZERO, ZERO, -a * u, -a * v, -a])
        rows.append([ZERO, ZERO, ZERO, u, v, ONE, -bb * u, -bb * v, -bb])
    kern = nullspace(rows)
    if len(kern) != 1:
        raise ValueError("quad does not admit a unique projectivity")
    m = kern[0]
    w0 = m[6] * corners[0][0] + m[7] * corners[0][1] + m[8]
    if w0 == 0:
        raise ValueError("degenerate projectivity")
    if w0 < 0:
        m = tuple(-x for x in m)
    mat = [list(m[0:3]), list(m[3:6]), list(m[6:9])]
    for u, v in corners:
        if mat[2][0] * u + mat[2][1] * v + mat[2][2] <= 0:
            raise ValueError("projectivity has nonpositive denominator on quad")
    return mat


def connector_cube(f: ConvexPolytope) -> ConvexPolytope:
    """Combinatorial 4-cube: prism over a projective copy of a 3-cube.

    The copy is arranged to have a unit-square face in the plane of its
    fourth coordinate zero, so the prism has a unit 3-cube facet adjacent
    to the copy of ``f``; that facet lets any two connectors glue directly.
    """
    if f.dim != 3:
        raise ValueError("connector base must be 3-dimensional")
    pts3 = f.local if not f.chart.is_identity else f.vertices
    base = convex_hull(pts3)
    if len(base.vertices) != 8 or len(base.facets) != 6:
        raise ValueError("connector base is not a combinatorial cube")

    fi = min(
        range(len(base.facets)),
        key=lambda j: sorted(base.vertices[v] for v in base.facets[j][0]),
    )
    vset, fplane = base.facets[fi]
    cycle = base.edge_cycle(vset)
    corners = [base.vertices[v] for v in cycle]

    origin = corners[0]
    e1 = vsub(corners[1], corners[0])
    e2 = vsub(corners[3], corners[0])
    n_in = tuple(-a for a in fplane.normal)
    frame = (e1, e2, n_in)

    def adapted(x: Vec) -> Vec:
        sol = solve(list(zip(*frame)), vsub(x, origin))
        if sol is None:
            raise AssertionError("degenerate adapted frame")
        return tuple(sol)

    quad_uv = [adapted(c)[:2] for c in corners]
    for c in corners:
        if adapted(c)[2] != 0:
            raise AssertionError("base quad is not flat in the adapted frame")
    p2 = _projectivity_to_unit_square(quad_uv)

    gamma = ZERO
    for v in base.vertices:
        u, vv, s = adapted(v)
        if s == 0:
            continue
        if s < 0:
            raise AssertionError("cube on the wrong side of its facet")
        wv = p2[2][0] * u + p2[2][1] * vv + p2[2][2]
        need = (-wv) / s
        if need >= gamma:
            gamma = need + ONE

    images = []
    for v in base.vertices:
        u, vv, s = adapted(v)
        w = p2[2][0] * u + p2[2][1] * vv + p2[2][2] + gamma * s
        if w <= 0:
            raise AssertionError("connector projectivity denominator failed")
        x = (p2[0][0] * u + p2[0][1] * vv + p2[0][2]) / w
        y = (p2[1][0] * u + p2[1][1] * vv + p2[1][2]) / w
        z = s / w
        images.append((x, y, z))

    copy = convex_hull(images)
    if len(copy.vertices) != 8 or len(copy.facets) != 6:
        raise AssertionError("projective copy lost the cube combinatorics")
    square = {
        (ZERO, ZERO, ZERO),
        (ONE, ZERO, ZERO),
        (ONE, ONE, ZERO),
        (ZERO, ONE, ZERO),
    }
    if not square <= set(copy.vertices):
        raise AssertionError("unit-square face did not come out exactly")

    pts4 = [pt + (ZERO,) for pt in images] + [pt + (ONE,) for pt in images]
    cube4 = convex_hull(pts4)
    if len(cube4.facets) != 8 or len(cube4.vertices) != 16:
        raise AssertionError("connector is not a combinatorial 4-cube")
    unit = {pt + (tt,) for pt in square for tt in (ZERO, ONE)}
    facet_sets = [
        {cube4.vertices[v] for v in vs} for vs, _ in cube4.facets
    ]
    if unit not in facet_sets:
        raise AssertionError("connector lost its unit-cube facet")
    return cube4


def _cube_corner_orders(poly: ConvexPolytope) -> list[Vec]:
    """Vertex coordinates of a cubical polytope cell in binary order."""
    b = ComplexBuilder(poly.ambient_dim)
    poly.as_cell_into(b)
    c = b.finalize(dim=poly.dim, check_pure=True)
    return [c.vertices[v] for v in c.cube_order((poly.dim, 0))]


def _cube_symmetry_orders(order: list[Vec]) -> list[list[Vec]]:
    k = len(order).bit_length() - 1
    out = []
    for perm in itertools.permutations(range(k)):
        for flips in range(1 << k):
            new = []
            for code in range(1 << k):
                src = 0
                for m in range(k):
                    bit = (code >> m) & 1
                    if (flips >> m) & 1:
                        bit ^= 1
                    src |= bit << perm[m]
                new.append(order[src])
            out.append(new)
    return out


def _solve_projectivity(
    src: list[Vec], dst: list[Vec], dim: int
) -> list[list[Fraction]] | None:
    """Homogeneous (dim+1)x(dim+1) matrix with src[i] -> dst[i], 5 points."""
    n = dim + 1
    npts = len(src)
    cols = n * n + (npts - 1)
    rows = []
    for i in range(npts):
        sh = list(src[i]) + [ONE]
        for r in range(n):
            row = [ZERO] * cols
            for cdx in range(n):
                row[r * n + cdx] = sh[cdx]
            target = list(dst[i]) + [ONE]
            if i == 0:
                rows.append((row, target[r]))
            else:
                row[n * n + i - 1] = -target[r]
                rows.append((row, ZERO))
    mat = [r for r, _ in rows]
    rhs = [b for _, b in rows]
    sol = solve(mat, rhs)
    if sol is None:
        return None
    out = [[sol[r * n + cdx] for cdx in range(n)] for r in range(n)]
    return out


def _apply_h(mat: list[list[Fraction]], x: Vec) -> tuple[Vec, Fraction]:
    xh = list(x) + [ONE]
    img = [sum(m * c for m, c in zip(row, xh)) for row in mat]
    return tuple(img[:-1]), img[-1]


def _facet_as_polytope(p: ConvexPolytope, fi: int) -> ConvexPolytope:
    pts = [p.vertices[v] for v in sorted(p.facets[fi][0])]
    return convex_hull(pts)


def connected_sum(
    p1: ConvexPolytope,
    f1: int,
    p2: ConvexPolytope,
    f2: int,
    max_attempts: int = 64,
) -> ConvexPolytope:
    """Glue two cubical polytopes along projectively equivalent facets.

    Facet matchings are tried in lexicographic order; for a matching that a
    projective map realizes exactly, p2 is carried into a flat pyramid over
    the shared facet on the far side of p1, pulled closer to the facet until
    the union is convex, verified exactly.  If no matching works, connector
    cubes are interposed: each polytope is summed with the connector over
    its own facet, and the two unit-cube facets are glued to each other.
    """
    direct = _try_direct_sum(p1, f1, p2, f2, max_attempts)
    if direct is not None:
        return direct

    c1 = connector_cube(_chart_copy(_facet_as_polytope(p1, f1)))
    a, unit_a = _sum_with_connector(p1, f1, c1, max_attempts)
    c2 = connector_cube(_chart_copy(_facet_as_polytope(p2, f2)))
    bsum, unit_b = _sum_with_connector(p2, f2, c2, max_attempts)
    out = _try_direct_sum(a, unit_a, bsum, unit_b, max_attempts)
    if out is None:
        raise ValueError("connected sum failed even with connector cubes")
    return out


def _chart_copy(poly: ConvexPolytope) -> ConvexPolytope:
    """Re-embed a lower-dimensional polytope into its own chart coordinates."""
    if poly.chart.is_identity:
        return poly
    return convex_hull(poly.local)


def _connector_facet_indices(c: ConvexPolytope) -> tuple[int, int]:
    """(index of the base copy facet, index of the unit-cube facet)."""
    base = None
    unit = None
    unit_set = {
        (x, y, ZERO, t)
        for x in (ZERO, ONE)
        for y in (ZERO, ONE)
        for t in (ZERO, ONE)
    }
    for j, (vs, _) in enumerate(c.facets):
        coords = {c.vertices[v] for v in vs}
        if coords == unit_set:
            unit = j
        if all(pt[3] == 0 for pt in coords) and coords != unit_set:
            base = j
    if base is None or unit is None:
        raise AssertionError("connector facets not found")
    return base, unit


def _sum_with_connector(
    p: ConvexPolytope, fi: int, conn: ConvexPolytope, max_attempts: int
) -> tuple[ConvexPolytope, int]:
    base, unit = _connector_facet_indices(conn)
    got = _try_direct_sum(p, fi, conn, base, max_attempts)
    if got is None:
        raise ValueError("connector cube did not glue to its own facet")
    # facet order in the sum: p's facets minus fi, then conn's minus base
    offset = len(p.facets) - 1
    conn_order = [j for j in range(len(conn.facets)) if j != base]
    return got, offset + conn_order.index(unit)


def _try_direct_sum(
    p1: ConvexPolytope,
    f1: int,
    p2: ConvexPolytope,
    f2: int,
    max_attempts: int,
) -> ConvexPolytope | None:
    if not (p1.chart.is_identity and p2.chart.is_identity):
        raise ValueError("connected sum needs full-dimensional polytopes")
    d = p1.dim
    face1 = _facet_as_polytope(p1, f1)
    face2 = _facet_as_polytope(p2, f2)
    try:
        order1 = _cube_corner_orders(face1)
        order2 = _cube_corner_orders(face2)
    except ValueError:
        raise ValueError("gluing facets must be combinatorial cubes")

    variants = _cube_symmetry_orders(order2)
    variants.sort(key=lambda ordv: [tuple(x) for x in ordv])
    anchor_sets = [(0, 1, 2, 4, 7), (0, 1, 2, 4, 3), (0, 1, 2, 4, 5), (0, 1, 2, 4, 6)]
    chart1 = face1.chart
    chart2 = face2.chart
    for variant in variants:
        mat = None
        for anchors in anchor_sets:
            src = [chart2.to_local(variant[i]) for i in anchors]
            dst = [chart1.to_local(order1[i]) for i in anchors]
            mat = _solve_projectivity(src, dst, d - 1)
            if mat is not None:
                break
        if mat is None:
            continue
        good = True
        for i in range(8):
            img, w = _apply_h(mat, chart2.to_local(variant[i]))
            if w == 0:
                good = False
                break
            pt = tuple(x / w for x in img)
            if pt != tuple(chart1.to_local(order1[i])):
                good = False
                break
        if not good:
            continue
        got = _glue_with_map(p1, f1, p2, f2, mat, chart1, chart2, max_attempts)
        if got is not None:
            return got
    return None


def _glue_with_map(
    p1, f1, p2, f2, mat, chart1, chart2, max_attempts
) -> ConvexPolytope | None:
    n1 = p1.facets[f1][1]
    n2 = p2.facets[f2][1]

    def frame_coords(p: ConvexPolytope, chart: Chart, normal: Vec):
        dirs = list(chart.dirs) + [normal]
        cols = list(zip(*dirs))

        def to_frame(x: Vec) -> Vec:
            sol = solve(cols, vsub(x, chart.origin))
            if sol is None:
                raise AssertionError("degenerate facet frame")
            return tuple(sol)

        return to_frame

    to_f2 = frame_coords(p2, chart2, n2.normal)
    to_f1 = frame_coords(p1, chart1, n1.normal)

    def from_f1(u1, s1) -> Vec:
        out = list(chart1.origin)
        for coeff, dvec in zip(u1, chart1.dirs):
            for i, di in enumerate(dvec):
                out[i] += coeff * di
        for i, di in enumerate(n1.normal):
            out[i] += s1 * di
        return tuple(out)

    def side_of(p: ConvexPolytope, to_frame) -> int:
        sgn = None
        for v in p.vertices:
            s = to_frame(v)[-1]
            if s == 0:
                continue
            if sgn is None:
                sgn = 1 if s > 0 else -1
            elif (s > 0) != (sgn > 0):
                raise AssertionError("facet does not support its polytope")
        if sgn is None:
            raise AssertionError("degenerate polytope")
        return sgn

    sgn1 = side_of(p1, to_f1)
    sgn2 = side_of(p2, to_f2)

    # w-functional on p2: from the in-facet map plus a transversal term
    a_row = mat[-1][:-1]
    b_val = mat[-1][-1]
    gamma = ZERO
    for v in p2.vertices:
        fr = to_f2(v)
        u, s = fr[:-1], fr[-1]
        if s == 0:
            continue
        wv = vdot(tuple(a_row), u) + b_val
        need = (-wv) / (s * sgn2)
        if need >= gamma:
            gamma = need + ONE

    def map_p2(x: Vec) -> Vec:
        fr = to_f2(x)
        u, s = fr[:-1], fr[-1]
        img, w = _apply_h(mat, u)
        w = w + gamma * (s * sgn2)
        if w <= 0:
            raise AssertionError("gluing map denominator failed")
        u1 = tuple(c / w for c in img)
        s1 = sgn1 * (s * sgn2) / w  # p1's side; the involution flips it over
        return from_f1(u1, s1)

    try:
        moved2 = [map_p2(v) for v in p2.vertices]
    except AssertionError:
        return None

    shared1 = sorted(p1.facets[f1][0])
    shared_pts = {p1.vertices[v] for v in shared1}
    center = _mean(sorted(shared_pts))
    q1 = list(p1.vertices)

    delta = ONE
    for _ in range(max_attempts):
        x0 = vadd(center, vscale(delta * sgn1 * -1, n1.normal))
        if all(
            hp.eval(x0) < 0
            for j, (_, hp) in enumerate(p1.facets)
            if j != f1
        ):
            # involution fixing aff(f1) pointwise and swapping x0 with the
            # point at infinity; it carries moved2 into the pyramid over the
            # shared facet with apex x0, beyond f1 and beneath every other
            # facet of p1
            e = n1.eval(x0)
            assert e > 0
            q2 = []
            for y in moved2:
                ly = n1.eval(y)
                q2.append(vadd(x0, vscale(e / (e - 2 * ly), vsub(y, x0))))
            got = _assemble_sum(p1, f1, q1, p2, f2, q2, shared_pts)
            if got is not None:
                return got
        delta /= 2
    return None


def _assemble_sum(
    p1, f1, q1, p2, f2, q2, shared_pts
) -> ConvexPolytope | None:
    d = p1.dim
    verts: list[Vec] = []
    vmap: dict[Vec, int] = {}

    def add(pt: Vec) -> int:
        if pt not in vmap:
            vmap[pt] = len(verts)
            verts.append(pt)
        return vmap[pt]

    idx1 = [add(pt) for pt in q1]
    idx2 = [add(pt) for pt in q2]
    if len(verts) != len(q1) + len(q2) - len(shared_pts):
        return None

    facets: list[tuple[frozenset[int], Hyperplane]] = []
    inner1 = _mean(q1)
    inner2 = _mean(q2)
    for (p, q, idx, fskip, inner) in (
        (p1, q1, idx1, f1, inner1),
        (p2, q2, idx2, f2, inner2),
    ):
        for j, (vs, _) in enumerate(p.facets):
            if j == fskip:
                continue
            pts = [q[v] for v in sorted(vs)]
            try:
                hp = plane_through(pts, away_from=inner)
            except ValueError:
                return None
            facets.append((frozenset(idx[v] for v in vs), hp))

    for vset, hp in facets:
        for i, pt in enumerate(verts):
            ev = hp.eval(pt)
            if ev > 0:
                return None
            if (ev == 0) != (i in vset):
                return None

    poly = ConvexPolytope(
        ambient_dim=d,
        dim=d,
        vertices=tuple(verts),
        local=tuple(verts),
        chart=_identity_chart(d),
        facets=facets,
    )
    poly.validate_boundary()
    return poly


# -- symmetric tents -------------------------------------------------------


@dataclass(frozen=True)
class TentSpec:
    hyperplane: Hyperplane
    apex_left: Vec
    apex_right: Vec
    height: Fraction
    base: LiftedBoundarySubdivision


@dataclass(frozen=True)
class TentResult:
    polytope: ConvexPolytope
    spec: TentSpec
    left_cells: tuple[int, ...]
    right_cells: tuple[int, ...]
    equator_ridges: tuple[int, ...]


def _mirror_map(
    s: CubicalComplex, h: Hyperplane
) -> list[int]:
    index = {pt: i for i, pt in enumerate(s.vertices)}
    out = []
    for pt in s.vertices:
        img = reflect_point(h, pt)
        j = index.get(img)
        if j is None:
            raise ValueError("boundary subdivision is not symmetric: "
                             f"vertex {pt} has no mirror image")
        out.append(j)
    return out


def symmetric_tent(
    base: LiftedBoundarySubdivision,
    h: Hyperplane,
    q_left: Vec | None = None,
) -> TentResult:
    """Tent over a symmetric lifted boundary subdivision.

    The tent is the convex hull of the lifted boundary and two apexes at
    height ``hh`` over q_left and its mirror image.  The minimal admissible
    height is found exactly: every upper-facet condition is linear in the
    height, so each vertex contributes one critical root; the tent is built
    at twice the maximum root.  The upper facets are then classified
    exhaustively into apex pyramids over cells and two-apex pyramids over
    equator ridges; anything else aborts.
    """
    p, s, psi = base.polytope, base.complex, base.heights
    if not p.chart.is_identity:
        raise ValueError("base polytope must be full-dimensional")
    d = p.dim
    rep = verify_boundary_subdivision(base)
    if not rep.ok:
        raise ValueError(
            "invalid boundary subdivision: " + "; ".join(rep.messages)
        )

    mirror = _mirror_map(s, h)
    for i, j in enumerate(mirror):
        if psi[i] != psi[j]:
            raise ValueError("heights are not mirror symmetric")
    cell_sets = {frozenset(vids) for vids in s.faces(s.dim)}
    for vids in s.faces(s.dim):
        if frozenset(mirror[v] for v in vids) not in cell_sets:
            raise ValueError("cells are not mirror symmetric")

    sides = [h.side(pt) for pt in s.vertices]
    for vids in s.faces(s.dim):
        have_pos = any(sides[v] > 0 for v in vids)
        have_neg = any(sides[v] < 0 for v in vids)
        if have_pos and have_neg:
            raise ValueError("a cell crosses the symmetry hyperplane")
        if not have_pos and not have_neg:
            raise ValueError("a cell lies inside the symmetry hyperplane")
        onh = frozenset(v for v in vids if sides[v] == 0)
        if len(onh) > 1 and s.find_face(onh) is None:
            raise ValueError(
                "the symmetry hyperplane does not cut the subdivision "
                "in a subcomplex"
            )

    equator = [i for i, side in enumerate(sides) if side == 0]
    lefts = [i for i, side in enumerate(sides) if side > 0]
    if not equator or not lefts:
        raise ValueError("symmetry hyperplane does not cut the polytope")
    if q_left is None:
        m0 = _mean([s.vertices[v] for v in equator])
        bl = _mean([s.vertices[v] for v in lefts])
        q_left = vscale(Fraction(1, 2), vadd(m0, bl))
    else:
        q_left = tuple(rat(c) for c in q_left)
    if h.eval(q_left) <= 0:
        raise ValueError("q_left is not strictly on the positive side")
    if p.position(q_left) != "interior":
        raise ValueError("q_left is not in the interior of the polytope")
    q_right = reflect_point(h, q_left)

    carriers = base.cell_facets()
    roots: list[Fraction] = []
    for ci, vids in enumerate(s.faces(s.dim)):
        left_cell = any(sides[v] > 0 for v in vids)
        apex_xy = q_left if left_cell else q_right
        other_xy = q_right if left_cell else q_left
        fplane = p.facets[carriers[ci]][1]
        fit = base.cell_fit(ci)
        a_q = -fplane.eval(apex_xy)
        if a_q <= 0:
            raise AssertionError("apex not strictly inside a carrier plane")
        fit_q = _fit_eval(fit, apex_xy)
        in_cell = set(vids)
        for w, pt in enumerate(s.vertices):
            if w in in_cell:
                continue
            a_w = -fplane.eval(pt)
            b_w = psi[w] - _fit_eval(fit, pt)
            if a_w > 0:
                roots.append(fit_q + a_q * b_w / a_w)
            elif a_w == 0:
                if b_w >= 0:
                    raise ValueError(
                        f"heights are not strictly folded inside facet "
                        f"{carriers[ci]} near vertex {pt}"
                    )
            else:
                raise AssertionError("vertex beyond a facet plane")
        a_o = -fplane.eval(other_xy)
        alpha = a_q - a_o
        beta = fit_q * a_o - a_q * _fit_eval(fit, other_xy)
        if alpha < 0:
            roots.append(beta / (-alpha))
        elif alpha == 0:
            if beta >= 0:
                raise ValueError(
                    f"mirror fold is not strict at cell {ci}"
                )
        else:
            raise ValueError("apexes are not mirror symmetric")

    ridge_dim = s.dim - 1
    equ_ridges = []
    for ri, verts_r in enumerate(_face_tuples(s, ridge_dim)):
        if all(sides[v] == 0 for v in verts_r):
            equ_ridges.append(ri)
    if not equ_ridges:
        raise ValueError("no equator ridges found")
    m_xy = vscale(Fraction(1, 2), vadd(q_left, q_right))
    axis = vsub(q_left, q_right)
    fold_fits = {}
    fold_walls = {}
    for ri in equ_ridges:
        verts_r = _face_tuples(s, ridge_dim)[ri]
        pts_r = [s.vertices[v] for v in verts_r]
        wall_pts = pts_r + [vadd(pts_r[0], axis)]
        wall = plane_through(wall_pts, away_from=m_xy).flipped()
        # now wall.eval(m_xy) > 0
        fit2 = affine_fit(
            wall_pts, [psi[v] for v in verts_r] + [psi[verts_r[0]]]
        )
        if fit2 is None:
            raise AssertionError("equator ridge heights are not affine")
        fold_fits[ri] = fit2
        fold_walls[ri] = wall
        amid = wall.eval(m_xy)
        fmid = _fit_eval(fit2, m_xy)
        in_ridge = set(verts_r)
        for w, pt in enumerate(s.vertices):
            if w in in_ridge:
                continue
            a2w = wall.eval(pt)
            b2w = psi[w] - _fit_eval(fit2, pt)
            if a2w > 0:
                roots.append(fmid + amid * b2w / a2w)
            elif a2w == 0:
                if b2w >= 0:
                    raise ValueError(
                        "heights are not strictly folded along the "
                        f"symmetry equator near vertex {pt}"
                    )
            else:
                raise ValueError(
                    "base polytope is not symmetric: vertex beyond an "
                    "equator wall"
                )

    h_star = max(roots) if roots else ZERO
    height = 2 * h_star if h_star > 0 else ONE
    top = max(psi)
    if height <= top:
        height = top + ONE

    apex_l = q_left + (height,)
    apex_r = q_right + (height,)
    lifted = [pt + (psi[i],) for i, pt in enumerate(s.vertices)]
    tent = convex_hull(lifted + [apex_l, apex_r])

    expected: dict[frozenset[Vec], tuple[str, int]] = {}
    left_cells = []
    right_cells = []
    for ci, vids in enumerate(s.faces(s.dim)):
        left_cell = any(sides[v] > 0 for v in vids)
        apex = apex_l if left_cell else apex_r
        key = frozenset([lifted[v] for v in vids] + [apex])
        expected[key] = ("cell", ci)
        (left_cells if left_cell else right_cells).append(ci)
    for ri in equ_ridges:
        verts_r = _face_tuples(s, ridge_dim)[ri]
        key = frozenset(
            [lifted[v] for v in verts_r] + [apex_l, apex_r]
        )
        expected[key] = ("ridge", ri)

    seen = set()
    for vs, hp in tent.facets:
        if hp.normal[-1] <= 0:
            continue
        key = frozenset(tent.vertices[v] for v in vs)
        if key not in expected:
            raise ValueError(
                f"tent has an unexpected upper facet with {len(key)} vertices"
            )
        seen.add(key)
    missing = set(expected) - seen
    if missing:
        raise ValueError(
            f"{len(missing)} expected tent facets are not facets"
        )

    spec = TentSpec(
        hyperplane=h,
        apex_left=apex_l,
        apex_right=apex_r,
        height=height,
        base=base,
    )
    return TentResult(
        polytope=tent,
        spec=spec,
        left_cells=tuple(left_cells),
        right_cells=tuple(right_cells),
        equator_ridges=tuple(equ_ridges),
    )


def _face_tuples(s: CubicalComplex, k: int) -> list[tuple[int, ...]]:
    return s.faces(k)


# -- hexhoop cubification ---------------------------------------------------


@dataclass(frozen=True)
class HexhoopResult:
    cubification: LiftedBall
    tent: TentSpec
    sphere_components: tuple[int, ...]
    extended_components: tuple[tuple[int, int], ...]


def hexhoop_cubify(
    base: LiftedBoundarySubdivision, h: Hyperplane
) -> HexhoopResult:
    """Cubify a symmetric lifted boundary without subdividing it.

    A symmetric tent is erected over the lifted boundary; the tent is cut at
    the halfway plane between its apex height and the highest boundary
    vertex.  Cells of the output ball are, per boundary cell, the drum up to
    the cut and the roof from the cut to the symmetry wall, plus one merged
    cell per equator ridge where left and right roofs meet in half-cubes.
    The ball is certified regular with the prescribed boundary, and its dual
    manifolds are matched against those of the left half of the boundary:
    each extends by a product with an interval, plus exactly two new
    (d-1)-spheres.
    """
    s = base.complex
    psi = base.heights
    d = base.polytope.dim
    for ci in range(s.n_faces(s.dim)):
        try:
            s.cube_order((s.dim, ci))
        except ValueError as e:
            raise ValueError("hexhoop needs a cubical boundary") from e

    tent = symmetric_tent(base, h)
    spec = tent.spec
    hh = spec.height
    q_l = spec.apex_left[:-1]
    q_r = spec.apex_right[:-1]
    t_cut = (hh + max(psi)) / 2

    sides = [h.side(pt) for pt in s.vertices]

    def q_image(vi: int, left: bool) -> Vec:
        apex = q_l if left else q_r
        lam = (hh - t_cut) / (hh - psi[vi])
        xy = vadd(apex, vscale(lam, vsub(s.vertices[vi], apex)))
        return xy + (t_cut,)

    def to_wall(pt3: Vec, apex_xy: Vec) -> Vec:
        e_apex = h.eval(apex_xy)
        e_pt = h.eval(pt3[:-1])
        if e_apex == e_pt:
            raise AssertionError("segment parallel to the symmetry wall")
        lam = e_apex / (e_apex - e_pt)
        if not 0 < lam < 1:
            raise AssertionError("wall intersection outside the segment")
        apex3 = apex_xy + (hh,)
        return vadd(apex3, vscale(lam, vsub(pt3, apex3)))

    qimg: dict[tuple[int, bool], Vec] = {}
    for vi, side in enumerate(sides):
        if side >= 0:
            qimg[(vi, True)] = q_image(vi, True)
        if side <= 0:
            qimg[(vi, False)] = q_image(vi, False)
    rimg: dict[tuple[int, bool], Vec] = {}
    wpt: dict[int, Vec] = {}
    for vi, side in enumerate(sides):
        if side > 0:
            rimg[(vi, True)] = to_wall(qimg[(vi, True)], q_r)
        elif side < 0:
            rimg[(vi, False)] = to_wall(qimg[(vi, False)], q_l)
        else:
            w1 = to_wall(qimg[(vi, True)], q_r)
            w2 = to_wall(qimg[(vi, False)], q_l)
            if w1 != w2:
                raise AssertionError("merged-cell tips disagree")
            wpt[vi] = w1

    b = ComplexBuilder(d)
    heights: dict[Vec, Fraction] = {}

    def place(pt3: Vec) -> int:
        xy, z = pt3[:-1], pt3[-1]
        old = heights.get(xy)
        if old is not None and old != z:
            raise AssertionError("two ball vertices project together")
        heights[xy] = z
        return b.add_vertex(xy)

    n_cells = s.n_faces(s.dim)
    for ci in range(n_cells):
        order = s.cube_order((s.dim, ci))
        left = any(sides[v] > 0 for v in order)
        bottom = [place(s.vertices[v] + (psi[v],)) for v in order]
        mid = [place(qimg[(v, left)]) for v in order]
        b.add_cube(tuple(bottom) + tuple(mid))
        top = []
        for v in order:
            if sides[v] == 0:
                top.append(place(wpt[v]))
            else:
                top.append(place(rimg[(v, left)]))
        b.add_cube(tuple(mid) + tuple(top))

    ridge_dim = s.dim - 1
    for ri in tent.equator_ridges:
        rorder = s.cube_order((ridge_dim, ri))
        k = len(rorder)
        cell = []
        for code in range(4 * k):
            vb = rorder[code % k]
            ab = code // k
            if ab == 0:
                cell.append(place(s.vertices[vb] + (psi[vb],)))
            elif ab == 1:
                cell.append(place(qimg[(vb, True)]))
            elif ab == 2:
                cell.append(place(qimg[(vb, False)]))
            else:
                cell.append(place(wpt[vb]))
        b.add_cube(tuple(cell))

    cx = b.finalize(dim=d)
    if cx.n_faces(d) != 2 * n_cells + len(tent.equator_ridges):
        raise AssertionError("hexhoop cell census mismatch")
    ball = LiftedBall(cx, tuple(heights[pt] for pt in cx.vertices))
    rep = verify_regular(ball)
    if not rep.ok:
        raise AssertionError(
            "hexhoop ball is not regular: " + "; ".join(rep.messages)
        )
    cub = verify_cubical(cx)
    if not cub.ok:
        raise AssertionError(
            "hexhoop ball is not cubical: " + "; ".join(cub.messages)
        )
    bd, bh = boundary_restriction(ball)
    want = dict(zip(s.vertices, psi))
    got = dict(zip(bd.vertices, bh))
    if want != got:
        raise AssertionError("hexhoop boundary heights differ from the base")
    want_cells = {
        frozenset(s.vertices[v] for v in vids) for vids in s.faces(s.dim)
    }
    got_cells = {
        frozenset(bd.vertices[v] for v in vids) for vids in bd.faces(bd.dim)
    }
    if want_cells != got_cells:
        raise AssertionError("hexhoop boundary cells differ from the base")

    comps = dual_manifold_components(derivative_complex(cx))
    left_keys = [
        (s.dim, ci)
        for ci in range(n_cells)
        if all(sides[v] >= 0 for v in s.faces(s.dim)[ci])
    ]
    s_left = s.subcomplex(left_keys)
    spheres = [i for i, m in enumerate(comps) if m.closed]
    opens = [i for i, m in enumerate(comps) if not m.closed]
    if len(spheres) != 2:
        raise AssertionError(
            f"expected two closed dual spheres, found {len(spheres)}"
        )
    for i in spheres:
        want_euler = 2 if (d - 1) % 2 == 0 else 0
        if comps[i].euler != want_euler or not comps[i].orientable:
            raise AssertionError("closed dual component is not a sphere")

    if d == 2:
        if len(opens) != s_left.n_faces(s_left.dim):
            raise AssertionError("dual arcs do not match left boundary cells")
        extended = tuple((oi, k) for k, oi in enumerate(opens))
    else:
        left_comps = dual_manifold_components(derivative_complex(s_left))
        if len(opens) != len(left_comps):
            raise AssertionError(
                "dual manifolds do not extend the left boundary's"
            )
        used: set[int] = set()
        extended = []
        for oi in opens:
            key = (comps[oi].euler, comps[oi].orientable)
            match = None
            for li, lm in enumerate(left_comps):
                if li in used:
                    continue
                if (lm.euler, lm.orientable) == key:
                    match = li
                    break
            if match is None:
                raise AssertionError(
                    "dual manifold extension certificate failed"
                )
            used.add(match)
            extended.append((oi, match))
        extended = tuple(extended)

    return HexhoopResult(
        cubification=ball,
        tent=spec,
        sphere_components=tuple(spheres),
        extended_components=extended,
    )
