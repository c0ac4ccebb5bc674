"""Lifted polytopal balls: exact heights, fold checks, patching, products.

A lifted ball is a pure d-complex in R^d together with one rational height
per vertex such that the heights are affine on every top cell and strictly
concavely folded across every interior ridge, over a convex support.  These
three local conditions certify that the complex is exactly the upper-face
subdivision induced by its own heights; `regular_via_hull` re-derives that
subdivision from a convex hull and is kept as an independent cross-check for
objects small enough to hull.

`convexify` applies the viewpoint transform
    (x, y) -> (lam * x, lam * y) / (lam - y)
to the lifted graph.  The transform is projective with positive denominator
on the lifted body, so supports stay convex; a fold certificate is checked
exactly for the produced lam and lam doubles until the boundary folds come
out strict.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

from .complexes import ComplexBuilder, CubicalComplex
from .geometry import convex_hull, plane_through, upper_faces
from .rational import Vec, affine_fit, rat, vdot

AffineFn = tuple[Vec, Fraction]  # x -> normal . x + offset


def _fit_eval(fit: AffineFn, x: Vec) -> Fraction:
    n, c = fit
    return vdot(n, x) + c


@dataclass
class LiftedBall:
    complex: CubicalComplex
    heights: tuple[Fraction, ...]

    def __post_init__(self):
        self.heights = tuple(rat(h) for h in self.heights)
        if len(self.heights) != len(self.complex.vertices):
            raise ValueError("one height per vertex required")
        self._fits: dict[int, AffineFn | None] = {}

    def cell_fit(self, i: int) -> AffineFn | None:
        """Affine function matching the heights on top cell i, if any."""
        if i not in self._fits:
            vids = self.complex.faces(self.complex.dim)[i]
            pts = [self.complex.vertices[v] for v in vids]
            vals = [self.heights[v] for v in vids]
            self._fits[i] = affine_fit(pts, vals)
        return self._fits[i]

    def lifted_points(self) -> list[Vec]:
        return [
            p + (h,) for p, h in zip(self.complex.vertices, self.heights)
        ]


@dataclass
class RegularityReport:
    ok: bool
    messages: list[str]


def _ridge_fold(ball: LiftedBall, c1: int, c2: int) -> str:
    """'strict', 'flat', or 'convex' for the fold between two top cells."""
    f1, f2 = ball.cell_fit(c1), ball.cell_fit(c2)
    d = ball.complex.dim
    diff_n = tuple(a - b for a, b in zip(f1[0], f2[0]))
    diff_c = f1[1] - f2[1]
    if all(a == 0 for a in diff_n) and diff_c == 0:
        return "flat"
    vals = [
        vdot(diff_n, ball.complex.vertices[v]) + diff_c
        for v in ball.complex.faces(d)[c2]
    ]
    if any(v < 0 for v in vals):
        return "convex"
    return "strict" if any(v > 0 for v in vals) else "flat"


def verify_regular(ball: LiftedBall, check_support: bool = True) -> RegularityReport:
    """Certify heights affine per cell, strict interior folds, convex support."""
    c = ball.complex
    d = c.dim
    msgs: list[str] = []
    for i in range(c.n_faces(d)):
        if ball.cell_fit(i) is None:
            msgs.append(f"heights are not affine on cell {i}")
    if msgs:
        return RegularityReport(False, msgs[:20])
    for r, cof in enumerate(c.cofaces(d - 1)):
        if len(cof) > 2:
            msgs.append(f"ridge {r} lies in {len(cof)} cells")
        elif len(cof) == 2:
            kind = _ridge_fold(ball, cof[0], cof[1])
            if kind != "strict":
                msgs.append(f"{kind} fold at interior ridge {r}")
    if check_support and not msgs:
        hull = convex_hull(c.vertices)
        if hull.dim != d:
            msgs.append("support is not full-dimensional")
        else:
            tight: list[set[int]] = [set() for _ in range(len(c.vertices))]
            for j, (_, h) in enumerate(hull.facets):
                for v, p in enumerate(c.vertices):
                    if h.eval(p) == 0:
                        tight[v].add(j)
            for bi in c.boundary_faces():
                vids = c.faces(d - 1)[bi]
                common = set.intersection(*(tight[v] for v in vids))
                if not common:
                    msgs.append(
                        f"boundary face {bi} is not on the support hull"
                    )
    return RegularityReport(not msgs, msgs[:20])


def regular_via_hull(ball: LiftedBall) -> bool:
    """Exact definition: cells must equal the upper faces of the lifted hull."""
    c = ball.complex
    cells = {frozenset(f) for f in c.faces(c.dim)}
    if convex_hull(ball.lifted_points()).dim == c.dim:
        # flat lift: regular only as the trivial one-cell subdivision
        return cells == {frozenset(range(len(c.vertices)))}
    try:
        _, upper = upper_faces(ball.lifted_points())
    except ValueError:
        return False
    return cells == {frozenset(f) for f in upper}


# -- products and piles --------------------------------------------------


def product(b1: LiftedBall, b2: LiftedBall) -> LiftedBall:
    """Product ball: cells are products, heights add coordinate-wise."""
    c1, c2 = b1.complex, b2.complex
    b = ComplexBuilder(c1.ambient_dim + c2.ambient_dim)
    vid = {}
    by_vid: dict[int, Fraction] = {}
    for i, p in enumerate(c1.vertices):
        for j, q in enumerate(c2.vertices):
            v = b.add_vertex(p + q)
            if v in by_vid:
                raise ValueError("product identified two distinct vertices")
            vid[(i, j)] = v
            by_vid[v] = b1.heights[i] + b2.heights[j]

    def pair_vset(vs1, vs2):
        return sorted(vid[(a, bb)] for a in vs1 for bb in vs2)

    dim = c1.dim + c2.dim
    for t in range(1, dim + 1):
        for k1 in range(max(0, t - c2.dim), min(c1.dim, t) + 1):
            k2 = t - k1
            for i1, a in enumerate(c1.faces(k1)):
                for i2, bb in enumerate(c2.faces(k2)):
                    subs = []
                    if k1 >= 1:
                        for s in c1.subface_ids((k1, i1)):
                            sa = c1.face((k1 - 1, s)) if k1 > 1 else (s,)
                            subs.append(pair_vset(sa, bb))
                    if k2 >= 1:
                        for s in c2.subface_ids((k2, i2)):
                            sb = c2.face((k2 - 1, s)) if k2 > 1 else (s,)
                            subs.append(pair_vset(a, sb))
                    b.add_face(t, pair_vset(a, bb), subs)
    cx = b.finalize(dim=dim)
    return LiftedBall(cx, tuple(by_vid[v] for v in range(len(cx.vertices))))


def interval_ball(length: int) -> LiftedBall:
    """The segment [0, length] split into unit edges, lifted by v(length-v)."""
    if length < 1:
        raise ValueError("length must be at least 1")
    b = ComplexBuilder(1)
    vids = [b.add_vertex((Fraction(i),)) for i in range(length + 1)]
    for i in range(length):
        b.add_cube((vids[i], vids[i + 1]))
    heights = tuple(Fraction(i * (length - i)) for i in range(length + 1))
    return LiftedBall(b.finalize(dim=1), heights)


def pile_of_cubes(lengths) -> LiftedBall:
    """Grid of unit cubes over prod [0, l_i] with the separable strict lift."""
    ls = [int(x) for x in lengths]
    if not ls:
        raise ValueError("need at least one side length")
    return reduce(product, (interval_ball(l) for l in ls))


# -- patching --------------------------------------------------------------


def register_complex(b: ComplexBuilder, c: CubicalComplex) -> list[int]:
    """Copy a whole complex into a builder; returns the vertex id map."""
    vmap = [b.add_vertex(p) for p in c.vertices]
    for k in range(1, c.dim + 1):
        for i, vids in enumerate(c.faces(k)):
            mapped = sorted(vmap[v] for v in vids)
            if k == 1:
                b.add_face(1, mapped, [])
            else:
                subs = [
                    sorted(vmap[v] for v in (c.face((k - 1, s)) if k > 1 else ()))
                    for s in c.subface_ids((k, i))
                ]
                b.add_face(k, mapped, subs)
    return vmap


def patch(
    outer: LiftedBall,
    replacements: dict[int, LiftedBall],
    eps: Fraction | None = None,
) -> LiftedBall:
    """Replace top cells of a regular ball by finer regular balls.

    Each replacement must fill its cell exactly, and replacements must agree
    on shared boundary faces (vertices, faces, and heights).  The returned
    heights are g + eps * h, where g extends the outer lift affinely on each
    cell, h collects the replacement lifts, and eps > 0 is computed exactly
    from the fold constraints so that every interior ridge stays strict.  A
    caller-supplied eps is validated against the same constraints; the value
    in effect is recorded on the result as `patch_eps`.
    """
    oc = outer.complex
    d = oc.dim
    b = ComplexBuilder(oc.ambient_dim)
    gmap: dict[int, Fraction] = {}
    hmap: dict[int, Fraction] = {}

    def put(vid: int, g: Fraction, h: Fraction):
        if vid in gmap and gmap[vid] != g:
            raise ValueError(
                "replacement vertex lies outside its cell "
                "(outer lift disagrees between cells)"
            )
        if vid in hmap and hmap[vid] != h:
            raise ValueError("replacement heights disagree on a shared face")
        gmap[vid] = g
        hmap[vid] = h

    for i in range(oc.n_faces(d)):
        fit = outer.cell_fit(i)
        if fit is None:
            raise ValueError("outer ball is not lifted (cell not affine)")
        if i in replacements:
            rb = replacements[i]
            if rb.complex.dim != d:
                raise ValueError("replacement dimension mismatch")
            cell_pts = {oc.vertices[v] for v in oc.faces(d)[i]}
            if not cell_pts <= set(rb.complex.vertices):
                raise ValueError("replacement does not contain the cell corners")
            vmap = register_complex(b, rb.complex)
            for v, nv in enumerate(vmap):
                put(nv, _fit_eval(fit, rb.complex.vertices[v]), rb.heights[v])
        else:
            sub = oc.subcomplex([(d, i)])
            vmap = register_complex(b, sub)
            for v, nv in enumerate(vmap):
                put(nv, _fit_eval(fit, sub.vertices[v]), Fraction(0))

    cx = b.finalize(dim=d)
    g = tuple(gmap[v] for v in range(len(cx.vertices)))
    h = tuple(hmap[v] for v in range(len(cx.vertices)))
    gball = LiftedBall(cx, g)
    hball = LiftedBall(cx, h)

    eps_bound: Fraction | None = None
    for r, cof in enumerate(cx.cofaces(d - 1)):
        if len(cof) != 2:
            continue
        for c1, c2 in ((cof[0], cof[1]), (cof[1], cof[0])):
            gf1, gf2 = gball.cell_fit(c1), gball.cell_fit(c2)
            hf1, hf2 = hball.cell_fit(c1), hball.cell_fit(c2)
            if None in (gf1, gf2, hf1, hf2):
                raise ValueError("patch produced a non-affine cell")
            for v in cx.faces(d)[c2]:
                x = cx.vertices[v]
                alpha = _fit_eval(gf1, x) - _fit_eval(gf2, x)
                beta = _fit_eval(hf1, x) - _fit_eval(hf2, x)
                if alpha < 0:
                    raise ValueError("outer ball has a convex fold")
                if alpha == 0:
                    if beta < 0:
                        raise ValueError(
                            "replacement fold is convex inside a cell"
                        )
                    continue
                if beta < 0:
                    bound = alpha / (-beta)
                    if eps_bound is None or bound < eps_bound:
                        eps_bound = bound
    if eps is None:
        eps = Fraction(1) if eps_bound is None else min(Fraction(1), eps_bound / 2)
    else:
        eps = rat(eps)
        if eps <= 0 or (eps_bound is not None and eps >= eps_bound):
            raise ValueError("requested eps violates the fold constraints")

    out = LiftedBall(cx, tuple(gv + eps * hv for gv, hv in zip(g, h)))
    rep = verify_regular(out, check_support=False)
    if not rep.ok:
        raise ValueError("patched ball is not regular: " + "; ".join(rep.messages))
    out.patch_eps = eps
    return out


# -- projective convexification -------------------------------------------


@dataclass
class Convexified:
    ball: LiftedBall
    lam: Fraction
    shift: Vec  # subtracted from the input coordinates before transforming


def _transform(ball: LiftedBall, shift: Vec, lam: Fraction) -> LiftedBall:
    pts = []
    hts = []
    for p, h in zip(ball.complex.vertices, ball.heights):
        q = tuple(a - s for a, s in zip(p, shift))
        den = lam - h
        if den <= 0:
            raise ValueError("viewpoint is not above the lifted graph")
        pts.append(tuple(lam * a / den for a in q))
        hts.append(lam * h / den)
    return LiftedBall(ball.complex.replace_vertices(pts), tuple(hts))


def _boundary_pairs(c: CubicalComplex):
    """Pairs of boundary (d-1)-faces sharing a (d-2)-face."""
    d = c.dim
    bset = set(c.boundary_faces())
    shared: dict[int, list[int]] = {}
    for bi in bset:
        for s in c.subface_ids((d - 1, bi)):
            shared.setdefault(s, []).append(bi)
    for s, faces in shared.items():
        if len(faces) == 2:
            yield faces[0], faces[1]


def support_folds_strict(ball: LiftedBall) -> bool:
    """Adjacent boundary faces must span distinct, strictly folded planes."""
    c = ball.complex
    d = c.dim
    n = len(c.vertices)
    inner = tuple(sum(col) / n for col in zip(*c.vertices))
    for b1, b2 in _boundary_pairs(c):
        pts1 = [c.vertices[v] for v in c.faces(d - 1)[b1]]
        try:
            h1 = plane_through(pts1, away_from=inner)
        except ValueError:
            return False
        vals = [h1.eval(c.vertices[v]) for v in c.faces(d - 1)[b2]]
        if any(v > 0 for v in vals) or all(v == 0 for v in vals):
            return False
    return True


def in_convex_position(ball: LiftedBall) -> RegularityReport:
    """Strict interior folds plus strictly folded support boundary."""
    rep = verify_regular(ball, check_support=False)
    if not rep.ok:
        return rep
    if not support_folds_strict(ball):
        return RegularityReport(False, ["support boundary folds are not strict"])
    return RegularityReport(True, [])


def _barycenter(c: CubicalComplex) -> Vec:
    n = len(c.vertices)
    return tuple(sum(col) / n for col in zip(*c.vertices))


def _initial_lambda(balls) -> Fraction:
    m = max(max(abs(h) for h in b.heights) for b in balls)
    return 2 * (1 + m)


def convexify(ball: LiftedBall, max_doublings: int = 64) -> Convexified:
    """Transform a regular ball into convex position (Lemma-style viewpoint
    map); lam doubles until the exact fold certificate passes."""
    shift = _barycenter(ball.complex)
    lam = _initial_lambda([ball])
    for _ in range(max_doublings):
        out = _transform(ball, shift, lam)
        if in_convex_position(out).ok:
            return Convexified(out, lam, shift)
        lam *= 2
    raise ValueError("convexification did not stabilize; is the boundary "
                     "lifting strictly folded inside support facets?")


def boundary_restriction(ball: LiftedBall) -> tuple[CubicalComplex, tuple]:
    """Boundary complex with the heights restricted to it."""
    c = ball.complex
    bd = c.subcomplex([(c.dim - 1, i) for i in c.boundary_faces()])
    hmap = {p: h for p, h in zip(c.vertices, ball.heights)}
    return bd, tuple(hmap[p] for p in bd.vertices)


def convexify_pair(
    b1: LiftedBall, b2: LiftedBall, max_doublings: int = 64
) -> tuple[Convexified, Convexified]:
    """Convexify two balls with one shared viewpoint.

    The balls must have identical boundary complexes and boundary heights;
    the shared boundary then maps identically under both transforms.
    """
    bd1, hh1 = boundary_restriction(b1)
    bd2, hh2 = boundary_restriction(b2)
    if dict(zip(bd1.vertices, hh1)) != dict(zip(bd2.vertices, hh2)):
        raise ValueError("balls do not share boundary vertices and heights")

    def face_coords(bd):
        return {
            frozenset(bd.vertices[v] for v in f) for f in bd.faces(bd.dim)
        }

    if face_coords(bd1) != face_coords(bd2):
        raise ValueError("balls do not share the boundary complex")
    shift = _barycenter(b1.complex)
    lam = _initial_lambda([b1, b2])
    for _ in range(max_doublings):
        o1 = _transform(b1, shift, lam)
        o2 = _transform(b2, shift, lam)
        if in_convex_position(o1).ok and in_convex_position(o2).ok:
            return Convexified(o1, lam, shift), Convexified(o2, lam, shift)
        lam *= 2
    raise ValueError("simultaneous convexification did not stabilize")


@dataclass
class LiftedBoundarySubdivision:
    """A polytopal subdivision of the boundary of a polytope, with heights.

    Cells are (d-1)-dimensional, each contained in one facet of the polytope,
    and the heights restrict to a lifting function on every facet: affine per
    cell and strictly folded across ridges interior to the facet.  Folds
    across polytope ridges are unconstrained.
    """

    polytope: object
    complex: CubicalComplex
    heights: tuple[Fraction, ...]

    def __post_init__(self):
        self.heights = tuple(rat(h) for h in self.heights)
        if len(self.heights) != len(self.complex.vertices):
            raise ValueError("one height per vertex required")

    def cell_facets(self) -> list[int]:
        """For each cell, the index of the polytope facet containing it."""
        p = self.polytope
        s = self.complex
        tight: list[set[int]] = []
        for v in s.vertices:
            u = p.chart.to_local(v)
            tight.append(
                {j for j, (_, h) in enumerate(p.facets) if h.eval(u) == 0}
            )
        out = []
        for vids in s.faces(s.dim):
            common = set.intersection(*(tight[v] for v in vids))
            if len(common) != 1:
                raise ValueError(
                    f"cell {vids} lies in {len(common)} facets of the polytope"
                )
        # second pass keeps error reporting cheap on the common path
        for vids in s.faces(s.dim):
            common = set.intersection(*(tight[v] for v in vids))
            out.append(min(common))
        return out

    def cell_fit(self, i: int):
        vids = self.complex.faces(self.complex.dim)[i]
        pts = [self.complex.vertices[v] for v in vids]
        vals = [self.heights[v] for v in vids]
        return affine_fit(pts, vals)


def verify_boundary_subdivision(bs: LiftedBoundarySubdivision) -> RegularityReport:
    """Certify a lifted boundary subdivision.

    Checks per-cell affine heights, exactly one carrier facet per cell with
    every facet carrying at least one cell, strict folds between cells of a
    common facet, and boundary faces of each facet's subcomplex lying on the
    polytope's ridges.
    """
    p = bs.polytope
    s = bs.complex
    msgs: list[str] = []
    if s.dim != p.dim - 1:
        return RegularityReport(False, ["subdivision has the wrong dimension"])
    try:
        carriers = bs.cell_facets()
    except ValueError as e:
        return RegularityReport(False, [str(e)])
    if set(carriers) != set(range(len(p.facets))):
        msgs.append("some polytope facet carries no cell")
    fits = []
    for i in range(s.n_faces(s.dim)):
        fit = bs.cell_fit(i)
        if fit is None:
            msgs.append(f"heights are not affine on cell {i}")
        fits.append(fit)
    if msgs:
        return RegularityReport(False, msgs[:20])
    d = s.dim
    for r, cof in enumerate(s.cofaces(d - 1)):
        if len(cof) > 2:
            msgs.append(f"ridge {r} lies in {len(cof)} cells")
            continue
        if len(cof) == 2 and carriers[cof[0]] == carriers[cof[1]]:
            n1, c1 = fits[cof[0]]
            n2, c2 = fits[cof[1]]
            vals = [
                vdot(tuple(a - b for a, b in zip(n1, n2)), s.vertices[v])
                + (c1 - c2)
                for v in s.faces(d)[cof[1]]
            ]
            if any(v < 0 for v in vals) or not any(v > 0 for v in vals):
                msgs.append(
                    f"heights are not strictly folded at ridge {r} "
                    f"inside facet {carriers[cof[0]]}"
                )
        if len(cof) == 1:
            msgs.append(f"boundary subdivision has a free ridge {r}")
    return RegularityReport(not msgs, msgs[:20])


def trivial_boundary_subdivision(p) -> LiftedBoundarySubdivision:
    """Boundary subdivision whose cells are the facets, with zero heights."""
    c = p.boundary_to_complex()
    return LiftedBoundarySubdivision(
        polytope=p,
        complex=c,
        heights=tuple(Fraction(0) for _ in c.vertices),
    )
