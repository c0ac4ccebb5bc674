"""Exact convex geometry: hulls, face lattices, halfspaces, projective maps.

The hull is incremental beneath-beyond over rationals with closed visibility:
an inserted point also claims facets it is merely coplanar with, so coplanar
facets merge and non-extreme points drop out.  After any insertion that saw a
coplanarity, facet vertex sets are rebuilt from scratch (plane equations stay
authoritative), and the final vertex set is recomputed from tight-facet ranks.
The finished boundary is validated as a closed pseudomanifold, so a defective
hull raises instead of returning silently wrong data.

Inputs that are not full-dimensional are handled through an exact affine
chart; facet hyperplanes then live in chart coordinates.

Upper faces (for lifted polyhedral subdivisions) are the facets whose outward
normal has positive last coordinate.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import gcd, lcm

from .complexes import ComplexBuilder, CubicalComplex
from .rational import (
    Vec,
    affine_rank,
    hyperplane_through,
    rank,
    rat,
    solve,
    vdot,
    vsub,
)


@dataclass(frozen=True)
class Hyperplane:
    """Oriented hyperplane {x : normal . x = offset} with integer entries."""

    normal: Vec
    offset: Fraction

    @staticmethod
    def make(normal, offset) -> "Hyperplane":
        """Scale to coprime integers; orientation is preserved."""
        entries = tuple(rat(x) for x in normal) + (rat(offset),)
        mult = 1
        for x in entries:
            mult = lcm(mult, x.denominator)
        ints = [int(x * mult) for x in entries]
        g = 0
        for v in ints:
            g = gcd(g, v)
        if g > 1:
            ints = [v // g for v in ints]
        if all(v == 0 for v in ints[:-1]):
            raise ValueError("zero normal")
        return Hyperplane(
            tuple(Fraction(v) for v in ints[:-1]), Fraction(ints[-1])
        )

    def eval(self, x: Vec) -> Fraction:
        return vdot(self.normal, x) - self.offset

    def side(self, x: Vec) -> int:
        v = self.eval(x)
        return (v > 0) - (v < 0)

    def flipped(self) -> "Hyperplane":
        return Hyperplane(tuple(-a for a in self.normal), -self.offset)

    def unoriented(self) -> "Hyperplane":
        for a in self.normal:
            if a != 0:
                return self if a > 0 else self.flipped()
        return self


def plane_through(points, away_from: Vec) -> Hyperplane:
    """Hyperplane spanned by the points, oriented away from a reference point."""
    got = hyperplane_through(points)
    if got is None:
        raise ValueError("points do not span a unique hyperplane")
    h = Hyperplane(*got)
    s = h.eval(away_from)
    if s == 0:
        raise ValueError("reference point lies on the plane")
    return h.flipped() if s > 0 else h


@dataclass(frozen=True)
class Chart:
    """Exact affine chart: x = origin + dirs^T u for local coordinates u."""

    origin: Vec
    dirs: tuple[Vec, ...]

    def to_local(self, x: Vec) -> Vec:
        if not self.dirs:
            if tuple(x) != self.origin:
                raise ValueError("point off the affine hull")
            return ()
        rows = list(zip(*self.dirs))  # ambient x k
        sol = solve(rows, vsub(tuple(x), self.origin))
        if sol is None:
            raise ValueError("point off the affine hull")
        return tuple(sol)

    def to_ambient(self, u: Vec) -> Vec:
        x = list(self.origin)
        for c, d in zip(u, self.dirs):
            for i, di in enumerate(d):
                x[i] += c * di
        return tuple(x)

    @property
    def is_identity(self) -> bool:
        n = len(self.origin)
        if len(self.dirs) != n or any(c != 0 for c in self.origin):
            return False
        return all(
            d[i] == (1 if i == j else 0)
            for j, d in enumerate(self.dirs)
            for i in range(n)
        )


class ConvexPolytope:
    """Vertices, facet hyperplanes (chart coords), and the full face lattice."""

    def __init__(self, ambient_dim, dim, vertices, local, chart, facets):
        self.ambient_dim = ambient_dim
        self.dim = dim
        self.vertices = vertices  # ambient coordinates of extreme points
        self.local = local  # chart coordinates, parallel to vertices
        self.chart = chart
        self.facets = facets  # list of (frozenset vids, Hyperplane in chart)
        self._faces_by_dim: dict[int, list[frozenset[int]]] | None = None
        self._ranks: dict[frozenset[int], int] = {}

    # -- lattice --------------------------------------------------------

    def _rank(self, vset: frozenset[int]) -> int:
        got = self._ranks.get(vset)
        if got is None:
            got = affine_rank([self.local[v] for v in vset])
            self._ranks[vset] = got
        return got

    def faces_by_dim(self) -> dict[int, list[frozenset[int]]]:
        if self._faces_by_dim is None:
            sets: set[frozenset[int]] = {vs for vs, _ in self.facets}
            frontier = set(sets)
            while frontier:
                nxt: set[frozenset[int]] = set()
                for a in frontier:
                    for vs, _ in self.facets:
                        b = a & vs
                        if b and b not in sets:
                            sets.add(b)
                            nxt.add(b)
                frontier = nxt
            if self.dim >= 1:
                for v in range(len(self.vertices)):
                    sets.add(frozenset([v]))
            out: dict[int, list[frozenset[int]]] = {j: [] for j in range(self.dim)}
            for vs in sets:
                out[self._rank(vs)].append(vs)
            for j in out:
                out[j].sort(key=sorted)
            self._faces_by_dim = out
        return self._faces_by_dim

    def faces(self, j: int) -> list[frozenset[int]]:
        if j == self.dim:
            return [frozenset(range(len(self.vertices)))]
        return self.faces_by_dim().get(j, [])

    def f_vector(self) -> tuple[int, ...]:
        return tuple(len(self.faces(j)) for j in range(self.dim))

    def facets_containing(self, vid: int) -> list[int]:
        return [i for i, (vs, _) in enumerate(self.facets) if vid in vs]

    def edge_cycle(self, face: frozenset[int]) -> list[int]:
        """Vertices of a 2-face in cyclic order, starting at the least vid."""
        edges = [e for e in self.faces(1) if e <= face]
        nbr: dict[int, list[int]] = {}
        for e in edges:
            a, b = sorted(e)
            nbr.setdefault(a, []).append(b)
            nbr.setdefault(b, []).append(a)
        start = min(face)
        cycle = [start, min(nbr[start])]
        while len(cycle) < len(face):
            a, b = cycle[-2], cycle[-1]
            nxt = [u for u in nbr[b] if u != a]
            if len(nxt) != 1:
                raise ValueError("face edges do not form a cycle")
            cycle.append(nxt[0])
        return cycle

    def validate_boundary(self) -> None:
        """Every ridge must lie in exactly two facets (closed boundary)."""
        if self.dim < 2:
            return
        for r in self.faces(self.dim - 2):
            n = sum(1 for vs, _ in self.facets if r <= vs)
            if n != 2:
                raise ValueError("hull boundary is not a closed pseudomanifold")

    # -- point location ---------------------------------------------------

    def interior_point(self) -> Vec:
        n = len(self.vertices)
        return tuple(sum(col) / n for col in zip(*self.vertices))

    def position(self, x: Vec) -> str:
        """'interior', 'boundary', or 'outside' relative to the polytope."""
        try:
            u = self.chart.to_local(tuple(rat(c) for c in x))
        except ValueError:
            return "outside"
        worst = None
        for _, h in self.facets:
            v = h.eval(u)
            if v > 0:
                return "outside"
            worst = v if worst is None else max(worst, v)
        if self.dim == 0:
            return "boundary"
        return "boundary" if worst == 0 else "interior"

    def contains(self, x: Vec) -> bool:
        return self.position(x) != "outside"

    # -- conversions ------------------------------------------------------

    def as_cell_into(self, builder: ComplexBuilder):
        """Register the polytope and its whole lattice as one complex cell."""
        vmap = [builder.add_vertex(p) for p in self.vertices]
        for j in range(1, self.dim):
            for vs in self.faces(j):
                vids = sorted(vmap[v] for v in vs)
                if j == 1:
                    builder.add_face(1, vids, [])
                else:
                    subs = [
                        sorted(vmap[v] for v in ss)
                        for ss in self.faces(j - 1)
                        if ss <= vs
                    ]
                    builder.add_face(j, vids, subs)
        if self.dim == 0:
            return (0, vmap[0])
        top = sorted(vmap[v] for v in range(len(self.vertices)))
        subs = [sorted(vmap[v] for v in vs) for vs in self.faces(self.dim - 1)]
        return builder.add_face(self.dim, top, subs)

    def boundary_to_complex(self) -> CubicalComplex:
        b = ComplexBuilder(self.ambient_dim)
        vmap = [b.add_vertex(p) for p in self.vertices]
        for j in range(1, self.dim):
            for vs in self.faces(j):
                vids = sorted(vmap[v] for v in vs)
                if j == 1:
                    b.add_face(1, vids, [])
                else:
                    subs = [
                        sorted(vmap[v] for v in ss)
                        for ss in self.faces(j - 1)
                        if ss <= vs
                    ]
                    b.add_face(j, vids, subs)
        return b.finalize(dim=self.dim - 1)


def _initial_simplex(local, k):
    idxs = [0]
    for i in range(1, len(local)):
        if affine_rank([local[j] for j in idxs] + [local[i]]) > len(idxs) - 1:
            idxs.append(i)
        if len(idxs) == k + 1:
            break
    return idxs


def _hull_full_dim(local, k):
    """Facet planes and active point ids for the hull of full-dim points."""
    simplex = _initial_simplex(local, k)
    centroid = tuple(
        sum(local[i][t] for i in simplex) / (k + 1) for t in range(k)
    )
    facets: list[tuple[frozenset[int], Hyperplane]] = []
    for drop in simplex:
        vids = frozenset(i for i in simplex if i != drop)
        h = plane_through([local[i] for i in vids], away_from=local[drop])
        facets.append((vids, h))
    active = set(simplex)
    for p in range(len(local)):
        if p in active:
            continue
        x = local[p]
        evals = [h.eval(x) for _, h in facets]
        if not any(e > 0 for e in evals):
            continue
        coplanar_seen = any(e == 0 for e in evals)
        visible = [f for f, e in zip(facets, evals) if e >= 0]
        invisible = [f for f, e in zip(facets, evals) if e < 0]
        horizon: set[frozenset[int]] = set()
        for fv, _ in visible:
            for gv, _ in invisible:
                r = fv & gv
                if len(r) >= k - 1 and affine_rank([local[i] for i in r]) == k - 2:
                    horizon.add(r)
        new: dict[Hyperplane, set[int]] = {}
        for r in horizon:
            h = plane_through([local[i] for i in r] + [x], away_from=centroid)
            new.setdefault(h, set()).update(r)
            new[h].add(p)
        active.add(p)
        facets = invisible + [
            (frozenset(vs), h)
            for h, vs in sorted(new.items(), key=lambda kv: sorted(kv[1]))
        ]
        if coplanar_seen:
            # coplanar deletions can starve facet vertex sets; planes are
            # authoritative, so rebuild the incidences from the active points
            facets = [
                (frozenset(q for q in active if h.eval(local[q]) == 0), h)
                for _, h in facets
            ]
    return facets, active


def convex_hull(points) -> ConvexPolytope:
    return convex_hull_with_map(points)[0]


def convex_hull_with_map(points) -> tuple[ConvexPolytope, list[int | None]]:
    """Hull plus a map from each input index to its hull vertex id (or None)."""
    pts = [tuple(rat(x) for x in p) for p in points]
    if not pts:
        raise ValueError("empty point set")
    ambient = len(pts[0])
    uniq: list[Vec] = []
    where: dict[Vec, int] = {}
    for p in pts:
        if p not in where:
            where[p] = len(uniq)
            uniq.append(p)

    basis = [uniq[0]]
    for p in uniq[1:]:
        if affine_rank(basis + [p]) > len(basis) - 1:
            basis.append(p)
        if len(basis) == ambient + 1:
            break
    k = len(basis) - 1

    if k == ambient:
        chart = Chart(
            tuple(Fraction(0) for _ in range(ambient)),
            tuple(
                tuple(Fraction(1 if i == j else 0) for i in range(ambient))
                for j in range(ambient)
            ),
        )
        local = uniq
    else:
        chart = Chart(basis[0], tuple(vsub(b, basis[0]) for b in basis[1:]))
        local = [chart.to_local(p) for p in uniq]

    if k == 0:
        poly = ConvexPolytope(ambient, 0, (uniq[0],), ((),), chart, [])
        return poly, [0 for _ in pts]

    if k == 1:
        vals = [(q[0], i) for i, q in enumerate(local)]
        lo, hi = min(vals)[1], max(vals)[1]
        keep = [lo, hi]
        planes = [
            Hyperplane.make((-1,), -local[lo][0]),
            Hyperplane.make((1,), local[hi][0]),
        ]
    else:
        raw, active = _hull_full_dim(local, k)
        planes = []
        seen: set[Hyperplane] = set()
        for _, h in raw:
            if h not in seen:
                seen.add(h)
                planes.append(h)
        tight = {
            i: [j for j, h in enumerate(planes) if h.eval(local[i]) == 0]
            for i in active
        }
        keep = sorted(
            i
            for i in active
            if rank([planes[j].normal for j in tight[i]]) == k
        )

    remap = {old: new for new, old in enumerate(keep)}
    vertices = tuple(uniq[i] for i in keep)
    loc = tuple(local[i] for i in keep)
    facets = [
        (frozenset(remap[i] for i in keep if h.eval(local[i]) == 0), h)
        for h in planes
    ]
    for q in local:
        if any(h.eval(q) > 0 for h in planes):
            raise AssertionError("hull construction failed: point escapes hull")
    poly = ConvexPolytope(ambient, k, vertices, loc, chart, facets)
    poly.validate_boundary()
    return poly, [remap.get(where[p]) for p in pts]


def cone_hull(apex, points) -> ConvexPolytope:
    """Hull of an apex together with a point set."""
    return convex_hull([tuple(rat(x) for x in apex)] + [tuple(p) for p in points])


def upper_faces(points):
    """Facets of conv(points) with outward normal positive in the last axis.

    Returns (polytope, upper) where upper lists the facets as sorted tuples
    of input indices.  Raises if some input point is not a hull vertex, since
    lifted subdivisions require every lifted point to be extreme.
    """
    pts = [tuple(rat(x) for x in p) for p in points]
    if len(set(pts)) != len(pts):
        raise ValueError("duplicate lifted points")
    poly, vmap = convex_hull_with_map(pts)
    if poly.dim != len(pts[0]):
        raise ValueError("lifted points are not full-dimensional")
    if any(m is None for m in vmap):
        raise ValueError("some lifted point is not a vertex of the hull")
    back = {m: i for i, m in enumerate(vmap)}
    upper = []
    for vs, h in poly.facets:
        if h.normal[-1] > 0:
            upper.append(tuple(sorted(back[v] for v in vs)))
    return poly, sorted(upper)


def halfspace_intersection(halfspaces, ambient_dim: int) -> ConvexPolytope:
    """Bounded full-dimensional intersection of halfspaces {x : n.x <= c}.

    Vertex candidates come from d-subsets of the defining hyperplanes, so
    this is intended for small systems.  Raises if the region is empty,
    unbounded, or not full-dimensional.
    """
    hs = [Hyperplane.make(n, c) for n, c in halfspaces]
    cand: set[Vec] = set()
    for sub in combinations(hs, ambient_dim):
        rows = [h.normal for h in sub]
        if rank(rows) < ambient_dim:
            continue
        x = solve(rows, [h.offset for h in sub])
        if x is None:
            continue
        x = tuple(x)
        if all(h.eval(x) <= 0 for h in hs):
            cand.add(x)
    if not cand:
        raise ValueError("empty halfspace intersection")
    poly = convex_hull(sorted(cand))
    if poly.dim != ambient_dim:
        raise ValueError("halfspace intersection is not full-dimensional")
    inputs = {h.unoriented() for h in hs}
    for _, h in poly.facets:
        if h.unoriented() not in inputs:
            raise ValueError("halfspace intersection is unbounded")
    return poly


def apply_projective(matrix, points):
    """Apply a homogeneous (n+1)x(n+1) matrix to points; the denominator row
    must stay positive on every point."""
    mat = [[rat(x) for x in row] for row in matrix]
    n = len(mat) - 1
    out = []
    for p in points:
        hom = tuple(rat(x) for x in p) + (Fraction(1),)
        if len(hom) != n + 1:
            raise ValueError("point dimension does not match the matrix")
        img = [sum(mat[i][j] * hom[j] for j in range(n + 1)) for i in range(n + 1)]
        w = img[n]
        if w <= 0:
            raise ValueError("projective map has nonpositive denominator")
        out.append(tuple(c / w for c in img[:n]))
    return out


def vertex_is_extreme(point, others) -> bool:
    """Whether the point is a vertex of conv({point} union others)."""
    _, vmap = convex_hull_with_map([tuple(rat(x) for x in point)] + list(others))
    return vmap[0] is not None
