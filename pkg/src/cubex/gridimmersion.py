"""Grid immersions of closed cubical surfaces and their cubifications.

A grid immersion places the quads of a closed cubical surface onto unit
squares of the standard grid in R^3 so that multiple points look like
pairwise transversally crossing sheets.  This module classifies the nine
local vertex-star types, builds the template library of lifted balls (edge,
square, and cube templates), and assembles a regular cubical 3-ball whose
dual manifold reproduces the immersed surface.  Pairing that ball with a
cubification of the same domain that carries no surface yields, via the
lifted prism, a cubical 4-polytope with the prescribed dual manifold.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache

from .complexes import (
    ComplexBuilder,
    CubicalComplex,
    boundary_complex,
    verify_cubical,
)
from .constructions import hexhoop_cubify, lifted_prism_two_balls, prism_f_vector
from .dualmanifolds import (
    DualManifold,
    derivative_complex,
    dual_manifold_components,
    immersion_report,
)
from .geometry import ConvexPolytope, Hyperplane, convex_hull
from .lifting import (
    LiftedBall,
    LiftedBoundarySubdivision,
    boundary_restriction,
    patch,
    pile_of_cubes,
    product,
    verify_regular,
)
from .rational import Vec, rat

HALF = Fraction(1, 2)


# -- vertex stars -----------------------------------------------------------
#
# The local picture of an immersed surface at a grid vertex is a union of
# quarter-squares.  A quarter lies in one coordinate plane through the
# vertex and occupies one sign quadrant of the two remaining axes; it is
# encoded as (axis, (sign, sign)) with the signs on axes (axis+1)%3 and
# (axis+2)%3.

Quarter = tuple[int, tuple[int, int]]


class VertexStarType(Enum):
    """The nine local configurations of a grid-immersed surface."""

    single3 = "single3"
    single4a = "single4a"
    single4b = "single4b"
    single5 = "single5"
    single6a = "single6a"
    single6b = "single6b"
    double8a = "double8a"
    double8b = "double8b"
    triple12 = "triple12"


SignedPerm = tuple[tuple[int, int, int], tuple[int, int, int]]

SIGNED_PERMS: tuple[SignedPerm, ...] = tuple(
    (perm, signs)
    for perm in itertools.permutations((0, 1, 2))
    for signs in itertools.product((1, -1), repeat=3)
)


def apply_signed_perm(g: SignedPerm, x) -> tuple:
    perm, signs = g
    y = [None, None, None]
    for i in range(3):
        y[perm[i]] = signs[perm[i]] * x[i]
    return tuple(y)


def _map_quarter(g: SignedPerm, q: Quarter) -> Quarter:
    a, (s1, s2) = q
    t = [0, 0, 0]
    t[(a + 1) % 3] = s1
    t[(a + 2) % 3] = s2
    perm, signs = g
    u = [0, 0, 0]
    for i in range(3):
        u[perm[i]] = signs[perm[i]] * t[i]
    a2 = perm[a]
    return (a2, (u[(a2 + 1) % 3], u[(a2 + 2) % 3]))


def map_config(g: SignedPerm, config) -> frozenset:
    return frozenset(_map_quarter(g, q) for q in config)


def _quarter_poles(q: Quarter) -> tuple[tuple[int, int], tuple[int, int]]:
    """The two half-edge directions contained in the quarter."""
    a, (s1, s2) = q
    return ((a + 1) % 3, s1), ((a + 2) % 3, s2)


def _quarter_sign(q: Quarter, axis: int) -> int:
    a, (s1, s2) = q
    if axis == (a + 1) % 3:
        return s1
    if axis == (a + 2) % 3:
        return s2
    return 0


def _flat(quarters) -> bool:
    return len({a for a, _ in quarters}) == 1


def _germ_is_embedded_disk(quarters: frozenset) -> bool:
    """Quarters of one sheet germ must trace a single cycle of directions."""
    if len(quarters) < 3:
        return False
    deg: dict[tuple[int, int], list[Quarter]] = {}
    for q in quarters:
        for p in _quarter_poles(q):
            deg.setdefault(p, []).append(q)
    if any(len(qs) != 2 for qs in deg.values()):
        return False
    # 2-regular and connected means a single cycle
    start = next(iter(quarters))
    seen = {start}
    frontier = [start]
    while frontier:
        q = frontier.pop()
        for p in _quarter_poles(q):
            for q2 in deg[p]:
                if q2 not in seen:
                    seen.add(q2)
                    frontier.append(q2)
    return seen == set(quarters)


def _pair_crossing_rays(g1: frozenset, g2: frozenset) -> set[tuple[int, int]]:
    """Half-edge directions along which two sheet germs meet."""
    rays: set[tuple[int, int]] = set()
    for q1 in g1:
        for q2 in g2:
            a1, a2 = q1[0], q2[0]
            if a1 == a2:
                continue
            axis = 3 - a1 - a2
            s1 = _quarter_sign(q1, axis)
            s2 = _quarter_sign(q2, axis)
            if s1 == s2:
                rays.add((axis, s1))
    return rays


def _validate_germs(germs: list[frozenset]) -> None:
    """Check a partition into sheet germs for normal crossing."""
    if not 1 <= len(germs) <= 3:
        raise ValueError(f"{len(germs)} sheets through one vertex")
    seen: set[Quarter] = set()
    for g in germs:
        if seen & g:
            raise ValueError("sheets share a quarter-square")
        seen |= g
        if not _germ_is_embedded_disk(g):
            raise ValueError("sheet germ is not an embedded disk")
    deg: dict[tuple[int, int], list[tuple[int, frozenset]]] = {}
    for g in germs:
        for q in g:
            for p in _quarter_poles(q):
                deg.setdefault(p, []).append((q[0], g))
    for p, users in deg.items():
        if len(users) not in (2, 4):
            raise ValueError(f"edge direction {p} lies in {len(users)} quarters")
        if len(users) == 4:
            for g in germs:
                axes = {a for a, g2 in users if g2 is g}
                here = [a for a, g2 in users if g2 is g]
                if here and (len(here) != 2 or len(axes) != 1):
                    raise ValueError(
                        "a sheet bends along a doubly covered edge direction"
                    )
    for g1, g2 in itertools.combinations(germs, 2):
        rays = _pair_crossing_rays(g1, g2)
        if len(rays) != 2:
            raise ValueError(
                f"two sheets meet along {len(rays)} rays instead of a curve"
            )


def _decompose_germs(quarters: frozenset) -> list[frozenset]:
    """Split a quarter set into sheet germs (straight through double edges)."""
    deg: dict[tuple[int, int], list[Quarter]] = {}
    for q in quarters:
        for p in _quarter_poles(q):
            deg.setdefault(p, []).append(q)
    parent: dict[Quarter, Quarter] = {q: q for q in quarters}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[rx] = ry

    for p, qs in deg.items():
        if len(qs) == 2:
            union(qs[0], qs[1])
        elif len(qs) == 4:
            # sheets continue straight: quarters pair up by coordinate plane
            by_axis: dict[int, list[Quarter]] = {}
            for q in qs:
                by_axis.setdefault(q[0], []).append(q)
            if len(by_axis) != 2 or any(len(v) != 2 for v in by_axis.values()):
                raise ValueError("invalid doubly covered edge direction")
            for pair in by_axis.values():
                union(pair[0], pair[1])
        else:
            raise ValueError(f"edge direction {p} lies in {len(qs)} quarters")
    groups: dict[Quarter, set[Quarter]] = {}
    for q in quarters:
        groups.setdefault(find(q), set()).add(q)
    return [frozenset(g) for g in groups.values()]


def _all_quarters(axis: int) -> frozenset:
    return frozenset((axis, (s1, s2)) for s1 in (1, -1) for s2 in (1, -1))


CANONICAL_GERMS: dict[VertexStarType, tuple[frozenset, ...]] = {
    VertexStarType.single3: (
        frozenset({(0, (1, 1)), (1, (1, 1)), (2, (1, 1))}),
    ),
    VertexStarType.single4a: (_all_quarters(0),),
    VertexStarType.single4b: (
        frozenset({(0, (1, 1)), (0, (-1, 1)), (2, (1, 1)), (2, (1, -1))}),
    ),
    VertexStarType.single5: (
        frozenset(
            {(0, (1, 1)), (0, (-1, 1)), (0, (1, -1)), (2, (-1, -1)), (1, (-1, -1))}
        ),
    ),
    VertexStarType.single6a: (
        frozenset(
            {
                (2, (1, 1)),
                (0, (1, 1)),
                (1, (-1, 1)),
                (2, (-1, -1)),
                (0, (-1, -1)),
                (1, (1, -1)),
            }
        ),
    ),
    VertexStarType.single6b: (
        frozenset(
            {
                (2, (1, 1)),
                (0, (1, 1)),
                (0, (-1, 1)),
                (2, (-1, -1)),
                (1, (-1, -1)),
                (1, (-1, 1)),
            }
        ),
    ),
    VertexStarType.double8a: (_all_quarters(0), _all_quarters(1)),
    VertexStarType.double8b: (
        _all_quarters(0),
        frozenset({(1, (1, 1)), (1, (1, -1)), (2, (1, 1)), (2, (-1, 1))}),
    ),
    VertexStarType.triple12: (_all_quarters(0), _all_quarters(1), _all_quarters(2)),
}

CANONICAL_CONFIGS: dict[VertexStarType, frozenset] = {
    t: frozenset().union(*germs) for t, germs in CANONICAL_GERMS.items()
}


def _match_type(config: frozenset, t: VertexStarType) -> SignedPerm | None:
    canon = CANONICAL_CONFIGS[t]
    if len(canon) != len(config):
        return None
    for g in SIGNED_PERMS:
        if map_config(g, canon) == config:
            return g
    return None


def _classify_germs(germs: list[frozenset]) -> VertexStarType:
    """Name the star type of a validated germ partition."""
    _validate_germs(germs)
    if len(germs) == 1:
        g = germs[0]
        n = len(g)
        if n == 3:
            t = VertexStarType.single3
        elif n == 4:
            t = VertexStarType.single4a if _flat(g) else VertexStarType.single4b
        elif n == 5:
            t = VertexStarType.single5
        elif n == 6:
            if _match_type(g, VertexStarType.single6a) is not None:
                return VertexStarType.single6a
            t = VertexStarType.single6b
        else:
            raise ValueError(f"no vertex star has {n} quarters in one sheet")
    elif len(germs) == 2:
        flats = sorted(_flat(g) for g in germs)
        if flats == [True, True]:
            t = VertexStarType.double8a
        elif flats == [False, True]:
            t = VertexStarType.double8b
        else:
            raise ValueError("two bent sheets cannot cross normally")
    else:
        if not all(_flat(g) for g in germs):
            raise ValueError("three sheets must all be flat planes")
        t = VertexStarType.triple12
    config = frozenset().union(*germs)
    if _match_type(config, t) is None:
        raise ValueError(f"configuration does not match the {t.value} star")
    return t


def enumerate_star_configs() -> dict[VertexStarType, list[frozenset]]:
    """All normally crossing vertex stars, grouped by type.

    Exhausts the 2^12 subsets of quarter-squares; the result partitions the
    valid ones into the nine types, which is the library's completeness
    certificate.
    """
    all_q = sorted(q for a in range(3) for q in _all_quarters(a))
    out: dict[VertexStarType, list[frozenset]] = {t: [] for t in VertexStarType}
    for mask in range(1, 1 << 12):
        config = frozenset(all_q[i] for i in range(12) if mask >> i & 1)
        try:
            germs = _decompose_germs(config)
            t = _classify_germs(germs)
        except ValueError:
            continue
        out[t].append(config)
    return out


# -- grid immersions --------------------------------------------------------


@dataclass(frozen=True)
class GridImmersion:
    """A closed cubical surface with its quads placed on unit grid squares.

    ``quads`` lists each quad of the abstract surface as a cyclic vertex
    tuple; ``vertex_images`` sends abstract vertices to integer grid points
    inside the box [0,l1]x[0,l2]x[0,l3].
    """

    pile: tuple[int, int, int]
    n_vertices: int
    quads: tuple[tuple[int, int, int, int], ...]
    vertex_images: tuple[tuple[int, int, int], ...]

    def image_square(self, qi: int) -> tuple[int, tuple[int, int, int]]:
        """Image of quad qi as (plane axis, minimal corner)."""
        pts = [self.vertex_images[v] for v in self.quads[qi]]
        lo = tuple(min(p[i] for p in pts) for i in range(3))
        axes = [i for i in range(3) if any(p[i] != lo[i] for p in pts)]
        if len(axes) != 2:
            raise ValueError(f"quad {qi} does not map onto a grid square")
        (a,) = set(range(3)) - set(axes)
        return a, lo

    def quarter_at(self, qi: int, corner: int) -> Quarter:
        """Local quarter of quad qi at one of its vertices."""
        v = self.quads[qi].index(corner)
        pts = [self.vertex_images[w] for w in self.quads[qi]]
        here = pts[v]
        a, _ = self.image_square(qi)
        b, c = (a + 1) % 3, (a + 2) % 3
        sb = 1 if any(p[b] > here[b] for p in pts) else -1
        sc = 1 if any(p[c] > here[c] for p in pts) else -1
        return (a, (sb, sc))


def _quad_edges(q) -> list[frozenset]:
    return [frozenset((q[i], q[(i + 1) % 4])) for i in range(4)]


def _check_surface(g: GridImmersion) -> None:
    n = g.n_vertices
    for q in g.quads:
        if len(set(q)) != 4 or any(not 0 <= v < n for v in q):
            raise ValueError(f"invalid quad {q}")
    edge_use: dict[frozenset, list[int]] = {}
    for qi, q in enumerate(g.quads):
        for e in _quad_edges(q):
            edge_use.setdefault(e, []).append(qi)
    for e, qs in edge_use.items():
        if len(qs) != 2:
            raise ValueError(f"edge {sorted(e)} lies in {len(qs)} quads")
    # vertex links must be single cycles
    at_vertex: dict[int, list[int]] = {}
    for qi, q in enumerate(g.quads):
        for v in set(q):
            at_vertex.setdefault(v, []).append(qi)
    for v in range(n):
        if v not in at_vertex:
            raise ValueError(f"vertex {v} lies in no quad")
        quads = at_vertex[v]
        adj: dict[int, set[int]] = {qi: set() for qi in quads}
        for qi in quads:
            q = g.quads[qi]
            i = q.index(v)
            for u in (q[(i + 1) % 4], q[(i - 1) % 4]):
                for qj in edge_use[frozenset((v, u))]:
                    if qj != qi:
                        adj[qi].add(qj)
        if any(len(s) != 2 for s in adj.values()):
            raise ValueError(f"link of vertex {v} is not a cycle")
        seen = {quads[0]}
        frontier = [quads[0]]
        while frontier:
            x = frontier.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    frontier.append(y)
        if len(seen) != len(quads):
            raise ValueError(f"link of vertex {v} is disconnected")


def _check_images(g: GridImmersion) -> None:
    for v, p in enumerate(g.vertex_images):
        if len(p) != 3 or any(not isinstance(c, int) for c in p):
            raise ValueError(f"image of vertex {v} is not an integer point")
        if any(not 0 <= p[i] <= g.pile[i] for i in range(3)):
            raise ValueError(f"image of vertex {v} leaves the bounding pile")
    squares: dict[tuple, int] = {}
    for qi, q in enumerate(g.quads):
        pts = [g.vertex_images[v] for v in q]
        d1 = tuple(pts[1][i] - pts[0][i] for i in range(3))
        d2 = tuple(pts[2][i] - pts[1][i] for i in range(3))
        d3 = tuple(pts[3][i] - pts[2][i] for i in range(3))
        units = {tuple(u) for u in itertools.permutations((1, 0, 0))} | {
            tuple(-u for u in p) for p in itertools.permutations((1, 0, 0))
        }
        if (
            d1 not in units
            or d2 not in units
            or d3 != tuple(-x for x in d1)
            or {i for i, x in enumerate(d1) if x} == {i for i, x in enumerate(d2) if x}
        ):
            raise ValueError(f"quad {qi} does not map to a unit grid square")
        key = g.image_square(qi)
        if key in squares:
            raise ValueError(
                f"quads {squares[key]} and {qi} coincide; sheets cannot overlap"
            )
        squares[key] = qi


def _preimages(g: GridImmersion) -> dict[tuple[int, int, int], list[int]]:
    out: dict[tuple[int, int, int], list[int]] = {}
    for v, p in enumerate(g.vertex_images):
        out.setdefault(p, []).append(v)
    return out


def _vertex_germs(g: GridImmersion, point) -> dict[int, frozenset]:
    """Quarter sets of the sheets through an image vertex, keyed by preimage."""
    out: dict[int, frozenset] = {}
    for w in _preimages(g).get(tuple(point), []):
        quarters = []
        for qi, q in enumerate(g.quads):
            if w in q:
                quarters.append(g.quarter_at(qi, w))
        if len(quarters) != len(set(quarters)):
            raise ValueError(f"star of vertex {w} is not immersed")
        out[w] = frozenset(quarters)
    return out


def classify_vertex_star(g: GridImmersion, point) -> list[VertexStarType]:
    """Star type(s) of the immersed surface at a grid vertex.

    All sheets through one image vertex cross pairwise, so they form a
    single cluster and the list has one composite entry.
    """
    germs = _vertex_germs(g, point)
    if not germs:
        raise ValueError(f"{tuple(point)} is not the image of a vertex")
    return [_classify_germs(list(germs.values()))]


@dataclass(frozen=True)
class LocalSymmetryReport:
    ok: bool
    offenders: tuple[tuple[tuple[int, int, int], VertexStarType], ...]


def check_locally_symmetric(g: GridImmersion) -> LocalSymmetryReport:
    """A star without a mirror plane (single6b) blocks the construction."""
    offenders = []
    for p in sorted(_preimages(g)):
        (t,) = classify_vertex_star(g, p)
        if t is VertexStarType.single6b:
            offenders.append((p, t))
    return LocalSymmetryReport(not offenders, tuple(offenders))


def star_census(g: GridImmersion) -> dict[VertexStarType, int]:
    out: dict[VertexStarType, int] = {}
    for p in _preimages(g):
        (t,) = classify_vertex_star(g, p)
        out[t] = out.get(t, 0) + 1
    return out


def surface_f_vector(g: GridImmersion) -> tuple[int, int, int]:
    edges = {e for q in g.quads for e in _quad_edges(q)}
    return (g.n_vertices, len(edges), len(g.quads))


def euler_characteristic_of_surface(g: GridImmersion) -> int:
    f0, f1, f2 = surface_f_vector(g)
    return f0 - f1 + f2


def surface_orientable(g: GridImmersion) -> bool:
    """Propagate quad orientations; a conflict certifies non-orientability."""
    edge_use: dict[frozenset, list[tuple[int, tuple[int, int]]]] = {}
    for qi, q in enumerate(g.quads):
        for i in range(4):
            e = (q[i], q[(i + 1) % 4])
            edge_use.setdefault(frozenset(e), []).append((qi, e))
    sign: dict[int, int] = {}
    for start in range(len(g.quads)):
        if start in sign:
            continue
        sign[start] = 1
        frontier = [start]
        while frontier:
            qi = frontier.pop()
            q = g.quads[qi]
            for i in range(4):
                e = (q[i], q[(i + 1) % 4])
                for qj, e2 in edge_use[frozenset(e)]:
                    if qj == qi:
                        continue
                    # coherent orientations traverse a shared edge oppositely
                    s = sign[qi] * (-1 if e2 == e else 1)
                    if qj not in sign:
                        sign[qj] = s
                        frontier.append(qj)
                    elif sign[qj] != s:
                        return False
    return True


def _image_edge_map(g: GridImmersion) -> dict[tuple, list[tuple[int, frozenset]]]:
    """Image grid edge -> [(quad, abstract edge)] covering it."""
    out: dict[tuple, list[tuple[int, frozenset]]] = {}
    for qi, q in enumerate(g.quads):
        for i in range(4):
            a, b = q[i], q[(i + 1) % 4]
            pa, pb = g.vertex_images[a], g.vertex_images[b]
            key = (tuple(min(x, y) for x, y in zip(pa, pb)),
                   tuple(max(x, y) for x, y in zip(pa, pb)))
            out.setdefault(key, []).append((qi, frozenset((a, b))))
    return out


def double_edges(g: GridImmersion) -> list[tuple]:
    """Grid edges along which two sheets cross."""
    out = []
    for key, users in _image_edge_map(g).items():
        quads = {qi for qi, _ in users}
        medges = {e for _, e in users}
        if len(medges) == 1:
            continue
        if len(medges) != 2 or len(quads) != 4:
            raise ValueError(f"edge {key} carries {len(medges)} surface edges")
        for e in medges:
            planes = {g.image_square(qi)[0] for qi, e2 in users if e2 == e}
            if len(planes) != 1:
                raise ValueError(f"a sheet bends along the double edge {key}")
        out.append(key)
    return sorted(out)


def double_curves_of_immersion(g: GridImmersion) -> list[int]:
    """Lengths of the double curves, each a closed walk of double edges."""
    dedges = set(double_edges(g))
    emap = _image_edge_map(g)
    # strand = (grid edge, frozenset of the two abstract edges over it)
    at_vertex: dict[tuple, list[tuple]] = {}
    strands = []
    for key in dedges:
        medges = frozenset(e for _, e in emap[key])
        strands.append((key, medges))
        for pt in key:
            at_vertex.setdefault(pt, []).append((key, medges))

    def continue_at(pt, key, medges):
        owners = []
        for e in medges:
            (w,) = [w for w in e if g.vertex_images[w] == pt]
            owners.append(w)
        pair = frozenset(owners)
        for key2, medges2 in at_vertex[pt]:
            if key2 == key and medges2 == medges:
                continue
            owners2 = frozenset(
                w for e in medges2 for w in e if g.vertex_images[w] == pt
            )
            if owners2 == pair:
                return (key2, medges2)
        raise ValueError(f"double curve ends at {pt}")

    seen: set[tuple] = set()
    lengths = []
    for start in strands:
        if start[0] in seen:
            continue
        length = 0
        cur = start
        pt = cur[0][0]
        while True:
            seen.add(cur[0])
            length += 1
            lo, hi = cur[0]
            pt = hi if pt == lo else lo
            cur = continue_at(pt, *cur)
            if cur[0] == start[0]:
                break
        lengths.append(length)
    return sorted(lengths)


def triple_points_of_immersion(g: GridImmersion) -> int:
    return sum(1 for p in _preimages(g) if len(_preimages(g)[p]) == 3)


def validate_immersion(g: GridImmersion) -> None:
    """Full consistency check; raises ValueError with the first defect."""
    if len(g.pile) != 3 or any(l < 1 for l in g.pile):
        raise ValueError("pile dimensions must be positive")
    if len(g.vertex_images) != g.n_vertices:
        raise ValueError("one image point per vertex required")
    if g.n_vertices == 0:
        if g.quads:
            raise ValueError("quads without vertices")
        return
    _check_surface(g)
    _check_images(g)
    for p in _preimages(g):
        classify_vertex_star(g, p)
    double_curves_of_immersion(g)
    t = triple_points_of_immersion(g)
    chi = euler_characteristic_of_surface(g)
    if (t - chi) % 2:
        raise ValueError(
            f"{t} triple points are incompatible with Euler characteristic {chi}"
        )


def grid_immersion_from_data(data: dict) -> GridImmersion:
    g = GridImmersion(
        pile=tuple(data["pile"]),
        n_vertices=data["M"]["vertices"],
        quads=tuple(tuple(q) for q in data["M"]["quads"]),
        vertex_images=tuple(tuple(p) for p in data["map"]["vertex_images"]),
    )
    validate_immersion(g)
    return g


def grid_immersion_to_data(g: GridImmersion) -> dict:
    return {
        "pile": list(g.pile),
        "M": {"vertices": g.n_vertices, "quads": [list(q) for q in g.quads]},
        "map": {"vertex_images": [list(p) for p in g.vertex_images]},
    }


def empty_immersion(l1: int, l2: int, l3: int) -> GridImmersion:
    return GridImmersion((l1, l2, l3), 0, (), ())


def cube_boundary_immersion() -> GridImmersion:
    """The boundary sphere of a unit cube, centered in a 3x3x3 pile."""
    corners = list(itertools.product((1, 2), repeat=3))
    idx = {c: i for i, c in enumerate(corners)}
    quads = []
    for axis in range(3):
        for val in (1, 2):
            face = [c for c in corners if c[axis] == val]
            o = face[0]
            b, c_ = (axis + 1) % 3, (axis + 2) % 3

            def shift(p, da, db):
                q = list(o)
                q[b] = 1 + da
                q[c_] = 1 + db
                return tuple(q)

            cyc = [shift(o, 0, 0), shift(o, 1, 0), shift(o, 1, 1), shift(o, 0, 1)]
            quads.append(tuple(idx[p] for p in cyc))
    return GridImmersion((3, 3, 3), 8, tuple(quads), tuple(corners))


# -- templates ---------------------------------------------------------------
#
# All templates are regular lifted balls over [-1/2,1/2]^k with pinned
# boundary restrictions: a plain edge is split at 0 with heights 0,1/4,0, a
# crossed edge at -1/6,1/6 with heights 0,1/6,1/6,0.  Cube templates restrict
# on each facet to the square template determined by the trace arms there,
# so instances over adjacent raw cells agree on shared faces by construction.


def _ball_from_cells(dim: int, cells) -> LiftedBall:
    """Assemble a lifted ball from (points in binary order, heights) pairs."""
    b = ComplexBuilder(dim)
    hts: dict[int, Fraction] = {}
    for pts, hs in cells:
        vids = []
        for p, h in zip(pts, hs):
            vid = b.add_vertex(p)
            h = rat(h)
            if vid in hts and hts[vid] != h:
                raise ValueError(f"conflicting heights at {p}")
            hts[vid] = h
            vids.append(vid)
        b.add_cube(tuple(vids))
    cx = b.finalize()
    return LiftedBall(cx, tuple(hts[i] for i in range(len(cx.vertices))))


def _map_ball(tpl: LiftedBall, f) -> LiftedBall:
    cx = tpl.complex.replace_vertices([f(p) for p in tpl.complex.vertices])
    return LiftedBall(cx, tpl.heights)


def _edge_template(crossed: bool) -> LiftedBall:
    if crossed:
        xs = [-HALF, Fraction(-1, 6), Fraction(1, 6), HALF]
        hs = [0, Fraction(1, 6), Fraction(1, 6), 0]
    else:
        xs = [-HALF, Fraction(0), HALF]
        hs = [0, Fraction(1, 4), 0]
    cells = [(((xs[i],), (xs[i + 1],)), (hs[i], hs[i + 1])) for i in range(len(xs) - 1)]
    return _ball_from_cells(1, cells)


def _quad_cells(points: dict, heights: dict, quads) -> list:
    """Cyclic quads over named vertices, reordered for the cube builder."""
    out = []
    for a, b, c, d in quads:
        out.append(
            (
                (points[a], points[b], points[d], points[c]),
                (heights[a], heights[b], heights[d], heights[c]),
            )
        )
    return out


def _square_template_empty() -> LiftedBall:
    """Square template carrying no trace: a 12-quad fan around the center.

    Each side triangle of the center fan is cut into three quads through
    its barycenter, keeping all four sides plain edges and both diagonals
    in the edge set.
    """

    def mid(p, q):
        return tuple((a + b) / 2 for a, b in zip(p, q))

    z = (Fraction(0), Fraction(0))
    corners = [
        (-HALF, -HALF),
        (HALF, -HALF),
        (HALF, HALF),
        (-HALF, HALF),
    ]
    cells = []
    for i in range(4):
        c1, c2 = corners[i], corners[(i + 1) % 4]
        m = mid(c1, c2)
        bary = tuple((a + b + c) / 3 for a, b, c in zip(c1, c2, z))
        cm1, cm2 = mid(c1, z), mid(c2, z)
        pts = {"c1": c1, "c2": c2, "m": m, "b": bary, "k1": cm1, "k2": cm2, "z": z}
        hts = {
            "c1": 0,
            "c2": 0,
            "m": Fraction(1, 4),
            "b": Fraction(2, 3),
            "k1": Fraction(3, 4),
            "k2": Fraction(3, 4),
            "z": Fraction(1),
        }
        quads = [("c1", "m", "b", "k1"), ("c2", "m", "b", "k2"), ("z", "k1", "b", "k2")]
        cells.extend(_quad_cells(pts, hts, quads))
    return _ball_from_cells(2, cells)


# Free plane slopes of the bent square template; see _square_template_bent.
_BENT_PARAMS = (
    Fraction(1),
    Fraction(-1, 3),
    Fraction(-1),
    Fraction(-1, 15),
    Fraction(-1, 4),
)


def _square_template_bent() -> LiftedBall:
    """Square template whose trace bends from the +u side to the +v side.

    The lifting is the minimum of ten affine pieces, five per half square,
    mirror symmetric across u = v.  The pieces touching the boundary are
    pinned by the edge templates; the remaining slopes are chosen so that
    all linearity regions are quads and all folds are strict.  Interior
    vertices are exact intersections of the piece planes, so the diagonal
    from (-1/2,-1/2) to (1/2,1/2) is a subcomplex, which lets a symmetry
    plane of a cube template cut through this face.
    """
    a1, b3, b5, a4, b4 = _BENT_PARAMS
    # plane (alpha, beta, gamma) means height = alpha*u + beta*v + gamma
    f1 = (a1, HALF, Fraction(1, 4) + a1 / 2)
    f2 = (HALF, -HALF, HALF)
    f3 = (Fraction(0), b3, Fraction(1, 6) - b3 / 2)
    f5 = (-HALF, b5, Fraction(1, 4) - b5 / 2)

    def ev(f, p):
        return f[0] * p[0] + f[1] * p[1] + f[2]

    def crease(fa, fb):
        return tuple(x - y for x, y in zip(fa, fb))

    def meet(la, lb):
        det = la[0] * lb[1] - la[1] * lb[0]
        return (
            (la[1] * lb[2] - la[2] * lb[1]) / det,
            (la[2] * lb[0] - la[0] * lb[2]) / det,
        )

    def diag_meet(fa, fb):
        l = crease(fa, fb)
        t = -l[2] / (l[0] + l[1])
        return (t, t)

    m1 = meet(crease(f1, f2), crease(f2, f3))
    f4 = (a4, b4, ev(f2, m1) - a4 * m1[0] - b4 * m1[1])
    m2 = meet(crease(f3, f4), crease(f3, f5))
    d1 = diag_meet(f1, f4)
    d2 = diag_meet(f4, f5)
    pts = {
        "sw": (-HALF, -HALF),
        "ne": (HALF, HALF),
        "nw": (-HALF, HALF),
        "n1": (Fraction(-1, 6), HALF),
        "n2": (Fraction(1, 6), HALF),
        "w": (-HALF, Fraction(0)),
        "m1": m1,
        "m2": m2,
        "d1": d1,
        "d2": d2,
    }
    owner = {
        "sw": f1,
        "ne": f5,
        "nw": f2,
        "n1": f2,
        "n2": f3,
        "w": f2,
        "m1": f2,
        "m2": f3,
        "d1": f1,
        "d2": f5,
    }
    hts = {k: ev(owner[k], p) for k, p in pts.items()}
    mirrored = {"se": "nw", "e1": "n2", "e2": "n1", "s": "w", "m1p": "m1", "m2p": "m2"}
    for k, src in mirrored.items():
        pts[k] = (pts[src][1], pts[src][0])
        hts[k] = hts[src]
    quads = [
        ("sw", "w", "m1", "d1"),
        ("w", "nw", "n1", "m1"),
        ("m1", "n1", "n2", "m2"),
        ("d1", "m1", "m2", "d2"),
        ("m2", "n2", "ne", "d2"),
        ("sw", "s", "m1p", "d1"),
        ("s", "se", "e2", "m1p"),
        ("m1p", "e2", "e1", "m2p"),
        ("d1", "m1p", "m2p", "d2"),
        ("m2p", "e1", "ne", "d2"),
    ]
    return _ball_from_cells(2, _quad_cells(pts, hts, quads))


def _square_template(arms: frozenset) -> LiftedBall:
    """Square template over [-1/2,1/2]^2 with trace arms toward given sides.

    Arms are (axis, sign) pairs naming the sides the trace pierces; the
    admissible patterns are none, a straight pass, a bend, or a full
    crossing of two straight traces.
    """
    arms = frozenset(arms)
    if not arms:
        return _square_template_empty()
    u3 = _edge_template(True)
    if len(arms) == 4:
        return product(u3, u3)
    if len(arms) != 2:
        raise ValueError(f"trace arms {sorted(arms)} do not close up")
    (g1, s1), (g2, s2) = sorted(arms)
    u2 = _edge_template(False)
    if g1 == g2:
        if s1 == s2:
            raise ValueError(f"trace arms {sorted(arms)} do not close up")
        # straight pass along g1: the sheet crosses edges of the other axis
        return product(u2, u3) if g1 == 0 else product(u3, u2)
    bent = _square_template_bent()
    return _map_ball(bent, lambda p: (s1 * p[0], s2 * p[1]))


def _face_arms(config, f: int, sigma: int) -> frozenset:
    """Trace arms of a vertex-star configuration on the face (f, sigma)."""
    arms = set()
    for q in config:
        if q[0] == f or _quarter_sign(q, f) != sigma:
            continue
        g = 3 - q[0] - f
        arms.add((g, _quarter_sign(q, g)))
    return frozenset(arms)


def _embedded_face_template(config, f: int, sigma: int) -> LiftedBall:
    p, q = (i for i in range(3) if i != f)
    arms = frozenset(
        ((0 if g == p else 1), s) for g, s in _face_arms(config, f, sigma)
    )
    t2 = _square_template(arms)

    def emb(pt):
        x = [None, None, None]
        x[f] = sigma * HALF
        x[p], x[q] = pt
        return tuple(x)

    return _map_ball(t2, emb)


def _cell_boundary(config) -> LiftedBoundarySubdivision:
    """Subdivided boundary of [-1/2,1/2]^3 matching a star configuration."""
    b = ComplexBuilder(3)
    hts: dict[int, Fraction] = {}
    for f in range(3):
        for sigma in (1, -1):
            t = _embedded_face_template(config, f, sigma)
            cx = t.complex
            for ci in range(cx.n_faces(2)):
                vids = []
                for v in cx.cube_order((2, ci)):
                    vid = b.add_vertex(cx.vertices[v])
                    h = t.heights[v]
                    if vid in hts and hts[vid] != h:
                        raise ValueError("face templates disagree on a shared edge")
                    hts[vid] = h
                    vids.append(vid)
                b.add_cube(tuple(vids))
    cx = b.finalize(dim=2)
    corners = [
        tuple(s * HALF for s in signs) for signs in itertools.product((1, -1), repeat=3)
    ]
    poly = convex_hull(corners)
    return LiftedBoundarySubdivision(
        poly, cx, tuple(hts[i] for i in range(len(cx.vertices)))
    )


_MIRROR_ORDER = ((0, 1, 1), (0, 1, -1), (0, 2, 1), (0, 2, -1), (1, 2, 1), (1, 2, -1))


def _mirror_perm(i: int, j: int, s: int) -> SignedPerm:
    perm = [0, 1, 2]
    perm[i], perm[j] = j, i
    signs = [1, 1, 1]
    signs[i] = s
    signs[j] = s
    return tuple(perm), tuple(signs)


def _admissible_mirror(config) -> Hyperplane:
    """First diagonal symmetry plane of the configuration, in a fixed order."""
    for i, j, s in _MIRROR_ORDER:
        if map_config(_mirror_perm(i, j, s), config) == config:
            n = [0, 0, 0]
            n[i] = 1
            n[j] = -s
            return Hyperplane.make(tuple(n), 0)
    raise ValueError("configuration admits no diagonal symmetry plane")


def _hexhoop_cell_template(config) -> LiftedBall:
    base = _cell_boundary(config)
    return hexhoop_cubify(base, _admissible_mirror(config)).cubification


_SYMMETRIC_EMPTY_PARAM = Fraction(2)


def _symmetric_empty_template(m: Fraction | None = None) -> LiftedBall:
    """Fully symmetric empty cube template from a doubled stellar cover.

    Every simplex of the stellar subdivision of the boundary of the cube,
    coned to the center, contributes one cube per choice of base vertex;
    heights depend only on the barycenter type, which makes the template
    invariant under all 48 signed permutations.
    """
    if m is None:
        m = _SYMMETRIC_EMPTY_PARAM
    m = rat(m)
    corners = list(itertools.product((-HALF, HALF), repeat=3))
    center = (Fraction(0), Fraction(0), Fraction(0))

    def bary(items):
        pts = [p for _, p in items]
        return tuple(sum(c) / len(pts) for c in zip(*pts))

    def height(items) -> Fraction:
        nc = sum(1 for kind, _ in items if kind == "c")
        has_f = any(kind == "f" for kind, _ in items)
        has_z = any(kind == "z" for kind, _ in items)
        if not has_z:
            table = {
                (1, False): Fraction(0),
                (2, False): Fraction(1, 4),
                (1, True): Fraction(3, 4),
                (2, True): Fraction(2, 3),
                (0, True): Fraction(1),
            }
            return table[(nc, has_f)]
        if nc == 0:
            return m + HALF if has_f else 2 * m - HALF
        if nc == 1:
            return 2 * m / 3 + HALF if has_f else m
        return m / 2 + HALF if has_f else 2 * m / 3 + Fraction(1, 6)

    cells = []
    for f in range(3):
        for sigma in (1, -1):
            fpt = [Fraction(0)] * 3
            fpt[f] = sigma * HALF
            fnode = ("f", tuple(fpt))
            face = [c for c in corners if c[f] == sigma * HALF]
            for c1, c2 in itertools.combinations(face, 2):
                if sum(a != b for a, b in zip(c1, c2)) != 1:
                    continue
                tet = [("c", c1), ("c", c2), fnode, ("z", center)]
                for w in tet:
                    others = [o for o in tet if o is not w]
                    pts, hs = [], []
                    for code in range(8):
                        items = [w] + [others[i] for i in range(3) if code >> i & 1]
                        pts.append(bary(items))
                        hs.append(height(items))
                    cells.append((tuple(pts), tuple(hs)))
    return _ball_from_cells(3, cells)


_HEXHOOP_TYPES = (
    VertexStarType.single3,
    VertexStarType.single4b,
    VertexStarType.single5,
    VertexStarType.single6a,
)


def _product_cell_template(t: VertexStarType) -> LiftedBall:
    u3 = _edge_template(True)
    if t is VertexStarType.single4a:
        return product(u3, _square_template_empty())
    if t is VertexStarType.double8a:
        return product(product(u3, u3), _edge_template(False))
    if t is VertexStarType.double8b:
        return product(u3, _square_template_bent())
    if t is VertexStarType.triple12:
        return product(product(u3, u3), u3)
    raise ValueError(f"{t.value} is not a product template")


@dataclass(frozen=True)
class TemplateLibrary:
    """Edge, square, and cube templates, keyed by what they carry."""

    edge_plain: LiftedBall
    edge_crossed: LiftedBall
    squares: dict
    cells: dict
    symmetric_empty: bool


_EXPECTED_CELL_COUNTS = {
    ("empty", False): 156,
    ("empty", True): 96,
    ("single3", False): 144,
    ("single4a", False): 36,
    ("single4b", False): 122,
    ("single5", False): 120,
    ("single6a", False): 130,
    ("double8a", False): 18,
    ("double8b", False): 30,
    ("triple12", False): 27,
}


@lru_cache(maxsize=2)
def build_template_library(symmetric_empty: bool = False) -> TemplateLibrary:
    """Build and certify all templates needed by the cubification.

    With ``symmetric_empty`` the empty cube template is replaced by the
    96-cell fully symmetric one; all other templates are shared.
    """
    u2 = _edge_template(False)
    u3 = _edge_template(True)
    squares = {
        "empty": _square_template_empty(),
        "straight": _square_template(frozenset({(1, 1), (1, -1)})),
        "bent": _square_template_bent(),
        "double": product(u3, u3),
    }
    cells: dict[str, LiftedBall] = {}
    if symmetric_empty:
        cells["empty"] = _symmetric_empty_template()
    else:
        cells["empty"] = _hexhoop_cell_template(frozenset())
    for t in VertexStarType:
        if t is VertexStarType.single6b:
            continue
        if t in _HEXHOOP_TYPES:
            cells[t.value] = _hexhoop_cell_template(CANONICAL_CONFIGS[t])
        else:
            cells[t.value] = _product_cell_template(t)
    lib = TemplateLibrary(u2, u3, squares, cells, symmetric_empty)
    _validate_library(lib)
    return lib


# -- library certificates -----------------------------------------------------


def _cell_signature(ball: LiftedBall, transform=None):
    """Top cells of a lifted ball as point/height sets, up to a point map."""
    cx = ball.complex
    out = set()
    for vids in cx.faces(cx.dim):
        cell = []
        for v in vids:
            p = cx.vertices[v]
            if transform is not None:
                p = transform(p)
            cell.append((p, ball.heights[v]))
        out.add(frozenset(cell))
    return out


def _restriction_signature(ball: LiftedBall, f: int, sigma: int):
    """Boundary cells of a cube template lying on the face (f, sigma)."""
    bd, hts = boundary_restriction(ball)
    out = set()
    for vids in bd.faces(bd.dim):
        if all(bd.vertices[v][f] == sigma * HALF for v in vids):
            out.add(frozenset((bd.vertices[v], hts[v]) for v in vids))
    return out


def _config_for_key(key: str) -> frozenset:
    if key == "empty":
        return frozenset()
    return CANONICAL_CONFIGS[VertexStarType(key)]


def _crossed_edge_middle(config):
    """For each quarter, the endpoints of the crossed edge's middle third."""
    out = {}
    for q in config:
        a, (sb, sc) = q
        lo = [None, None, None]
        hi = [None, None, None]
        lo[(a + 1) % 3] = hi[(a + 1) % 3] = sb * HALF
        lo[(a + 2) % 3] = hi[(a + 2) % 3] = sc * HALF
        lo[a] = Fraction(-1, 6)
        hi[a] = Fraction(1, 6)
        out[q] = (tuple(lo), tuple(hi))
    return out


def _edge_axis_in_cell(cx: CubicalComplex, ci: int, v1: int, v2: int) -> int:
    order = cx.cube_order((cx.dim, ci))
    diff = order.index(v1) ^ order.index(v2)
    if diff & (diff - 1):
        raise ValueError("vertices do not span an edge of the cell")
    return diff.bit_length() - 1


def _component_of_edge(ball: LiftedBall, dc, comp_of, p1, p2) -> int:
    """Dual component pierced by the edge between two vertex points."""
    cx = ball.complex
    idx = {p: i for i, p in enumerate(cx.vertices)}
    v1, v2 = idx[tuple(p1)], idx[tuple(p2)]
    key = cx.find_face((v1, v2))
    if key is None or key[0] != 1:
        raise ValueError(f"no edge between {p1} and {p2}")
    fi2 = cx.cofaces(1)[key[1]][0]
    ci = cx.cofaces(2)[fi2][0] if cx.dim == 3 else fi2
    axis = _edge_axis_in_cell(cx, ci, v1, v2)
    return comp_of[dc.facet_index()[(ci, axis)]]


def _template_dual_check(name: str, ball: LiftedBall, config) -> None:
    """Each sheet germ appears as one dual disk through its crossed edges."""
    germs = _decompose_germs(config) if config else []
    dc = derivative_complex(ball.complex)
    comps = dual_manifold_components(dc)
    comp_of = {}
    for k, comp in enumerate(comps):
        for fi in comp.cells:
            comp_of[fi] = k
    middles = _crossed_edge_middle(config)
    seen = []
    for germ in germs:
        hit = {
            _component_of_edge(ball, dc, comp_of, *middles[q]) for q in germ
        }
        if len(hit) != 1:
            raise ValueError(f"{name}: one sheet meets {len(hit)} dual components")
        (k,) = hit
        if comps[k].closed or comps[k].euler != 1:
            raise ValueError(f"{name}: sheet carrier is not a disk")
        seen.append(k)
    if len(set(seen)) != len(germs):
        raise ValueError(f"{name}: distinct sheets share a dual component")


def _template_symmetry_check(name: str, ball: LiftedBall, syms) -> None:
    base = _cell_signature(ball)
    for g in syms:
        if _cell_signature(ball, lambda p: apply_signed_perm(g, p)) != base:
            raise ValueError(f"{name}: template breaks a required symmetry")


def _check_lifted(name: str, ball: LiftedBall) -> None:
    rep = verify_regular(ball, check_support=False)
    if not rep.ok:
        raise ValueError(f"{name}: " + "; ".join(rep.messages))
    cub = verify_cubical(ball.complex)
    if not cub.ok:
        raise ValueError(f"{name}: " + "; ".join(cub.messages))


def _validate_library(lib: TemplateLibrary) -> None:
    _check_lifted("plain edge", lib.edge_plain)
    _check_lifted("crossed edge", lib.edge_crossed)
    edge_sig = {
        False: _cell_signature(lib.edge_plain),
        True: _cell_signature(lib.edge_crossed),
    }
    for sname, sq in lib.squares.items():
        _check_lifted(f"square template {sname}", sq)
        crossed_sides = {
            "empty": set(),
            "straight": {(1, 1), (1, -1)},
            "bent": {(0, 1), (1, 1)},
            "double": {(0, 1), (0, -1), (1, 1), (1, -1)},
        }[sname]
        bd, hts = boundary_restriction(sq)
        for f in range(2):
            for sigma in (1, -1):
                got = set()
                for vids in bd.faces(1):
                    if all(bd.vertices[v][f] == sigma * HALF for v in vids):
                        got.add(
                            frozenset(
                                ((bd.vertices[v][1 - f],), hts[v]) for v in vids
                            )
                        )
                want = edge_sig[(f, sigma) in crossed_sides]
                if got != want:
                    raise ValueError(
                        f"square template {sname}: side ({f},{sigma}) "
                        "does not restrict to the edge template"
                    )
    for key, ball in lib.cells.items():
        name = f"cube template {key}"
        _check_lifted(name, ball)
        config = _config_for_key(key)
        n = ball.complex.n_faces(3)
        want_n = _EXPECTED_CELL_COUNTS.get(
            (key, lib.symmetric_empty and key == "empty")
        )
        if want_n is not None and n != want_n:
            raise ValueError(f"{name}: {n} cells, expected {want_n}")
        for f in range(3):
            for sigma in (1, -1):
                expected = _embedded_face_template(config, f, sigma)
                if _restriction_signature(ball, f, sigma) != _cell_signature(
                    expected
                ):
                    raise ValueError(
                        f"{name}: face ({f},{sigma}) does not restrict to "
                        "its square template"
                    )
        _template_dual_check(name, ball, config)
        if key == "empty" and lib.symmetric_empty:
            syms = SIGNED_PERMS
        elif key == "empty" or VertexStarType(key) in _HEXHOOP_TYPES:
            # hexhoop templates only promise their defining mirror plane
            for i, j, s in _MIRROR_ORDER:
                if map_config(_mirror_perm(i, j, s), config) == config:
                    syms = (_mirror_perm(i, j, s),)
                    break
        else:
            syms = tuple(
                g for g in SIGNED_PERMS if map_config(g, config) == config
            )
        _template_symmetry_check(name, ball, syms)


# -- cubification -------------------------------------------------------------


def raw_pile_ball(pile) -> LiftedBall:
    """Pile of unit cubes whose cells are centered at the integer points
    of [0,l1]x[0,l2]x[0,l3], under the standard concave pile lifting."""
    base = pile_of_cubes(tuple(l + 1 for l in pile))
    cx = base.complex.replace_vertices(
        [tuple(c - HALF for c in p) for p in base.complex.vertices]
    )
    return LiftedBall(cx, base.heights)


def _cell_template_instance(
    lib: TemplateLibrary, key: str, g: SignedPerm, center
) -> LiftedBall:
    tpl = lib.cells[key]
    pts = [
        tuple(c + x for c, x in zip(center, apply_signed_perm(g, p)))
        for p in tpl.complex.vertices
    ]
    return LiftedBall(tpl.complex.replace_vertices(pts), tpl.heights)


@dataclass
class Cubification:
    """A regular cubical ball realizing a grid immersion as a dual manifold."""

    ball: LiftedBall
    raw: LiftedBall
    cell_types: dict
    components: tuple
    designated_index: int | None
    report: object

    @property
    def designated_component(self) -> DualManifold | None:
        if self.designated_index is None:
            return None
        return self.components[self.designated_index]


def cubify_grid_immersion(
    g: GridImmersion, lib: TemplateLibrary, eps: Fraction | None = None
) -> Cubification:
    """Patch one template instance per raw cell into the lifted pile.

    The designated dual component is located through the middle sub-edge of
    any crossed raw edge and certified against the immersed surface: Euler
    characteristic, orientability, number of double curves, and number of
    triple points all must match.
    """
    sym = check_locally_symmetric(g)
    if not sym.ok:
        raise ValueError(
            "immersion has vertex stars without a mirror plane at "
            + ", ".join(str(p) for p, _ in sym.offenders)
        )
    raw = raw_pile_ball(g.pile)
    rc = raw.complex
    configs: dict[tuple, tuple[str, SignedPerm]] = {}
    for p in _preimages(g):
        germs = list(_vertex_germs(g, p).values())
        t = _classify_germs(germs)
        config = frozenset().union(*germs)
        place = _match_type(config, t)
        if place is None:
            raise ValueError(f"no placement matches the star at {p}")
        configs[p] = (t.value, place)
    replacements = {}
    cell_types = {}
    identity = ((0, 1, 2), (1, 1, 1))
    for ci, vids in enumerate(rc.faces(3)):
        pts = [rc.vertices[v] for v in vids]
        center = tuple(sum(c) / 8 for c in zip(*pts))
        key, place = configs.get(center, ("empty", identity))
        replacements[ci] = _cell_template_instance(lib, key, place, center)
        cell_types[ci] = key
    ball = patch(raw, replacements, eps=eps)
    n3 = ball.complex.n_faces(3)
    t = triple_points_of_immersion(g)
    if (n3 - t) % 2:
        raise ValueError(f"{n3} cells and {t} triple points have unequal parity")
    bd = boundary_complex(ball.complex)
    if bd.n_faces(2) % 2:
        raise ValueError("boundary quad count is odd")
    dc = derivative_complex(ball.complex)
    comps = tuple(dual_manifold_components(dc))
    designated = None
    report = None
    if g.quads:
        comp_of = {}
        for k, comp in enumerate(comps):
            for fi in comp.cells:
                comp_of[fi] = k
        a, lo = g.image_square(0)
        p1 = [x + HALF for x in lo]
        p2 = [x + HALF for x in lo]
        p1[a] = lo[a] - Fraction(1, 6)
        p2[a] = lo[a] + Fraction(1, 6)
        designated = _component_of_edge(ball, dc, comp_of, p1, p2)
        m = comps[designated]
        if not m.closed:
            raise ValueError("designated dual component is not closed")
        if m.euler != euler_characteristic_of_surface(g):
            raise ValueError(
                f"designated dual component has Euler characteristic "
                f"{m.euler}, the surface has {euler_characteristic_of_surface(g)}"
            )
        if m.orientable != surface_orientable(g):
            raise ValueError("designated dual component has wrong orientability")
        report = immersion_report(ball.complex)
        ci = report.components[designated]
        if ci.triple_points != t:
            raise ValueError(
                f"dual component shows {ci.triple_points} triple points, "
                f"the immersion has {t}"
            )
        want_curves = len(double_curves_of_immersion(g))
        if len(ci.double_curves) != want_curves:
            raise ValueError(
                f"dual component shows {len(ci.double_curves)} double curves, "
                f"the immersion has {want_curves}"
            )
    return Cubification(ball, raw, cell_types, comps, designated, report)


def cubification_pair(
    g: GridImmersion, lib: TemplateLibrary
) -> tuple[Cubification, Cubification]:
    """The immersion's cubification and the empty one, on one boundary lift.

    Both balls are re-patched with the smaller of their two scale factors,
    after which they agree vertex for vertex on the boundary.
    """
    b = cubify_grid_immersion(g, lib)
    c = cubify_grid_immersion(empty_immersion(*g.pile), lib)
    eb, ec = b.ball.patch_eps, c.ball.patch_eps
    if eb != ec:
        eps = min(eb, ec)
        if eb > eps:
            b = cubify_grid_immersion(g, lib, eps=eps)
        else:
            c = cubify_grid_immersion(empty_immersion(*g.pile), lib, eps=eps)
    sig_b = _boundary_lift_signature(b.ball)
    sig_c = _boundary_lift_signature(c.ball)
    if sig_b != sig_c:
        raise ValueError("the two cubifications induce different boundary lifts")
    return b, c


def _boundary_lift_signature(ball: LiftedBall):
    bd, hts = boundary_restriction(ball)
    cells = {
        frozenset((bd.vertices[v], hts[v]) for v in vids)
        for vids in bd.faces(bd.dim)
    }
    return cells


def polytope_from_grid_immersion(
    g: GridImmersion, lib: TemplateLibrary, validate: bool | None = None
) -> ConvexPolytope:
    """Cubical 4-polytope with the immersed surface among its dual manifolds.

    Prism over the immersion's cubification and the matching empty one.  The
    f-vector obtained by counting the construction is attached to the result
    as ``constructed_f_vector``; full face-lattice recomputation is only
    affordable for small instances and controlled by ``validate`` (default:
    only below 2000 cells).
    """
    b, c = cubification_pair(g, lib)
    n = b.ball.complex.n_faces(3) + c.ball.complex.n_faces(3)
    if validate is None:
        validate = n <= 2000
    poly = lifted_prism_two_balls(b.ball, c.ball, validate=validate)
    f = prism_f_vector(b.ball, c.ball)
    t = triple_points_of_immersion(g)
    if (f[3] - t) % 2:
        raise ValueError("facet parity disagrees with the triple point count")
    poly.constructed_f_vector = f
    return poly
