"""Polytopal complexes with exact rational vertex coordinates.

A :class:`CubicalComplex` stores vertices plus one face list per dimension,
with explicit subface links (the full lattice).  Cubicality is a checkable
property, not an assumption: general polytopal cells are allowed so that
intermediate objects (tents, glued polytope pairs) can be represented.

Cube faces use the binary vertex convention: vertex ``i`` of a ``k``-cube
corresponds to the bit pattern of ``i`` over the ``k`` axes, so opposite
facets and parallel edge classes are index arithmetic.

Functions
---------
f_vector, euler_characteristic, boundary_complex
verify_cubical       combinatorial-cube and intersection checks
dehn_sommerville_check   the cubical 4-polytope relations
complex_to_data / complex_from_data   JSON-ready interchange form
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .rational import Vec, affine_rank, rat, solve

FaceKey = tuple[int, int]


class CubicalComplex:
    """Immutable polytopal complex; build with :class:`ComplexBuilder`."""

    def __init__(self, ambient_dim, dim, vertices, faces, links, orders):
        self.ambient_dim = ambient_dim
        self.dim = dim
        self.vertices = vertices
        self._faces = faces  # dim -> tuple of vertex-id tuples
        self._links = links  # dim -> tuple of subface-index tuples
        self._orders = dict(orders)  # (k, i) -> binary-ordered vids
        self._findex = {
            frozenset(v): (k, i)
            for k, lst in faces.items()
            for i, v in enumerate(lst)
        }
        self._cofaces: dict[int, tuple[tuple[int, ...], ...]] = {}
        self._closures: dict[FaceKey, frozenset[FaceKey]] = {}

    # -- basic queries ------------------------------------------------

    def n_faces(self, k: int) -> int:
        if k == 0:
            return len(self.vertices)
        return len(self._faces.get(k, ()))

    def faces(self, k: int) -> tuple[tuple[int, ...], ...]:
        if k == 0:
            return tuple((i,) for i in range(len(self.vertices)))
        return self._faces.get(k, ())

    def face(self, key: FaceKey) -> tuple[int, ...]:
        k, i = key
        if k == 0:
            return (i,)
        return self._faces[k][i]

    def face_points(self, key: FaceKey) -> tuple[Vec, ...]:
        return tuple(self.vertices[v] for v in self.face(key))

    def subface_ids(self, key: FaceKey) -> tuple[int, ...]:
        k, i = key
        if k == 0:
            return ()
        if k == 1:
            return self._faces[1][i]
        return self._links[k][i]

    def find_face(self, vids) -> FaceKey | None:
        vids = frozenset(vids)
        if len(vids) == 1:
            (v,) = vids
            return (0, v) if 0 <= v < len(self.vertices) else None
        return self._findex.get(vids)

    def cofaces(self, k: int) -> tuple[tuple[int, ...], ...]:
        """For each k-face, the indices of the (k+1)-faces containing it."""
        if k not in self._cofaces:
            out: list[list[int]] = [[] for _ in range(self.n_faces(k))]
            for j in range(self.n_faces(k + 1)):
                for s in self.subface_ids((k + 1, j)):
                    out[s].append(j)
            self._cofaces[k] = tuple(tuple(x) for x in out)
        return self._cofaces[k]

    def closure(self, key: FaceKey) -> frozenset[FaceKey]:
        """All faces of ``key``, including itself, down to vertices."""
        got = self._closures.get(key)
        if got is None:
            k, i = key
            acc = {key}
            if k == 1:
                acc.update((0, v) for v in self._faces[1][i])
            elif k > 1:
                for s in self.subface_ids(key):
                    acc.update(self.closure((k - 1, s)))
            got = frozenset(acc)
            self._closures[key] = got
        return got

    # -- derived complexes ---------------------------------------------

    def subcomplex(self, top_keys) -> "CubicalComplex":
        """Closure of the given faces as a new complex (vertices reindexed)."""
        keep: set[FaceKey] = set()
        for key in top_keys:
            keep.update(self.closure(key))
        dims = sorted({k for k, _ in keep if k >= 1})
        new_dim = dims[-1] if dims else 0
        used = sorted({i for k, i in keep if k == 0})
        vmap = {old: new for new, old in enumerate(used)}
        vertices = tuple(self.vertices[v] for v in used)
        faces: dict[int, list[tuple[int, ...]]] = {}
        fmap: dict[FaceKey, int] = {}
        links: dict[int, list[tuple[int, ...]]] = {}
        orders = {}
        for k in dims:
            idxs = sorted(i for kk, i in keep if kk == k)
            faces[k] = []
            links[k] = []
            for i in idxs:
                fmap[(k, i)] = len(faces[k])
                faces[k].append(tuple(vmap[v] for v in self._faces[k][i]))
                if k == 1:
                    links[k].append(faces[k][-1])
                else:
                    links[k].append(
                        tuple(fmap[(k - 1, s)] for s in self.subface_ids((k, i)))
                    )
                order = self._orders.get((k, i))
                if order is not None:
                    orders[(k, fmap[(k, i)])] = tuple(vmap[v] for v in order)
        return CubicalComplex(
            self.ambient_dim,
            new_dim,
            vertices,
            {k: tuple(v) for k, v in faces.items()},
            {k: tuple(v) for k, v in links.items()},
            orders,
        )

    def boundary_faces(self) -> list[int]:
        """Indices of (dim-1)-faces lying in exactly one top face."""
        counts = [len(c) for c in self.cofaces(self.dim - 1)]
        return [i for i, c in enumerate(counts) if c == 1]

    def is_pure(self) -> bool:
        for k in range(self.dim):
            if any(len(c) == 0 for c in self.cofaces(k)):
                return False
        return True

    def replace_vertices(self, new_vertices) -> "CubicalComplex":
        """Same combinatorics over new coordinates (pointwise transforms)."""
        if len(new_vertices) != len(self.vertices):
            raise ValueError("vertex count mismatch")
        return CubicalComplex(
            len(new_vertices[0]) if new_vertices else self.ambient_dim,
            self.dim,
            tuple(tuple(p) for p in new_vertices),
            self._faces,
            self._links,
            self._orders,
        )

    # -- cube structure -------------------------------------------------

    def cube_order(self, key: FaceKey) -> tuple[int, ...]:
        """Vertex ids of a combinatorial-cube face in binary order.

        Raises ValueError if the face is not a combinatorial cube.
        """
        k, i = key
        if k == 0:
            return (i,)
        if k == 1:
            return self._faces[1][i]
        cached = self._orders.get(key)
        if cached is not None:
            return cached
        verts = self._faces[k][i]
        if len(verts) != 1 << k:
            raise ValueError(f"face {key} has {len(verts)} vertices, not 2^{k}")
        subs = self.subface_ids(key)
        if len(subs) != 2 * k:
            raise ValueError(f"face {key} has {len(subs)} facets, not {2 * k}")
        vsets = [frozenset(self._faces[k - 1][s]) for s in subs]
        all_v = frozenset(verts)
        half = 1 << (k - 1)
        unpaired = set(range(2 * k))
        v0 = min(verts)
        pairs = []
        for a in sorted(unpaired):
            if a not in unpaired:
                continue
            mates = [
                b
                for b in unpaired
                if b != a and vsets[a].isdisjoint(vsets[b])
                and vsets[a] | vsets[b] == all_v
            ]
            if len(mates) != 1 or len(vsets[a]) != half:
                raise ValueError(f"face {key} lacks an opposite-facet pairing")
            b = mates[0]
            unpaired.discard(a)
            unpaired.discard(b)
            pairs.append((a, b) if v0 in vsets[a] else (b, a))
        order = []
        for code in range(1 << k):
            cands = all_v
            for ax, (lo, hi) in enumerate(pairs):
                cands = cands & (vsets[hi] if (code >> ax) & 1 else vsets[lo])
            if len(cands) != 1:
                raise ValueError(f"face {key} is not a combinatorial cube")
            order.append(next(iter(cands)))
        if len(set(order)) != len(order):
            raise ValueError(f"face {key} is not a combinatorial cube")
        order = tuple(order)
        self._orders[key] = order
        return order

    # -- invariants -----------------------------------------------------

    def f_vector(self) -> tuple[int, ...]:
        return tuple(self.n_faces(k) for k in range(self.dim + 1))

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * self.n_faces(k) for k in range(self.dim + 1))

    def is_closed_pseudomanifold(self) -> bool:
        return all(len(c) == 2 for c in self.cofaces(self.dim - 1))

    def top_connected(self) -> bool:
        """Connectivity of the top-cell adjacency graph via ridges."""
        n = self.n_faces(self.dim)
        if n == 0:
            return True
        adj: dict[int, set[int]] = {i: set() for i in range(n)}
        for cof in self.cofaces(self.dim - 1):
            for a in cof:
                for b in cof:
                    if a != b:
                        adj[a].add(b)
        seen = {0}
        stack = [0]
        while stack:
            for b in adj[stack.pop()]:
                if b not in seen:
                    seen.add(b)
                    stack.append(b)
        return len(seen) == n


def f_vector(c: CubicalComplex) -> tuple[int, ...]:
    return c.f_vector()


def euler_characteristic(c: CubicalComplex) -> int:
    return c.euler_characteristic()


def boundary_complex(c: CubicalComplex) -> CubicalComplex:
    """Subcomplex of (d-1)-faces lying in exactly one d-face."""
    if not c.is_pure():
        raise ValueError("boundary_complex requires a pure complex")
    d = c.dim
    return c.subcomplex([(d - 1, i) for i in c.boundary_faces()])


@dataclass
class CubicalityReport:
    ok: bool
    offending: list[FaceKey] = field(default_factory=list)
    messages: list[str] = field(default_factory=list)


def _quad_is_convex(pts) -> bool:
    """Convexity of a planar quadrilateral given in binary vertex order."""
    a, b, d, cpt = pts  # binary order: 00, 01, 10, 11; cycle is a,b,cpt,d
    # diagonals of the cycle (a, b, cpt, d) are a-cpt and b-d
    cols = [
        [x - y for x, y in zip(cpt, a)],
        [y - x for x, y in zip(d, b)],
    ]
    rhs = [x - y for x, y in zip(b, a)]
    sol = solve(list(zip(*cols)), rhs)
    if sol is None:
        return False
    s, t = sol
    if not (0 < s < 1 and 0 < t < 1):
        return False
    lhs = tuple(x + s * (y - x) for x, y in zip(a, cpt))
    rhs2 = tuple(x + t * (y - x) for x, y in zip(b, d))
    return lhs == rhs2


def verify_cubical(c: CubicalComplex, intersections: bool = True) -> CubicalityReport:
    """Check that every face is a combinatorial cube, realized flatly.

    Also checks that faces sharing vertices intersect in a common face
    (combinatorial intersection property).  Interior disjointness of
    vertex-disjoint faces is certified elsewhere (convexity/lifting checks).
    """
    rep = CubicalityReport(ok=True)
    for k in range(1, c.dim + 1):
        for i in range(c.n_faces(k)):
            key = (k, i)
            try:
                order = c.cube_order(key)
            except ValueError as e:
                rep.ok = False
                rep.offending.append(key)
                rep.messages.append(str(e))
                continue
            pts = tuple(c.vertices[v] for v in order)
            if affine_rank(pts) != k:
                rep.ok = False
                rep.offending.append(key)
                rep.messages.append(f"face {key} has wrong affine rank")
            elif k == 2 and not _quad_is_convex(pts):
                rep.ok = False
                rep.offending.append(key)
                rep.messages.append(f"face {key} is not a convex quadrilateral")
    if intersections:
        stars: list[list[FaceKey]] = [[] for _ in range(len(c.vertices))]
        for k in range(1, c.dim + 1):
            for i, vids in enumerate(c.faces(k)):
                for v in vids:
                    stars[v].append((k, i))
        vsets = {key: frozenset(c.face(key)) for star in stars for key in star}
        for v, star in enumerate(stars):
            for ai in range(len(star)):
                fa = star[ai]
                va = vsets[fa]
                for bi in range(ai + 1, len(star)):
                    fb = star[bi]
                    inter = va & vsets[fb]
                    # each pair is handled once, at its least shared vertex
                    if len(inter) == 1 or min(inter) != v:
                        continue
                    g = c.find_face(inter)
                    if g is None or g not in c.closure(fa) or g not in c.closure(fb):
                        rep.ok = False
                        rep.offending.extend([fa, fb])
                        rep.messages.append(
                            f"faces {fa} and {fb} intersect in a non-face"
                        )
    return rep


@dataclass
class DehnSommervilleReport:
    eq1: bool
    eq2: bool
    parity: bool

    @property
    def ok(self) -> bool:
        return self.eq1 and self.eq2 and self.parity


def dehn_sommerville_check(f) -> DehnSommervilleReport:
    """The cubical 4-polytope relations: Euler, f2 = 3 f3, and f0 even."""
    if len(f) != 4:
        raise ValueError("expected an f-vector of a 4-polytope (4 entries)")
    f0, f1, f2, f3 = f
    return DehnSommervilleReport(
        eq1=(f0 - f1 + f2 - f3 == 0), eq2=(f2 == 3 * f3), parity=(f0 % 2 == 0)
    )


class ComplexBuilder:
    """Mutable builder; vertices dedupe by exact coordinates."""

    def __init__(self, ambient_dim: int):
        self.ambient_dim = ambient_dim
        self._verts: list[Vec] = []
        self._vindex: dict[Vec, int] = {}
        self._faces: dict[int, list[tuple[int, ...]]] = {}
        self._findex: dict[frozenset[int], tuple[int, int]] = {}
        self._links: dict[tuple[int, int], tuple[int, ...]] = {}
        self._orders: dict[tuple[int, int], tuple[int, ...]] = {}

    def add_vertex(self, point) -> int:
        pt = tuple(rat(x) for x in point)
        if len(pt) != self.ambient_dim:
            raise ValueError("wrong point dimension")
        got = self._vindex.get(pt)
        if got is not None:
            return got
        self._verts.append(pt)
        self._vindex[pt] = len(self._verts) - 1
        return len(self._verts) - 1

    def _register(self, k, vids, sub_idx, order=None) -> tuple[int, int]:
        key = frozenset(vids)
        got = self._findex.get(key)
        if got is not None:
            if got[0] != k:
                raise ValueError("vertex set already used by a face of other dim")
            return got
        lst = self._faces.setdefault(k, [])
        lst.append(tuple(vids))
        fk = (k, len(lst) - 1)
        self._findex[key] = fk
        self._links[fk] = tuple(sub_idx)
        if order is not None:
            self._orders[fk] = tuple(order)
        return fk

    def add_cube(self, vids) -> tuple[int, int]:
        """Add a combinatorial cube given its vertices in binary order.

        All subcubes are added recursively; shared faces dedupe by vertex set.
        """
        vids = tuple(vids)
        n = len(vids)
        k = n.bit_length() - 1
        if n != 1 << k or len(set(vids)) != n:
            raise ValueError("cube needs 2^k distinct vertices")
        if k == 0:
            return (0, vids[0])
        got = self._findex.get(frozenset(vids))
        if got is not None:
            return got
        if k == 1:
            return self._register(1, vids, vids, vids)
        subs = []
        for axis in range(k):
            for side in (0, 1):
                sub = tuple(v for i, v in enumerate(vids) if (i >> axis) & 1 == side)
                subs.append(self.add_cube(sub)[1])
        return self._register(k, vids, subs, vids)

    def add_face(self, k, vids, subface_vsets) -> tuple[int, int]:
        """Add a general k-face whose facets (given by vertex sets) exist."""
        if k == 1:
            vids = tuple(vids)
            return self._register(1, vids, vids, vids)
        subs = []
        for vs in subface_vsets:
            got = self._findex.get(frozenset(vs))
            if got is None or got[0] != k - 1:
                raise ValueError("missing subface while adding a general face")
            subs.append(got[1])
        return self._register(k, tuple(vids), subs)

    def finalize(self, dim: int | None = None, check_pure: bool = True) -> CubicalComplex:
        if dim is None:
            dim = max(self._faces) if self._faces else 0
        used = sorted({v for lst in self._faces.values() for f in lst for v in f})
        if not self._faces:
            used = list(range(len(self._verts)))
        vmap = {old: new for new, old in enumerate(used)}
        vertices = tuple(self._verts[v] for v in used)
        faces = {
            k: tuple(tuple(vmap[v] for v in f) for f in lst)
            for k, lst in self._faces.items()
        }
        links: dict[int, tuple[tuple[int, ...], ...]] = {}
        for k, lst in self._faces.items():
            if k == 1:
                links[k] = faces[1]
            else:
                links[k] = tuple(self._links[(k, i)] for i in range(len(lst)))
        orders = {
            key: tuple(vmap[v] for v in order) for key, order in self._orders.items()
        }
        c = CubicalComplex(self.ambient_dim, dim, vertices, faces, links, orders)
        if check_pure and not c.is_pure():
            raise ValueError("complex is not pure")
        return c


def complex_to_data(c: CubicalComplex, heights=None) -> dict:
    """JSON-ready form; rationals as 'p/q' strings, bit exact."""
    data = {
        "ambient_dim": c.ambient_dim,
        "dim": c.dim,
        "vertices": [[str(x) for x in p] for p in c.vertices],
        "faces": {
            str(k): [list(c._orders.get((k, i), c.face((k, i))))
                     for i in range(c.n_faces(k))]
            for k in range(1, c.dim + 1)
        },
    }
    if heights is not None:
        data["heights"] = [str(h) for h in heights]
    return data


def complex_from_data(data: dict) -> CubicalComplex:
    b = ComplexBuilder(int(data["ambient_dim"]))
    for p in data["vertices"]:
        b.add_vertex([Fraction(x) for x in p])
    dim = int(data["dim"])
    by_vertex: dict[int, list[frozenset[int]]] = {}
    for k in range(1, dim + 1):
        cur = []
        for vids in data["faces"].get(str(k), []):
            vset = frozenset(vids)
            if k == 1:
                b.add_face(1, vids, [])
            else:
                cands = {vs for v in vids for vs in by_vertex.get(v, []) if vs <= vset}
                b.add_face(k, vids, sorted(cands, key=sorted))
            cur.append(vset)
        by_vertex = {}
        for vs in cur:
            for v in vs:
                by_vertex.setdefault(v, []).append(vs)
    return b.finalize(dim=dim, check_pure=False)
