"""Dual manifolds of cubical complexes.

The derivative complex of a pure cubical d-complex has one vertex per edge of
the source and one (d-1)-cube per pair (top cell, parallel edge class): the
midcube spanned by the midpoints of the cell's edges in that class.  Midcubes
meeting in a common (d-2)-face glue there, and the connected components of the
result are the dual manifolds of the complex.  For d = 3 the components are
surfaces immersed in the source; the immersion has a double segment wherever
two midsquares of one cell belong to the same component and a triple point
wherever all three do.

Everything is combinatorial and exact: a midcube is a tuple of source edge
ids in binary order, adjacency goes through shared vertex subsets, and
orientability is parity propagation of cube orientations across ridges.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .complexes import CubicalComplex

__all__ = [
    "DerivativeComplex",
    "DualManifold",
    "EdgeOrientationReport",
    "ImmersionReport",
    "ComponentImmersion",
    "derivative_complex",
    "dual_manifold_components",
    "classify_surface",
    "edge_orientation_check",
    "immersion_report",
    "banchoff_parity_check",
    "cube_reorder_sign",
]


def _insert_bit(code: int, pos: int, bit: int) -> int:
    """Insert ``bit`` at position ``pos`` into the binary code."""
    low = code & ((1 << pos) - 1)
    high = code >> pos
    return low | (bit << pos) | (high << (pos + 1))


def _perm_parity(perm: tuple[int, ...]) -> int:
    seen = [False] * len(perm)
    sign = 1
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def cube_reorder_sign(order_a: tuple[int, ...], order_b: tuple[int, ...]) -> int:
    """Orientation sign of the cube symmetry taking one binary order to another.

    Both arguments must be binary vertex orders of the same combinatorial cube
    (same label set).  The symmetry decomposes into an axis permutation and a
    set of axis flips; the sign is the permutation parity times (-1) per flip.
    """
    if len(order_a) != len(order_b) or set(order_a) != set(order_b):
        raise ValueError("orders do not label the same cube")
    n = len(order_a)
    if n == 1:
        return 1
    k = n.bit_length() - 1
    if 1 << k != n:
        raise ValueError("order length is not a power of two")
    pos_b = {v: i for i, v in enumerate(order_b)}
    c0 = pos_b[order_a[0]]
    perm = []
    for m in range(k):
        diff = pos_b[order_a[1 << m]] ^ c0
        if diff.bit_count() != 1:
            raise ValueError("orders are not related by a cube symmetry")
        perm.append(diff.bit_length() - 1)
    if sorted(perm) != list(range(k)):
        raise ValueError("orders are not related by a cube symmetry")
    for code in range(n):
        image = c0
        for m in range(k):
            if code >> m & 1:
                image ^= 1 << perm[m]
        if pos_b[order_a[code]] != image:
            raise ValueError("orders are not related by a cube symmetry")
    flips = c0.bit_count()
    return _perm_parity(tuple(perm)) * (-1 if flips % 2 else 1)


@dataclass(frozen=True)
class DerivativeComplex:
    """Abstract derivative complex of a pure cubical complex.

    ``facets[i]`` names the midcube as (top cell index, edge class axis) and
    ``orders[i]`` is its binary vertex order; vertices are source edge ids
    (indices into ``source.faces(1)``).
    """

    source: CubicalComplex
    facets: tuple[tuple[int, int], ...]
    orders: tuple[tuple[int, ...], ...]

    @property
    def n_vertices(self) -> int:
        return len(self.source.faces(1))

    def facet_index(self) -> dict[tuple[int, int], int]:
        return {key: i for i, key in enumerate(self.facets)}

    def ridges(self) -> dict[frozenset[int], list[tuple[int, int, int]]]:
        """Map ridge vertex set -> [(facet, fixed slot, side)]."""
        k = self.source.dim - 1
        out: dict[frozenset[int], list[tuple[int, int, int]]] = {}
        for fi, order in enumerate(self.orders):
            for slot in range(k):
                for side in (0, 1):
                    verts = frozenset(
                        order[_insert_bit(code, slot, side)]
                        for code in range(1 << (k - 1))
                    )
                    out.setdefault(verts, []).append((fi, slot, side))
        return out


def derivative_complex(c: CubicalComplex) -> DerivativeComplex:
    """Build the derivative complex; requires a pure cubical complex, d >= 2."""
    d = c.dim
    if d < 2:
        raise ValueError("derivative complex needs dimension >= 2")
    if not c.is_pure():
        raise ValueError("source complex is not pure")
    edge_ids = {frozenset(e): i for i, e in enumerate(c.faces(1))}
    facets: list[tuple[int, int]] = []
    orders: list[tuple[int, ...]] = []
    for ci in range(len(c.faces(d))):
        order = c.cube_order((d, ci))
        for axis in range(d):
            mid = []
            for code in range(1 << (d - 1)):
                lo = _insert_bit(code, axis, 0)
                key = frozenset((order[lo], order[lo | (1 << axis)]))
                mid.append(edge_ids[key])
            facets.append((ci, axis))
            orders.append(tuple(mid))
    return DerivativeComplex(source=c, facets=tuple(facets), orders=tuple(orders))


@dataclass(frozen=True)
class DualManifold:
    """One connected dual manifold, as a set of derivative facets."""

    cells: tuple[int, ...]
    f_vector: tuple[int, ...]
    euler: int
    orientable: bool
    closed: bool

    @property
    def dim(self) -> int:
        return len(self.f_vector) - 1


class _ParityDSU:
    """Union-find whose elements carry a parity relative to their root."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.parity = [0] * n

    def find(self, x: int) -> tuple[int, int]:
        path = []
        while self.parent[x] != x:
            path.append(x)
            x = self.parent[x]
        p = 0
        for y in reversed(path):
            p ^= self.parity[y]
            self.parent[y] = x
            self.parity[y] = p
        return x, self.parity[path[0]] if path else 0

    def relation(self, x: int, y: int) -> tuple[int, int, int, int]:
        rx, px = self.find(x)
        ry, py = self.find(y)
        return rx, px, ry, py

    def union(self, x: int, y: int, parity: int) -> bool:
        """Impose parity(x) ^ parity(y) == parity; False on conflict."""
        rx, px, ry, py = self.relation(x, y)
        if rx == ry:
            return (px ^ py) == parity
        self.parent[rx] = ry
        self.parity[rx] = px ^ py ^ parity
        return True


def _induced_ridge_order(
    order: tuple[int, ...], slot: int, side: int
) -> tuple[int, ...]:
    k = (len(order)).bit_length() - 1
    return tuple(
        order[_insert_bit(code, slot, side)] for code in range(1 << (k - 1))
    )


def _ridge_sign(slot: int, side: int) -> int:
    # Orientation induced on the face {slot = side} of an oriented cube:
    # outward vector is (2*side - 1) times the slot axis, and moving that
    # axis to the front costs (-1)**slot.
    return (1 if side else -1) * (-1 if slot % 2 else 1)


def dual_manifold_components(dc: DerivativeComplex) -> list[DualManifold]:
    """Split the derivative complex into dual manifolds, most structure first.

    Components are ordered by their smallest facet index, which is itself
    deterministic (cells in order, edge classes by axis).
    """
    n = len(dc.facets)
    ridge_map = dc.ridges()
    dsu = _ParityDSU(n)
    conflicts: set[int] = set()
    for users in ridge_map.values():
        if len(users) > 2:
            raise ValueError("ridge shared by more than two midcubes")
        if len(users) < 2:
            continue
        (fa, sa, da), (fb, sb, db) = users
        tau_a = _induced_ridge_order(dc.orders[fa], sa, da)
        tau_b = _induced_ridge_order(dc.orders[fb], sb, db)
        rho = cube_reorder_sign(tau_b, tau_a)
        sign = _ridge_sign(sa, da) * _ridge_sign(sb, db) * rho
        # Compatible orientations satisfy eps_b = -eps_a * sign, i.e. the
        # parities differ exactly when sign is +1.
        want = 0 if sign < 0 else 1
        if not dsu.union(fa, fb, want):
            conflicts.add(fa)

    conflict_roots = {dsu.find(x)[0] for x in conflicts}
    groups: dict[int, list[int]] = {}
    for fi in range(n):
        root, _ = dsu.find(fi)
        groups.setdefault(root, []).append(fi)

    k = dc.source.dim - 1
    out = []
    for root, members in groups.items():
        members.sort()
        faces_by_dim: list[set[frozenset[int]]] = [set() for _ in range(k + 1)]
        for fi in members:
            order = dc.orders[fi]
            for free in range(k + 1):
                for axes in itertools.combinations(range(k), free):
                    fixed = [a for a in range(k) if a not in axes]
                    for assign in range(1 << len(fixed)):
                        verts = []
                        base = 0
                        for j, a in enumerate(fixed):
                            if assign >> j & 1:
                                base |= 1 << a
                        for sub in range(1 << free):
                            code = base
                            for j, a in enumerate(axes):
                                if sub >> j & 1:
                                    code |= 1 << a
                            verts.append(order[code])
                        faces_by_dim[free].add(frozenset(verts))
        fvec = tuple(len(s) for s in faces_by_dim)
        euler = sum((-1) ** i * v for i, v in enumerate(fvec))
        member_set = set(members)
        ridge_use: dict[frozenset[int], int] = {}
        for verts, users in ridge_map.items():
            cnt = sum(1 for fi, _, _ in users if fi in member_set)
            if cnt:
                ridge_use[verts] = cnt
        closed = all(v == 2 for v in ridge_use.values())
        orientable = root not in conflict_roots
        out.append(
            DualManifold(
                cells=tuple(members),
                f_vector=fvec,
                euler=euler,
                orientable=orientable,
                closed=closed,
            )
        )
    out.sort(key=lambda m: m.cells[0])
    return out


def classify_surface(m: DualManifold) -> str:
    """Name a closed surface from its Euler characteristic and orientability."""
    if m.dim != 2:
        raise ValueError("not a surface")
    if not m.closed:
        raise ValueError("surface is not closed")
    if m.orientable:
        genus, rem = divmod(2 - m.euler, 2)
        if rem or genus < 0:
            raise ValueError(f"impossible Euler characteristic {m.euler}")
        if genus == 0:
            return "sphere"
        if genus == 1:
            return "torus"
        return f"orientable genus {genus}"
    genus = 2 - m.euler
    if genus < 1:
        raise ValueError(f"impossible Euler characteristic {m.euler}")
    if genus == 1:
        return "projective plane"
    if genus == 2:
        return "Klein bottle"
    return f"non-orientable genus {genus}"


@dataclass(frozen=True)
class EdgeOrientationReport:
    """Result of the parallel-edge orientation test.

    When orientable, ``orientation`` maps each edge index to 0 or 1: keep or
    flip the stored vertex order so that parallel edges of every quad point
    the same way.  Otherwise ``witness`` is a cyclic strip of quad indices
    whose parallel-edge relation has odd total flip parity.
    """

    orientable: bool
    orientation: dict[int, int] | None
    witness: tuple[int, ...] | None


def edge_orientation_check(c: CubicalComplex) -> EdgeOrientationReport:
    """Decide whether all edges can be oriented consistently across quads."""
    edges = c.faces(1)
    edge_ids = {frozenset(e): i for i, e in enumerate(edges)}
    n = len(edges)
    dsu = _ParityDSU(n)
    adj: dict[int, list[tuple[int, int, int]]] = {i: [] for i in range(n)}

    def edge_ref(a: int, b: int) -> tuple[int, int]:
        eid = edge_ids[frozenset((a, b))]
        flip = 0 if edges[eid][0] == a else 1
        return eid, flip

    for qi in range(len(c.faces(2))):
        order = c.cube_order((2, qi))
        v00, v01, v10, v11 = order
        for pair in (((v00, v01), (v10, v11)), ((v00, v10), (v01, v11))):
            (ea, fa), (eb, fb) = edge_ref(*pair[0]), edge_ref(*pair[1])
            parity = fa ^ fb
            if not dsu.union(ea, eb, parity):
                witness = _odd_strip(adj, ea, eb, qi)
                return EdgeOrientationReport(False, None, witness)
            adj[ea].append((eb, parity, qi))
            adj[eb].append((ea, parity, qi))
    orientation = {}
    for eid in range(n):
        _, par = dsu.find(eid)
        orientation[eid] = par
    return EdgeOrientationReport(True, orientation, None)


def _odd_strip(
    adj: dict[int, list[tuple[int, int, int]]], start: int, goal: int, closing: int
) -> tuple[int, ...]:
    """Quads along the union-forest path start -> goal, plus the closing quad."""
    prev: dict[int, tuple[int, int]] = {start: (-1, -1)}
    queue = [start]
    while queue:
        cur = queue.pop(0)
        if cur == goal:
            break
        for nxt, _, quad in adj[cur]:
            if nxt not in prev:
                prev[nxt] = (cur, quad)
                queue.append(nxt)
    if goal not in prev:
        raise AssertionError("conflicting edges are not connected")
    quads = [closing]
    cur = goal
    while prev[cur][0] != -1:
        cur, quad = prev[cur]
        quads.append(quad)
    quads.reverse()
    return tuple(quads)


@dataclass(frozen=True)
class ComponentImmersion:
    """Multiple-point data of one dual manifold inside its source complex."""

    double_curves: tuple[int, ...]
    triple_points: int
    double_points: int


@dataclass(frozen=True)
class ImmersionReport:
    components: tuple[ComponentImmersion, ...]
    total_double_curves: int
    total_triple_points: int
    total_double_points: int


def immersion_report(c: CubicalComplex) -> ImmersionReport:
    """Count double curves and triple points of each dual manifold.

    Two midcubes of one top cell cross inside that cell; the crossing is a
    multiple point of a single dual manifold only when both belong to it.
    For d = 3 the double locus of a component is a union of curves through
    the 2-face centers, each crossing cell contributing one segment; a cell
    whose three midsquares all lie in one component contributes a triple
    point.  For d = 2 crossings are isolated double points at square centers.
    """
    d = c.dim
    dc = derivative_complex(c)
    comps = dual_manifold_components(dc)
    comp_of: dict[tuple[int, int], int] = {}
    for mi, m in enumerate(comps):
        for fi in m.cells:
            comp_of[dc.facets[fi]] = mi

    if d == 2:
        double = [0] * len(comps)
        for qi in range(len(c.faces(2))):
            a = comp_of[(qi, 0)]
            b = comp_of[(qi, 1)]
            if a == b:
                double[a] += 1
        parts = tuple(
            ComponentImmersion((), 0, double[i]) for i in range(len(comps))
        )
        return ImmersionReport(parts, 0, 0, sum(double))

    if d != 3:
        raise ValueError("immersion report implemented for dimensions 2 and 3")

    graphs: list[dict[tuple[int, ...], list[tuple]]] = [dict() for _ in comps]
    triples = [0] * len(comps)
    faces2 = {frozenset(f): i for i, f in enumerate(c.faces(2))}
    for ci in range(len(c.faces(3))):
        order = c.cube_order((3, ci))
        owners = [comp_of[(ci, a)] for a in range(3)]
        if owners[0] == owners[1] == owners[2]:
            triples[owners[0]] += 1
        for a, b in itertools.combinations(range(3), 2):
            if owners[a] != owners[b]:
                continue
            mi = owners[a]
            axis = 3 - a - b
            nodes = []
            for side in (0, 1):
                verts = frozenset(
                    order[code]
                    for code in range(8)
                    if (code >> axis & 1) == side
                )
                nodes.append(faces2[verts])
            seg = (nodes[0], nodes[1], ci, (a, b))
            g = graphs[mi]
            g.setdefault(nodes[0], []).append(seg)
            g.setdefault(nodes[1], []).append(seg)

    parts = []
    for mi in range(len(comps)):
        lengths = _curve_lengths(graphs[mi])
        parts.append(ComponentImmersion(lengths, triples[mi], 0))
    return ImmersionReport(
        tuple(parts),
        sum(len(p.double_curves) for p in parts),
        sum(triples),
        0,
    )


def _curve_lengths(graph: dict) -> tuple[int, ...]:
    """Split a graph of degree <= 2 into paths and cycles; return edge counts."""
    for node, segs in graph.items():
        if len(segs) > 2:
            raise AssertionError("double locus has a node of degree > 2")
    seen: set[tuple] = set()
    lengths = []
    # Open paths first: start from degree-1 nodes.
    for node, segs in graph.items():
        if len(segs) != 1:
            continue
        seg = segs[0]
        if seg in seen:
            continue
        lengths.append(_walk(graph, node, seg, seen))
    for node, segs in graph.items():
        for seg in segs:
            if seg not in seen:
                lengths.append(_walk(graph, node, seg, seen))
                break
    return tuple(sorted(lengths))


def _walk(graph: dict, node: tuple, seg: tuple, seen: set) -> int:
    count = 0
    while seg not in seen:
        seen.add(seg)
        count += 1
        node = seg[1] if seg[0] == node else seg[0]
        nxt = [s for s in graph[node] if s is not seg]
        if not nxt:
            break
        seg = nxt[0]
    return count


def banchoff_parity_check(m: DualManifold, t: int) -> bool:
    """Triple points of a closed surface immersion match its Euler parity."""
    return (t - m.euler) % 2 == 0
