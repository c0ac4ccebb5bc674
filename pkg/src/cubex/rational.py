"""Exact rational linear algebra.

Vectors are tuples of ``fractions.Fraction``, matrices are sequences of
row vectors.  Everything in this module is exact; no floats and no
tolerances appear anywhere.

Functions
---------
rat, vec            coercion helpers
vadd, vsub, vneg, vscale, vdot   componentwise vector arithmetic
solve               one exact solution of a linear system
rank, det, nullspace
affine_rank         dimension of the affine hull of a point set
barycentric         affine coordinates of a point w.r.t. a point set
affine_value        evaluate the affine interpolant of vertex data
affine_fit          particular affine function through given values
hyperplane_through  the unique hyperplane spanned by a point set
canonical_hyperplane  content- and sign-normalized (normal, offset) pair
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence

Vec = tuple[Fraction, ...]

ZERO = Fraction(0)
ONE = Fraction(1)


def rat(x) -> Fraction:
    """Coerce an int, a string like ``'3/4'``, or a Fraction to a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"not an exact rational: {x!r}")


def vec(*xs) -> Vec:
    return tuple(rat(x) for x in xs)


def vadd(a: Vec, b: Vec) -> Vec:
    return tuple(x + y for x, y in zip(a, b, strict=True))


def vsub(a: Vec, b: Vec) -> Vec:
    return tuple(x - y for x, y in zip(a, b, strict=True))


def vneg(a: Vec) -> Vec:
    return tuple(-x for x in a)


def vscale(c: Fraction, a: Vec) -> Vec:
    return tuple(c * x for x in a)


def vdot(a: Vec, b: Vec) -> Fraction:
    return sum((x * y for x, y in zip(a, b, strict=True)), ZERO)


def is_zero(a: Vec) -> bool:
    return all(x == 0 for x in a)


def _eliminate(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Row echelon form in place; returns (rows, pivot column indices)."""
    if not rows:
        return rows, []
    ncols = len(rows[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pr = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows, pivots


def solve(a: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> list[Fraction] | None:
    """One exact solution of ``a x = b`` or None if inconsistent.

    Free variables are set to zero, so the result is a particular solution.
    """
    m = len(a)
    if m == 0:
        return []
    n = len(a[0])
    rows = [list(ra) + [rb] for ra, rb in zip(a, b, strict=True)]
    rows, pivots = _eliminate(rows)
    for row in rows:
        if all(x == 0 for x in row[:n]) and row[n] != 0:
            return None
    x = [ZERO] * n
    for r, c in enumerate(pivots):
        if c == n:
            return None
        x[c] = rows[r][n]
    return x


def rank(a: Sequence[Sequence[Fraction]]) -> int:
    rows = [list(r) for r in a]
    _, pivots = _eliminate(rows)
    return len(pivots)


def det(a: Sequence[Sequence[Fraction]]) -> Fraction:
    n = len(a)
    rows = [list(r) for r in a]
    sign = 1
    result = ONE
    for c in range(n):
        pr = next((i for i in range(c, n) if rows[i][c] != 0), None)
        if pr is None:
            return ZERO
        if pr != c:
            rows[c], rows[pr] = rows[pr], rows[c]
            sign = -sign
        piv = rows[c][c]
        result *= piv
        for i in range(c + 1, n):
            if rows[i][c] != 0:
                f = rows[i][c] / piv
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[c])]
    return result if sign > 0 else -result


def nullspace(a: Sequence[Sequence[Fraction]]) -> list[Vec]:
    """Basis of the right null space of ``a``."""
    if not a:
        return []
    n = len(a[0])
    rows = [list(r) for r in a]
    rows, pivots = _eliminate(rows)
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fc in free:
        v = [ZERO] * n
        v[fc] = ONE
        for r, pc in enumerate(pivots):
            v[pc] = -rows[r][fc]
        basis.append(tuple(v))
    return basis


def affine_rank(points: Sequence[Vec]) -> int:
    """Dimension of the affine hull; -1 for the empty set."""
    if not points:
        return -1
    p0 = points[0]
    return rank([vsub(p, p0) for p in points[1:]])


def barycentric(points: Sequence[Vec], x: Vec) -> list[Fraction] | None:
    """Affine coordinates lam with sum(lam)=1, sum(lam*p)=x; None if x not in aff."""
    n = len(points)
    d = len(x)
    a = [[points[j][i] for j in range(n)] for i in range(d)]
    a.append([ONE] * n)
    b = list(x) + [ONE]
    return solve(a, b)


def affine_value(points: Sequence[Vec], values: Sequence[Fraction], x: Vec) -> Fraction:
    """Value at ``x`` of the affine function interpolating (points, values).

    Requires ``x`` in the affine hull of the points and the data to be
    affinely consistent; both are raised on otherwise.
    """
    lam = barycentric(points, x)
    if lam is None:
        raise ValueError("point outside the affine hull")
    if affine_fit(points, values) is None:
        raise ValueError("vertex data is not affine on this cell")
    return sum((l * v for l, v in zip(lam, values, strict=True)), ZERO)


def affine_fit(
    points: Sequence[Vec], values: Sequence[Fraction]
) -> tuple[Vec, Fraction] | None:
    """A pair (a, b) with a.p + b = value for all samples, or None.

    On affinely dependent point sets the fit is a particular solution,
    valid on the affine hull of the points only.
    """
    rows = [list(p) + [ONE] for p in points]
    sol = solve(rows, values)
    if sol is None:
        return None
    return tuple(sol[:-1]), sol[-1]


def hyperplane_through(points: Sequence[Vec]) -> tuple[Vec, Fraction] | None:
    """The unique hyperplane containing the points, or None.

    Returns a canonicalized (normal, offset) pair describing
    {x : normal.x = offset}; None unless the affine hull has codimension 1.
    """
    if not points:
        return None
    p0 = points[0]
    kernel = nullspace([vsub(p, p0) for p in points[1:]])
    if len(kernel) != 1:
        return None
    n = kernel[0]
    return canonical_hyperplane(n, vdot(n, p0))


def canonical_hyperplane(normal: Vec, offset: Fraction) -> tuple[Vec, Fraction]:
    """Scale (normal, offset) to coprime integers, first nonzero positive."""
    if is_zero(normal):
        raise ValueError("zero normal")
    nums = list(normal) + [offset]
    denom_lcm = 1
    for x in nums:
        denom_lcm = denom_lcm * x.denominator // gcd(denom_lcm, x.denominator)
    ints = [x * denom_lcm for x in nums]
    g = 0
    for x in ints:
        g = gcd(g, x.numerator)
    lead = next(x for x in ints[:-1] if x != 0)
    s = Fraction(denom_lcm, g) if lead > 0 else Fraction(-denom_lcm, g)
    return tuple(x * s for x in normal), offset * s
