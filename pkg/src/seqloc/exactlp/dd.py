"""Vertex/facet conversion by the double description method.

Everything here is exact.  The cone engine ``extreme_rays`` works on
integer rows with Python-int bitsets recording which rows each ray is
tight on; the adjacency of two rays is decided combinatorially.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .linalg import as_rational, integer_scaling, inverse, nullspace, rank_mod_p, rref, sign_normalized

_INT64_SAFE = 1 << 62


class DDError(ValueError):
    pass


@dataclass(frozen=True)
class Facet:
    """The inequality ``normal @ x <= offset`` with coprime integer data."""

    normal: tuple[int, ...]
    offset: int

    def value(self, point) -> Fraction:
        return sum((a * as_rational(v) for a, v in zip(self.normal, point)), Fraction(0))

    def as_list(self) -> list[int]:
        return list(self.normal) + [self.offset]


@dataclass(frozen=True)
class Hull:
    """Facets and affine-hull equalities of a finite point set.

    ``coordinates`` are the positions of the original coordinates that
    parametrize the affine hull.  Facet normals are zero outside them, so
    each facet has a unique representation.
    """

    facets: tuple[Facet, ...]
    equalities: tuple[Facet, ...]
    coordinates: tuple[int, ...]
    dimension: int


def _reduce(vec) -> tuple[int, ...]:
    g = math.gcd(*vec)
    return tuple(v // g for v in vec) if g > 1 else tuple(vec)


def _products(rays, row, int64_ok: bool):
    if int64_ok:
        return (np.array(rays, dtype=np.int64) @ np.array(row, dtype=np.int64)).tolist()
    return [sum(a * b for a, b in zip(r, row)) for r in rays]


def extreme_rays(rows: list[list[int]], order: list[int] | None = None) -> list[tuple[tuple[int, ...], int]]:
    """Extreme rays of the pointed cone ``{y : row @ y >= 0 for all rows}``.

    ``rows`` must have full column rank.  Rows are inserted in ``order``
    (default: input order) after a greedy initial basis.  Returns
    ``(ray, tight_mask)`` pairs, the mask having bit ``i`` set when the ray
    lies on row ``i``.
    """
    rows = [list(map(int, r)) for r in rows]
    n = len(rows)
    if n == 0:
        raise DDError("no rows")
    dim = len(rows[0])
    order = list(range(n)) if order is None else list(order)

    # greedy basis in insertion order
    basis: list[int] = []
    echelon: list[tuple[int, list[Fraction]]] = []
    for i in order:
        vec = [Fraction(v) for v in rows[i]]
        for piv, erow in echelon:
            if vec[piv]:
                f = vec[piv]
                vec = [a - f * b for a, b in zip(vec, erow)]
        piv = next((c for c, v in enumerate(vec) if v), None)
        if piv is None:
            continue
        inv = 1 / vec[piv]
        echelon.append((piv, [v * inv for v in vec]))
        basis.append(i)
        if len(basis) == dim:
            break
    if len(basis) < dim:
        raise DDError("cone is not pointed: rows do not have full column rank")

    inv = inverse([rows[i] for i in basis])
    rays: list[tuple[int, ...]] = []
    masks: list[int] = []
    for j in range(dim):
        col = [inv[r][j] for r in range(dim)]
        ints, _ = integer_scaling(col)
        rays.append(tuple(ints))
        masks.append(sum(1 << basis[k] for k in range(dim) if k != j))

    need = dim - 2
    rest = [i for i in order if i not in set(basis)]
    row_big = max((abs(v) for r in rows for v in r), default=1)
    for i in rest:
        bit = 1 << i
        ray_big = max((abs(v) for r in rays for v in r), default=1)
        int64_ok = ray_big * row_big * dim < _INT64_SAFE
        s = _products(rays, rows[i], int64_ok)
        pos = [j for j, v in enumerate(s) if v > 0]
        neg = [j for j, v in enumerate(s) if v < 0]
        new_rays, new_masks = [], []
        for p in pos:
            zp = masks[p]
            # rays sharing enough tight rows with p; only these can block a pair
            cands = [(t, masks[t]) for t in range(len(rays))
                     if t != p and (zp & masks[t]).bit_count() >= need]
            for q in neg:
                common = zp & masks[q]
                if common.bit_count() < need:
                    continue
                if any(t != q and zt & common == common for t, zt in cands):
                    continue
                sp, sq = s[p], s[q]
                r = [sp * a - sq * b for a, b in zip(rays[q], rays[p])]
                new_rays.append(_reduce(r))
                new_masks.append(common | bit)
        keep = [j for j, v in enumerate(s) if v >= 0]
        masks = [masks[j] | (bit if s[j] == 0 else 0) for j in keep] + new_masks
        rays = [rays[j] for j in keep] + new_rays
    return list(zip(rays, masks))


def affine_hull(points) -> tuple[list[Facet], list[int]]:
    """Equalities of the affine hull and the coordinates parametrizing it."""
    pts = [[as_rational(v) for v in p] for p in points]
    if not pts:
        raise DDError("empty point set")
    base = pts[0]
    diffs = [[a - b for a, b in zip(p, base)] for p in pts[1:]]
    _, pivots = rref(diffs) if diffs else ([], [])
    n = len(base)
    homog = [[Fraction(1)] + p for p in pts]
    eqs = []
    for h in nullspace(homog, n + 1):
        ints, _ = integer_scaling(h)
        ints = sign_normalized(ints[1:] + [-ints[0]])
        eqs.append(Facet(tuple(ints[:-1]), ints[-1]))
    return eqs, list(pivots)


def dd_facets(vertices, verify: bool = True) -> Hull:
    """Facets of the convex hull of ``vertices`` inside its affine hull.

    Facets are returned sorted, as coprime integer inequalities whose
    normals live on ``Hull.coordinates``.  With ``verify`` every facet is
    re-checked to be valid on all points and tight on an affinely
    spanning subset of them.
    """
    vertices = [[as_rational(v) for v in p] for p in vertices]
    if not vertices:
        raise DDError("empty vertex list")
    n = len(vertices[0])
    if any(len(p) != n for p in vertices):
        raise DDError("points have different dimensions")
    eqs, coords = affine_hull(vertices)
    dim = len(coords)
    if dim == 0:
        return Hull((), tuple(eqs), (), 0)
    rows = []
    for p in vertices:
        ints, _ = integer_scaling([Fraction(1)] + [p[c] for c in coords])
        rows.append(ints)
    facets = set()
    for ray, _mask in extreme_rays(rows):
        normal = [0] * n
        for c, v in zip(coords, ray[1:]):
            normal[c] = -v
        facets.add(Facet(tuple(normal), ray[0]))
    facets = sorted(facets, key=lambda f: f.as_list())
    hull = Hull(tuple(facets), tuple(eqs), tuple(coords), dim)
    if verify:
        check_hull(hull, vertices)
    return hull


def check_hull(hull: Hull, vertices) -> None:
    """Exact validity and tightness checks for every facet."""
    coords = hull.coordinates
    lifted = []
    for p in vertices:
        ints, _ = integer_scaling([Fraction(1)] + [as_rational(p[c]) for c in coords])
        lifted.append(ints)
    for f in hull.facets:
        tight = []
        for p, row in zip(vertices, lifted):
            v = f.value(p)
            if v > f.offset:
                raise DDError(f"facet {f.as_list()} is violated by a vertex")
            if v == f.offset:
                tight.append(row)
        if len(tight) < hull.dimension or rank_mod_p(tight) < hull.dimension:
            raise DDError(f"facet {f.as_list()} is not tight on an affinely spanning set")
    for e in hull.equalities:
        if any(e.value(p) != e.offset for p in vertices):
            raise DDError("equality violated by a vertex")


def dd_vertices(inequalities, equalities=()) -> list[tuple[Fraction, ...]]:
    """Vertices of the bounded polytope ``{x : a @ x <= b, e @ x == f}``.

    Constraints are ``(normal, offset)`` pairs or :class:`Facet` objects.
    """
    def unpack(c):
        return (list(c.normal), c.offset) if isinstance(c, Facet) else (list(c[0]), c[1])

    ineqs = [unpack(c) for c in inequalities]
    eqs = [unpack(c) for c in equalities]
    if not ineqs:
        raise DDError("no inequalities")
    n = len(ineqs[0][0])
    eq_rows = [[as_rational(v) for v in a] + [as_rational(b)] for a, b in eqs]
    # particular solution and nullspace of the equality system
    if eq_rows:
        reduced, pivots = rref(eq_rows)
        if n in pivots:
            return []
        x0 = [Fraction(0)] * n
        for row, p in zip(reduced, pivots):
            x0[p] = row[n]
        basis = nullspace([r[:n] for r in eq_rows], n)
    else:
        x0 = [Fraction(0)] * n
        basis = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    k = len(basis)
    if k == 0:
        ok = all(sum(as_rational(a) * x for a, x in zip(a_, x0)) <= as_rational(b) for a_, b in ineqs)
        return [tuple(x0)] if ok else []
    rows = []
    for a, b in ineqs:
        a = [as_rational(v) for v in a]
        slack = as_rational(b) - sum(u * v for u, v in zip(a, x0))
        coeff = [-sum(u * h[j] for j, u in enumerate(a)) for h in basis]
        ints, _ = integer_scaling([slack] + coeff)
        rows.append(ints)
    rows.append([1] + [0] * k)
    out = set()
    for ray, _ in extreme_rays(rows):
        t = ray[0]
        if t <= 0:
            raise DDError("polytope is unbounded")
        z = [Fraction(v, t) for v in ray[1:]]
        out.add(tuple(x0[i] + sum(z[j] * basis[j][i] for j in range(k)) for i in range(n)))
    return sorted(out)
