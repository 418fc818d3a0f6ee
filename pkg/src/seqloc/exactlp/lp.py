"""Exact rational linear programming.

The solver is a two-phase primal simplex on a fraction-free (integer
pivoting) tableau: every entry is an integer and the true tableau is the
stored one divided by a common positive denominator.  Bland's rule picks
both the entering and the leaving variable, so identical inputs always
follow the same pivot path and produce identical certificates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .linalg import as_rational, integer_scaling


class LpError(ValueError):
    """Malformed linear program."""


class CertificateError(ArithmeticError):
    """A returned certificate failed exact re-verification."""


def _vec(values) -> tuple[Fraction, ...]:
    return tuple(as_rational(v) for v in values)


def _mat(rows) -> tuple[tuple[Fraction, ...], ...]:
    return tuple(_vec(r) for r in rows)


@dataclass(frozen=True)
class LinearProgram:
    """maximize ``objective @ x`` subject to

    ``a_eq @ x == b_eq``, ``a_ub @ x <= b_ub`` and ``x[j] >= lower[j]``
    (``lower[j] is None`` marks a free variable).  ``lower`` defaults to
    all zeros.
    """

    objective: tuple
    a_eq: tuple = ()
    b_eq: tuple = ()
    a_ub: tuple = ()
    b_ub: tuple = ()
    lower: tuple | None = None

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "objective", _vec(self.objective))
        n = len(self.objective)
        set_(self, "a_eq", _mat(self.a_eq))
        set_(self, "b_eq", _vec(self.b_eq))
        set_(self, "a_ub", _mat(self.a_ub))
        set_(self, "b_ub", _vec(self.b_ub))
        if self.lower is None:
            set_(self, "lower", (Fraction(0),) * n)
        else:
            set_(self, "lower", tuple(None if v is None else as_rational(v) for v in self.lower))
        if len(self.lower) != n:
            raise LpError(f"lower has {len(self.lower)} entries, expected {n}")
        for name, a, b in (("eq", self.a_eq, self.b_eq), ("ub", self.a_ub, self.b_ub)):
            if len(a) != len(b):
                raise LpError(f"a_{name} has {len(a)} rows but b_{name} has {len(b)}")
            for i, row in enumerate(a):
                if len(row) != n:
                    raise LpError(f"a_{name} row {i} has {len(row)} entries, expected {n}")

    @property
    def n_vars(self) -> int:
        return len(self.objective)


@dataclass(frozen=True)
class LpResult:
    """Outcome of :func:`solve_lp`.

    For ``optimal``: ``x`` is an optimal point and ``(y_eq, y_ub)`` an
    optimal dual.  For ``infeasible``: ``(y_eq, y_ub)`` is a Farkas vector,
    i.e. ``w = A^T y`` vanishes on free variables, is nonnegative on
    bounded ones, and ``b @ y - w @ lower < 0``.  For ``unbounded``: ``x``
    is feasible and ``ray`` an improving recession direction.
    """

    status: str
    optimum: Fraction | None = None
    x: tuple | None = None
    y_eq: tuple | None = None
    y_ub: tuple | None = None
    ray: tuple | None = None
    pivots: int = field(default=0, compare=False)

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


class _Tableau:
    """Integer tableau; true entries are ``T / d``."""

    def __init__(self, T, d, basis):
        self.T = T
        self.d = d
        self.basis = basis
        self.pivots = 0

    def pivot(self, r: int, k: int) -> None:
        T = self.T
        row = T[r].copy()
        col = T[:, k].copy()
        p = row[k]
        T = (T * p - np.outer(col, row)) // self.d
        T[r] = row
        self.d = p
        if p < 0:
            T = -T
            self.d = -p
        self.T = T
        self.basis[r - 1] = k
        self.pivots += 1

    def entering(self, allowed: int) -> int | None:
        neg = np.nonzero(self.T[0, :allowed] < 0)[0]
        return int(neg[0]) if neg.size else None

    def leaving(self, k: int) -> int | None:
        T = self.T
        best = None
        for i in np.nonzero(T[1:, k] > 0)[0] + 1:
            i = int(i)
            if best is None:
                best = i
                continue
            lhs = T[i, -1] * T[best, k]
            rhs = T[best, -1] * T[i, k]
            if lhs < rhs or (lhs == rhs and self.basis[i - 1] < self.basis[best - 1]):
                best = i
        return best

    def run(self, allowed: int) -> int | None:
        """Pivot to optimality; return an unbounded column or None."""
        while True:
            k = self.entering(allowed)
            if k is None:
                return None
            r = self.leaving(k)
            if r is None:
                return k
            self.pivot(r, k)


def solve_lp(lp: LinearProgram) -> LpResult:
    """Solve ``lp`` exactly. See :class:`LpResult` for the certificates."""
    n = lp.n_vars
    # column map: (orig var, sign) per structural column
    cols: list[tuple[int, int]] = []
    for j, lo in enumerate(lp.lower):
        cols.append((j, 1))
        if lo is None:
            cols.append((j, -1))
    rows = list(lp.a_eq) + list(lp.a_ub)
    rhs = list(lp.b_eq) + list(lp.b_ub)
    m_eq, m = len(lp.a_eq), len(rows)
    shift = [lo if lo is not None else Fraction(0) for lo in lp.lower]
    n_struct = len(cols) + len(lp.a_ub)

    scale: list[Fraction] = []
    int_rows = []
    for i in range(m):
        coeffs = [rows[i][j] * s for j, s in cols]
        coeffs += [Fraction(int(i - m_eq == u)) for u in range(len(lp.a_ub))]
        b = rhs[i] - sum(rows[i][j] * shift[j] for j in range(n) if shift[j])
        sign = -1 if b < 0 else 1
        ints, lam = integer_scaling([sign * v for v in coeffs] + [sign * b])
        scale.append(sign * lam)
        int_rows.append(ints)

    width = n_struct + m + 1
    T = np.zeros((m + 1, width), dtype=object)
    T[:] = 0
    for i, ints in enumerate(int_rows):
        T[i + 1, :n_struct] = ints[:-1]
        T[i + 1, n_struct + i] = 1
        T[i + 1, -1] = ints[-1]
    if m:
        T[0, :n_struct] = -T[1:, :n_struct].sum(axis=0)
        T[0, -1] = -T[1:, -1].sum()
    tab = _Tableau(T, 1, [n_struct + i for i in range(m)])

    # phase I: maximize -sum(artificials)
    tab.run(n_struct + m)
    if tab.T[0, -1] < 0:
        y = [Fraction(0)] * m
        for i in range(m):
            y[i] = Fraction(tab.T[0, n_struct + i], tab.d) - 1
        y_orig = [y[i] * scale[i] for i in range(m)]
        return LpResult("infeasible", y_eq=tuple(y_orig[:m_eq]), y_ub=tuple(y_orig[m_eq:]),
                        pivots=tab.pivots)

    # drive remaining artificials out or drop redundant rows
    r = 1
    while r < tab.T.shape[0]:
        if tab.basis[r - 1] >= n_struct:
            nz = np.nonzero(tab.T[r, :n_struct] != 0)[0]
            if nz.size:
                tab.pivot(r, int(nz[0]))
            else:
                tab.T = np.delete(tab.T, r, axis=0)
                del tab.basis[r - 1]
                continue
        r += 1

    # phase II
    c_struct = [lp.objective[j] * s for j, s in cols] + [Fraction(0)] * len(lp.a_ub)
    c_int, c_lam = integer_scaling(c_struct)
    T = tab.T
    obj = np.zeros(width, dtype=object)
    obj[:] = 0
    obj[:n_struct] = [-c * tab.d for c in c_int]
    for pos, b in enumerate(tab.basis):
        if b < n_struct and c_int[b]:
            obj = obj + c_int[b] * T[pos + 1]
    T[0] = obj
    unbounded_col = tab.run(n_struct)
    T = tab.T
    d = tab.d

    xs = [Fraction(0)] * n_struct
    for pos, b in enumerate(tab.basis):
        if b < n_struct:
            xs[b] = Fraction(T[pos + 1, -1], d)

    def to_original(vec, with_shift):
        x = list(shift) if with_shift else [Fraction(0)] * n
        for (j, s), v in zip(cols, vec):
            x[j] += s * v
        return tuple(x)

    x = to_original(xs, True)
    if unbounded_col is not None:
        k = unbounded_col
        direction = [Fraction(0)] * n_struct
        direction[k] = Fraction(1)
        for pos, b in enumerate(tab.basis):
            if b < n_struct:
                direction[b] = -Fraction(T[pos + 1, k], d)
        return LpResult("unbounded", x=x, ray=to_original(direction, False), pivots=tab.pivots)

    opt = Fraction(T[0, -1], d) / c_lam + sum(c * lo for c, lo in zip(lp.objective, shift))
    y = [Fraction(0)] * m
    # the artificial columns record each tableau row as a combination of the
    # original rows, so row 0 reads off the dual even for deleted rows
    for i in range(m):
        y[i] = Fraction(T[0, n_struct + i], d) / c_lam * scale[i]
    return LpResult("optimal", optimum=opt, x=x, y_eq=tuple(y[:m_eq]), y_ub=tuple(y[m_eq:]),
                    pivots=tab.pivots)


def _dot(a, b):
    return sum((u * v for u, v in zip(a, b)), Fraction(0))


def _reduced(lp: LinearProgram, y_eq, y_ub):
    w = [Fraction(0)] * lp.n_vars
    for row, yi in zip(lp.a_eq, y_eq):
        if yi:
            for j, a in enumerate(row):
                w[j] += a * yi
    for row, yi in zip(lp.a_ub, y_ub):
        if yi:
            for j, a in enumerate(row):
                w[j] += a * yi
    return w


def check_feasible(lp: LinearProgram, x) -> None:
    for i, (row, b) in enumerate(zip(lp.a_eq, lp.b_eq)):
        if _dot(row, x) != b:
            raise CertificateError(f"equality row {i} violated")
    for i, (row, b) in enumerate(zip(lp.a_ub, lp.b_ub)):
        if _dot(row, x) > b:
            raise CertificateError(f"inequality row {i} violated")
    for j, lo in enumerate(lp.lower):
        if lo is not None and x[j] < lo:
            raise CertificateError(f"variable {j} below its lower bound")


def verify(lp: LinearProgram, res: LpResult) -> None:
    """Re-check every certificate in ``res`` by exact substitution."""
    if res.status == "optimal":
        check_feasible(lp, res.x)
        if _dot(lp.objective, res.x) != res.optimum:
            raise CertificateError("primal point does not attain the optimum")
        if any(v < 0 for v in res.y_ub):
            raise CertificateError("negative multiplier on an inequality row")
        w = _reduced(lp, res.y_eq, res.y_ub)
        dual_obj = _dot(lp.b_eq, res.y_eq) + _dot(lp.b_ub, res.y_ub)
        for j, lo in enumerate(lp.lower):
            wj = w[j] - lp.objective[j]
            if lo is None:
                if wj != 0:
                    raise CertificateError(f"dual constraint {j} (free variable) violated")
            else:
                if wj < 0:
                    raise CertificateError(f"dual constraint {j} violated")
                dual_obj -= wj * lo
        if dual_obj != res.optimum:
            raise CertificateError("duality gap is nonzero")
    elif res.status == "infeasible":
        if any(v < 0 for v in res.y_ub):
            raise CertificateError("negative Farkas multiplier on an inequality row")
        w = _reduced(lp, res.y_eq, res.y_ub)
        value = _dot(lp.b_eq, res.y_eq) + _dot(lp.b_ub, res.y_ub)
        for j, lo in enumerate(lp.lower):
            if lo is None:
                if w[j] != 0:
                    raise CertificateError("Farkas vector does not vanish on a free variable")
            else:
                if w[j] < 0:
                    raise CertificateError("Farkas vector negative on a bounded variable")
                value -= w[j] * lo
        if value >= 0:
            raise CertificateError("Farkas vector does not prove infeasibility")
    elif res.status == "unbounded":
        check_feasible(lp, res.x)
        r = res.ray
        for row in lp.a_eq:
            if _dot(row, r) != 0:
                raise CertificateError("ray leaves the equality constraints")
        for row in lp.a_ub:
            if _dot(row, r) > 0:
                raise CertificateError("ray leaves the inequality constraints")
        for j, lo in enumerate(lp.lower):
            if lo is not None and r[j] < 0:
                raise CertificateError("ray decreases a bounded variable")
        if _dot(lp.objective, r) <= 0:
            raise CertificateError("ray does not improve the objective")
    else:
        raise CertificateError(f"unknown status {res.status!r}")


def maximize_over_inequalities(c, G, h) -> LpResult:
    """maximize ``c @ x`` subject to ``G @ x <= h`` with ``x`` free.

    Solved through its dual (few variables, many rows is the intended use):
    minimize ``h @ u`` subject to ``G^T u = c``, ``u >= 0``.  The returned
    result is expressed for the original problem, with ``y_ub = u``.
    """
    c = _vec(c)
    G = _mat(G)
    h = _vec(h)
    n = len(c)
    if any(len(row) != n for row in G):
        raise LpError("row length mismatch")
    cols = list(zip(*G)) if G else [()] * n
    dual = LinearProgram(objective=[-v for v in h], a_eq=cols, b_eq=c)
    res = solve_lp(dual)
    if res.status == "infeasible":
        # Farkas y for the dual is an improving ray of the primal
        ray = tuple(-v for v in res.y_eq)
        primal = LinearProgram(objective=c, a_ub=G, b_ub=h, lower=[None] * n)
        feas = solve_lp(LinearProgram(objective=[0] * n, a_ub=G, b_ub=h, lower=[None] * n))
        if feas.status == "infeasible":
            return LpResult("infeasible", y_eq=(), y_ub=feas.y_ub, pivots=res.pivots + feas.pivots)
        out = LpResult("unbounded", x=feas.x, ray=ray, pivots=res.pivots + feas.pivots)
        verify(primal, out)
        return out
    if res.status == "unbounded":
        return LpResult("infeasible", y_eq=(), y_ub=res.ray, pivots=res.pivots)
    x = tuple(-v for v in res.y_eq)
    return LpResult("optimal", optimum=-res.optimum, x=x, y_eq=(), y_ub=res.x, pivots=res.pivots)
