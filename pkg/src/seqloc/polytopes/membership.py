"""Membership oracles for the time-ordered local, Bell-local and
post-selection-local sets, and maximization over the latter."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..core import (BINARY_11, BINARY_12, RATIONAL, Scenario, SequentialCorrelations, ShapeError,
                    free_parameters, merged, require_sequential, validate_sequential)
from ..exactlp.lp import LinearProgram, LpResult, solve_lp, verify
from .functionals import CHSH_PATTERNS, PROBABILITY, BellFunctional, chsh_values
from .strategies import TimeOrderedModel, VertexSet, local_vertex_set, toloc_vertex_set


class NotRationalError(TypeError):
    """Membership needs exact input; rationalize floating correlations first."""


@dataclass(frozen=True)
class Membership:
    """Answer of a polytope membership oracle.

    ``member`` comes with ``model`` (a mixture reproducing the input) or,
    when false, with ``functional``: valid on every vertex, violated by
    the input.  ``model`` lives on ``model_scenario`` (the merged scenario
    for Bell locality).
    """

    member: bool
    model: TimeOrderedModel | None = None
    functional: BellFunctional | None = None
    lps: tuple[LpResult, ...] = field(default=(), compare=False, repr=False)

    def to_json(self) -> dict:
        out = {"member": self.member}
        if self.model is not None:
            out["model"] = self.model.to_json()
        if self.functional is not None:
            out["functional"] = self.functional.to_json()
        return out


def _require_exact(P: SequentialCorrelations):
    if not P.exact:
        raise NotRationalError("membership needs rational correlations; run rationalize first")


def _int_vec(values) -> list[Fraction]:
    return [Fraction(v) for v in values]


def hull_membership(P: SequentialCorrelations, vertices: VertexSet) -> Membership:
    """Decide whether ``P`` is a convex combination of ``vertices``.

    A feasibility LP finds a sparse model.  When there is none, a second
    LP maximizes the gauge of ``P`` relative to the barycentre ``c`` of the
    vertices, ``min sum(u) s.t. sum_v u_v (v - c) = P - c``; its optimal
    dual is a facet-defining separating functional.  Both LPs run in the
    free-parameter coordinates of the scenario.
    """
    sc = P.scenario
    fp = free_parameters(sc)
    E = fp.extraction.astype(np.int64)
    theta_v = vertices.array.astype(np.int64) @ E.T          # n x k integers
    theta_p = list(fp.extract(P))
    n, k = theta_v.shape

    rows = [[int(theta_v[v, i]) for v in range(n)] for i in range(k)] + [[1] * n]
    rhs = theta_p + [Fraction(1)]
    feas_lp = LinearProgram([0] * n, a_eq=rows, b_eq=rhs)
    feas = solve_lp(feas_lp)
    verify(feas_lp, feas)
    if feas.status == "optimal":
        comps = [(w, *vertices.pair(v)) for v, w in enumerate(feas.x) if w]
        model = TimeOrderedModel(sc, tuple(comps))
        return Membership(True, model=model, lps=(feas,))

    S = theta_v.sum(axis=0)
    cols = n * theta_v - S                                   # n x k
    g_rows = [[int(cols[v, i]) for v in range(n)] for i in range(k)]
    g_rhs = [n * t - int(S[i]) for i, t in enumerate(theta_p)]
    gauge_lp = LinearProgram([-1] * n, a_eq=g_rows, b_eq=g_rhs)
    gauge = solve_lp(gauge_lp)
    verify(gauge_lp, gauge)
    if gauge.status == "optimal":
        if -gauge.optimum <= 1:
            raise ArithmeticError("feasibility and gauge programs disagree")
        g = [-y for y in gauge.y_eq]
        coeffs_theta = [n * v for v in g]
        bound = 1 + sum((gi * int(si) for gi, si in zip(g, S)), Fraction(0))
    else:
        # P is outside the span of the vertices: a Farkas vector separates it
        g = [-y for y in gauge.y_eq]
        coeffs_theta = [n * v for v in g]
        bound = sum((gi * int(si) for gi, si in zip(g, S)), Fraction(0))
    beta = [sum((coeffs_theta[i] * int(E[i, j]) for i in range(k) if E[i, j]), Fraction(0))
            for j in range(sc.size)]
    functional = BellFunctional(beta, bound, PROBABILITY, sc, "separating")
    return Membership(False, functional=functional, lps=(feas, gauge))


def member_toloc(P: SequentialCorrelations) -> Membership:
    """Time-ordered local model, or a separating functional."""
    _require_exact(P)
    require_sequential(P)
    return hull_membership(P, toloc_vertex_set(P.scenario))


def member_bell_local(P: SequentialCorrelations) -> Membership:
    """Bell locality with each party's steps merged into one measurement.

    The functional of a negative answer is expressed on ``P``'s own
    scenario (merging does not reorder entries).
    """
    _require_exact(P)
    require_sequential(P)
    M = merged(P)
    res = hull_membership(M, local_vertex_set(M.scenario))
    if res.functional is not None:
        f = res.functional
        res = Membership(False, functional=BellFunctional(f.coefficients, f.bound, PROBABILITY, P.scenario,
                                                          "separating"), lps=res.lps)
    return res


def verify_membership(P: SequentialCorrelations, res: Membership, vertices: VertexSet) -> None:
    """Offline re-check of a membership certificate."""
    if res.member:
        Q = res.model.reconstruct()
        if list(Q.flat()) != list(P.flat()):
            raise ArithmeticError("model does not reproduce the correlations")
    else:
        f = res.functional
        vals = BellFunctional(f.coefficients, f.bound, PROBABILITY, vertices.scenario).values_on(vertices.array)
        if max(vals) > f.bound:
            raise ArithmeticError("separating functional is violated by a vertex")
        if f.value(P) <= f.bound:
            raise ArithmeticError("separating functional is not violated by the input")


# ------------------------------------------------------------ 2x2 locality

def fine_local(box: SequentialCorrelations) -> bool:
    """Locality of a 2-input/2-output no-signalling box by CHSH tests."""
    if box.scenario != BINARY_11:
        raise ShapeError("Fine's criterion applies to the (1,1) binary scenario")
    rep = validate_sequential(box)
    if not rep.ok:
        raise ValueError("box is not no-signalling")
    bound = 2 if box.exact else 2 + box.tolerance
    return max(chsh_values(box.flat())) <= bound


def lp_local(box: SequentialCorrelations) -> bool:
    return member_toloc(box).member


# ------------------------------------------------------------ PostLoc

@dataclass(frozen=True)
class Branch:
    """The unnormalized ``(y_1, b_1)`` branch of a (1,2) binary box."""

    y1: int
    b1: int
    probability: Fraction
    chsh: tuple
    local: bool

    def to_json(self) -> dict:
        return {"y1": self.y1, "b1": self.b1, "probability": str(self.probability),
                "chsh": [str(v) for v in self.chsh], "local": self.local}


def branch_values(P: SequentialCorrelations, y1: int, b1: int) -> list:
    """Entries ``P(a b_1 b_2 | x y_1 y_2)`` at fixed ``(y_1, b_1)`` in (x, y2, a, b2) order."""
    v = P.values
    return [v[x, y1, y2, a, b1, b2] for x, y2, a, b2 in itertools.product(range(2), repeat=4)]


def branches(P: SequentialCorrelations) -> list[Branch]:
    out = []
    for y1, b1 in itertools.product(range(2), repeat=2):
        vals = branch_values(P, y1, b1)
        prob = sum(P.values[0, y1, 0, a, b1, b2] for a, b2 in itertools.product(range(2), repeat=2))
        ch = chsh_values(vals)
        slack = 0 if P.exact else P.tolerance
        out.append(Branch(y1, b1, prob, tuple(ch), max(ch) <= 2 * prob + slack))
    return out


@dataclass(frozen=True)
class PostLocMembership:
    member: bool
    bell: Membership
    branches: tuple[Branch, ...]
    failures: tuple[str, ...]

    def to_json(self) -> dict:
        return {"member": self.member, "failures": list(self.failures), "bell": self.bell.to_json(),
                "branches": [b.to_json() for b in self.branches]}


def member_postloc(P: SequentialCorrelations, cross_check: bool = True) -> PostLocMembership:
    """Bell-local across A|B with every ``(y_1, b_1)`` branch CHSH-local.

    Branches use the multiplied-through form ``CHSH(branch) <= 2 P(b_1|y_1)``
    which is vacuous on impossible branches.  With ``cross_check`` each
    branch of positive probability is also decided by the vertex LP.
    """
    if P.scenario != BINARY_12:
        raise ShapeError("PostLoc is implemented for the (1,2) binary scenario")
    _require_exact(P)
    require_sequential(P)
    bell = member_bell_local(P)
    brs = branches(P)
    failures = []
    if not bell.member:
        failures.append("bell-local")
    for br in brs:
        if not br.local:
            failures.append(f"branch y1={br.y1} b1={br.b1}")
        if cross_check and br.probability > 0:
            box = SequentialCorrelations(BINARY_11, [v / br.probability for v in branch_values(P, br.y1, br.b1)],
                                         RATIONAL)
            if lp_local(box) != br.local:
                raise ArithmeticError("CHSH test and vertex LP disagree on a branch")
    return PostLocMembership(not failures, bell, tuple(brs), tuple(failures))


@dataclass(frozen=True)
class PostLocMaximum:
    functional: BellFunctional
    optimum: Fraction
    maximizer: SequentialCorrelations
    weights: tuple
    lp: LpResult = field(repr=False, compare=False)

    def to_json(self) -> dict:
        return {"optimum": str(self.optimum), "maximizer": self.maximizer.to_json()}


def _entry(x, y1, y2, a, b1, b2) -> int:
    return ((((x * 2 + y1) * 2 + y2) * 2 + a) * 2 + b1) * 2 + b2


def branch_chsh_rows() -> list[list[int]]:
    """Rows ``r`` with ``r @ p <= 0`` meaning branch CHSH ``<= 2 P(b_1|y_1)``,
    for each ``(y_1, b_1)`` and each of the 8 sign patterns."""
    rows = []
    for y1, b1 in itertools.product(range(2), repeat=2):
        for pat in CHSH_PATTERNS:
            r = [0] * 64
            for (x, y2), s in zip(itertools.product(range(2), repeat=2), pat):
                for a, b2 in itertools.product(range(2), repeat=2):
                    r[_entry(x, y1, y2, a, b1, b2)] += s * (-1) ** (a + b2)
            for a, b2 in itertools.product(range(2), repeat=2):
                r[_entry(0, y1, 0, a, b1, b2)] -= 2
            rows.append(r)
    return rows


def first_step_rows() -> list[list[int]]:
    """``P(a b_1 | x y_1 y_2)`` must not depend on ``y_2``: 16 equality rows."""
    rows = []
    for x, y1, a, b1 in itertools.product(range(2), repeat=4):
        r = [0] * 64
        for b2 in range(2):
            r[_entry(x, y1, 0, a, b1, b2)] += 1
            r[_entry(x, y1, 1, a, b1, b2)] -= 1
        rows.append(r)
    return rows


def maximize_over_postloc(functional: BellFunctional) -> PostLocMaximum:
    """Exact maximum of ``functional`` over the post-selection-local set.

    Variables are the weights of the 1024 deterministic boxes of the
    merged scenario, so Bell locality holds by construction; equality rows
    keep B's first step independent of ``y_2`` and inequality rows make
    every branch CHSH-local.
    """
    if functional.scenario != BINARY_12:
        raise ShapeError("PostLoc is implemented for the (1,2) binary scenario")
    beta = functional.to_probability()
    M_sc = Scenario((2,), (4,), (2,), (4,))
    V = local_vertex_set(M_sc).array.astype(object)
    n = len(V)
    obj_ints = V @ np.array(beta.coefficients, dtype=object)
    a_eq = [[1] * n] + [list(V @ np.array(r, dtype=object)) for r in first_step_rows()]
    b_eq = [1] + [0] * 16
    a_ub = [list(V @ np.array(r, dtype=object)) for r in branch_chsh_rows()]
    b_ub = [0] * len(a_ub)
    lp = LinearProgram(list(obj_ints), a_eq=a_eq, b_eq=b_eq, a_ub=a_ub, b_ub=b_ub)
    res = solve_lp(lp)
    verify(lp, res)
    if res.status != "optimal":
        raise ArithmeticError(f"PostLoc program is {res.status}")
    p = np.zeros(64, dtype=object)
    p[:] = Fraction(0)
    for w, row in zip(res.x, V):
        if w:
            p = p + w * row
    P = SequentialCorrelations(BINARY_12, p, RATIONAL)
    return PostLocMaximum(functional, res.optimum, P, tuple(res.x), res)
