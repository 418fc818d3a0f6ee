"""Single-copy operational locality program and lifting of post-selected
models.

``oplocal_lp`` maximizes a functional over sequential (1,2) binary boxes
whose four ``(y_1, b_1)`` branches and all wired images are CHSH-local.
Every time-ordered local box is feasible, so the optimum is at least the
time-ordered local maximum; equality means the constraints already force
that bound.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import (BINARY_12, CORRELATOR_SIGNS, RATIONAL, Scenario, SequentialCorrelations, correlator_tensor,
                   to_correlators)
from .exactlp.lp import LinearProgram, LpResult, maximize_over_inequalities, verify
from .polytopes.facets import correlator_vertices, toloc_facets
from .polytopes.functionals import BUILTINS, CHSH_PATTERNS, BellFunctional
from .polytopes.membership import branch_chsh_rows
from .polytopes.strategies import DeterministicStrategy, TimeOrderedModel
from .polytopes.symmetry import NONADAPTIVE, classify_facets
from .wirings import enumerate_wirings


@dataclass(frozen=True)
class Constraint:
    """``normal @ C <= offset`` on the 32 correlators, with its origin."""

    normal: tuple[int, ...]
    offset: int
    origin: str


def _normalized(normal, offset) -> tuple[tuple[int, ...], int]:
    g = math.gcd(*normal, offset)
    if g > 1:
        return tuple(v // g for v in normal), offset // g
    return tuple(normal), offset


def _wired_chsh_rows(K: np.ndarray):
    """CHSH pattern rows on a wired box given by its correlator map ``K``."""
    out = []
    for pat in CHSH_PATTERNS:
        h = np.zeros(K.shape[1], dtype=np.int64)
        for (x, z), s in zip(itertools.product(range(2), repeat=2), pat):
            for a, c in itertools.product(range(2), repeat=2):
                h += s * (-1) ** (a + c) * K[((x * 2 + z) * 2 + a) * 2 + c]
        # (h0 + h @ C) / 8 <= 2
        out.append((pat, h))
    return out


_CONSTRAINT_CACHE: list = []


def oplocal_constraints() -> list[Constraint]:
    """Positivity, branch CHSH and wired CHSH rows, exactly deduplicated.

    Order is deterministic: first occurrence in the sequence positivity,
    branches, wirings (in enumeration order), patterns.
    """
    if _CONSTRAINT_CACHE:
        return _CONSTRAINT_CACHE[0]
    seen: dict[tuple, int] = {}
    rows: list[Constraint] = []

    def add(normal, offset, origin):
        normal = tuple(int(v) for v in normal)
        if not any(normal):
            if offset < 0:
                raise ArithmeticError(f"infeasible constant constraint from {origin}")
            return
        key = _normalized(normal, int(offset))
        if key not in seen:
            seen[key] = len(rows)
            rows.append(Constraint(key[0], key[1], origin))

    for i in range(64):
        # (1 + M_i C) / 8 >= 0
        add(-CORRELATOR_SIGNS[i], 1, f"positivity {i}")
    for k, r in enumerate(branch_chsh_rows()):
        r = np.array(r, dtype=np.int64)
        # r @ (1 + M C) / 8 <= 0
        add(r @ CORRELATOR_SIGNS, -int(r.sum()), f"branch {k // 8} pattern {k % 8}")
    enum = enumerate_wirings()
    for w_idx, K in enumerate(enum.maps):
        for p_idx, (pat, h) in enumerate(_wired_chsh_rows(K)):
            add(h[1:], 16 - int(h[0]), f"wiring {w_idx} pattern {p_idx}")
    _CONSTRAINT_CACHE.append(rows)
    return rows


@dataclass(frozen=True)
class OpLocalLpReport:
    functional: BellFunctional
    optimum: Fraction
    toloc_maximum: Fraction
    maximizer: SequentialCorrelations
    active: tuple[str, ...]
    constraint_count: int
    lp: LpResult = field(repr=False, compare=False)

    @property
    def equal(self) -> bool:
        return self.optimum == self.toloc_maximum

    def to_json(self) -> dict:
        return {"optimum": str(self.optimum), "toloc_maximum": str(self.toloc_maximum), "equal": self.equal,
                "constraint_count": self.constraint_count, "active": list(self.active),
                "maximizer": self.maximizer.to_json()}


def toloc_maximum(functional: BellFunctional) -> Fraction:
    f = functional.to_correlator()
    c0, c = f.coefficients[0], f.coefficients[1:]
    ints = [int(v * _lcm(c)) for v in c]
    vals = correlator_vertices() @ np.array(ints, dtype=np.int64)
    return c0 + Fraction(int(vals.max()), _lcm(c))


def _lcm(values) -> int:
    return math.lcm(*(Fraction(v).denominator for v in values)) or 1


def oplocal_lp(functional: BellFunctional) -> OpLocalLpReport:
    """Maximize ``functional`` subject to the single-copy operational
    locality constraints (branches and wired images CHSH-local)."""
    if functional.scenario != BINARY_12:
        raise ValueError("the operational locality program is implemented for the (1,2) binary scenario")
    f = functional.to_correlator()
    c0, c = f.coefficients[0], f.coefficients[1:]
    cons = oplocal_constraints()
    G = [r.normal for r in cons]
    h = [r.offset for r in cons]
    res = maximize_over_inequalities(c, G, h)
    lp = LinearProgram(c, a_ub=G, b_ub=h, lower=[None] * len(c))
    verify(lp, res)
    if res.status != "optimal":
        raise ArithmeticError(f"operational locality program is {res.status}")
    C = res.x
    P = SequentialCorrelations(BINARY_12, correlator_tensor(C), RATIONAL)
    active = tuple(r.origin for r in cons
                   if sum((a * v for a, v in zip(r.normal, C)), Fraction(0)) == r.offset)
    return OpLocalLpReport(functional, c0 + res.optimum, toloc_maximum(functional), P, active, len(cons), res)


def check_wired_images(P: SequentialCorrelations) -> bool:
    """Every deduplicated wiring image of ``P`` satisfies all CHSH patterns."""
    C = [Fraction(1)] + list(to_correlators(P).values)
    for K in enumerate_wirings().maps:
        for _, h in _wired_chsh_rows(K):
            if sum((int(a) * v for a, v in zip(h, C) if a), Fraction(0)) > 16:
                return False
    return True


@dataclass(frozen=True)
class TheoremRow:
    label: str
    orbit_size: int
    optimum: Fraction
    toloc_maximum: Fraction

    @property
    def equal(self) -> bool:
        return self.optimum == self.toloc_maximum

    def to_json(self) -> dict:
        return {"orbit": self.label, "orbit_size": self.orbit_size, "optimum": str(self.optimum),
                "toloc_maximum": str(self.toloc_maximum), "equal": self.equal}


def certify_theorem1(facets=None, progress=None, group: str = NONADAPTIVE) -> list[TheoremRow]:
    """Run the operational program on one representative per facet orbit.

    The default group is the finer one, so each representative covers an
    orbit of the relabelings that preserve every constraint family.
    """
    if facets is None:
        facets = toloc_facets()
    cls = classify_facets(facets, group)
    rows = []
    for orbit in cls.orbits:
        rep = orbit.representative
        rep_report = oplocal_lp(rep)
        rows.append(TheoremRow(orbit.label, orbit.size, rep_report.optimum, rep_report.toloc_maximum))
        if progress is not None:
            progress(rows[-1])
    return rows


BUILTIN_NAMES = ("positivity", "chsh-first-step", "chsh-second-step", "conditioned-chsh", "sequential-chsh")


def certify_builtins(progress=None) -> list[TheoremRow]:
    """The operational program on each builtin in its own normalization."""
    rows = []
    for name in BUILTIN_NAMES:
        report = oplocal_lp(BUILTINS[name]())
        rows.append(TheoremRow(name, 1, report.optimum, report.toloc_maximum))
        if progress is not None:
            progress(rows[-1])
    return rows


# --------------------------------------------------------- lifting models

def lift_postselected_models(models: dict, first_step: dict, scenario: Scenario) -> TimeOrderedModel:
    """Combine per-``(a_1, b_1)`` models into one model of the full box.

    ``scenario`` has a single setting at both first steps; ``models`` maps
    each outcome pair of positive probability to a model of the box
    post-selected on it, and ``first_step`` maps outcome pairs to
    ``P(a_1 b_1)``.  The hidden variable becomes ``(lambda, a_1, b_1)``
    with first responses fixed to ``a_1`` and ``b_1``.
    """
    if scenario.x_cards[0] != 1 or scenario.y_cards[0] != 1:
        raise ValueError("lifting needs a single setting at each party's first step")
    total = sum((Fraction(v) for v in first_step.values()), Fraction(0))
    if total != 1:
        raise ValueError(f"first-step probabilities sum to {total}, not 1")
    comps = []
    for (a1, b1), q in sorted(first_step.items()):
        q = Fraction(q)
        if q == 0:
            continue
        model = models[(a1, b1)]
        for w, sa, sb in model.components:
            comps.append((w * q, _prepend(sa, a1, scenario, "A"), _prepend(sb, b1, scenario, "B")))
    return TimeOrderedModel(scenario, tuple(comps))


def _prepend(strategy: DeterministicStrategy, first: int, scenario: Scenario, party: str) -> DeterministicStrategy:
    settings, outcomes = scenario.party(party)
    n = math.prod(settings)
    if math.prod(strategy.setting_cards) != n:
        raise ValueError("post-selected model does not match the remaining steps")
    # the first setting has one value, so full setting indices coincide
    tables = ((first,) * n,) + strategy.tables
    return DeterministicStrategy(party, tuple(settings), tuple(outcomes), tables)
