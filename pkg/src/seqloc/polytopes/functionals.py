"""Linear functionals on correlations, in probability or correlator basis."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..core import (BINARY_12, CORRELATOR_EXTRACTION, CORRELATOR_LABELS, CORRELATOR_SIGNS, N_CORRELATORS,
                    Scenario, SequentialCorrelations, ShapeError, _flat12)
from ..exactlp.linalg import as_rational, gcd_of, integer_scaling

PROBABILITY = "probability"
CORRELATOR = "correlator"


@dataclass(frozen=True)
class BellFunctional:
    """``beta(P) <= bound``.

    In probability basis ``coefficients`` has one entry per tensor entry.
    In correlator basis (the (1,2) binary scenario only) it has 33
    entries: a constant term followed by the 32 correlators in
    :data:`seqloc.core.CORRELATOR_LABELS` order.
    """

    coefficients: tuple
    bound: Fraction
    basis: str = PROBABILITY
    scenario: Scenario = BINARY_12
    name: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(as_rational(v) for v in self.coefficients))
        object.__setattr__(self, "bound", as_rational(self.bound))
        expected = self.scenario.size if self.basis == PROBABILITY else N_CORRELATORS + 1
        if self.basis not in (PROBABILITY, CORRELATOR):
            raise ValueError(f"unknown basis {self.basis!r}")
        if self.basis == CORRELATOR and self.scenario != BINARY_12:
            raise ShapeError("correlator basis exists only for the (1,2) binary scenario")
        if len(self.coefficients) != expected:
            raise ShapeError(f"{len(self.coefficients)} coefficients, expected {expected}")

    # -- evaluation
    @property
    def constant(self) -> Fraction:
        """Constant term (nonzero only in correlator basis)."""
        return self.coefficients[0] if self.basis == CORRELATOR else Fraction(0)

    def value(self, P: SequentialCorrelations):
        if P.scenario != self.scenario:
            raise ShapeError("functional and correlations live on different scenarios")
        beta = self.to_probability()
        vals = P.flat()
        if P.exact:
            return self.constant + sum((c * v for c, v in zip(beta.coefficients, vals) if c), Fraction(0))
        return float(self.constant) + float(np.dot(np.array(beta.coefficients, dtype=float), vals.astype(float)))

    def violation(self, P: SequentialCorrelations):
        return self.value(P) - self.bound

    def values_on(self, array) -> list[Fraction]:
        """Exact values on the rows of an integer tensor array."""
        coeffs = self.to_probability().coefficients
        lcm, ints = _common_integer(coeffs)
        raw = np.asarray(array, dtype=object) @ np.array(ints, dtype=object)
        return [self.constant + Fraction(int(v), lcm) for v in raw]

    # -- conversions
    def to_probability(self) -> "BellFunctional":
        if self.basis == PROBABILITY:
            return self
        c0, c = self.coefficients[0], self.coefficients[1:]
        beta = [sum((int(CORRELATOR_EXTRACTION[k, i]) * c[k] for k in range(N_CORRELATORS)
                     if CORRELATOR_EXTRACTION[k, i]), Fraction(0)) for i in range(64)]
        return BellFunctional(beta, self.bound - c0, PROBABILITY, self.scenario, self.name)

    def to_correlator(self) -> "BellFunctional":
        if self.basis == CORRELATOR:
            return self
        if self.scenario != BINARY_12:
            raise ShapeError("correlator basis exists only for the (1,2) binary scenario")
        beta = self.coefficients
        c0 = sum(beta, Fraction(0)) / 8
        c = [sum((b * int(CORRELATOR_SIGNS[i, k]) for i, b in enumerate(beta) if b), Fraction(0)) / 8
             for k in range(N_CORRELATORS)]
        return BellFunctional([c0] + c, self.bound, CORRELATOR, self.scenario, self.name)

    def canonical_correlator(self) -> tuple[tuple[int, ...], int]:
        """Coprime integers ``(c_1..c_32, bound)`` with the constant folded in."""
        f = self.to_correlator()
        c0, c = f.coefficients[0], f.coefficients[1:]
        ints, _ = integer_scaling(list(c) + [f.bound - c0])
        return tuple(ints[:-1]), ints[-1]

    def canonical_probability(self) -> tuple[tuple[int, ...], int]:
        """Probability-basis integers with zero minimum on every setting.

        Starts from the canonical correlator form read at the canonical
        settings, then shifts every setting block so its smallest
        coefficient is 0 (normalization moves the shift into the bound).
        """
        c, b = self.canonical_correlator()
        beta = [int(v) for v in np.array(c, dtype=np.int64) @ CORRELATOR_EXTRACTION]
        bound = b
        block = 8
        for s0 in range(0, 64, block):
            m = min(beta[s0:s0 + block])
            for i in range(s0, s0 + block):
                beta[i] -= m
            bound -= m
        g = gcd_of(beta + [bound])
        if g > 1:
            beta = [v // g for v in beta]
            bound //= g
        return tuple(beta), bound

    def canonical(self) -> "BellFunctional":
        c, b = self.canonical_correlator()
        return BellFunctional((0,) + c, b, CORRELATOR, BINARY_12, self.name)

    def equivalent(self, other: "BellFunctional") -> bool:
        return self.canonical_correlator() == other.canonical_correlator()

    def renamed(self, name: str) -> "BellFunctional":
        return BellFunctional(self.coefficients, self.bound, self.basis, self.scenario, name)

    # -- io
    def to_json(self) -> dict:
        out = {"basis": self.basis, "coefficients": [str(v) for v in self.coefficients],
               "bound": str(self.bound), "scenario": self.scenario.to_json()}
        if self.name:
            out["name"] = self.name
        return out

    @classmethod
    def from_json(cls, data: dict) -> "BellFunctional":
        if not isinstance(data, dict):
            raise ShapeError("functional JSON must be an object")
        if "coeffs_correlator" in data:
            return cls(data["coeffs_correlator"], data["bound"], CORRELATOR, BINARY_12, data.get("orbit"))
        try:
            sc = Scenario.from_json(data["scenario"]) if "scenario" in data else BINARY_12
            return cls([_parse(v) for v in data["coefficients"]], _parse(data["bound"]),
                       data.get("basis", PROBABILITY), sc, data.get("name"))
        except KeyError as e:
            raise ShapeError(f"functional JSON is missing {e}") from None


def _parse(v):
    if isinstance(v, float):
        raise TypeError(f"functional coefficients must be exact, got {v!r}")
    return as_rational(v)


def _common_integer(coeffs):
    ints, factor = integer_scaling(coeffs)
    # coeffs = ints / factor; factor is rational, keep exact
    num, den = factor.numerator, factor.denominator
    return num, [v * den for v in ints]


def load_functional(path) -> BellFunctional:
    with open(path) as fh:
        return BellFunctional.from_json(json.load(fh))


# ----------------------------------------------------------------- builtins

def _correlator_functional(terms: dict, bound, name) -> BellFunctional:
    coeffs = [Fraction(0)] * (N_CORRELATORS + 1)
    for label, v in terms.items():
        coeffs[1 + CORRELATOR_LABELS.index(label)] += as_rational(v)
    return BellFunctional(coeffs, bound, CORRELATOR, BINARY_12, name)


def sequential_chsh() -> BellFunctional:
    """``<A_0 (B - B') - A_1 (B + B')> <= 2`` with ``B`` and ``B'`` built from
    both of B's steps, ``B`` mixing ``B^2_{01}, B^2_{00}`` according to
    ``B^1_0`` and ``B'`` mixing ``B^2_{11}, B^2_{10}`` according to ``B^1_1``."""
    h = Fraction(1, 2)
    terms: dict = {}

    def add(label, v):
        terms[label] = terms.get(label, 0) + v

    for x, sx_b, sx_bp in ((0, 1, -1), (1, -1, -1)):
        # A_x * B
        add(f"A{x}B2_01", sx_b * h)
        add(f"A{x}B1_0B2_01", sx_b * h)
        add(f"A{x}B2_00", -sx_b * h)
        add(f"A{x}B1_0B2_00", sx_b * h)
        # A_x * B'
        add(f"A{x}B2_11", sx_bp * h)
        add(f"A{x}B1_1B2_11", -sx_bp * h)
        add(f"A{x}B2_10", sx_bp * h)
        add(f"A{x}B1_1B2_10", sx_bp * h)
    return _correlator_functional(terms, 2, "sequential-chsh")


def _prob_functional(entries, bound, name) -> BellFunctional:
    beta = [Fraction(0)] * 64
    for idx, v in entries:
        beta[_flat12(*idx)] += as_rational(v)
    return BellFunctional(beta, bound, PROBABILITY, BINARY_12, name)


def chsh_first_step() -> BellFunctional:
    """CHSH on the marginal ``P(a b_1 | x y_1)`` (read at ``y_2 = 0``),
    probability form with bound 3."""
    entries = []
    for x, y1, a, b1, b2 in itertools.product(range(2), repeat=5):
        if a ^ b1 == x * y1:
            entries.append(((x, y1, 0, a, b1, b2), 1))
    return _prob_functional(entries, 3, "chsh-first-step")


def chsh_second_step() -> BellFunctional:
    """CHSH on ``P(a b_2 | x y_1 y_2)`` with B's setting pairs
    ``(y_1 y_2) = 00, 11`` playing the two CHSH inputs; bound 3."""
    entries = []
    for x, (y1, y2) in itertools.product(range(2), ((0, 0), (1, 1))):
        for a, b1, b2 in itertools.product(range(2), repeat=3):
            if a ^ b2 == x * y1:
                entries.append(((x, y1, y2, a, b1, b2), 1))
    return _prob_functional(entries, 3, "chsh-second-step")


def conditioned_chsh(y1: int = 0, b1: int = 0) -> BellFunctional:
    """CHSH between ``a`` and ``b_2`` on the branch ``(y_1, b_1)``, with the
    branch probability multiplied through: ``sum P(a xor b_2 = x y_2, b_1 |
    x y_1 y_2) + 3 P(not b_1 | y_1) <= 3``."""
    entries = []
    for x, y2, a, b2 in itertools.product(range(2), repeat=4):
        if a ^ b2 == x * y2:
            entries.append(((x, y1, y2, a, b1, b2), 1))
    for a, b2 in itertools.product(range(2), repeat=2):
        entries.append(((0, y1, 0, a, 1 - b1, b2), 3))
    return _prob_functional(entries, 3, "conditioned-chsh")


def positivity(index: int = 0) -> BellFunctional:
    beta = [Fraction(0)] * 64
    beta[index] = Fraction(-1)
    return BellFunctional(beta, 0, PROBABILITY, BINARY_12, "positivity")


BUILTINS = {
    "eq39": sequential_chsh,
    "sequential-chsh": sequential_chsh,
    "chsh-first-step": chsh_first_step,
    "chsh-second-step": chsh_second_step,
    "conditioned-chsh": conditioned_chsh,
    "positivity": positivity,
}


def builtin(name: str) -> BellFunctional:
    try:
        return BUILTINS[name]()
    except KeyError:
        raise KeyError(f"unknown builtin functional {name!r}; known: {sorted(BUILTINS)}") from None


# ------------------------------------------------------- 2x2 box locality

CHSH_PATTERNS = tuple(
    tuple(sign * (-1 if (x, y) == odd else 1) for x, y in itertools.product(range(2), repeat=2))
    for odd in itertools.product(range(2), repeat=2) for sign in (1, -1)
)
"""The 8 sign vectors ``s_{xy}`` (order 00, 01, 10, 11) with an odd number
of minus signs; a 2x2 no-signalling box is local iff ``sum s E <= 2`` for all."""


def box_correlators(values) -> list:
    """``E_xy = sum_ab (-1)^(a+b) P(ab|xy)`` for a flat (x, y, a, b) box, or
    an unnormalized branch of one."""
    v = list(values)
    out = []
    for x, y in itertools.product(range(2), repeat=2):
        base = (x * 2 + y) * 4
        out.append(v[base] - v[base + 1] - v[base + 2] + v[base + 3])
    return out


def chsh_values(values) -> list:
    E = box_correlators(values)
    return [sum(s * e for s, e in zip(pat, E)) for pat in CHSH_PATTERNS]
