"""Deterministic single-party responses and the vertices they generate."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..core import RATIONAL, Scenario, SequentialCorrelations, ShapeError
from ..exactlp.linalg import as_rational

VERTEX_CAP = 10**6


class CapExceeded(ValueError):
    pass


@dataclass(frozen=True)
class DeterministicStrategy:
    """Outcome of each step as a function of the party's settings.

    ``tables[j][k]`` is the step-``j`` outcome when the full setting tuple
    has mixed-radix index ``k``.  Prior outcomes are functions of the
    settings too, so letting a response read them adds nothing.
    """

    party: str
    setting_cards: tuple[int, ...]
    outcome_cards: tuple[int, ...]
    tables: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = math.prod(self.setting_cards)
        if len(self.tables) != len(self.setting_cards):
            raise ShapeError("one table per step is required")
        for j, tab in enumerate(self.tables):
            if len(tab) != n or any(not 0 <= v < self.outcome_cards[j] for v in tab):
                raise ShapeError(f"table for step {j + 1} is malformed")

    @classmethod
    def from_prefix_tables(cls, party, setting_cards, outcome_cards, prefix_tables):
        """Build from tables where step ``j`` is indexed by ``x_1..x_j`` only."""
        full = []
        for j, tab in enumerate(prefix_tables):
            row = []
            for xs in itertools.product(*map(range, setting_cards)):
                k = 0
                for c, v in zip(setting_cards[: j + 1], xs[: j + 1]):
                    k = k * c + v
                row.append(int(tab[k]))
            full.append(tuple(row))
        return cls(party, tuple(setting_cards), tuple(outcome_cards), tuple(full))

    @property
    def time_ordered(self) -> bool:
        """No step reads a setting of a later step."""
        cards = self.setting_cards
        for j, tab in enumerate(self.tables):
            arr = np.array(tab).reshape(cards)
            for ax in range(j + 1, len(cards)):
                if not np.all(arr == arr.take([0], axis=ax)):
                    return False
        return True

    def respond(self, settings) -> tuple[int, ...]:
        k = 0
        for c, v in zip(self.setting_cards, settings):
            k = k * c + v
        return tuple(tab[k] for tab in self.tables)

    def to_json(self) -> dict:
        return {"party": self.party, "tables": [list(t) for t in self.tables]}


def time_ordered_strategies(party: str, setting_cards, outcome_cards) -> list[DeterministicStrategy]:
    """All time-ordered deterministic strategies of one party.

    Order: lexicographic in (step-1 table, step-2 table, ...), each table
    read over ``x_1..x_j`` in mixed-radix order.
    """
    per_step = []
    for j in range(len(setting_cards)):
        n_in = math.prod(setting_cards[: j + 1])
        per_step.append(list(itertools.product(range(outcome_cards[j]), repeat=n_in)))
    return [DeterministicStrategy.from_prefix_tables(party, tuple(setting_cards), tuple(outcome_cards), combo)
            for combo in itertools.product(*per_step)]


def _count(scenario: Scenario) -> int:
    total = 1
    for xs, outs in (scenario.party("A"), scenario.party("B")):
        for j in range(len(xs)):
            total *= outs[j] ** math.prod(xs[: j + 1])
    return total


def _party_in_scenario(strategy: DeterministicStrategy, scenario: Scenario):
    """0/1 array over (party settings, party outcomes)."""
    xs, outs = strategy.setting_cards, strategy.outcome_cards
    arr = np.zeros(xs + outs, dtype=np.int8)
    for st in itertools.product(*map(range, xs)):
        arr[st + strategy.respond(st)] = 1
    return arr


def vertex_tensor(scenario: Scenario, sa: DeterministicStrategy, sb: DeterministicStrategy) -> np.ndarray:
    """Flat 0/1 tensor of the product box ``sa x sb``."""
    pa = _party_in_scenario(sa, scenario)
    pb = _party_in_scenario(sb, scenario)
    s, t = scenario.s, scenario.t
    outer = np.multiply.outer(pa, pb)
    # axes: xa, aa, yb, bb -> x, y, a, b
    perm = list(range(s)) + list(range(2 * s, 2 * s + t)) + list(range(s, 2 * s)) + list(range(2 * s + t, 2 * s + 2 * t))
    return np.transpose(outer, perm).reshape(-1)


@dataclass(frozen=True)
class VertexSet:
    """Product vertices ``strategies_a[i] x strategies_b[j]`` in A-major order."""

    scenario: Scenario
    strategies_a: tuple[DeterministicStrategy, ...]
    strategies_b: tuple[DeterministicStrategy, ...]
    array: np.ndarray

    def __len__(self):
        return len(self.array)

    def pair(self, k: int) -> tuple[DeterministicStrategy, DeterministicStrategy]:
        nb = len(self.strategies_b)
        return self.strategies_a[k // nb], self.strategies_b[k % nb]

    def boxes(self) -> list[SequentialCorrelations]:
        return [SequentialCorrelations(self.scenario, [Fraction(int(v)) for v in row], RATIONAL)
                for row in self.array]


_VERTEX_CACHE: dict[Scenario, VertexSet] = {}


def toloc_vertex_set(scenario: Scenario, cap: int = VERTEX_CAP) -> VertexSet:
    n = _count(scenario)
    if n > cap:
        raise CapExceeded(f"{n} vertices exceed the cap of {cap}")
    cached = _VERTEX_CACHE.get(scenario)
    if cached is not None:
        return cached
    sa = time_ordered_strategies("A", scenario.x_cards, scenario.a_cards)
    sb = time_ordered_strategies("B", scenario.y_cards, scenario.b_cards)
    arr = np.array([vertex_tensor(scenario, a, b) for a in sa for b in sb], dtype=np.int8)
    arr.setflags(write=False)
    vs = VertexSet(scenario, tuple(sa), tuple(sb), arr)
    _VERTEX_CACHE[scenario] = vs
    return vs


def enumerate_toloc_vertices(scenario: Scenario, cap: int = VERTEX_CAP) -> list[SequentialCorrelations]:
    """Extreme points of the time-ordered local set (products of deterministic
    time-ordered strategies)."""
    return toloc_vertex_set(scenario, cap).boxes()


def local_vertex_set(scenario: Scenario, cap: int = VERTEX_CAP) -> VertexSet:
    if scenario.s != 1 or scenario.t != 1:
        raise ShapeError("local vertices are defined for single-step parties; merge the steps first")
    return toloc_vertex_set(scenario, cap)


def enumerate_local_vertices(scenario: Scenario, cap: int = VERTEX_CAP) -> list[SequentialCorrelations]:
    """Deterministic boxes of a bipartite single-shot scenario."""
    return local_vertex_set(scenario, cap).boxes()


@dataclass(frozen=True)
class TimeOrderedModel:
    """A finite mixture of products of deterministic strategies."""

    scenario: Scenario
    components: tuple[tuple[Fraction, DeterministicStrategy, DeterministicStrategy], ...]

    def __post_init__(self):
        comps = tuple((as_rational(w), a, b) for w, a, b in self.components)
        object.__setattr__(self, "components", comps)
        if any(w < 0 for w, _, _ in comps):
            raise ValueError("negative weight in model")
        if sum((w for w, _, _ in comps), Fraction(0)) != 1:
            raise ValueError("model weights do not sum to 1")

    @property
    def time_ordered(self) -> bool:
        return all(a.time_ordered and b.time_ordered for _, a, b in self.components)

    def reconstruct(self) -> SequentialCorrelations:
        acc = np.zeros(self.scenario.size, dtype=object)
        acc[:] = Fraction(0)
        for w, a, b in self.components:
            acc = acc + w * vertex_tensor(self.scenario, a, b).astype(object)
        return SequentialCorrelations(self.scenario, acc, RATIONAL)

    def to_json(self) -> list:
        return [{"weight": str(w), "A": a.to_json()["tables"], "B": b.to_json()["tables"]}
                for w, a, b in self.components]
