"""Deterministic sequential wirings of one party's measurement sequence.

A wiring of party B takes a new input ``z``, chooses ``y_1 = f_1(z)``,
then ``y_j = f_j(z, b_1..b_{j-1})``, and outputs ``c = g(z, b_1..b_t)``.
Tables are indexed in mixed radix over their arguments in that order.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import BINARY_12, CORRELATOR_SIGNS, RATIONAL, Scenario, SequentialCorrelations, ShapeError

RAW_WIRING_COUNT_12 = 4 * 16 * 256


def _radix(values, cards) -> int:
    k = 0
    for v, c in zip(values, cards):
        k = k * c + v
    return k


@dataclass(frozen=True)
class SequentialWiring:
    party: str
    z_card: int
    c_card: int
    step_settings: tuple[int, ...]
    step_outcomes: tuple[int, ...]
    f: tuple[tuple[int, ...], ...]
    g: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "f", tuple(tuple(int(v) for v in t) for t in self.f))
        object.__setattr__(self, "g", tuple(int(v) for v in self.g))
        if self.party not in ("A", "B"):
            raise ValueError(f"unknown party {self.party!r}")
        steps = len(self.step_settings)
        if len(self.step_outcomes) != steps or len(self.f) != steps:
            raise ShapeError("one setting function per step is required")
        for j, tab in enumerate(self.f):
            size = self.z_card * math.prod(self.step_outcomes[:j])
            if len(tab) != size or any(not 0 <= v < self.step_settings[j] for v in tab):
                raise ShapeError(f"setting table f_{j + 1} is malformed")
        if len(self.g) != self.z_card * math.prod(self.step_outcomes) or any(
                not 0 <= v < self.c_card for v in self.g):
            raise ShapeError("output table g is malformed")

    def settings_for(self, z: int, outcomes) -> tuple[int, ...]:
        """Settings chosen along the history ``outcomes`` (only earlier
        outcomes are read at each step)."""
        ys = []
        for j, tab in enumerate(self.f):
            ys.append(tab[_radix((z,) + tuple(outcomes[:j]), (self.z_card,) + self.step_outcomes[:j])])
        return tuple(ys)

    def output(self, z: int, outcomes) -> int:
        return self.g[_radix((z,) + tuple(outcomes), (self.z_card,) + self.step_outcomes)]

    def to_json(self) -> dict:
        return {"party": self.party, "z_card": self.z_card, "c_card": self.c_card,
                "step_settings": list(self.step_settings), "step_outcomes": list(self.step_outcomes),
                "f": [list(t) for t in self.f], "g": list(self.g)}

    @classmethod
    def from_json(cls, data: dict) -> "SequentialWiring":
        try:
            return cls(data.get("party", "B"), data["z_card"], data["c_card"], tuple(data["step_settings"]),
                       tuple(data["step_outcomes"]), tuple(map(tuple, data["f"])), tuple(data["g"]))
        except KeyError as e:
            raise ShapeError(f"wiring JSON is missing {e}") from None


def load_wiring(path) -> SequentialWiring:
    with open(path) as fh:
        return SequentialWiring.from_json(json.load(fh))


def apply_wiring(P: SequentialCorrelations, w: SequentialWiring) -> SequentialCorrelations:
    """Collapse ``w.party``'s steps of ``P`` into one measurement ``z -> c``."""
    sc = P.scenario
    settings, outcomes = sc.party(w.party)
    if tuple(settings) != w.step_settings or tuple(outcomes) != w.step_outcomes:
        raise ShapeError("wiring arities do not match the scenario")
    set_axes, out_axes = sc.axes(w.party)
    if w.party == "B":
        nsc = Scenario(sc.x_cards, (w.z_card,), sc.a_cards, (w.c_card,))
    else:
        nsc = Scenario((w.z_card,), sc.y_cards, (w.c_card,), sc.b_cards)
    zero = Fraction(0) if P.exact else 0.0
    out = np.empty(nsc.shape, dtype=object if P.exact else float)
    out[...] = zero
    n_axes = len(sc.shape)
    new_set_ax = 0 if w.party == "A" else sc.s
    new_out_ax = (1 + sc.t) if w.party == "A" else (2 * sc.s + 1)
    for z in range(w.z_card):
        for bs in itertools.product(*map(range, outcomes)):
            ys = w.settings_for(z, bs)
            c = w.output(z, bs)
            idx = [slice(None)] * n_axes
            for ax, v in zip(set_axes, ys):
                idx[ax] = v
            for ax, v in zip(out_axes, bs):
                idx[ax] = v
            tgt = [slice(None)] * len(nsc.shape)
            tgt[new_set_ax] = z
            tgt[new_out_ax] = c
            out[tuple(tgt)] = out[tuple(tgt)] + P.values[tuple(idx)]
    return SequentialCorrelations(nsc, out, P.representation, P.tolerance)


def _bit_tables(n_args: int):
    return list(itertools.product(range(2), repeat=n_args))


def correlator_map(L: np.ndarray) -> np.ndarray:
    """Integer 16 x 33 matrix ``K`` with ``L @ p = (K @ (1, C)) / 8`` for a
    sequential tensor ``p`` with correlators ``C``.

    ``K`` is the map induced on sequential correlations; two wirings act
    identically on them exactly when their ``K`` agree.
    """
    return np.concatenate([L.sum(axis=1, keepdims=True), L @ CORRELATOR_SIGNS], axis=1)


def wiring_matrix(w: SequentialWiring) -> np.ndarray:
    """The 16 x 64 0/1 matrix of a (1,2) binary B-wiring with binary z, c."""
    L = np.zeros((16, 64), dtype=np.int64)
    for z, b1, b2 in itertools.product(range(2), repeat=3):
        y1, y2 = w.settings_for(z, (b1, b2))
        c = w.output(z, (b1, b2))
        for x, a in itertools.product(range(2), repeat=2):
            L[((x * 2 + z) * 2 + a) * 2 + c, ((((x * 2 + y1) * 2 + y2) * 2 + a) * 2 + b1) * 2 + b2] = 1
    return L


@dataclass(frozen=True)
class WiringEnumeration:
    """Representatives of the distinct maps, with their raw multiplicities.

    ``maps[k]`` is the correlator-coordinate map of ``wirings[k]``.
    """

    wirings: tuple[SequentialWiring, ...]
    maps: tuple[np.ndarray, ...]
    raw_count: int
    multiplicity: tuple[int, ...]

    def __len__(self):
        return len(self.wirings)


def raw_wirings():
    """All deterministic B-wirings of the (1,2) binary scenario with
    ``|Z| = |C| = 2``, ordered by (f_1, f_2, g) tables."""
    for f1 in _bit_tables(2):
        for f2 in _bit_tables(4):
            for g in _bit_tables(8):
                yield SequentialWiring("B", 2, 2, (2, 2), (2, 2), (f1, f2), g)


_ENUM_CACHE: list = []


def enumerate_wirings(scenario: Scenario = BINARY_12, z_card: int = 2, c_card: int = 2) -> WiringEnumeration:
    """Raw wirings deduplicated by the linear map they induce on
    sequential correlations (see :func:`correlator_map`).

    The first wiring (in :func:`raw_wirings` order) of each distinct map is
    its representative.
    """
    if scenario != BINARY_12 or z_card != 2 or c_card != 2:
        raise ShapeError("wiring enumeration is implemented for the (1,2) binary scenario with |Z|=|C|=2")
    if _ENUM_CACHE:
        return _ENUM_CACHE[0]
    seen: dict[bytes, int] = {}
    reps, mats, mult = [], [], []
    raw = 0
    for w in raw_wirings():
        raw += 1
        K = correlator_map(wiring_matrix(w))
        key = K.tobytes()
        k = seen.get(key)
        if k is None:
            seen[key] = len(reps)
            reps.append(w)
            K.setflags(write=False)
            mats.append(K)
            mult.append(1)
        else:
            mult[k] += 1
    res = WiringEnumeration(tuple(reps), tuple(mats), raw, tuple(mult))
    _ENUM_CACHE.append(res)
    return res
