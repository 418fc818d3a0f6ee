"""Sequential correlations: storage, validation, post-selection, products.

A correlation tensor for the scenario ``(s, t)`` is indexed in the order
``[x_1..x_s, y_1..y_t, a_1..a_s, b_1..b_t]``; flattening is row-major, so
each block of ``prod(a_cards) * prod(b_cards)`` consecutive entries holds
one setting assignment.

Entries are either exact (``Fraction``, ``representation == "rational"``)
or ``float`` (``"float"``).  Nothing converts silently between the two.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .exactlp.linalg import as_rational

RATIONAL = "rational"
FLOAT = "float"
PRODUCT_CAP = 10**6


class ShapeError(ValueError):
    """Tensor shape or scenario mismatch."""


class PostselectionError(ValueError):
    """The conditioning event is impossible or unsupported."""


class NegativeEntryError(ValueError):
    def __init__(self, index, value):
        super().__init__(f"entry {index} is negative ({value})")
        self.index = index
        self.value = value


@dataclass(frozen=True)
class Scenario:
    """Setting and outcome cardinalities of each step of both parties."""

    x_cards: tuple[int, ...]
    y_cards: tuple[int, ...]
    a_cards: tuple[int, ...]
    b_cards: tuple[int, ...]

    def __post_init__(self):
        for name in ("x_cards", "y_cards", "a_cards", "b_cards"):
            object.__setattr__(self, name, tuple(int(v) for v in getattr(self, name)))
        if not self.x_cards or not self.y_cards:
            raise ShapeError("each party needs at least one step")
        if len(self.x_cards) != len(self.a_cards) or len(self.y_cards) != len(self.b_cards):
            raise ShapeError("setting and outcome lists differ in length")
        if min(self.x_cards + self.y_cards + self.a_cards + self.b_cards) < 1:
            raise ShapeError("cardinalities must be at least 1")

    @classmethod
    def binary(cls, s: int, t: int) -> "Scenario":
        return cls((2,) * s, (2,) * t, (2,) * s, (2,) * t)

    @property
    def s(self) -> int:
        return len(self.x_cards)

    @property
    def t(self) -> int:
        return len(self.y_cards)

    @property
    def setting_shape(self) -> tuple[int, ...]:
        return self.x_cards + self.y_cards

    @property
    def outcome_shape(self) -> tuple[int, ...]:
        return self.a_cards + self.b_cards

    @property
    def shape(self) -> tuple[int, ...]:
        return self.setting_shape + self.outcome_shape

    @property
    def size(self) -> int:
        return math.prod(self.shape)

    def party(self, name: str) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """(setting cards, outcome cards) of party ``"A"`` or ``"B"``."""
        if name == "A":
            return self.x_cards, self.a_cards
        if name == "B":
            return self.y_cards, self.b_cards
        raise ValueError(f"unknown party {name!r}")

    def axes(self, name: str) -> tuple[list[int], list[int]]:
        """Tensor axes of a party's settings and outcomes."""
        s, t = self.s, self.t
        if name == "A":
            return list(range(s)), list(range(s + t, 2 * s + t))
        if name == "B":
            return list(range(s, s + t)), list(range(2 * s + t, 2 * s + 2 * t))
        raise ValueError(f"unknown party {name!r}")

    def to_json(self) -> dict:
        return {"s": self.s, "t": self.t, "x_cards": list(self.x_cards), "y_cards": list(self.y_cards),
                "a_cards": list(self.a_cards), "b_cards": list(self.b_cards)}

    @classmethod
    def from_json(cls, data: dict) -> "Scenario":
        try:
            sc = cls(data["x_cards"], data["y_cards"], data["a_cards"], data["b_cards"])
        except KeyError as e:
            raise ShapeError(f"scenario is missing {e}") from None
        if ("s" in data and data["s"] != sc.s) or ("t" in data and data["t"] != sc.t):
            raise ShapeError("s/t disagree with the cardinality lists")
        return sc

    def __str__(self) -> str:
        return f"({self.s},{self.t}) x={list(self.x_cards)} y={list(self.y_cards)} a={list(self.a_cards)} b={list(self.b_cards)}"


BINARY_12 = Scenario.binary(1, 2)
BINARY_11 = Scenario.binary(1, 1)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


class SequentialCorrelations:
    """An immutable probability tensor for a :class:`Scenario`.

    Construction only checks the shape and representation; call
    :func:`validate_sequential` for normalization and the arrow-of-time
    conditions.
    """

    __slots__ = ("scenario", "values", "representation", "tolerance")

    def __init__(self, scenario: Scenario, values, representation: str | None = None,
                 tolerance: float = 1e-10):
        arr = np.asarray(values, dtype=object)
        if arr.size != scenario.size:
            raise ShapeError(f"{arr.size} entries for a scenario with {scenario.size}")
        if arr.ndim != 1 and arr.shape != scenario.shape:
            raise ShapeError(f"tensor shape {arr.shape} does not match {scenario.shape}")
        arr = arr.reshape(scenario.shape)
        if representation is None:
            representation = FLOAT if any(isinstance(v, (float, np.floating)) for v in arr.flat) else RATIONAL
        if representation == RATIONAL:
            out = np.empty(arr.shape, dtype=object)
            for idx, v in np.ndenumerate(arr):
                out[idx] = as_rational(v)
        elif representation == FLOAT:
            out = np.array(arr, dtype=float)
        else:
            raise ValueError(f"unknown representation {representation!r}")
        if tolerance < 0:
            raise ValueError("tolerance must be nonnegative")
        object.__setattr__(self, "scenario", scenario)
        object.__setattr__(self, "values", _frozen(out))
        object.__setattr__(self, "representation", representation)
        object.__setattr__(self, "tolerance", float(tolerance))

    def __setattr__(self, name, value):
        raise AttributeError("SequentialCorrelations is immutable")

    @property
    def exact(self) -> bool:
        return self.representation == RATIONAL

    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    def __getitem__(self, idx):
        return self.values[idx]

    def __eq__(self, other):
        if not isinstance(other, SequentialCorrelations):
            return NotImplemented
        return (self.scenario == other.scenario and self.representation == other.representation
                and bool(np.all(self.values == other.values)))

    def __hash__(self):
        return hash((self.scenario, tuple(self.flat())))

    def __repr__(self):
        return f"SequentialCorrelations({self.scenario}, {self.representation})"

    def to_float(self) -> "SequentialCorrelations":
        return SequentialCorrelations(self.scenario, self.values.astype(float), FLOAT, self.tolerance)

    def marginal(self, party: str, keep_steps: int) -> np.ndarray:
        """Sum out the outcomes of ``party``'s steps after ``keep_steps``."""
        _, out_axes = self.scenario.axes(party)
        drop = tuple(out_axes[keep_steps:])
        return self.values.sum(axis=drop) if drop else self.values

    def to_json(self) -> dict:
        if self.exact:
            vals = [str(v) for v in self.flat()]
        else:
            vals = [float(v) for v in self.flat()]
        return {"scenario": self.scenario.to_json(), "representation": self.representation, "values": vals}

    @classmethod
    def from_json(cls, data: dict) -> "SequentialCorrelations":
        if not isinstance(data, dict) or "scenario" not in data or "values" not in data:
            raise ShapeError("correlation JSON needs 'scenario' and 'values'")
        sc = Scenario.from_json(data["scenario"])
        rep = data.get("representation", RATIONAL)
        vals = data["values"]
        if rep == RATIONAL:
            vals = [as_rational(v) if isinstance(v, str) else as_rational(int(v)) if isinstance(v, int)
                    else _reject_float(v) for v in vals]
        elif rep == FLOAT:
            vals = [float(v) for v in vals]
        else:
            raise ShapeError(f"unknown representation {rep!r}")
        return cls(sc, vals, rep, float(data.get("tolerance", 1e-10)))


def _reject_float(v):
    raise TypeError(f"rational file contains non-rational value {v!r}")


def dump_json(P: SequentialCorrelations, path) -> None:
    with open(path, "w") as fh:
        json.dump(P.to_json(), fh, indent=1)


def load_json(path) -> SequentialCorrelations:
    with open(path) as fh:
        return SequentialCorrelations.from_json(json.load(fh))


# --------------------------------------------------------------- validation

@dataclass(frozen=True)
class Violation:
    """One violated condition.

    ``kind`` is ``"negative"``, ``"normalization"`` or ``"signalling"``.
    For signalling, ``party`` and ``step`` (1-based) say whose marginal
    over steps ``step..`` depends on that party's later settings.
    """

    kind: str
    index: tuple
    magnitude: float
    party: str | None = None
    step: int | None = None

    def to_json(self) -> dict:
        out = {"kind": self.kind, "index": list(self.index), "magnitude": self.magnitude}
        if self.party is not None:
            out.update(party=self.party, step=self.step)
        return out


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}

    def to_json(self) -> dict:
        return {"valid": self.ok, "violations": [v.to_json() for v in self.violations]}


def _excess(value, exact: bool, tol: float) -> bool:
    return value != 0 if exact else abs(value) > tol


def validate_sequential(P: SequentialCorrelations) -> ValidationReport:
    """Check nonnegativity, normalization and the arrow-of-time marginals.

    For each party and step ``j`` the marginal obtained by summing out that
    party's outcomes ``j..`` must not depend on its settings ``j..``.  The
    comparison is exact for rational tensors and within ``P.tolerance``
    otherwise.
    """
    sc = P.scenario
    vals = P.values
    if vals.shape != sc.shape:
        raise ShapeError(f"tensor shape {vals.shape} does not match {sc.shape}")
    exact, tol = P.exact, P.tolerance
    out: list[Violation] = []

    for idx, v in np.ndenumerate(vals):
        if v < (0 if exact else -tol):
            out.append(Violation("negative", idx, float(-v)))

    n_set = len(sc.setting_shape)
    norm = vals.reshape(sc.setting_shape + (-1,)).sum(axis=-1)
    for idx, v in np.ndenumerate(norm):
        if _excess(v - 1, exact, tol):
            out.append(Violation("normalization", idx, float(abs(v - 1))))

    for party in ("A", "B"):
        set_axes, _ = sc.axes(party)
        for j in range(len(set_axes)):
            m = P.marginal(party, j)
            later = set_axes[j:]
            ref = m.take([0], axis=later[0])
            for ax in later[1:]:
                ref = ref.take([0], axis=ax)
            diff = m - ref
            worst = None
            for idx, v in np.ndenumerate(diff):
                if _excess(v, exact, tol):
                    mag = float(abs(v))
                    if worst is None or mag > worst[1]:
                        worst = (idx, mag)
            if worst is not None:
                out.append(Violation("signalling", worst[0][:n_set], worst[1], party, j + 1))
    return ValidationReport(tuple(out))


def require_sequential(P: SequentialCorrelations) -> None:
    rep = validate_sequential(P)
    if not rep.ok:
        v = rep.violations[0]
        raise ValueError(f"correlations are not sequential: {v.kind} at {v.index} ({v.magnitude:.3g})")


# ------------------------------------------------------------ constructors

def uniform(scenario: Scenario, representation: str = RATIONAL) -> SequentialCorrelations:
    n_out = math.prod(scenario.outcome_shape)
    v = Fraction(1, n_out) if representation == RATIONAL else 1.0 / n_out
    return SequentialCorrelations(scenario, [v] * scenario.size, representation)


def deterministic(scenario: Scenario, a_out, b_out, representation: str = RATIONAL) -> SequentialCorrelations:
    """The box that always returns outcomes ``a_out`` and ``b_out``."""
    a_out, b_out = tuple(a_out), tuple(b_out)
    vals = np.zeros(scenario.shape, dtype=object)
    vals[...] = Fraction(0)
    one = Fraction(1) if representation == RATIONAL else 1.0
    for st in itertools.product(*map(range, scenario.setting_shape)):
        vals[st + a_out + b_out] = one
    return SequentialCorrelations(scenario, vals, representation)


# ---------------------------------------------------------- post-selection

def first_step_probability(P: SequentialCorrelations, party: str, setting: int, outcome: int):
    """P(outcome | setting) of the party's first step (other settings at 0)."""
    sc = P.scenario
    set_axes, out_axes = sc.axes(party)
    n_set = len(sc.setting_shape)
    drop = tuple(ax for ax in range(n_set, len(sc.shape)) if ax != out_axes[0])
    m = P.values.sum(axis=drop) if drop else P.values
    # remaining axes: all settings, then this party's first outcome
    idx = [0] * n_set
    idx[set_axes[0]] = setting
    return m[tuple(idx) + (outcome,)]


def postselect(P: SequentialCorrelations, party: str, setting: int, outcome: int):
    """Condition on ``party``'s first step having ``(setting, outcome)``.

    Returns ``(Q, probability)`` where ``Q`` lives on the scenario with
    that first step removed.
    """
    sc = P.scenario
    xs, outs = sc.party(party)
    if len(xs) < 2:
        raise PostselectionError(f"party {party} has a single step; nothing would remain")
    if not (0 <= setting < xs[0]) or not (0 <= outcome < outs[0]):
        raise PostselectionError(f"setting/outcome ({setting}, {outcome}) out of range")
    prob = first_step_probability(P, party, setting, outcome)
    if prob == 0 or (not P.exact and abs(prob) <= P.tolerance):
        raise PostselectionError(f"event ({party}: setting {setting}, outcome {outcome}) has probability 0")
    set_axes, out_axes = sc.axes(party)
    sub = P.values.take(outcome, axis=out_axes[0]).take(setting, axis=set_axes[0])
    sub = sub / prob
    if party == "A":
        nsc = Scenario(sc.x_cards[1:], sc.y_cards, sc.a_cards[1:], sc.b_cards)
    else:
        nsc = Scenario(sc.x_cards, sc.y_cards[1:], sc.a_cards, sc.b_cards[1:])
    return SequentialCorrelations(nsc, sub, P.representation, P.tolerance), prob


# ------------------------------------------------------------------ product

def product(P: SequentialCorrelations, Q: SequentialCorrelations, cap: int = PRODUCT_CAP) -> SequentialCorrelations:
    """Non-adaptive product: each party runs its steps of P, then of Q."""
    if P.representation != Q.representation:
        raise ValueError("both factors must share a representation; rationalize first")
    a, b = P.scenario, Q.scenario
    sc = Scenario(a.x_cards + b.x_cards, a.y_cards + b.y_cards, a.a_cards + b.a_cards, a.b_cards + b.b_cards)
    if sc.size > cap:
        raise ShapeError(f"product has {sc.size} entries, above the cap of {cap}")
    outer = np.multiply.outer(P.values, Q.values)
    sa, ta, sb, tb = a.s, a.t, b.s, b.t
    na = 2 * (sa + ta)
    P_x = list(range(sa)); P_y = list(range(sa, sa + ta))
    P_a = list(range(sa + ta, 2 * sa + ta)); P_b = list(range(2 * sa + ta, na))
    Q_x = [na + i for i in range(sb)]; Q_y = [na + sb + i for i in range(tb)]
    Q_a = [na + sb + tb + i for i in range(sb)]; Q_b = [na + 2 * sb + tb + i for i in range(tb)]
    perm = P_x + Q_x + P_y + Q_y + P_a + Q_a + P_b + Q_b
    return SequentialCorrelations(sc, np.transpose(outer, perm), P.representation,
                                  max(P.tolerance, Q.tolerance))


def merged(P: SequentialCorrelations) -> SequentialCorrelations:
    """View each party's steps as one measurement (a single-step box).

    The mixed-radix layout makes this a reshape: the merged setting of a
    party is its setting tuple read as one number, likewise for outcomes.
    """
    sc = P.scenario
    m = Scenario((math.prod(sc.x_cards),), (math.prod(sc.y_cards),),
                 (math.prod(sc.a_cards),), (math.prod(sc.b_cards),))
    return SequentialCorrelations(m, P.flat(), P.representation, P.tolerance)


def mixture(weights, boxes) -> SequentialCorrelations:
    """Exact convex combination of rational boxes on one scenario."""
    boxes = list(boxes)
    weights = [as_rational(w) for w in weights]
    if not boxes:
        raise ValueError("empty mixture")
    sc = boxes[0].scenario
    acc = np.zeros(sc.size, dtype=object)
    acc[:] = Fraction(0)
    for w, b in zip(weights, boxes):
        if b.scenario != sc:
            raise ShapeError("mixture of boxes on different scenarios")
        if w:
            acc = acc + w * b.flat()
    return SequentialCorrelations(sc, acc, RATIONAL)


# --------------------------------------------------------- free parameters

class FreeParameters:
    """A linear coordinate system on the affine span of sequential tensors.

    Parameters are the joint marginals ``P(a_1..a_j, b_1..b_i | x_1..x_j,
    y_1..y_i)`` for prefixes with ``(j, i) != (0, 0)`` and with the last
    outcome of each nonempty prefix below its maximum; later settings are
    read at 0.  Every sequential tensor is ``offset + reconstruction @
    params`` and ``params = extraction @ tensor`` (integer matrices).
    """

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.keys = [(pa, pb) for pa in self._prefixes("A") for pb in self._prefixes("B") if pa or pb]
        self._index = {k: i for i, k in enumerate(self.keys)}

    def _prefixes(self, party):
        xs, outs = self.scenario.party(party)
        result = [()]
        for j in range(len(xs)):
            for xv in itertools.product(*map(range, xs[: j + 1])):
                for av in itertools.product(*map(range, outs[:j]), range(outs[j] - 1)):
                    result.append(tuple(zip(xv, av)))
        return result

    def __len__(self):
        return len(self.keys)

    @cached_property
    def extraction(self) -> np.ndarray:
        sc = self.scenario
        E = np.zeros((len(self.keys), sc.size), dtype=np.int64)
        flat = np.arange(sc.size).reshape(sc.shape)
        s, t = sc.s, sc.t
        for row, (pa, pb) in enumerate(self.keys):
            idx = [0] * (s + t) + [slice(None)] * (s + t)
            for j, (xv, av) in enumerate(pa):
                idx[j] = xv
                idx[s + t + j] = av
            for i, (yv, bv) in enumerate(pb):
                idx[s + i] = yv
                idx[2 * s + t + i] = bv
            E[row, flat[tuple(idx)].reshape(-1)] = 1
        return _frozen(E)

    @cached_property
    def _affine(self) -> tuple[np.ndarray, np.ndarray]:
        sc = self.scenario
        s, t = sc.s, sc.t
        n = len(self.keys)
        memo: dict = {}

        def coeffs(pa, pb):
            key = (pa, pb)
            if key in memo:
                return memo[key]
            if not pa and not pb:
                vec = np.zeros(n + 1, dtype=np.int64)
                vec[n] = 1
            elif pa and pa[-1][1] == sc.a_cards[len(pa) - 1] - 1:
                xv = pa[-1][0]
                vec = coeffs(pa[:-1], pb).copy()
                for a_ in range(sc.a_cards[len(pa) - 1] - 1):
                    vec -= coeffs(pa[:-1] + ((xv, a_),), pb)
            elif pb and pb[-1][1] == sc.b_cards[len(pb) - 1] - 1:
                yv = pb[-1][0]
                vec = coeffs(pa, pb[:-1]).copy()
                for b_ in range(sc.b_cards[len(pb) - 1] - 1):
                    vec -= coeffs(pa, pb[:-1] + ((yv, b_),))
            else:
                vec = np.zeros(n + 1, dtype=np.int64)
                vec[self._index[(pa, pb)]] = 1
            memo[key] = vec
            return vec

        R = np.zeros((sc.size, n), dtype=np.int64)
        c = np.zeros(sc.size, dtype=np.int64)
        for flat_i, idx in enumerate(itertools.product(*map(range, sc.shape))):
            xs, ys = idx[:s], idx[s:s + t]
            as_, bs = idx[s + t:2 * s + t], idx[2 * s + t:]
            vec = coeffs(tuple(zip(xs, as_)), tuple(zip(ys, bs)))
            R[flat_i] = vec[:n]
            c[flat_i] = vec[n]
        return _frozen(R), _frozen(c)

    @property
    def reconstruction(self) -> np.ndarray:
        return self._affine[0]

    @property
    def offset(self) -> np.ndarray:
        return self._affine[1]

    def extract(self, P: SequentialCorrelations) -> np.ndarray:
        if P.scenario != self.scenario:
            raise ShapeError("scenario mismatch")
        vals = P.flat()
        if P.exact:
            return np.array([sum((vals[j] for j in np.nonzero(row)[0]), Fraction(0))
                             for row in self.extraction], dtype=object)
        return self.extraction @ vals.astype(float)

    def tensor(self, params, representation: str = RATIONAL):
        """Flat tensor ``offset + reconstruction @ params`` (no validation)."""
        if representation == RATIONAL:
            params = [as_rational(v) for v in params]
            R, c = self.reconstruction, self.offset
            out = []
            for row, off in zip(R, c):
                acc = Fraction(int(off))
                for j in np.nonzero(row)[0]:
                    acc += int(row[j]) * params[j]
                out.append(acc)
            return np.array(out, dtype=object)
        return self.offset + self.reconstruction @ np.asarray(params, dtype=float)

    def build(self, params, representation: str = RATIONAL) -> SequentialCorrelations:
        return SequentialCorrelations(self.scenario, self.tensor(params, representation), representation)


_FREE_CACHE: dict[Scenario, FreeParameters] = {}


def free_parameters(scenario: Scenario) -> FreeParameters:
    fp = _FREE_CACHE.get(scenario)
    if fp is None:
        fp = _FREE_CACHE[scenario] = FreeParameters(scenario)
    return fp


# -------------------------------------------------------------- correlators

def _correlator_terms():
    """(label, parties, settings-used) for the 32 coordinates, in order."""
    terms = []
    for x in range(2):
        terms.append((f"A{x}", "A", (x, None, None)))
    for y1 in range(2):
        terms.append((f"B1_{y1}", "1", (None, y1, None)))
    for y1, y2 in itertools.product(range(2), repeat=2):
        terms.append((f"B2_{y1}{y2}", "2", (None, y1, y2)))
    for x, y1 in itertools.product(range(2), repeat=2):
        terms.append((f"A{x}B1_{y1}", "A1", (x, y1, None)))
    for x, y1, y2 in itertools.product(range(2), repeat=3):
        terms.append((f"A{x}B2_{y1}{y2}", "A2", (x, y1, y2)))
    for y1, y2 in itertools.product(range(2), repeat=2):
        terms.append((f"B1_{y1}B2_{y1}{y2}", "12", (None, y1, y2)))
    for x, y1, y2 in itertools.product(range(2), repeat=3):
        terms.append((f"A{x}B1_{y1}B2_{y1}{y2}", "A12", (x, y1, y2)))
    return terms


CORRELATOR_TERMS = _correlator_terms()
CORRELATOR_LABELS = tuple(t[0] for t in CORRELATOR_TERMS)
N_CORRELATORS = len(CORRELATOR_TERMS)


def _sign(parties: str, a: int, b1: int, b2: int) -> int:
    s = 1
    if "A" in parties and a:
        s = -s
    if "1" in parties and b1:
        s = -s
    if "2" in parties and b2:
        s = -s
    return s


def _flat12(x, y1, y2, a, b1, b2) -> int:
    return ((((x * 2 + y1) * 2 + y2) * 2 + a) * 2 + b1) * 2 + b2


def _build_correlator_matrices():
    E = np.zeros((N_CORRELATORS, 64), dtype=np.int64)
    M = np.zeros((64, N_CORRELATORS), dtype=np.int64)
    for k, (_, parties, (x, y1, y2)) in enumerate(CORRELATOR_TERMS):
        xs, y1s, y2s = (x or 0), (y1 or 0), (y2 or 0)
        for a, b1, b2 in itertools.product(range(2), repeat=3):
            E[k, _flat12(xs, y1s, y2s, a, b1, b2)] = _sign(parties, a, b1, b2)
    for x, y1, y2, a, b1, b2 in itertools.product(range(2), repeat=6):
        for k, (_, parties, (tx, ty1, ty2)) in enumerate(CORRELATOR_TERMS):
            if (tx is None or tx == x) and (ty1 is None or ty1 == y1) and (ty2 is None or ty2 == y2):
                M[_flat12(x, y1, y2, a, b1, b2), k] = _sign(parties, a, b1, b2)
    return _frozen(E), _frozen(M)


CORRELATOR_EXTRACTION, CORRELATOR_SIGNS = _build_correlator_matrices()
"""``C = EXTRACTION @ p`` and ``p = (1 + SIGNS @ C) / 8`` on sequential tensors."""


@dataclass(frozen=True)
class Correlators:
    """The 32 expectation values of a (1,2) binary sequential box (outcome 0 is +1)."""

    values: tuple
    representation: str = RATIONAL

    def __post_init__(self):
        if len(self.values) != N_CORRELATORS:
            raise ShapeError(f"expected {N_CORRELATORS} correlators, got {len(self.values)}")
        if self.representation == RATIONAL:
            vals = tuple(as_rational(v) for v in self.values)
        else:
            vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        bad = [i for i, v in enumerate(vals) if abs(v) > 1 + (0 if self.representation == RATIONAL else 1e-12)]
        if bad:
            raise ValueError(f"correlator {CORRELATOR_LABELS[bad[0]]} is outside [-1, 1]")

    def __getitem__(self, label: str):
        return self.values[CORRELATOR_LABELS.index(label)]

    def as_dict(self) -> dict:
        return dict(zip(CORRELATOR_LABELS, self.values))


def _require_binary12(sc: Scenario):
    if sc != BINARY_12:
        raise ShapeError(f"correlators are defined for the (1,2) binary scenario, not {sc}")


def to_correlators(P: SequentialCorrelations) -> Correlators:
    _require_binary12(P.scenario)
    vals = P.flat()
    if P.exact:
        out = [sum((int(c) * vals[j] for j, c in enumerate(row) if c), Fraction(0)) for row in CORRELATOR_EXTRACTION]
    else:
        out = list(CORRELATOR_EXTRACTION @ vals.astype(float))
    return Correlators(tuple(out), P.representation)


def correlator_tensor(values, exact: bool = True) -> np.ndarray:
    """Flat tensor ``(1 + SIGNS @ C) / 8`` without any checks."""
    if exact:
        vals = [as_rational(v) for v in values]
        return np.array([(1 + sum((int(c) * vals[k] for k, c in enumerate(row) if c), Fraction(0))) / 8
                         for row in CORRELATOR_SIGNS], dtype=object)
    return (1 + CORRELATOR_SIGNS @ np.asarray(values, dtype=float)) / 8


def from_correlators(C: Correlators) -> SequentialCorrelations:
    exact = C.representation == RATIONAL
    vals = correlator_tensor(C.values, exact)
    for i, v in enumerate(vals):
        if v < (0 if exact else -1e-12):
            idx = np.unravel_index(i, BINARY_12.shape)
            raise NegativeEntryError(tuple(int(k) for k in idx), v)
    P = SequentialCorrelations(BINARY_12, vals, C.representation)
    require_sequential(P)
    return P
