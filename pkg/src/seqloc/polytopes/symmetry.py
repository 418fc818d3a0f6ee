"""Relabeling symmetries of the (1,2) binary scenario and facet orbits."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..core import CORRELATOR_EXTRACTION, CORRELATOR_SIGNS, _flat12
from .functionals import CORRELATOR, BellFunctional, builtin


def _perm(fn) -> tuple[int, ...]:
    """Permutation of the 64 entries induced by a map on (x,y1,y2,a,b1,b2)."""
    perm = [0] * 64
    for idx in itertools.product(range(2), repeat=6):
        perm[_flat12(*idx)] = _flat12(*fn(*idx))
    return tuple(perm)


FULL = "full"
NONADAPTIVE = "nonadaptive"


def generators(group: str = FULL) -> list[tuple[str, tuple[int, ...]]]:
    """Generating relabelings, as entry permutations.

    ``"full"`` (18 generators) lets B swap ``y_2`` depending on ``(y_1,
    b_1)``.  Each generator is a reversible relabeling a party can perform
    locally and in time order, so it maps the time-ordered local polytope
    onto itself.  ``"nonadaptive"`` swaps ``y_2`` depending on ``y_1``
    only; its elements also preserve Bell locality of the merged box and
    the branch conditions, hence the post-selection-local set.
    """
    if group not in (FULL, NONADAPTIVE):
        raise ValueError(f"unknown group {group!r}")
    gens = [("swap x", _perm(lambda x, y1, y2, a, b1, b2: (1 - x, y1, y2, a, b1, b2)))]
    for x0 in range(2):
        gens.append((f"flip a at x={x0}",
                     _perm(lambda x, y1, y2, a, b1, b2, x0=x0: (x, y1, y2, a ^ (x == x0), b1, b2))))
    gens.append(("swap y1", _perm(lambda x, y1, y2, a, b1, b2: (x, 1 - y1, y2, a, b1, b2))))
    for v in range(2):
        gens.append((f"flip b1 at y1={v}",
                     _perm(lambda x, y1, y2, a, b1, b2, v=v: (x, y1, y2, a, b1 ^ (y1 == v), b2))))
    if group == NONADAPTIVE:
        for v in range(2):
            gens.append((f"swap y2 at y1={v}",
                         _perm(lambda x, y1, y2, a, b1, b2, v=v: (x, y1, y2 ^ (y1 == v), a, b1, b2))))
    for v, w in (itertools.product(range(2), repeat=2) if group == FULL else ()):
        gens.append((f"swap y2 at (y1,b1)=({v},{w})",
                     _perm(lambda x, y1, y2, a, b1, b2, v=v, w=w:
                           (x, y1, y2 ^ ((y1, b1) == (v, w)), a, b1, b2))))
    for v, w, u in itertools.product(range(2), repeat=3):
        gens.append((f"flip b2 at (y1,b1,y2)=({v},{w},{u})",
                     _perm(lambda x, y1, y2, a, b1, b2, v=v, w=w, u=u:
                           (x, y1, y2, a, b1, b2 ^ ((y1, b1, y2) == (v, w, u))))))
    return gens


def _canonical_rows(beta: np.ndarray, bounds: np.ndarray) -> list[tuple[tuple[int, ...], int]]:
    """Probability-basis integer rows -> canonical correlator forms."""
    c = beta @ CORRELATOR_SIGNS  # 8 * correlator coefficients
    c0 = beta.sum(axis=1)        # 8 * constant
    b = 8 * bounds - c0
    full = np.concatenate([c, b[:, None]], axis=1)
    out = []
    for row in full:
        g = int(np.gcd.reduce(np.abs(row)))
        row = row // g if g > 1 else row
        out.append((tuple(int(v) for v in row[:-1]), int(row[-1])))
    return out


def act(perm, forms):
    """Image of canonical correlator forms under one entry permutation."""
    coeffs = np.array([f[0] for f in forms], dtype=np.int64)
    bounds = np.array([f[1] for f in forms], dtype=np.int64)
    beta = coeffs @ CORRELATOR_EXTRACTION
    moved = np.zeros_like(beta)
    moved[:, list(perm)] = beta
    return _canonical_rows(moved, bounds)


@dataclass(frozen=True)
class Orbit:
    label: str
    representative: BellFunctional
    members: tuple[int, ...]
    tags: tuple[str, ...] = ()

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class Classification:
    orbits: tuple[Orbit, ...]
    labels: tuple[str, ...]
    """orbit label of each input facet, by position"""
    group: str = FULL

    def by_label(self, label: str) -> Orbit:
        for o in self.orbits:
            if o.label == label:
                return o
        raise KeyError(label)

    def by_tag(self, tag: str) -> Orbit:
        for o in self.orbits:
            if tag in o.tags:
                return o
        raise KeyError(tag)

    def to_json(self) -> dict:
        return {"group": self.group, "facet_count": len(self.labels), "orbit_count": len(self.orbits),
                "orbits": [{"label": o.label, "size": o.size, "tags": list(o.tags),
                            "representative": list(o.representative.canonical_correlator()[0]),
                            "bound": o.representative.canonical_correlator()[1]} for o in self.orbits]}


TAGS = (
    ("trivial", "positivity"),
    ("chsh-first-step", "chsh-first-step"),
    ("chsh-second-step", "chsh-second-step"),
    ("conditioned-chsh", "conditioned-chsh"),
    ("sequential-chsh", "sequential-chsh"),
)


class NotClosedError(ValueError):
    """A group image of a facet is not in the given list."""


def classify_facets(facets, group: str = FULL) -> Classification:
    """Partition ``facets`` into orbits of a relabeling group.

    Representatives are the lexicographically smallest canonical
    correlator forms ``(c_1..c_32, bound)``.  Orbits containing builtin
    inequalities are tagged with their names (joined by ``+`` when one
    orbit holds several); the rest are labelled ``class-1, class-2, ...``
    in order of representative.
    """
    facets = list(facets)
    for f in facets:
        if f.basis != CORRELATOR:
            raise ValueError("classify_facets expects correlator-basis functionals")
    forms = [f.canonical_correlator() for f in facets]
    index = {form: i for i, form in enumerate(forms)}
    parent = list(range(len(forms)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for name, perm in generators(group):
        for i, img in enumerate(act(perm, forms)):
            j = index.get(img)
            if j is None:
                raise NotClosedError(f"image of facet {i} under '{name}' is not in the list")
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)

    groups: dict[int, list[int]] = {}
    for i in range(len(forms)):
        groups.setdefault(find(i), []).append(i)
    tagged: dict[int, list[str]] = {}
    for tag, name in TAGS:
        form = builtin(name).canonical_correlator()
        if form in index:
            tagged.setdefault(find(index[form]), []).append(tag)

    def rep_key(members):
        return min(forms[i][0] + (forms[i][1],) for i in members)

    ordered = sorted(groups.values(), key=rep_key)
    orbits = []
    labels = [""] * len(forms)
    n_untagged = 0
    for members in ordered:
        root = find(members[0])
        tags = tuple(tagged.get(root, ()))
        if tags:
            label = "+".join(tags)
        else:
            n_untagged += 1
            label = f"class-{n_untagged}"
        best = min(members, key=lambda i: forms[i][0] + (forms[i][1],))
        c, b = forms[best]
        rep = BellFunctional((0,) + c, b, CORRELATOR, name=label)
        orbits.append(Orbit(label, rep, tuple(members), tags))
        for i in members:
            labels[i] = label
    return Classification(tuple(orbits), tuple(labels), group)


def orbit_of(functional: BellFunctional, group: str = FULL, limit: int = 1 << 18) -> set:
    """All canonical forms in the orbit of one functional (breadth first)."""
    start = functional.canonical_correlator()
    seen = {start}
    frontier = [start]
    gens = [p for _, p in generators(group)]
    while frontier:
        nxt = []
        for perm in gens:
            for img in act(perm, frontier):
                if img not in seen:
                    seen.add(img)
                    nxt.append(img)
                    if len(seen) > limit:
                        raise ValueError("orbit larger than the limit")
        frontier = nxt
    return seen
