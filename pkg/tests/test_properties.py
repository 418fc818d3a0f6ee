"""Property suites over random time-ordered local mixtures."""

import itertools
import math
import random
from fractions import Fraction

import numpy as np
from hypothesis import given, settings, strategies as st

from seqloc.core import BINARY_11, BINARY_12, mixture, postselect, to_correlators, uniform, validate_sequential
from seqloc.oplocal import lift_postselected_models
from seqloc.polytopes import (fine_local, generators, local_vertex_set, member_postloc, member_toloc,
                              toloc_vertex_set)
from seqloc.quantum import DensityMatrix, QuantumSetup, bloch_observable, observable_step, sequential_born
from seqloc.wirings import apply_wiring, enumerate_wirings

from test_oplocal import LIFT, assembled_box
from test_polytopes import pr_box_11

PROP1_EXAMPLES = 100
PROP2_MIXTURES = 100
PROP2_WIRINGS = 100
PROP3_EXAMPLES = 50


@st.composite
def toloc_mixtures(draw, scenario=BINARY_12, max_components=5):
    boxes = toloc_vertex_set(scenario).boxes()
    k = draw(st.integers(1, max_components))
    picks = draw(st.lists(st.integers(0, len(boxes) - 1), min_size=k, max_size=k))
    raw = draw(st.lists(st.integers(1, 20), min_size=k, max_size=k))
    total = sum(raw)
    return mixture([Fraction(r, total) for r in raw], [boxes[i] for i in picks])


# ------------------------------------------- closure under post-selection

@settings(max_examples=PROP1_EXAMPLES)
@given(toloc_mixtures())
def test_postselections_of_toloc_boxes_are_local(P):
    for y1, b1 in itertools.product(range(2), repeat=2):
        try:
            Q, _ = postselect(P, "B", y1, b1)
        except ValueError:
            continue
        assert Q.scenario == BINARY_11
        assert fine_local(Q)


@settings(max_examples=PROP1_EXAMPLES // 2)
@given(toloc_mixtures(LIFT))
def test_two_sided_postselections_stay_time_ordered_local(P):
    for a1, b1 in itertools.product(range(2), repeat=2):
        try:
            QA, _ = postselect(P, "A", 0, a1)
            Q, _ = postselect(QA, "B", 0, b1)
        except ValueError:
            continue
        assert member_toloc(Q).member


# ---------------------------------------- wired images are Bell-local

_MIXTURES_SEEN = []


@settings(max_examples=PROP2_MIXTURES)
@given(toloc_mixtures(), st.randoms(use_true_random=False))
def test_wired_toloc_boxes_are_bell_local(P, rng):
    enum = enumerate_wirings()
    for k in rng.sample(range(len(enum)), PROP2_WIRINGS):
        assert fine_local(apply_wiring(P, enum.wirings[k]))
    _MIXTURES_SEEN.append(1)


def test_wiring_suite_covered_enough_mixtures():
    assert len(_MIXTURES_SEEN) >= PROP2_MIXTURES


# ------------------------------------------------------- lift round trip

@st.composite
def assembled_boxes(draw):
    """Boxes on LIFT whose four branches are noisy PR boxes or local
    vertices, so both answers occur."""
    local = local_vertex_set(BINARY_11).boxes()
    raw = draw(st.lists(st.integers(0, 6), min_size=4, max_size=4).filter(any))
    total = sum(raw)
    q = {k: Fraction(r, total) for k, r in zip(itertools.product(range(2), repeat=2), raw)}
    # PR weight <= 1/2 over white noise is local; otherwise anything goes
    all_local = draw(st.booleans())
    branches = {}
    for key in q:
        if all_local:
            w, noise = Fraction(draw(st.integers(0, 5)), 10), uniform(BINARY_11)
        else:
            w, noise = Fraction(draw(st.integers(0, 10)), 10), local[draw(st.integers(0, 15))]
        branches[key] = mixture([w, 1 - w], [pr_box_11(), noise])
    return assembled_box(q, branches), q, branches


@settings(max_examples=PROP3_EXAMPLES)
@given(assembled_boxes())
def test_lift_round_trip(data):
    P, q, branches = data
    assert validate_sequential(P).ok
    posts = {}
    for (a1, b1), prob in q.items():
        if prob == 0:
            continue
        QA, _ = postselect(P, "A", 0, a1)
        Q, _ = postselect(QA, "B", 0, b1)
        assert Q == branches[(a1, b1)]
        posts[(a1, b1)] = member_toloc(Q)
    res = member_toloc(P)
    assert res.member == all(m.member for m in posts.values())
    if res.member:
        lifted = lift_postselected_models({k: m.model for k, m in posts.items()}, q, LIFT)
        assert lifted.reconstruct() == P


# ------------------------------------------------------------ invariants

@settings(max_examples=15)
@given(toloc_mixtures())
def test_toloc_is_inside_postloc(P):
    assert member_postloc(P, cross_check=False).member


@settings(max_examples=30)
@given(toloc_mixtures(), st.integers(0, 17))
def test_relabelings_preserve_time_ordered_locality(P, g):
    _, perm = generators()[g]
    moved = np.empty(64, dtype=object)
    moved[list(perm)] = P.flat()
    from seqloc.core import SequentialCorrelations
    Q = SequentialCorrelations(BINARY_12, list(moved))
    assert member_toloc(Q).member


@settings(max_examples=40)
@given(st.lists(st.floats(-math.pi, math.pi), min_size=6, max_size=6),
       st.lists(st.floats(-1, 1), min_size=8, max_size=8).filter(lambda v: np.linalg.norm(v) > 1e-3))
def test_conjugation_order_is_irrelevant(angles, amps):
    psi = np.array(amps[:4]) + 1j * np.array(amps[4:])
    rho = DensityMatrix.from_vector(psi / np.linalg.norm(psi))
    a = observable_step([bloch_observable(t) for t in angles[:2]])
    b1 = observable_step([bloch_observable(t) for t in angles[2:4]])
    b2 = observable_step([bloch_observable(t) for t in angles[4:]])
    setup = QuantumSetup(rho, 2, 2, (a,), (b1, b2))
    ab, ba = sequential_born(setup, "AB"), sequential_born(setup, "BA")
    assert np.max(np.abs(ab.flat() - ba.flat())) <= 1e-12


@settings(max_examples=50)
@given(toloc_mixtures())
def test_correlators_stay_in_range(P):
    C = to_correlators(P)
    assert all(-1 <= v <= 1 for v in C.values)
