import itertools
import json
import random
from fractions import Fraction

import numpy as np
import pytest

from seqloc.core import BINARY_11, BINARY_12, ShapeError, uniform, validate_sequential
from seqloc.polytopes import fine_local
from seqloc.wirings import (RAW_WIRING_COUNT_12, SequentialWiring, apply_wiring, correlator_map, enumerate_wirings,
                            load_wiring, raw_wirings, wiring_matrix)

from conftest import random_toloc_mixture


def identity_first_step() -> SequentialWiring:
    """z picks y1, y2 = 0, output b1."""
    return SequentialWiring("B", 2, 2, (2, 2), (2, 2), ((0, 1), (0, 0, 0, 0)),
                            (0, 0, 1, 1, 0, 0, 1, 1))


def adaptive() -> SequentialWiring:
    """y1 = z, y2 = b1, output b1 xor b2."""
    f2 = tuple(b1 for z in range(2) for b1 in range(2))
    g = tuple(b1 ^ b2 for z in range(2) for b1 in range(2) for b2 in range(2))
    return SequentialWiring("B", 2, 2, (2, 2), (2, 2), ((0, 1), f2), g)


def test_malformed_tables_are_rejected():
    with pytest.raises(ShapeError):
        SequentialWiring("B", 2, 2, (2, 2), (2, 2), ((0, 1), (0, 0)), (0,) * 8)
    with pytest.raises(ShapeError):
        SequentialWiring("B", 2, 2, (2, 2), (2, 2), ((0, 2), (0,) * 4), (0,) * 8)


def test_settings_only_read_earlier_outcomes():
    w = adaptive()
    assert w.settings_for(1, (1, 0)) == (1, 1)
    assert w.settings_for(1, (1, 1)) == (1, 1)
    assert w.output(0, (1, 0)) == 1


def test_first_step_wiring_recovers_marginal():
    P = random_toloc_mixture(random.Random(4))
    Q = apply_wiring(P, identity_first_step())
    assert Q.scenario == BINARY_11
    for x, y, a, b in itertools.product(range(2), repeat=4):
        assert Q.values[x, y, a, b] == P.values[x, y, 0, a, b, :].sum()


def test_wired_box_is_normalized_and_no_signalling():
    P = random_toloc_mixture(random.Random(8))
    assert validate_sequential(apply_wiring(P, adaptive())).ok


def test_matrix_form_agrees_with_direct_application():
    rng = random.Random(2)
    P = random_toloc_mixture(rng)
    p = P.flat()
    wirings = list(raw_wirings())
    for w in rng.sample(wirings, 40):
        direct = apply_wiring(P, w).flat()
        via = wiring_matrix(w).astype(object) @ p
        assert list(direct) == list(via)


def test_correlator_map_acts_on_correlators():
    from seqloc.core import to_correlators
    P = random_toloc_mixture(random.Random(6))
    C = np.array([Fraction(1)] + list(to_correlators(P).values), dtype=object)
    for w in (identity_first_step(), adaptive()):
        K = correlator_map(wiring_matrix(w))
        assert list(K.astype(object) @ C / 8) == list(apply_wiring(P, w).flat())


def test_enumeration_counts():
    enum = enumerate_wirings()
    assert enum.raw_count == RAW_WIRING_COUNT_12 == 16384
    assert len(enum) == 4900
    assert sum(enum.multiplicity) == 16384
    keys = {K.tobytes() for K in enum.maps}
    assert len(keys) == 4900


def test_wiring_json_round_trip(tmp_path):
    w = adaptive()
    path = tmp_path / "w.json"
    path.write_text(json.dumps(w.to_json()))
    assert load_wiring(path) == w
    with pytest.raises(ShapeError):
        SequentialWiring.from_json({"z_card": 2})


def test_arity_mismatch():
    with pytest.raises(ShapeError):
        apply_wiring(uniform(BINARY_11), adaptive())


def test_wired_toloc_mixtures_are_local():
    rng = random.Random(12)
    enum = enumerate_wirings()
    for _ in range(10):
        P = random_toloc_mixture(rng)
        for k in rng.sample(range(len(enum)), 30):
            assert fine_local(apply_wiring(P, enum.wirings[k]))
