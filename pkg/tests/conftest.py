import os
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import settings

from seqloc.core import BINARY_12, SequentialCorrelations, mixture
from seqloc.polytopes import toloc_vertex_set

settings.register_profile("seqloc", deadline=None, derandomize=True)
settings.load_profile("seqloc")


@pytest.fixture(scope="session")
def cache_dir(tmp_path_factory):
    """Facet cache shared by the session (and by CLI subprocesses).

    An existing SEQLOC_CACHE_DIR is reused; otherwise the facets are
    enumerated once into a temporary directory.
    """
    path = os.environ.get("SEQLOC_CACHE_DIR")
    if not path:
        path = str(tmp_path_factory.mktemp("seqloc-cache"))
        os.environ["SEQLOC_CACHE_DIR"] = path
    return path


@pytest.fixture(scope="session")
def facets_with_records(cache_dir):
    from seqloc.polytopes.facets import toloc_facets
    return toloc_facets(BINARY_12, directory=cache_dir, with_records=True)


@pytest.fixture(scope="session")
def facets(facets_with_records):
    return facets_with_records[0]


def random_toloc_mixture(rng: random.Random, n_components: int = 4, scenario=BINARY_12) -> SequentialCorrelations:
    """Rational mixture of a few random time-ordered local vertices."""
    vs = toloc_vertex_set(scenario)
    boxes = vs.boxes()
    picks = [rng.randrange(len(boxes)) for _ in range(n_components)]
    raw = [rng.randint(1, 9) for _ in picks]
    total = sum(raw)
    return mixture([Fraction(r, total) for r in raw], [boxes[i] for i in picks])
