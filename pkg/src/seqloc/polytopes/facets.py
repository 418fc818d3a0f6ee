"""Facets of the time-ordered local polytope of the (1,2) binary scenario."""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from ..core import BINARY_12, CORRELATOR_EXTRACTION, Scenario, ShapeError
from ..exactlp.dd import dd_facets
from .functionals import CORRELATOR, BellFunctional
from .strategies import toloc_vertex_set
from .symmetry import classify_facets

CACHE_ENV = "SEQLOC_CACHE_DIR"
CACHE_VERSION = 1


def cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    base = os.environ.get("XDG_CACHE_HOME") or os.path.join(os.path.expanduser("~"), ".cache")
    return Path(base) / "seqloc"


def scenario_key(scenario: Scenario) -> str:
    def part(v):
        return "-".join(map(str, v))
    return (f"toloc_x{part(scenario.x_cards)}_y{part(scenario.y_cards)}"
            f"_a{part(scenario.a_cards)}_b{part(scenario.b_cards)}")


def correlator_vertices(scenario: Scenario = BINARY_12) -> np.ndarray:
    """The 256 vertices as integer correlator vectors."""
    vs = toloc_vertex_set(scenario)
    return vs.array.astype(np.int64) @ CORRELATOR_EXTRACTION.T


def compute_toloc_facets(scenario: Scenario = BINARY_12) -> list[BellFunctional]:
    if scenario != BINARY_12:
        raise ShapeError("facet enumeration is implemented for the (1,2) binary scenario only")
    hull = dd_facets([tuple(int(v) for v in row) for row in correlator_vertices(scenario)])
    if hull.dimension != 32 or hull.equalities:
        raise ArithmeticError(f"unexpected affine hull of dimension {hull.dimension}")
    return [BellFunctional((0,) + f.normal, f.offset, CORRELATOR) for f in hull.facets]


def facet_records(facets, labels) -> list[dict]:
    out = []
    for f, label in zip(facets, labels):
        c, b = f.canonical_correlator()
        p, pb = f.canonical_probability()
        out.append({"coeffs_correlator": [0] + list(c), "coeffs_probability": list(p),
                    "bound": b, "bound_probability": pb, "orbit": label})
    return out


def _read_cache(path: Path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError):
        return None
    if not isinstance(data, dict) or data.get("version") != CACHE_VERSION:
        return None
    return data


def load_facet_records(path) -> list[dict]:
    """Facet records from a cache file or a ``facets --out`` file."""
    with open(path) as fh:
        data = json.load(fh)
    records = data["facets"] if isinstance(data, dict) else data
    if not isinstance(records, list):
        raise ShapeError("facet file must hold a list of facet records")
    return records


def records_to_functionals(records) -> list[BellFunctional]:
    return [BellFunctional(r["coeffs_correlator"], r["bound"], CORRELATOR, name=r.get("orbit")) for r in records]


def toloc_facets(scenario: Scenario = BINARY_12, use_cache: bool = True, directory=None,
                 with_records: bool = False):
    """Complete facet list, computed once and cached as JSON.

    Returns correlator-basis functionals named by orbit (and the raw
    records when ``with_records``).
    """
    if scenario != BINARY_12:
        raise ShapeError("facet enumeration is implemented for the (1,2) binary scenario only")
    path = Path(directory) if directory is not None else cache_dir()
    path = path / f"{scenario_key(scenario)}.json"
    data = _read_cache(path) if use_cache else None
    if data is None:
        facets = compute_toloc_facets(scenario)
        labels = classify_facets(facets).labels
        records = facet_records(facets, labels)
        data = {"version": CACHE_VERSION, "scenario": scenario.to_json(), "vertex_count": len(toloc_vertex_set(scenario)),
                "facet_count": len(records), "facets": records}
        if use_cache:
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".tmp")
            with open(tmp, "w") as fh:
                json.dump(data, fh)
            os.replace(tmp, path)
    records = data["facets"]
    facets = records_to_functionals(records)
    return (facets, records) if with_records else facets
