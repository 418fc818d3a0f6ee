"""Locality of sequential correlations: exact polytopes, wirings and quantum
constructions for two parties measuring in sequence."""

from .core import (BINARY_11, BINARY_12, FLOAT, RATIONAL, Scenario, SequentialCorrelations, ShapeError,
                   deterministic, load_json, dump_json, merged, mixture, postselect, product, uniform,
                   validate_sequential)

__version__ = "0.1.0"
