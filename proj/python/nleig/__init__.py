"""Nonlinear eigenvectors of homogeneous functionals on graphs."""

from ._core import (
    Functional,
    Graph,
    InputError,
    NumericalError,
    dijkstra_distance,
    flow,
    power,
    prox,
    rayleigh,
)

__all__ = [
    "Functional",
    "Graph",
    "InputError",
    "NumericalError",
    "dijkstra_distance",
    "flow",
    "power",
    "prox",
    "rayleigh",
]
