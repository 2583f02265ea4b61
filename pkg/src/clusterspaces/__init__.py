"""Cluster exchange graphs, their tropical fans, and the spaces built from them.

Submodules:

- ``quiver_exchange``: mutation, exchange-graph enumeration, automorphisms
- ``tropical_fan``: piecewise linear charts and the cluster fan
- ``birational_charts``: cluster transitions and their deformations
- ``stability_space``: cell decomposition and the rotation action
- ``log_space``: exponential map, tangent fans, twistor gluing
- ``fan_deformation``: certificates for families of complete fans
- ``an_model``: polygon triangulations, cross-ratios, Stokes data
"""

from .quiver_exchange import (
    CapExceeded,
    ExchangeGraph,
    check_exchange_matrix,
    dynkin_exchange_matrix,
    enumerate_exchange_graph,
    find_dt_element,
    mutate_exchange_matrix,
    opposite_graph,
)
from .tropical_fan import ClusterFan, TropicalPoint, build_fan, check_duality

__version__ = "0.1.0"

__all__ = [
    "CapExceeded",
    "ClusterFan",
    "ExchangeGraph",
    "TropicalPoint",
    "build_fan",
    "check_duality",
    "check_exchange_matrix",
    "dynkin_exchange_matrix",
    "enumerate_exchange_graph",
    "find_dt_element",
    "mutate_exchange_matrix",
    "opposite_graph",
    "__version__",
]
