"""Diagnostics for how learned attention interacts with graph topology."""

__version__ = "0.1.0"

from .errors import CapabilityError, CurveProbeError, ValidationError
from .graph import Graph, canonical_pair, load_graphs, make_graph, save_graphs

__all__ = [
    "CapabilityError",
    "CurveProbeError",
    "Graph",
    "ValidationError",
    "__version__",
    "canonical_pair",
    "load_graphs",
    "make_graph",
    "save_graphs",
]
