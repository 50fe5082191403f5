"""dhforge: graph-based district heating system models from open geodata.

The package turns heterogeneous open inputs (operator KML files or
image maps, building footprints, block connection proportions, census
construction years, plant registries) into one geometric graph model
with demand profiles and design pipe diameters, deterministically for
a given seed.
"""

from .errors import DhforgeError, InfeasibleModelError, InputError
from .geo import GeoPoint, PlanePoint, Polygon, Polyline, Projection
from .netgraph import NetworkGraph, Node, NodeKind, PipeEdge

__version__ = "0.1.0"

__all__ = [
    "DhforgeError",
    "GeoPoint",
    "InfeasibleModelError",
    "InputError",
    "NetworkGraph",
    "Node",
    "NodeKind",
    "PipeEdge",
    "PlanePoint",
    "Polygon",
    "Polyline",
    "Projection",
    "__version__",
]
