"""skylane: joint design of low-altitude flight corridors and ground stations.

The package plans a grid-based aerial corridor together with a base-station
deployment so that every corridor cell is sensed strongly enough, watched by
enough stations, and reachable at an acceptable worst-case SINR, while the
weighted total of corridor length and station count is minimized.
"""

__version__ = "0.1.0"

from .grid import Cell, CoarseSpec, CorridorMask, GridSpec
from .metrics import CostWeights, Deployment, RadioParams

__all__ = [
    "Cell",
    "CoarseSpec",
    "CorridorMask",
    "GridSpec",
    "CostWeights",
    "Deployment",
    "RadioParams",
    "__version__",
]
