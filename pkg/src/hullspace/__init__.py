"""N-dimensional geometry kernel.

Convex hulls with interior tessellation, mesh Booleans, hyperplane slicing
to 3D, rotor-based cameras, FPS-style high-dimensional controls, and the
chunked binary ``.plex`` mesh interchange format.
"""

from .ga import (
    CameraState,
    PoseParams,
    Rotor,
    pose_to_rotor,
    rotor_apply,
    rotor_from_plane,
    view_transform,
    wedge_normal,
)
from .mesh import NMesh, Aabb, VertexIndexMap, dedup_vertices, scatter_positions, enclosed_volume
from .hull import HullResult, build_hull, hull_volume

__version__ = "0.1.0"
