"""
Room maps and ray casting against wall segments.
"""
import math
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import List, Sequence, Tuple, Union

import numpy as np
import shapely
from shapely.geometry import LinearRing, Polygon

logger = logging.getLogger(__name__)

Point = Tuple[float, float]

# Ray parameters below this are treated as the origin itself
RAY_PARAM_TOLERANCE = 1e-12
# Slack on the segment parameter so rays through a vertex still hit
SEGMENT_TOLERANCE = 1e-12
# Minimum distance from every wall for a point to count as interior
INTERIOR_MARGIN = 1e-9


class GeometryError(Exception):
    """Exception raised for errors in map geometry."""
    pass


class InvalidMapError(GeometryError):
    """Raised when a map polygon violates its invariants."""
    pass


class OriginOutsideError(GeometryError):
    """Raised when a ray origin is on or outside the room boundary."""
    pass


class MapIntegrityError(GeometryError):
    """Raised when a ray from an interior point hits no wall."""
    pass


def normalize_angle(angle: float) -> float:
    """Wrap an angle in degrees to [0, 360)."""
    wrapped = math.fmod(angle, 360.0)
    if wrapped < 0.0:
        wrapped += 360.0
    # fmod of a tiny negative value can round up to exactly 360
    return 0.0 if wrapped >= 360.0 else wrapped


def direction_vectors(angles: Union[float, np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Unit direction components for beam angles in degrees.

    Angles are measured from the +x2 axis and increase toward +x1, so the
    direction of angle K is (sin K, cos K).

    Args:
        angles: Scalar or array of angles in degrees

    Returns:
        Tuple of (d1, d2) arrays
    """
    radians = np.radians(np.asarray(angles, dtype=float))
    return np.sin(radians), np.cos(radians)


@dataclass(frozen=True)
class Pose:
    """Object position in meters and heading in degrees."""
    x1: float
    x2: float
    heading_k: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "x1", float(self.x1))
        object.__setattr__(self, "x2", float(self.x2))
        object.__setattr__(self, "heading_k", normalize_angle(float(self.heading_k)))

    @property
    def position(self) -> Point:
        return (self.x1, self.x2)


@dataclass(frozen=True)
class RayHit:
    """Nearest wall intersection along a ray."""
    range: float
    hit_point: Point
    wall_index: int


@dataclass(frozen=True)
class RoomMap:
    """
    Simple counterclockwise polygon describing the room walls.

    Wall k joins vertex k to vertex k+1; the last wall closes back to the
    first vertex.
    """
    vertices: Tuple[Point, ...]
    name: str = field(default="room", compare=False)

    def __post_init__(self):
        vertices = tuple((float(x1), float(x2)) for x1, x2 in self.vertices)
        object.__setattr__(self, "vertices", vertices)

        if len(vertices) < 3:
            raise InvalidMapError(f"A room needs at least 3 vertices, got {len(vertices)}")

        lengths = np.hypot(self.ends[:, 0] - self.starts[:, 0], self.ends[:, 1] - self.starts[:, 1])
        degenerate = np.flatnonzero(lengths <= 0.0)
        if degenerate.size:
            raise InvalidMapError(f"Wall {int(degenerate[0])} has zero length")

        ring = LinearRing(vertices)
        if not ring.is_simple:
            raise InvalidMapError("Room polygon is self-intersecting")
        if not ring.is_ccw:
            raise InvalidMapError("Room vertices must be ordered counterclockwise")
        if self.polygon.area <= 0.0:
            raise InvalidMapError("Room polygon has no interior")

        logger.debug(f"Built room map '{self.name}' with {len(vertices)} walls")

    @classmethod
    def from_vertices(cls, vertices: Sequence[Sequence[float]], name: str = "room") -> "RoomMap":
        """
        Build a map from any simple polygon, reorienting clockwise input.

        Args:
            vertices: Sequence of (x1, x2) points in meters
            name: Label used in logs and reports

        Returns:
            RoomMap with counterclockwise vertices
        """
        points = [(float(v[0]), float(v[1])) for v in vertices]
        if len(points) >= 3 and points[0] == points[-1]:
            points = points[:-1]
        if len(points) >= 3:
            ring = LinearRing(points)
            if ring.is_simple and not ring.is_ccw:
                points = points[::-1]
        return cls(tuple(points), name=name)

    @cached_property
    def polygon(self) -> Polygon:
        return Polygon(self.vertices)

    @cached_property
    def starts(self) -> np.ndarray:
        return np.asarray(self.vertices, dtype=float)

    @cached_property
    def ends(self) -> np.ndarray:
        return np.roll(self.starts, -1, axis=0)

    @property
    def walls(self) -> List[Tuple[Point, Point]]:
        """Wall segments as (start, end) pairs."""
        count = len(self.vertices)
        return [(self.vertices[k], self.vertices[(k + 1) % count]) for k in range(count)]

    @property
    def bounds(self) -> Tuple[float, float, float, float]:
        """Bounding box as (x1_min, x1_max, x2_min, x2_max)."""
        x1_min, x2_min, x1_max, x2_max = self.polygon.bounds
        return (x1_min, x1_max, x2_min, x2_max)

    @cached_property
    def diameter(self) -> float:
        pts = self.starts
        deltas = pts[:, None, :] - pts[None, :, :]
        return float(np.sqrt((deltas ** 2).sum(axis=-1)).max())

    def wall_distances(self, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
        """
        Distance from each point to its nearest wall.

        Args:
            x1: Array of x1 coordinates
            x2: Array of x2 coordinates (same shape as x1)

        Returns:
            Array of distances with the shape of x1
        """
        px = np.asarray(x1, dtype=float)[..., None]
        py = np.asarray(x2, dtype=float)[..., None]
        sx, sy = self.starts[:, 0], self.starts[:, 1]
        ex, ey = self.ends[:, 0] - sx, self.ends[:, 1] - sy
        u = ((px - sx) * ex + (py - sy) * ey) / (ex * ex + ey * ey)
        u = np.clip(u, 0.0, 1.0)
        return np.hypot(px - (sx + u * ex), py - (sy + u * ey)).min(axis=-1)

    def contains(self, x1, x2, margin: float = INTERIOR_MARGIN) -> np.ndarray:
        """
        Strict interior test, vectorized over points.

        A point is interior when it lies inside the polygon and farther than
        `margin` from every wall.
        """
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        inside = shapely.contains_xy(self.polygon, x1, x2)
        return np.logical_and(inside, self.wall_distances(x1, x2) > margin)

    def contains_point(self, point: Sequence[float], margin: float = INTERIOR_MARGIN) -> bool:
        return bool(self.contains(point[0], point[1], margin))


def make_rectangle(l1: float, l2: float) -> RoomMap:
    """
    Rectangular room anchored at the origin.

    Args:
        l1: Width along x1 in meters
        l2: Length along x2 in meters

    Returns:
        RoomMap with corners (0,0), (l1,0), (l1,l2), (0,l2)
    """
    if not (l1 > 0 and l2 > 0):
        raise InvalidMapError(f"Room dimensions must be positive, got {l1} x {l2}")
    return RoomMap(((0.0, 0.0), (l1, 0.0), (l1, l2), (0.0, l2)), name=f"rectangle {l1:g}x{l2:g}")


def _intersect(room: RoomMap, origins: np.ndarray, d1: np.ndarray, d2: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Ray parameters and wall indices of the nearest hit for each ray."""
    sx, sy = room.starts[:, 0], room.starts[:, 1]
    ex, ey = room.ends[:, 0] - sx, room.ends[:, 1] - sy

    ox = origins[:, 0][:, None]
    oy = origins[:, 1][:, None]
    dx = d1[:, None]
    dy = d2[:, None]

    denom = dx * ey - dy * ex
    rel_x = sx - ox
    rel_y = sy - oy
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (rel_x * ey - rel_y * ex) / denom
        u = (rel_x * dy - rel_y * dx) / denom

    valid = (
        (denom != 0.0)
        & (t > RAY_PARAM_TOLERANCE)
        & (u >= -SEGMENT_TOLERANCE)
        & (u <= 1.0 + SEGMENT_TOLERANCE)
    )
    t = np.where(valid, t, np.inf)
    t_min = t.min(axis=1)

    # Rays through a vertex hit two walls at the same parameter; take the lower index
    ties = t <= (t_min + RAY_PARAM_TOLERANCE)[:, None]
    wall = np.where(np.isfinite(t_min), np.argmax(ties, axis=1), -1)
    return t_min, wall


def ray_cast_ranges(
    room: RoomMap,
    origins: np.ndarray,
    angles: Union[float, np.ndarray],
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Vectorized ray casting for many origins.

    No interior check is made; rays that miss every wall get an infinite
    range and wall index -1.

    Args:
        room: Room map
        origins: Array of shape (N, 2)
        angles: Scalar angle or array of N angles in degrees

    Returns:
        Tuple of (ranges, wall_indices), each of length N
    """
    origins = np.asarray(origins, dtype=float).reshape(-1, 2)
    d1, d2 = direction_vectors(angles)
    d1 = np.broadcast_to(d1, (origins.shape[0],))
    d2 = np.broadcast_to(d2, (origins.shape[0],))
    return _intersect(room, origins, d1, d2)


def ray_cast(room: RoomMap, origin: Sequence[float], angle: float) -> RayHit:
    """
    Nearest wall hit from an interior point along a beam direction.

    Args:
        room: Room map
        origin: (x1, x2) strictly inside the room
        angle: Beam direction in degrees from +x2 toward +x1

    Returns:
        RayHit with range, hit point and wall index

    Raises:
        OriginOutsideError: If the origin is on or outside the boundary
        MapIntegrityError: If no wall is hit
    """
    x1, x2 = float(origin[0]), float(origin[1])
    if not room.contains_point((x1, x2)):
        raise OriginOutsideError(f"Ray origin ({x1}, {x2}) is not strictly inside {room.name}")

    angle = normalize_angle(float(angle))
    ranges, walls = ray_cast_ranges(room, np.array([[x1, x2]]), angle)
    t = float(ranges[0])
    if not math.isfinite(t):
        raise MapIntegrityError(f"Ray from ({x1}, {x2}) at {angle} deg hits no wall of {room.name}")

    d1, d2 = direction_vectors(angle)
    hit = (x1 + t * float(d1), x2 + t * float(d2))
    return RayHit(range=t, hit_point=hit, wall_index=int(walls[0]))
