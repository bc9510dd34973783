"""
Tests for room maps and ray casting.
"""
import math

import numpy as np
import pytest

from src.localization.geometry import (
    InvalidMapError,
    OriginOutsideError,
    Pose,
    RoomMap,
    make_rectangle,
    normalize_angle,
    ray_cast,
    ray_cast_ranges,
)
from tests.conftest import CORNER_ANGLE


def test_make_rectangle_corners():
    """Test rectangle construction anchored at the origin."""
    room = make_rectangle(4, 6)
    assert room.vertices == ((0.0, 0.0), (4.0, 0.0), (4.0, 6.0), (0.0, 6.0))
    assert room.bounds == (0.0, 4.0, 0.0, 6.0)
    assert len(room.walls) == 4


@pytest.mark.parametrize("l1,l2", [(0, 6), (4, -1)])
def test_make_rectangle_rejects_non_positive(l1, l2):
    """Test that degenerate dimensions are rejected."""
    with pytest.raises(InvalidMapError):
        make_rectangle(l1, l2)


def test_clockwise_vertices_rejected():
    """Test that clockwise input is rejected by the constructor."""
    with pytest.raises(InvalidMapError):
        RoomMap(((0.0, 0.0), (0.0, 6.0), (4.0, 6.0), (4.0, 0.0)))


def test_from_vertices_reorients_clockwise():
    """Test that from_vertices accepts clockwise input."""
    room = RoomMap.from_vertices([(0, 0), (0, 6), (4, 6), (4, 0)])
    assert room.polygon.exterior.is_ccw
    assert room.polygon.equals(make_rectangle(4, 6).polygon)


def test_self_intersecting_rejected():
    """Test that a bow-tie polygon is rejected."""
    with pytest.raises(InvalidMapError):
        RoomMap.from_vertices([(0, 0), (4, 6), (4, 0), (0, 6)])


def test_repeated_vertex_rejected():
    """Test that a zero-length wall is rejected."""
    with pytest.raises(InvalidMapError):
        RoomMap(((0.0, 0.0), (4.0, 0.0), (4.0, 0.0), (4.0, 6.0), (0.0, 6.0)))


def test_too_few_vertices_rejected():
    with pytest.raises(InvalidMapError):
        RoomMap(((0.0, 0.0), (4.0, 0.0)))


def test_normalize_angle():
    """Test wrapping into [0, 360)."""
    assert normalize_angle(370.0) == pytest.approx(10.0)
    assert normalize_angle(-33.7) == pytest.approx(326.3)
    assert normalize_angle(360.0) == 0.0
    assert 0.0 <= normalize_angle(-1e-20) < 360.0


def test_pose_normalizes_heading():
    pose = Pose(1, 2, -90)
    assert pose.heading_k == pytest.approx(270.0)
    assert pose.position == (1.0, 2.0)


@pytest.mark.parametrize(
    "angle,expected_range,expected_wall",
    [
        (0.0, 3.0, 2),
        (90.0, 2.0, 1),
        (180.0, 3.0, 0),
        (270.0, 2.0, 3),
    ],
)
def test_ray_cast_axis_beams(room, angle, expected_range, expected_wall):
    """Test beams along the axes from the room center."""
    hit = ray_cast(room, (2.0, 3.0), angle)
    assert hit.range == pytest.approx(expected_range, abs=1e-12)
    assert hit.wall_index == expected_wall


def test_ray_cast_far_wall_hit_point(room):
    """Test the hit point of the beam perpendicular to the far wall."""
    hit = ray_cast(room, (2.0, 3.0), 0.0)
    assert hit.hit_point == pytest.approx((2.0, 6.0), abs=1e-12)


def test_ray_cast_corner(room):
    """Test a beam through the upper-right corner reports the lower wall index."""
    hit = ray_cast(room, (2.0, 3.0), CORNER_ANGLE)
    assert hit.range == pytest.approx(math.sqrt(13.0), abs=1e-9)
    assert hit.hit_point == pytest.approx((4.0, 6.0), abs=1e-9)
    assert hit.wall_index == 1


def test_ray_cast_upper_left_beam(room):
    """Test the beam aimed near the upper-left corner."""
    hit = ray_cast(room, (2.0, 3.0), 326.3)
    assert hit.range == pytest.approx(math.sqrt(13.0), abs=2e-3)
    assert hit.hit_point == pytest.approx((0.0, 6.0), abs=2e-3)


def test_ray_cast_range_matches_hit_distance(room):
    """Test that the range equals the distance to the hit point."""
    for angle in np.linspace(0.0, 359.0, 37):
        hit = ray_cast(room, (0.7, 4.2), angle)
        distance = math.hypot(hit.hit_point[0] - 0.7, hit.hit_point[1] - 4.2)
        assert hit.range == pytest.approx(distance, abs=1e-9)
        assert 0.0 < hit.range <= room.diameter + 1e-9


def test_ray_cast_angle_wraps(room):
    """Test that 360 + K behaves like K."""
    assert ray_cast(room, (1.0, 1.0), 400.0).range == pytest.approx(ray_cast(room, (1.0, 1.0), 40.0).range)


@pytest.mark.parametrize("origin", [(0.0, 3.0), (4.0, 6.0), (5.0, 3.0), (2.0, -1.0)])
def test_ray_cast_origin_not_interior(room, origin):
    """Test that boundary and exterior origins are rejected."""
    with pytest.raises(OriginOutsideError):
        ray_cast(room, origin, 0.0)


def test_ray_cast_non_convex(l_room):
    """Test the nearest wall is chosen in a non-convex room."""
    hit = ray_cast(l_room, (1.0, 3.0), 90.0)
    assert hit.range == pytest.approx(1.0)
    assert hit.wall_index == 3

    # Passing under the reflex corner reaches the far wall
    hit = ray_cast(l_room, (1.0, 1.0), 90.0)
    assert hit.range == pytest.approx(3.0)
    assert hit.wall_index == 1


def test_ray_cast_ranges_matches_scalar(room):
    """Test the vectorized caster against single rays."""
    origins = np.array([[0.5, 0.5], [2.0, 3.0], [3.9, 5.9], [1.2, 4.4]])
    angles = np.array([10.0, 0.0, 200.0, 300.0])
    ranges, walls = ray_cast_ranges(room, origins, angles)
    for origin, angle, r, w in zip(origins, angles, ranges, walls):
        hit = ray_cast(room, origin, angle)
        assert r == pytest.approx(hit.range, abs=1e-12)
        assert w == hit.wall_index


def test_contains(room):
    """Test strict interior membership."""
    inside = room.contains(np.array([2.0, 0.0, 4.0, -1.0, 1e-3]), np.array([3.0, 3.0, 6.0, 2.0, 1e-3]))
    assert inside.tolist() == [True, False, False, False, True]


def test_wall_distances(room):
    distances = room.wall_distances(np.array([2.0, 0.5]), np.array([3.0, 5.0]))
    assert distances == pytest.approx([2.0, 0.5])


def test_diameter(room):
    assert room.diameter == pytest.approx(math.sqrt(52.0))


def box_ranges(origins, angles, l1, l2):
    """Closed-form ray exit distance for the axis-aligned box [0, l1] x [0, l2]."""
    d1 = np.sin(np.radians(angles))
    d2 = np.cos(np.radians(angles))
    t1 = np.where(d1 > 0, (l1 - origins[:, 0]) / d1, -origins[:, 0] / d1)
    t2 = np.where(d2 > 0, (l2 - origins[:, 1]) / d2, -origins[:, 1] / d2)
    return np.minimum(t1, t2)


def test_ray_cast_matches_box_formula(room):
    """Test the polygon caster against the closed-form box exit on random poses."""
    rng = np.random.default_rng(2024)
    origins = np.column_stack((rng.uniform(0.01, 3.99, 1000), rng.uniform(0.01, 5.99, 1000)))
    angles = np.arange(36) * 10.0 + 5.0

    all_origins = np.repeat(origins, len(angles), axis=0)
    all_angles = np.tile(angles, len(origins))
    ranges, _ = ray_cast_ranges(room, all_origins, all_angles)

    np.testing.assert_allclose(ranges, box_ranges(all_origins, all_angles, 4.0, 6.0), rtol=0, atol=1e-9)


@pytest.mark.parametrize("angle", [12.5, 33.7, 75.0, 140.0, 179.0])
def test_ray_cast_mirror_symmetry(room, angle):
    """Test ranges from the vertical center line are symmetric in the angle."""
    left = ray_cast(room, (2.0, 1.7), -angle)
    right = ray_cast(room, (2.0, 1.7), angle)
    assert left.range == pytest.approx(right.range, abs=1e-9)
