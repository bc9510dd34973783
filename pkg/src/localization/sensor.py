"""
Laser rangefinder model: beam angles, simulated readings and the Gaussian
measurement likelihood.
"""
import logging
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from .geometry import Pose, RoomMap, normalize_angle, ray_cast, ray_cast_ranges

logger = logging.getLogger(__name__)

DEFAULT_RESOLUTION_DEG = 0.36
DEFAULT_NOISE_RMS = 0.05

# Log-likelihood of a candidate that cannot have produced the readings
IMPOSSIBLE = -np.inf


class SensorError(Exception):
    """Exception raised for errors in the rangefinder model."""
    pass


class InvalidBeamIndexError(SensorError):
    """Raised when an LRF beam index is below 1."""
    pass


@dataclass(frozen=True)
class BeamMeasurement:
    """
    One rangefinder reading.

    `angle` is an absolute direction in known-heading use and an offset
    from the body heading when the filter estimates heading.
    """
    angle: float
    range: float
    noise_rms: float

    def __post_init__(self):
        object.__setattr__(self, "angle", normalize_angle(float(self.angle)))
        object.__setattr__(self, "range", float(self.range))
        object.__setattr__(self, "noise_rms", float(self.noise_rms))
        if not self.noise_rms >= 0.0:
            raise SensorError(f"Noise RMS must be non-negative, got {self.noise_rms}")

    @property
    def flagged(self) -> bool:
        """True when the reading is negative (possible for noisy short ranges)."""
        return self.range < 0.0


@dataclass(frozen=True)
class LrfSpec:
    """Rangefinder characteristics."""
    resolution_deg: float = DEFAULT_RESOLUTION_DEG
    noise_rms: float = DEFAULT_NOISE_RMS
    max_range: Optional[float] = None

    def __post_init__(self):
        if not self.resolution_deg > 0.0:
            raise SensorError(f"LRF resolution must be positive, got {self.resolution_deg}")
        if not self.noise_rms >= 0.0:
            raise SensorError(f"LRF noise RMS must be non-negative, got {self.noise_rms}")
        if self.max_range is not None and not self.max_range > 0.0:
            raise SensorError(f"LRF max range must be positive, got {self.max_range}")

    @classmethod
    def from_config(cls, config: Optional[Dict[str, Any]] = None) -> "LrfSpec":
        """Build from the `sensor` section of a configuration dictionary."""
        sensor_config = (config or {}).get("sensor", {})
        return cls(
            resolution_deg=float(sensor_config.get("resolution_deg", DEFAULT_RESOLUTION_DEG)),
            noise_rms=float(sensor_config.get("noise_rms", DEFAULT_NOISE_RMS)),
            max_range=sensor_config.get("max_range"),
        )

    def scan_angles(self, heading_k: float, indices: Iterable[int]) -> List[float]:
        """Absolute directions of the given 1-based beam indices."""
        return [beam_angle(heading_k, i, self.resolution_deg) for i in indices]


def beam_angle(heading_k: float, index_i: int, resolution_deg: float = DEFAULT_RESOLUTION_DEG) -> float:
    """
    Direction of the i-th LRF beam, K_i = K + (i - 1) * dk.

    Args:
        heading_k: Object heading in degrees
        index_i: 1-based beam index
        resolution_deg: Angular step between beams

    Returns:
        Beam direction in degrees, wrapped to [0, 360)
    """
    if int(index_i) != index_i or index_i < 1:
        raise InvalidBeamIndexError(f"Beam index must be an integer >= 1, got {index_i}")
    return normalize_angle(heading_k + (index_i - 1) * resolution_deg)


def simulate_measurement(
    room: RoomMap,
    true_pose: Pose,
    angle: float,
    noise_rms: float,
    rng: np.random.Generator,
    max_range: Optional[float] = None,
    noise_free: bool = False,
) -> BeamMeasurement:
    """
    Simulate a range reading y = rho + v with v ~ N(0, noise_rms^2).

    Args:
        room: Room map
        true_pose: Pose the reading is taken from
        angle: Absolute beam direction in degrees
        noise_rms: Noise standard deviation in meters
        rng: Random generator; noisy calls consume one normal draw
        max_range: Optional clamp on the reported range
        noise_free: Report the exact range but keep `noise_rms` on the reading

    Returns:
        BeamMeasurement with the absolute angle
    """
    if noise_rms < 0.0:
        raise SensorError(f"Noise RMS must be non-negative, got {noise_rms}")

    exact = ray_cast(room, true_pose.position, angle).range
    value = exact if noise_free else exact + float(rng.normal(0.0, noise_rms))
    if max_range is not None:
        value = min(value, max_range)

    measurement = BeamMeasurement(angle=angle, range=value, noise_rms=noise_rms)
    if measurement.flagged:
        logger.warning(f"Simulated range at {measurement.angle:.4f} deg is negative ({value:.6f} m)")
    return measurement


def _check_noise(measurements: Sequence[BeamMeasurement]) -> None:
    for j, m in enumerate(measurements):
        if not m.noise_rms > 0.0:
            raise SensorError(f"Measurement {j} has non-positive noise RMS {m.noise_rms}")


def grid_log_likelihood(
    measurements: Sequence[BeamMeasurement],
    points: np.ndarray,
    room: RoomMap,
    headings: Optional[np.ndarray] = None,
    max_range: Optional[float] = None,
) -> np.ndarray:
    """
    Gaussian log-likelihood of the readings at many candidate points.

    Returns -1/2 * sum_j (y_j - rho_j)^2 / r_j^2 per point, without the
    normalization constant. Points not strictly inside the room get
    IMPOSSIBLE.

    Args:
        measurements: Readings to evaluate
        points: Candidate positions, shape (N, 2)
        room: Room map
        headings: Optional candidate headings (N,); when given, measurement
            angles are offsets added to the candidate heading
        max_range: Optional clamp applied to predicted ranges

    Returns:
        Array of N log-likelihood values
    """
    _check_noise(measurements)
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    inside = room.contains(points[:, 0], points[:, 1])

    total = np.zeros(points.shape[0])
    candidates = points[inside]
    cand_headings = None if headings is None else np.asarray(headings, dtype=float).reshape(-1)[inside]

    for m in measurements:
        angles = m.angle if cand_headings is None else cand_headings + m.angle
        predicted, _ = ray_cast_ranges(room, candidates, angles)
        if max_range is not None:
            predicted = np.minimum(predicted, max_range)
        residual = m.range - predicted
        total[inside] -= 0.5 * residual * residual / (m.noise_rms * m.noise_rms)

    total[~inside] = IMPOSSIBLE
    return total


def log_likelihood(
    measurements: Sequence[BeamMeasurement],
    candidate: Pose,
    room: RoomMap,
    relative: bool = False,
    max_range: Optional[float] = None,
) -> float:
    """
    Gaussian log-likelihood of the readings for one candidate pose.

    Args:
        measurements: Readings to evaluate
        candidate: Candidate pose
        room: Room map
        relative: Treat measurement angles as offsets from the candidate heading
        max_range: Optional clamp applied to predicted ranges

    Returns:
        Log-likelihood (additive constant dropped), IMPOSSIBLE outside the room
    """
    headings = np.array([candidate.heading_k]) if relative else None
    values = grid_log_likelihood(
        measurements, np.array([candidate.position]), room, headings=headings, max_range=max_range
    )
    return float(values[0])
