"""
Point-mass filter over a fixed grid of candidate positions (and headings).

Weights are kept as natural logarithms and renormalized with a max-shifted
log-sum-exp after every update.
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import logsumexp

from .geometry import RoomMap, normalize_angle
from .sensor import IMPOSSIBLE, BeamMeasurement, grid_log_likelihood

logger = logging.getLogger(__name__)

Bounds = Tuple[float, float, float, float]
Axis = Union[int, str]

AXIS_LABELS = ("x1", "x2", "heading")
HEADING_SPAN = 360.0


class FilterError(Exception):
    """Exception raised for errors in the point-mass filter."""
    pass


class InvalidGridError(FilterError):
    """Raised for grid specifications that break their invariants."""
    pass


class EmptyPriorError(FilterError):
    """Raised when no grid point lies inside the room."""
    pass


class DegeneratePosteriorError(FilterError):
    """Raised when every grid point becomes impossible after an update."""
    pass


class InvalidAxisError(FilterError):
    """Raised when a marginal is requested over an inactive axis."""
    pass


@dataclass(frozen=True)
class GridSpec:
    """
    Grid resolution and extent.

    Points sit at cell centers of the uniform partition of `bounds`
    (x1_min, x1_max, x2_min, x2_max). With nk = 1 the heading is known and
    fixed at `known_heading`; with nk > 1 headings cover [0, 360).
    """
    n1: int = 200
    n2: int = 300
    nk: int = 1
    bounds: Optional[Bounds] = None
    known_heading: float = 0.0

    def __post_init__(self):
        for name in ("n1", "n2", "nk"):
            value = getattr(self, name)
            if int(value) != value:
                raise InvalidGridError(f"{name} must be an integer, got {value}")
            object.__setattr__(self, name, int(value))
        if self.n1 < 2 or self.n2 < 2:
            raise InvalidGridError(f"Grid needs at least 2 points per axis, got {self.n1}x{self.n2}")
        if self.nk < 1:
            raise InvalidGridError(f"Heading grid needs at least 1 point, got {self.nk}")
        if self.bounds is not None:
            bounds = tuple(float(b) for b in self.bounds)
            if len(bounds) != 4:
                raise InvalidGridError(f"Grid bounds need 4 values, got {len(bounds)}")
            if not (bounds[1] > bounds[0] and bounds[3] > bounds[2]):
                raise InvalidGridError(f"Grid bounds must have positive extent, got {bounds}")
            object.__setattr__(self, "bounds", bounds)
        object.__setattr__(self, "known_heading", normalize_angle(float(self.known_heading)))

    @classmethod
    def from_config(cls, config: Optional[Dict[str, Any]] = None, **overrides) -> "GridSpec":
        """Build from the `grid` section of a configuration dictionary."""
        grid_config = dict((config or {}).get("grid", {}))
        grid_config.update(overrides)
        return cls(
            n1=grid_config.get("n1", 200),
            n2=grid_config.get("n2", 300),
            nk=grid_config.get("nk", 1),
            bounds=grid_config.get("bounds"),
            known_heading=grid_config.get("known_heading", 0.0),
        )

    @property
    def shape(self) -> Tuple[int, int, int]:
        return (self.n1, self.n2, self.nk)

    @property
    def size(self) -> int:
        return self.n1 * self.n2 * self.nk

    @property
    def estimates_heading(self) -> bool:
        return self.nk > 1

    @property
    def dimension(self) -> int:
        return 3 if self.estimates_heading else 2

    def resolve(self, room: RoomMap) -> "GridSpec":
        """Fill in default bounds from the room's bounding box."""
        if self.bounds is None:
            return replace(self, bounds=room.bounds)

        x1_min, x1_max, x2_min, x2_max = room.bounds
        b = self.bounds
        tol = 1e-9
        if b[0] < x1_min - tol or b[1] > x1_max + tol or b[2] < x2_min - tol or b[3] > x2_max + tol:
            logger.warning(f"Grid bounds {b} extend beyond the room bounding box {room.bounds}")
        return self

    def cell_sizes(self) -> Tuple[float, float, float]:
        if self.bounds is None:
            raise InvalidGridError("Grid bounds are not resolved")
        x1_min, x1_max, x2_min, x2_max = self.bounds
        dk = HEADING_SPAN / self.nk if self.estimates_heading else 0.0
        return ((x1_max - x1_min) / self.n1, (x2_max - x2_min) / self.n2, dk)

    def axis_points(self, axis: Axis) -> np.ndarray:
        """Cell-center coordinates along one axis."""
        index = axis_index(axis)
        d1, d2, dk = self.cell_sizes()
        if index == 0:
            return self.bounds[0] + (np.arange(self.n1) + 0.5) * d1
        if index == 1:
            return self.bounds[2] + (np.arange(self.n2) + 0.5) * d2
        if not self.estimates_heading:
            return np.array([self.known_heading])
        return (np.arange(self.nk) + 0.5) * dk


def axis_index(axis: Axis) -> int:
    """Map an axis name (1, 2, 'x1', 'x2', 'heading') to 0, 1 or 2."""
    lookup = {1: 0, 2: 1, 3: 2, "1": 0, "2": 1, "x1": 0, "x2": 1, "heading": 2, "k": 2}
    key = axis.lower() if isinstance(axis, str) else axis
    if key not in lookup:
        raise InvalidAxisError(f"Unknown axis {axis!r}")
    return lookup[key]


def wrap_degrees(delta: np.ndarray) -> np.ndarray:
    """Wrap angle differences to [-180, 180)."""
    return np.mod(np.asarray(delta, dtype=float) + 180.0, HEADING_SPAN) - 180.0


@dataclass
class WeightGrid:
    """Normalized point-mass approximation of a position (and heading) p.d.f."""
    spec: GridSpec
    log_weights: np.ndarray
    n_measurements: int = 0

    def __post_init__(self):
        self.log_weights = np.asarray(self.log_weights, dtype=float).reshape(self.spec.shape)

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)

    def axis_points(self, axis: Axis) -> np.ndarray:
        return self.spec.axis_points(axis)

    def positions(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Coordinates of every grid point, each of shape (n1, n2, nk)."""
        return np.meshgrid(
            self.axis_points(1), self.axis_points(2), self.axis_points("heading"), indexing="ij"
        )

    def total_mass(self) -> float:
        return float(np.exp(logsumexp(self.log_weights)))


@dataclass
class EstimateReport:
    """MMSE estimate with its conditional covariance."""
    mean: np.ndarray
    covariance: np.ndarray
    n_measurements: int
    used: Tuple[int, ...] = field(default_factory=tuple)

    @property
    def rms(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))

    @property
    def axes(self) -> Tuple[str, ...]:
        return AXIS_LABELS[: len(self.mean)]

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        return {
            "axes": list(self.axes),
            "mean": [float(v) for v in self.mean],
            "covariance": [[float(v) for v in row] for row in self.covariance],
            "rms": [float(v) for v in self.rms],
            "n_measurements": int(self.n_measurements),
            "used_beams": [int(i) for i in self.used],
        }


def _normalize(log_weights: np.ndarray) -> np.ndarray:
    if not np.isfinite(log_weights).any():
        raise DegeneratePosteriorError(
            "All grid points are impossible; the measurements are inconsistent with the map or grid"
        )
    return log_weights - logsumexp(log_weights)


def uniform_prior(spec: GridSpec, room: RoomMap) -> WeightGrid:
    """
    Uniform point-mass prior over the grid points inside the room.

    Args:
        spec: Grid specification (bounds default to the room bounding box)
        room: Room map

    Returns:
        Normalized WeightGrid; points outside the room get IMPOSSIBLE

    Raises:
        EmptyPriorError: If no grid point is inside the room
    """
    spec = spec.resolve(room)
    x1, x2 = np.meshgrid(spec.axis_points(1), spec.axis_points(2), indexing="ij")
    inside = room.contains(x1, x2)
    count = int(inside.sum())
    if count == 0:
        raise EmptyPriorError(f"No grid point of {spec.bounds} lies inside {room.name}")

    log_weights = np.where(inside, 0.0, IMPOSSIBLE)[:, :, None]
    log_weights = np.broadcast_to(log_weights, spec.shape).copy()
    logger.info(f"Uniform prior: {count * spec.nk} of {spec.size} grid points inside {room.name}")
    return WeightGrid(spec=spec, log_weights=_normalize(log_weights))


def update(
    grid: WeightGrid,
    measurements: Sequence[BeamMeasurement],
    room: RoomMap,
    max_range: Optional[float] = None,
) -> WeightGrid:
    """
    Bayesian weight update with a batch of range readings.

    Each point's log-weight gains the Gaussian log-likelihood of the readings;
    the result is renormalized. With nk > 1 the measurement angles are offsets
    added to each point's heading.

    Args:
        grid: Normalized weight grid
        measurements: Non-empty list of readings
        room: Room map
        max_range: Optional clamp applied to predicted ranges

    Returns:
        New normalized WeightGrid

    Raises:
        DegeneratePosteriorError: If no point keeps a finite weight
    """
    if not measurements:
        raise FilterError("Update needs at least one measurement")

    spec = grid.spec
    x1, x2, heading = grid.positions()
    active = np.isfinite(grid.log_weights)

    points = np.column_stack((x1[active], x2[active]))
    headings = heading[active] if spec.estimates_heading else None
    log_like = grid_log_likelihood(measurements, points, room, headings=headings, max_range=max_range)

    log_weights = np.full(spec.shape, IMPOSSIBLE)
    log_weights[active] = grid.log_weights[active] + log_like

    try:
        normalized = _normalize(log_weights)
    except DegeneratePosteriorError:
        logger.warning(f"Degenerate posterior after {len(measurements)} measurements")
        raise

    posterior = WeightGrid(spec=spec, log_weights=normalized, n_measurements=grid.n_measurements + len(measurements))
    logger.debug(f"Updated grid with {len(measurements)} measurements")
    return posterior


def marginal(grid: WeightGrid, axis: Axis) -> np.ndarray:
    """
    Marginal weights along one axis.

    Raises:
        InvalidAxisError: For the heading axis when heading is known
    """
    index = axis_index(axis)
    if index == 2 and not grid.spec.estimates_heading:
        raise InvalidAxisError("Heading axis is inactive for a known-heading grid")
    others = tuple(i for i in range(3) if i != index)
    return grid.weights.sum(axis=others)


def mean_estimate(grid: WeightGrid) -> np.ndarray:
    """
    Posterior mean of the grid.

    The heading component, when estimated, is the circular mean (direction
    of the weighted resultant vector).
    """
    mean = [
        float(np.dot(marginal(grid, 1), grid.axis_points(1))),
        float(np.dot(marginal(grid, 2), grid.axis_points(2))),
    ]
    if grid.spec.estimates_heading:
        weights = marginal(grid, "heading")
        radians = np.radians(grid.axis_points("heading"))
        resultant = np.arctan2(np.dot(weights, np.sin(radians)), np.dot(weights, np.cos(radians)))
        mean.append(normalize_angle(float(np.degrees(resultant))))
    return np.array(mean)


def covariance(grid: WeightGrid, mean: np.ndarray) -> np.ndarray:
    """
    Posterior covariance about `mean`.

    Heading deviations are wrapped to [-180, 180) degrees.
    """
    weights = grid.weights
    deviations = [
        (grid.axis_points(1) - mean[0])[:, None, None],
        (grid.axis_points(2) - mean[1])[None, :, None],
    ]
    if grid.spec.estimates_heading:
        deviations.append(wrap_degrees(grid.axis_points("heading") - mean[2])[None, None, :])

    dim = len(deviations)
    result = np.zeros((dim, dim))
    for a in range(dim):
        weighted = weights * deviations[a]
        for b in range(a, dim):
            result[a, b] = result[b, a] = float(np.sum(weighted * deviations[b]))
    return result


def summarize(grid: WeightGrid, used: Sequence[int] = ()) -> EstimateReport:
    """Estimate report for a posterior grid."""
    mean = mean_estimate(grid)
    return EstimateReport(
        mean=mean,
        covariance=covariance(grid, mean),
        n_measurements=grid.n_measurements,
        used=tuple(int(i) for i in used),
    )
