"""
Scenario studies: single runs, measurement-combination tables and
Monte-Carlo estimation of the unconditional error covariance.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .geometry import Pose, RoomMap
from .point_mass import (
    DegeneratePosteriorError,
    EstimateReport,
    GridSpec,
    WeightGrid,
    summarize,
    uniform_prior,
    update,
    wrap_degrees,
)
from .sensor import DEFAULT_NOISE_RMS, BeamMeasurement, LrfSpec, simulate_measurement

logger = logging.getLogger(__name__)

# Every non-empty combination of beams 1, 2 and 3, singles first
TABLE1_SUBSETS: Tuple[Tuple[int, ...], ...] = ((1,), (2,), (3,), (1, 2), (2, 3), (1, 3), (1, 2, 3))

MAX_POSE_DRAWS = 10000


class AnalysisError(Exception):
    """Exception raised for errors in scenario studies."""
    pass


class ScenarioError(AnalysisError):
    """Raised when a scenario or a study request violates its preconditions."""
    pass


@dataclass(frozen=True)
class BeamConfig:
    """Beam direction in degrees and its noise RMS in meters."""
    angle: float
    noise_rms: float = DEFAULT_NOISE_RMS


@dataclass(frozen=True)
class Scenario:
    """Complete configuration of a localization experiment."""
    room: RoomMap
    true_pose: Pose
    beams: Tuple[BeamConfig, ...]
    grid: GridSpec = field(default_factory=GridSpec)
    seed: int = 0
    noise_free: bool = False
    lrf: LrfSpec = field(default_factory=LrfSpec)

    def __post_init__(self):
        beams = tuple(self.beams)
        if not beams:
            raise ScenarioError("Scenario needs at least one beam")
        object.__setattr__(self, "beams", beams)

        if not 0 <= int(self.seed) < 2 ** 64:
            raise ScenarioError(f"Seed must fit in 64 unsigned bits, got {self.seed}")
        object.__setattr__(self, "seed", int(self.seed))

        if not self.room.contains_point(self.true_pose.position):
            raise ScenarioError(f"True pose {self.true_pose.position} is not inside {self.room.name}")

        # Known-heading grids take the scenario heading
        if not self.grid.estimates_heading and self.grid.known_heading != self.true_pose.heading_k:
            object.__setattr__(self, "grid", replace(self.grid, known_heading=self.true_pose.heading_k))

    def beam_offset(self, index: int) -> float:
        """Angle of a beam relative to the scenario heading."""
        return self.beams[index - 1].angle - self.true_pose.heading_k


@dataclass
class ScenarioResult:
    """Posterior and estimate for one measurement subset."""
    report: EstimateReport
    grid: WeightGrid
    subset: Tuple[int, ...]
    measurements: Tuple[BeamMeasurement, ...]


@dataclass
class ComboRow:
    """Posterior RMS for one measurement subset."""
    subset: Tuple[int, ...]
    rms: np.ndarray
    mean: np.ndarray
    grid: Optional[WeightGrid] = field(default=None, repr=False, compare=False)

    @property
    def label(self) -> str:
        return subset_label(self.subset)


@dataclass
class ComboTable:
    """Per-subset posterior RMS values."""
    rows: List[ComboRow]

    def to_frame(self) -> pd.DataFrame:
        """Table with one column per subset and one row per axis RMS."""
        index = ["sqrt(P[1,1]) [m]", "sqrt(P[2,2]) [m]", "sqrt(P[3,3]) [deg]"]
        data = {row.label: [float(v) for v in row.rms] for row in self.rows}
        dim = max((len(row.rms) for row in self.rows), default=2)
        return pd.DataFrame(data, index=index[:dim])


@dataclass
class TrialOutcome:
    """Result of one Monte-Carlo trial."""
    trial: int
    true_pose: Pose
    error: Optional[np.ndarray] = None
    conditional_cov: Optional[np.ndarray] = None

    @property
    def skipped(self) -> bool:
        return self.error is None


@dataclass
class UnconditionalCov:
    """Monte-Carlo error covariance next to the average conditional covariance."""
    matrix: np.ndarray
    mean_conditional_cov: np.ndarray
    trials: int
    skipped: int = 0

    @property
    def used(self) -> int:
        return self.trials - self.skipped

    @property
    def rms(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.matrix), 0.0, None))

    @property
    def conditional_rms(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.mean_conditional_cov), 0.0, None))

    @property
    def consistency_gap(self) -> np.ndarray:
        """Per-axis relative gap between the two diagonals."""
        conditional = np.diag(self.mean_conditional_cov)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.abs(np.diag(self.matrix) - conditional) / conditional

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        return {
            "matrix": [[float(v) for v in row] for row in self.matrix],
            "mean_conditional_cov": [[float(v) for v in row] for row in self.mean_conditional_cov],
            "rms": [float(v) for v in self.rms],
            "conditional_rms": [float(v) for v in self.conditional_rms],
            "consistency_gap": [float(v) for v in self.consistency_gap],
            "trials": int(self.trials),
            "skipped": int(self.skipped),
        }


def subset_label(subset: Iterable[int]) -> str:
    return "+".join(str(i) for i in subset)


def validate_subset(scenario: Scenario, subset: Sequence[int]) -> Tuple[int, ...]:
    """
    Check 1-based beam indices and return them sorted without duplicates.

    Raises:
        ScenarioError: For an empty subset or an index outside 1..len(beams)
    """
    if subset is None or len(subset) == 0:
        raise ScenarioError("Measurement subset must not be empty")
    count = len(scenario.beams)
    for position, index in enumerate(subset):
        if int(index) != index or not 1 <= index <= count:
            raise ScenarioError(f"subset[{position}]: beam {index} is outside 1..{count}")
    return tuple(sorted(set(int(i) for i in subset)))


def simulate_beams(
    scenario: Scenario,
    rng: np.random.Generator,
    pose: Optional[Pose] = None,
    noise_free: Optional[bool] = None,
) -> List[BeamMeasurement]:
    """
    Readings for every scenario beam, drawn in beam order from one rng.

    Known-heading scenarios keep absolute beam angles. When the grid also
    estimates heading, beams keep their offset from the heading: the reading
    is taken along pose heading + offset and stored with the offset.

    Args:
        scenario: Scenario to simulate
        rng: Random generator shared by all beams
        pose: Pose to measure from; defaults to the scenario's true pose
        noise_free: Override the scenario's noise-free flag

    Returns:
        List of measurements, one per beam
    """
    pose = pose or scenario.true_pose
    if noise_free is None:
        noise_free = scenario.noise_free
    relative = scenario.grid.estimates_heading
    measurements = []
    for index, beam in enumerate(scenario.beams, start=1):
        offset = scenario.beam_offset(index)
        direction = pose.heading_k + offset if relative else beam.angle
        measurement = simulate_measurement(
            scenario.room,
            pose,
            direction,
            beam.noise_rms,
            rng,
            max_range=scenario.lrf.max_range,
            noise_free=noise_free,
        )
        if relative:
            measurement = replace(measurement, angle=offset)
        measurements.append(measurement)
    return measurements


def run_scenario(
    scenario: Scenario,
    subset: Sequence[int],
    prior: Optional[WeightGrid] = None,
) -> ScenarioResult:
    """
    Simulate the scenario beams and apply the chosen subset to a uniform prior.

    Args:
        scenario: Scenario to run
        subset: 1-based beam indices to use
        prior: Optional precomputed uniform prior for the scenario grid

    Returns:
        ScenarioResult with posterior grid and estimate report
    """
    subset = validate_subset(scenario, subset)
    rng = np.random.default_rng(scenario.seed)
    measurements = tuple(simulate_beams(scenario, rng))

    prior = prior if prior is not None else uniform_prior(scenario.grid, scenario.room)
    selected = [measurements[i - 1] for i in subset]
    posterior = update(prior, selected, scenario.room, max_range=scenario.lrf.max_range)
    report = summarize(posterior, used=subset)

    logger.info(f"Scenario subset {subset_label(subset)}: mean {np.round(report.mean, 4)}, rms {np.round(report.rms, 4)}")
    return ScenarioResult(report=report, grid=posterior, subset=subset, measurements=measurements)


def combo_study(
    scenario: Scenario,
    subsets: Sequence[Sequence[int]],
    keep_grids: bool = False,
) -> ComboTable:
    """
    Compare measurement subsets under one shared prior and one shared set of
    measurement realizations.

    Args:
        scenario: Scenario to run
        subsets: List of 1-based beam-index subsets
        keep_grids: Attach posterior grids to the rows (for heatmap export)

    Returns:
        ComboTable with one row per subset
    """
    if not subsets:
        raise ScenarioError("At least one measurement subset is required")

    checked = [validate_subset(scenario, subset) for subset in subsets]
    prior = uniform_prior(scenario.grid, scenario.room)

    rows = []
    for subset in checked:
        result = run_scenario(scenario, subset, prior=prior)
        rows.append(
            ComboRow(
                subset=subset,
                rms=result.report.rms,
                mean=result.report.mean,
                grid=result.grid if keep_grids else None,
            )
        )
    return ComboTable(rows=rows)


def draw_pose(scenario: Scenario, rng: np.random.Generator) -> Pose:
    """
    Random pose uniform over the room interior.

    Heading is the scenario heading for known-heading grids and uniform on
    [0, 360) otherwise.
    """
    x1_min, x1_max, x2_min, x2_max = scenario.room.bounds
    for _ in range(MAX_POSE_DRAWS):
        x1 = rng.uniform(x1_min, x1_max)
        x2 = rng.uniform(x2_min, x2_max)
        if scenario.room.contains_point((x1, x2)):
            break
    else:
        raise AnalysisError(f"Could not draw an interior pose in {scenario.room.name}")

    if scenario.grid.estimates_heading:
        heading = rng.uniform(0.0, 360.0)
    else:
        heading = scenario.true_pose.heading_k
    return Pose(x1, x2, heading)


def run_trial(scenario: Scenario, subset: Sequence[int], trial: int, prior: WeightGrid) -> TrialOutcome:
    """
    One Monte-Carlo trial with an rng seeded from (scenario seed, trial).

    Degenerate posteriors produce an outcome without error data.
    """
    rng = np.random.default_rng([scenario.seed, trial])
    pose = draw_pose(scenario, rng)
    measurements = simulate_beams(scenario, rng, pose=pose, noise_free=False)
    selected = [measurements[i - 1] for i in subset]

    try:
        posterior = update(prior, selected, scenario.room, max_range=scenario.lrf.max_range)
    except DegeneratePosteriorError:
        logger.warning(f"Trial {trial} skipped: degenerate posterior at pose {pose}")
        return TrialOutcome(trial=trial, true_pose=pose)

    report = summarize(posterior, used=subset)
    truth = [pose.x1, pose.x2, pose.heading_k][: len(report.mean)]
    error = np.asarray(truth) - report.mean
    if len(error) == 3:
        error[2] = wrap_degrees(error[2])
    return TrialOutcome(trial=trial, true_pose=pose, error=error, conditional_cov=report.covariance)


def monte_carlo_covariance(
    scenario: Scenario,
    subset: Sequence[int],
    trials: int,
    workers: int = 1,
    progress_callback: Optional[Callable[[float], None]] = None,
) -> UnconditionalCov:
    """
    Monte-Carlo estimate of the unconditional error covariance.

    Each trial draws a true pose uniformly over the room, simulates the
    beams, runs the filter and records the estimation error and the
    conditional covariance. Trials are reduced in index order, so results do
    not depend on `workers`.

    Args:
        scenario: Scenario to study
        subset: 1-based beam indices to use
        trials: Number of trials (>= 1)
        workers: Threads used to run trials
        progress_callback: Optional callback receiving percent complete

    Returns:
        UnconditionalCov over the non-skipped trials
    """
    if int(trials) != trials or trials < 1:
        raise ScenarioError(f"trials must be a positive integer, got {trials}")
    subset = validate_subset(scenario, subset)
    prior = uniform_prior(scenario.grid, scenario.room)

    def _run(trial: int) -> TrialOutcome:
        return run_trial(scenario, subset, trial, prior)

    outcomes: List[TrialOutcome] = []
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            for outcome in executor.map(_run, range(trials)):
                outcomes.append(outcome)
                if progress_callback:
                    progress_callback(len(outcomes) / trials * 100)
    else:
        for trial in range(trials):
            outcomes.append(_run(trial))
            if progress_callback:
                progress_callback(len(outcomes) / trials * 100)

    dim = scenario.grid.dimension
    error_sum = np.zeros((dim, dim))
    conditional_sum = np.zeros((dim, dim))
    skipped = 0
    for outcome in outcomes:
        if outcome.skipped:
            skipped += 1
            continue
        error_sum += np.outer(outcome.error, outcome.error)
        conditional_sum += outcome.conditional_cov

    used = trials - skipped
    if used == 0:
        raise AnalysisError(f"All {trials} Monte-Carlo trials produced degenerate posteriors")
    if skipped:
        logger.warning(f"{skipped} of {trials} Monte-Carlo trials were skipped")

    result = UnconditionalCov(
        matrix=error_sum / used,
        mean_conditional_cov=conditional_sum / used,
        trials=int(trials),
        skipped=skipped,
    )
    logger.info(f"Monte-Carlo over {used} trials: rms {np.round(result.rms, 4)}, conditional rms {np.round(result.conditional_rms, 4)}")
    return result
