"""
Room localization: geometry, rangefinder model, point-mass filter and
scenario studies.
"""
from .geometry import (
    GeometryError,
    InvalidMapError,
    MapIntegrityError,
    OriginOutsideError,
    Pose,
    RayHit,
    RoomMap,
    make_rectangle,
    ray_cast,
    ray_cast_ranges,
)
from .sensor import BeamMeasurement, LrfSpec, SensorError, beam_angle, log_likelihood, simulate_measurement
from .point_mass import (
    DegeneratePosteriorError,
    EmptyPriorError,
    EstimateReport,
    FilterError,
    GridSpec,
    WeightGrid,
    covariance,
    marginal,
    mean_estimate,
    summarize,
    uniform_prior,
    update,
)
from .analysis import (
    TABLE1_SUBSETS,
    AnalysisError,
    BeamConfig,
    ComboTable,
    Scenario,
    ScenarioError,
    UnconditionalCov,
    combo_study,
    monte_carlo_covariance,
    run_scenario,
)

__all__ = [
    "GeometryError",
    "InvalidMapError",
    "MapIntegrityError",
    "OriginOutsideError",
    "Pose",
    "RayHit",
    "RoomMap",
    "make_rectangle",
    "ray_cast",
    "ray_cast_ranges",
    "BeamMeasurement",
    "LrfSpec",
    "SensorError",
    "beam_angle",
    "log_likelihood",
    "simulate_measurement",
    "DegeneratePosteriorError",
    "EmptyPriorError",
    "EstimateReport",
    "FilterError",
    "GridSpec",
    "WeightGrid",
    "covariance",
    "marginal",
    "mean_estimate",
    "summarize",
    "uniform_prior",
    "update",
    "TABLE1_SUBSETS",
    "AnalysisError",
    "BeamConfig",
    "ComboTable",
    "Scenario",
    "ScenarioError",
    "UnconditionalCov",
    "combo_study",
    "monte_carlo_covariance",
    "run_scenario",
]
