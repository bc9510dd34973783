"""
Scenario files: YAML documents validated with pydantic and converted to
Scenario objects.
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, ValidationError, model_validator

from .analysis import BeamConfig, Scenario, ScenarioError
from .geometry import GeometryError, Pose, RoomMap, make_rectangle
from .point_mass import FilterError, GridSpec
from .sensor import DEFAULT_NOISE_RMS, DEFAULT_RESOLUTION_DEG, LrfSpec, SensorError, beam_angle

logger = logging.getLogger(__name__)


class ScenarioFileError(Exception):
    """Exception raised for unreadable or invalid scenario files."""

    def __init__(self, message: str, line: Optional[int] = None, field: Optional[str] = None, source: str = ""):
        self.line = line
        self.field = field
        self.source = source
        location = []
        if source:
            location.append(source)
        if line is not None:
            location.append(f"line {line}")
        if field:
            location.append(field)
        prefix = f"{', '.join(location)}: " if location else ""
        super().__init__(f"{prefix}{message}")


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid")


class MapModel(_Model):
    rectangle: Optional[Tuple[PositiveFloat, PositiveFloat]] = None
    vertices: Optional[List[Tuple[float, float]]] = None

    @model_validator(mode="after")
    def _one_shape(self):
        if (self.rectangle is None) == (self.vertices is None):
            raise ValueError("give exactly one of 'rectangle' or 'vertices'")
        return self


class PoseModel(_Model):
    x1: float
    x2: float
    heading: float = 0.0


class LrfModel(_Model):
    resolution_deg: Optional[PositiveFloat] = None
    max_range: Optional[PositiveFloat] = None


class BeamModel(_Model):
    angle: Optional[float] = None
    index: Optional[PositiveInt] = None
    noise_rms: Optional[PositiveFloat] = None

    @model_validator(mode="after")
    def _one_direction(self):
        if (self.angle is None) == (self.index is None):
            raise ValueError("give exactly one of 'angle' or 'index'")
        return self


class GridModel(_Model):
    n1: int = Field(default=200, ge=2)
    n2: int = Field(default=300, ge=2)
    nk: int = Field(default=1, ge=1)
    bounds: Optional[Tuple[float, float, float, float]] = None


class OutputsModel(_Model):
    export_grid: bool = False
    heatmap: bool = False
    out_dir: Optional[str] = None


class ScenarioModel(_Model):
    map: MapModel
    pose: PoseModel
    lrf: LrfModel = Field(default_factory=LrfModel)
    beams: List[BeamModel] = Field(min_length=1)
    grid: Optional[GridModel] = None
    seed: int = Field(default=0, ge=0, lt=2 ** 64)
    noise_free: bool = False
    outputs: OutputsModel = Field(default_factory=OutputsModel)


@dataclass
class OutputOptions:
    """Export switches carried by a scenario file."""
    export_grid: bool = False
    heatmap: bool = False
    out_dir: Optional[str] = None


@dataclass
class ScenarioFile:
    """Parsed scenario file."""
    scenario: Scenario
    outputs: OutputOptions = field(default_factory=OutputOptions)


def _line_of(root: Optional[yaml.Node], loc: Sequence[Union[str, int]]) -> Optional[int]:
    """1-based line of the deepest YAML node matching a validation location."""
    if root is None:
        return None
    node = root
    for key in loc:
        if isinstance(node, yaml.MappingNode):
            match = next((v for k, v in node.value if getattr(k, "value", None) == str(key)), None)
            if match is None:
                break
            node = match
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
        else:
            break
    return node.start_mark.line + 1


def _build_scenario(model: ScenarioModel, config: Dict[str, Any], root: Optional[yaml.Node], source: str) -> Scenario:
    sensor_config = config.get("sensor", {})
    default_noise = float(sensor_config.get("noise_rms", DEFAULT_NOISE_RMS))

    def fail(ex: Exception, loc: Tuple[Union[str, int], ...]) -> ScenarioFileError:
        return ScenarioFileError(str(ex), line=_line_of(root, loc), field=".".join(str(k) for k in loc), source=source)

    try:
        if model.map.rectangle is not None:
            room = make_rectangle(*model.map.rectangle)
        else:
            room = RoomMap.from_vertices(model.map.vertices)
    except GeometryError as ex:
        raise fail(ex, ("map",)) from ex

    pose = Pose(model.pose.x1, model.pose.x2, model.pose.heading)

    try:
        lrf = LrfSpec(
            resolution_deg=model.lrf.resolution_deg or float(sensor_config.get("resolution_deg", DEFAULT_RESOLUTION_DEG)),
            noise_rms=default_noise,
            max_range=model.lrf.max_range if model.lrf.max_range is not None else sensor_config.get("max_range"),
        )
    except SensorError as ex:
        raise fail(ex, ("lrf",)) from ex

    beams = []
    for beam in model.beams:
        if beam.angle is not None:
            angle = beam.angle
        else:
            angle = beam_angle(pose.heading_k, beam.index, lrf.resolution_deg)
        beams.append(BeamConfig(angle=angle, noise_rms=beam.noise_rms or default_noise))

    try:
        if model.grid is not None:
            grid = GridSpec(n1=model.grid.n1, n2=model.grid.n2, nk=model.grid.nk, bounds=model.grid.bounds)
        else:
            grid = GridSpec.from_config(config)
    except FilterError as ex:
        raise fail(ex, ("grid",)) from ex

    try:
        return Scenario(
            room=room,
            true_pose=pose,
            beams=tuple(beams),
            grid=grid,
            seed=model.seed,
            noise_free=model.noise_free,
            lrf=lrf,
        )
    except ScenarioError as ex:
        raise fail(ex, ("pose",)) from ex


def parse_scenario_text(text: str, config: Optional[Dict[str, Any]] = None, source: str = "") -> ScenarioFile:
    """
    Parse scenario YAML text.

    Args:
        text: YAML document
        config: Configuration supplying defaults for omitted values
        source: Name used in error messages

    Returns:
        ScenarioFile

    Raises:
        ScenarioFileError: With line and/or field of the first problem
    """
    config = config or {}
    try:
        data = yaml.safe_load(text)
        root = yaml.compose(text)
    except yaml.YAMLError as ex:
        mark = getattr(ex, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        problem = getattr(ex, "problem", None) or str(ex)
        raise ScenarioFileError(f"invalid YAML: {problem}", line=line, source=source) from ex

    if not isinstance(data, dict):
        raise ScenarioFileError("scenario must be a mapping of sections", line=1, source=source)

    try:
        model = ScenarioModel.model_validate(data)
    except ValidationError as ex:
        first = ex.errors()[0]
        loc = tuple(first["loc"])
        raise ScenarioFileError(
            first["msg"],
            line=_line_of(root, loc),
            field=".".join(str(k) for k in loc),
            source=source,
        ) from ex

    scenario = _build_scenario(model, config, root, source)
    outputs = OutputOptions(
        export_grid=model.outputs.export_grid,
        heatmap=model.outputs.heatmap,
        out_dir=model.outputs.out_dir,
    )
    logger.debug(f"Parsed scenario {source or '<text>'} with {len(scenario.beams)} beams")
    return ScenarioFile(scenario=scenario, outputs=outputs)


def load_scenario_file(path: Union[str, Path], config: Optional[Dict[str, Any]] = None) -> ScenarioFile:
    """
    Load and validate a scenario file.

    Raises:
        ScenarioFileError: If the file is missing, unreadable or invalid
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as ex:
        raise ScenarioFileError(f"scenario file not found: {path}") from ex
    except OSError as ex:
        raise ScenarioFileError(f"cannot read scenario file {path}: {ex}") from ex
    return parse_scenario_text(text, config=config, source=str(path))


def _room_to_dict(room: RoomMap) -> Dict[str, Any]:
    if len(room.vertices) == 4:
        l1, l2 = room.vertices[2]
        if l1 > 0 and l2 > 0 and room.vertices == ((0.0, 0.0), (l1, 0.0), (l1, l2), (0.0, l2)):
            return {"rectangle": [l1, l2]}
    return {"vertices": [[x1, x2] for x1, x2 in room.vertices]}


def scenario_file_to_dict(scenario_file: ScenarioFile) -> Dict[str, Any]:
    """Plain-data form of a scenario file (beams always by absolute angle)."""
    s = scenario_file.scenario
    grid: Dict[str, Any] = {"n1": s.grid.n1, "n2": s.grid.n2, "nk": s.grid.nk}
    if s.grid.bounds is not None:
        grid["bounds"] = list(s.grid.bounds)
    lrf: Dict[str, Any] = {"resolution_deg": s.lrf.resolution_deg}
    if s.lrf.max_range is not None:
        lrf["max_range"] = s.lrf.max_range

    outputs = scenario_file.outputs
    return {
        "map": _room_to_dict(s.room),
        "pose": {"x1": s.true_pose.x1, "x2": s.true_pose.x2, "heading": s.true_pose.heading_k},
        "lrf": lrf,
        "beams": [{"angle": b.angle, "noise_rms": b.noise_rms} for b in s.beams],
        "grid": grid,
        "seed": s.seed,
        "noise_free": s.noise_free,
        "outputs": {"export_grid": outputs.export_grid, "heatmap": outputs.heatmap, "out_dir": outputs.out_dir},
    }


def dump_scenario_file(scenario_file: ScenarioFile) -> str:
    """Serialize a scenario file to YAML text."""
    return yaml.safe_dump(scenario_file_to_dict(scenario_file), sort_keys=False, default_flow_style=None)
