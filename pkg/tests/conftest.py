"""
Common test fixtures for all test modules.
"""
import math
import sys
from pathlib import Path

import pytest

# Add the repository root to the Python path
src_path = Path(__file__).parent.parent
sys.path.insert(0, str(src_path))

from src.localization.analysis import BeamConfig, Scenario
from src.localization.geometry import Pose, RoomMap, make_rectangle
from src.localization.point_mass import GridSpec
from src.localization.sensor import BeamMeasurement, LrfSpec

CORNER_ANGLE = math.degrees(math.atan2(2.0, 3.0))
EXAMPLE_ANGLES = (326.3, 0.0, 33.7)
NOISE_RMS = 0.05

EXAMPLE_YAML = """\
map:
  rectangle: [4.0, 6.0]
pose:
  x1: 2.0
  x2: 3.0
  heading: 20.0
beams:
  - angle: 326.3
    noise_rms: 0.05
  - angle: 0.0
    noise_rms: 0.05
  - angle: 33.7
    noise_rms: 0.05
grid:
  n1: 40
  n2: 60
seed: 11
noise_free: true
"""


@pytest.fixture
def room():
    """4 m x 6 m rectangular room."""
    return make_rectangle(4.0, 6.0)


@pytest.fixture
def l_room():
    """L-shaped room with a reflex corner at (2, 2)."""
    return RoomMap(((0.0, 0.0), (4.0, 0.0), (4.0, 2.0), (2.0, 2.0), (2.0, 4.0), (0.0, 4.0)), name="L room")


@pytest.fixture
def center_pose():
    """Object at the room center with heading 20 deg."""
    return Pose(2.0, 3.0, 20.0)


def make_scenario(n1=200, n2=300, nk=1, noise_free=True, seed=7, angles=EXAMPLE_ANGLES, pose=None, bounds=None):
    """Room-center scenario with beams toward both upper corners and the far wall."""
    return Scenario(
        room=make_rectangle(4.0, 6.0),
        true_pose=pose or Pose(2.0, 3.0, 20.0),
        beams=tuple(BeamConfig(angle=a, noise_rms=NOISE_RMS) for a in angles),
        grid=GridSpec(n1=n1, n2=n2, nk=nk, bounds=bounds),
        seed=seed,
        noise_free=noise_free,
        lrf=LrfSpec(),
    )


@pytest.fixture(scope="session")
def example_scenario():
    """Noise-free room-center scenario on the full 200 x 300 grid."""
    return make_scenario()


@pytest.fixture
def coarse_scenario():
    """Noise-free room-center scenario on a 40 x 60 grid."""
    return make_scenario(n1=40, n2=60)


@pytest.fixture
def far_wall_reading():
    """Exact range 3 m along +x2 from the room center."""
    return BeamMeasurement(angle=0.0, range=3.0, noise_rms=NOISE_RMS)


@pytest.fixture
def example_yaml_path(tmp_path):
    """Scenario file with a coarse grid written to a temporary directory."""
    path = tmp_path / "scenario.yaml"
    path.write_text(EXAMPLE_YAML, encoding="utf-8")
    return path
