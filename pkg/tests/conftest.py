import math
from pathlib import Path

import numpy as np
import pytest

from core.utils import load_model
from models.chain import DynamicModel, KinematicChain, LinkInertia
from models.geometry import RigidTransform
from models.grid import GridMap
from models.robot import DHRow, RobotDescription

ROOT = Path(__file__).resolve().parents[1]
ROBOT_FILE = ROOT / "robot.json"
MAP_FILE = ROOT / "warehouse.map"
SCENARIO_FILE = ROOT / "scenario.json"

# joint axis horizontal, q = 0 points the link along +x, gravity along -z
VERTICAL_PLANE = RigidTransform.from_xyz_rpy([0.0, 0.0, 0.0], [math.pi / 2, 0.0, 0.0])


def planar_chain(lengths, base_frame=None) -> KinematicChain:
    rows = tuple(DHRow(a=length) for length in lengths)
    limits = np.tile([-math.pi, math.pi], (len(rows), 1))
    if base_frame is None:
        return KinematicChain(rows, limits)
    return KinematicChain(rows, limits, base_frame)


def point_mass_model(lengths, masses, gravity=(0.0, 0.0, -9.81)) -> DynamicModel:
    """Planar chain in the x-z plane with a point mass at the tip of every link."""
    chain = planar_chain(lengths, VERTICAL_PLANE)
    inertias = tuple(LinkInertia.point_mass(m) for m in masses)
    return DynamicModel(chain, inertias, np.array(gravity))


@pytest.fixture
def two_link() -> KinematicChain:
    return planar_chain([1.0, 1.0])


@pytest.fixture
def one_link() -> KinematicChain:
    return planar_chain([1.0])


@pytest.fixture
def pendulum() -> DynamicModel:
    return point_mass_model([1.0], [1.0])


@pytest.fixture
def double_pendulum() -> DynamicModel:
    return point_mass_model([1.0, 1.0], [1.0, 1.0])


@pytest.fixture(scope="session")
def robot() -> RobotDescription:
    return load_model(ROBOT_FILE, RobotDescription)


@pytest.fixture(scope="session")
def robot_chain(robot) -> KinematicChain:
    return KinematicChain.from_description(robot)


@pytest.fixture(scope="session")
def robot_model(robot) -> DynamicModel:
    return DynamicModel.from_description(robot)


@pytest.fixture
def empty_map() -> GridMap:
    return GridMap.empty(5, 5)
