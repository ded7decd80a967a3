from pathlib import Path

import numpy as np
import pytest

from fsfpid.dynamics_api import Link, ManipulatorModel, load_model

DATA_DIR = Path(__file__).resolve().parent.parent / "fsfpid" / "data"

# 평면 2링크 팔 파라미터 (xy 평면, z 축 관절, 중력 -y)
L1, L2 = 0.5, 0.4
LC1, LC2 = 0.25, 0.2
M1, M2 = 2.0, 1.5
I1, I2 = 0.04, 0.02
G = 9.81


def make_two_link(gravity=(0.0, -G, 0.0)) -> ManipulatorModel:
    return ManipulatorModel(
        name="two_link",
        links=(
            Link(name="l1", xyz=(0.0, 0.0, 0.0), rpy=(0.0, 0.0, 0.0), axis=(0.0, 0.0, 1.0),
                 mass=M1, com=(LC1, 0.0, 0.0), inertia=np.diag([0.01, 0.01, I1])),
            Link(name="l2", xyz=(L1, 0.0, 0.0), rpy=(0.0, 0.0, 0.0), axis=(0.0, 0.0, 1.0),
                 mass=M2, com=(LC2, 0.0, 0.0), inertia=np.diag([0.01, 0.01, I2])),
        ),
        gravity=gravity,
        tool_xyz=(L2, 0.0, 0.0),
    )


@pytest.fixture
def two_link():
    return make_two_link()


@pytest.fixture(scope="session")
def lwr():
    return load_model(DATA_DIR / "lwr.json")


@pytest.fixture
def rng():
    return np.random.default_rng(20250101)
