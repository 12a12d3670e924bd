import numpy as np
import pytest
import yaml

from src.spherical_hmc.components.constraints import HyperRectangle, QNormBall, UnitBall
from src.spherical_hmc.components.data_ingestion import load_diabetes, write_synthetic_diabetes
from src.spherical_hmc.components.models import TargetModel


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def quadratic_model():
    """U(beta) = 0.5 beta^T A beta + b^T beta in three dimensions"""
    a = np.array([[2.0, 0.3, 0.0], [0.3, 1.5, -0.2], [0.0, -0.2, 1.0]])
    b = np.array([0.1, -0.2, 0.3])
    return TargetModel(
        dimension=3,
        potential=lambda beta: 0.5 * float(beta @ a @ beta) + float(b @ beta),
        gradient=lambda beta: a @ beta + b,
        description="quadratic",
    )


@pytest.fixture
def flat_model():
    """U = 0 in any dimension"""

    def _build(dim: int) -> TargetModel:
        return TargetModel(
            dimension=dim,
            potential=lambda beta: 0.0,
            gradient=lambda beta: np.zeros(dim),
            description="flat",
        )

    return _build


@pytest.fixture
def domains():
    return {
        "ball": UnitBall(dim=3),
        "rectangle": HyperRectangle(lower=[0.0, -1.0, 2.0], upper=[5.0, 0.5, 4.0]),
        "l1": QNormBall(q=1.0, t=2.0, dim=3),
        "q0.8": QNormBall(q=0.8, t=1.5, dim=3),
        "q1.2": QNormBall(q=1.2, t=1.0, dim=3),
        "q2": QNormBall(q=2.0, t=3.0, dim=3),
    }


@pytest.fixture(scope="session")
def diabetes_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "diabetes.csv"
    write_synthetic_diabetes(path, seed=2024)
    return path


@pytest.fixture(scope="session")
def diabetes(diabetes_path):
    return load_diabetes(diabetes_path)


@pytest.fixture
def write_config(tmp_path):
    """Write a yaml experiment file and return its path"""

    def _write(content: dict, name: str = "experiment.yaml"):
        path = tmp_path / name
        with open(path, "w") as file:
            yaml.safe_dump(content, file)
        return path

    return _write


@pytest.fixture
def small_gaussian_config(tmp_path):
    return {
        "kind": "truncated-gaussian",
        "dimension": 2,
        "samplers": ["sph", "wall", "rwm"],
        "sampler_settings": {
            "sph": {"num_leapfrog": 5, "randomize_steps": True},
            "wall": {"epsilon": 0.2, "num_leapfrog": 5},
            "rwm": {"proposal_scale": 0.5},
        },
        "num_iter": 300,
        "burn_in": 100,
        "seeds": [0, 1],
        "output_dir": str(tmp_path / "out"),
    }
