import numpy as np
import pytest

from casfit import EllipsoidGeometry, EllipsoidModel, random_ellipsoid


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)


def make_model(rng: np.random.Generator) -> EllipsoidModel:
    return random_ellipsoid(rng)


def axis_aligned(semiaxes, center=(0.0, 0.0, 0.0)) -> EllipsoidModel:
    geom = EllipsoidGeometry(rotation=np.eye(3),
                             translation=-np.asarray(center, dtype=float),
                             semiaxes=np.asarray(semiaxes, dtype=float))
    return EllipsoidModel.from_geometry(geom)


def unit_sphere() -> EllipsoidModel:
    return axis_aligned((1.0, 1.0, 1.0))
