import pytest

from app.core.logging import configure_logging
from app.schemas.geometry import CurveSpec
from app.services.band1d import band_minimum
from app.services.geometry import curve_geometry
from app.services.moments import degennes


configure_logging("WARNING")


@pytest.fixture(scope="session")
def minimum_half():
    """Band minimum at a = -0.5, shared by every service test"""
    return band_minimum(-0.5)


@pytest.fixture(scope="session")
def minimum_symmetric():
    return band_minimum(-1.0)


@pytest.fixture(scope="session")
def degennes_data():
    return degennes()


@pytest.fixture(scope="session")
def ellipse():
    return curve_geometry(CurveSpec(kind="ellipse", params=[1.0, 0.6], samples=1024))


@pytest.fixture(scope="session")
def unit_circle():
    return curve_geometry(CurveSpec(kind="circle", params=[1.0], samples=256))
