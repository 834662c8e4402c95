import pytest

from abflux.field_config import FieldConfiguration, GaugePrimitive, PhysicalConstants


def make_config(B0=1.0, a0=1.0, Bc=1.0, ac=1.5, xC=5.0, region="InsideSpectator", strays=(), **constants):
    return FieldConfiguration(
        source=GaugePrimitive((0.0, 0.0), a0, B0),
        spectator=GaugePrimitive((xC, 0.0), ac, Bc),
        constants=PhysicalConstants(**constants),
        strays=tuple(strays),
        receiver_region=region,
    )


@pytest.fixture
def config():
    return make_config()
