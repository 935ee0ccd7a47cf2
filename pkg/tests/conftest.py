import numpy as np
import pytest

from enclosure2d.config import parse_config
from enclosure2d.pipelines import build_impenetrable_setup, build_penetrable_setup


def penetrable_config(**overrides):
    data = {
        "pipeline": {"type": "PENETRABLE"},
        "domain": {"rect": [-1.0, -1.0, 1.0, 1.0]},
        "obstacle": {"kind": "disk", "center": [0.2, -0.1], "radius": 0.3},
        "physics": {"k": 1.0, "v_jump": [1.0, 0.0]},
        "numerics": {"fe_grid": 64,
                     "tau": {"min": 4.0, "max": 20.0, "n": 12},
                     "directions": 8,
                     "t_grid": {"min": 0.0, "max": 1.0, "n": 21}},
    }
    for section, table in overrides.items():
        data.setdefault(section, {}).update(table)
    return parse_config(data)


def impenetrable_config(**overrides):
    data = {
        "pipeline": {"type": "IMPENETRABLE"},
        "domain": {"rect": [-1.0, -1.0, 1.0, 1.0]},
        "obstacle": {"kind": "disk", "center": [0.0, 0.0], "radius": 0.3},
        "physics": {"k": 1.0, "lambda": [0.0, 0.0]},
        "numerics": {"ogrid_nr": 24, "ogrid_nt": 96,
                     "tau": {"min": 4.0, "max": 20.0, "n": 12},
                     "directions": 8,
                     "t_grid": {"min": 0.0, "max": 1.0, "n": 21}},
    }
    for section, table in overrides.items():
        data.setdefault(section, {}).update(table)
    return parse_config(data)


@pytest.fixture(scope="session")
def small_penetrable_setup():
    return build_penetrable_setup(penetrable_config())


@pytest.fixture(scope="session")
def small_impenetrable_setup():
    return build_impenetrable_setup(impenetrable_config())
