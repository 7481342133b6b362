"""Shared fixtures for the central configurations test suite."""

import json
import math

import numpy as np
import pytest

from central_configs.families import FamilyShape, build_family
from central_configs.families.simplex import build_equilateral_centered, build_tetrahedron
from central_configs.pairspace import Configuration, Masses, system_to_dict

DEG = math.pi / 180


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def unit_masses():
    return Masses((1.0, 1.0, 1.0, 1.0))


@pytest.fixture
def tetrahedron(unit_masses):
    return build_tetrahedron(unit_masses, 1.0), unit_masses


@pytest.fixture
def centered_triangle():
    masses = Masses((1.0, 1.0, 1.0, 2.5))
    return build_equilateral_centered(1.0, 2.5, 1.0), masses


@pytest.fixture
def square(unit_masses):
    return Configuration([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]), unit_masses


@pytest.fixture
def convex_kite():
    return build_family(FamilyShape("KiteConvex", 50 * DEG, 40 * DEG))


@pytest.fixture
def concave_kite():
    return build_family(FamilyShape("KiteConcave", 50 * DEG, 5 * DEG))


@pytest.fixture
def trapezium_75():
    return build_family(FamilyShape("IsoscelesTrapezium", 75 * DEG))


@pytest.fixture
def non_central():
    config = Configuration([[0.0, 0.0], [1.0, 0.0], [0.3, 0.9], [-0.4, 0.5]])
    return config, Masses((1.0, 2.0, 1.5, 0.7))


@pytest.fixture
def write_system(tmp_path):
    """Write a (Configuration, Masses) pair as configuration JSON and return the path"""
    def _write(config, masses, name="system.json"):
        path = tmp_path / name
        path.write_text(json.dumps(system_to_dict(config, masses)))
        return str(path)
    return _write
