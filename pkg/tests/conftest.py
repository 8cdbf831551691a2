"""Shared fixtures: the expensive ring solves are computed once per session."""

import pytest

from tests._fixtures import (
    ellipse_ring_solution,
    minimal_eccentric_solution as _minimal_eccentric,
    minimal_radial_solution as _minimal_radial,
    spheroid_solution as _spheroid,
)

P_VALUES = (1.5, 2.0, 3.0)


@pytest.fixture(scope="session")
def ellipse_ring_solutions():
    """p-Laplace solves on ellipse(1.3, 1.0) outer / circle(0.4) inner."""
    return {p: ellipse_ring_solution(p) for p in P_VALUES}


@pytest.fixture(scope="session")
def spheroid_solution():
    """Axisymmetric 3d harmonic solve, spheroid(1.2, 1.0) / sphere(0.4)."""
    return _spheroid()


@pytest.fixture(scope="session")
def minimal_eccentric_solution():
    """Minimal-surface solve on the circle(2) / offset-circle(1 at (0.2, 0)) ring."""
    return _minimal_eccentric()


@pytest.fixture(scope="session")
def minimal_radial_solution():
    return _minimal_radial()
