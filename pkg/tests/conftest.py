"""Shared fixtures: expensive trajectories are integrated once per session."""

import pytest

import kottlerlab as kl
from kottlerlab import shooting

RIGIDITY_GRAVITIES = (0.1, 0.25, 0.5, 0.75, 1.0)


def _seed(k: float) -> shooting.HorizonSeed:
    m = kl.mass_from_surface_gravity(k)
    return shooting.HorizonSeed(kappa=-1, radius=kl.horizon_radius(-1, m),
                                surface_gravity=k, genus=2)


@pytest.fixture(scope="session")
def rigidity_shots():
    """Shots used for the closed-form comparison on s in [0, 5]."""
    return {k: shooting.integrate(_seed(k), s_max=5.0, tol=1.0e-12)
            for k in RIGIDITY_GRAVITIES}


@pytest.fixture(scope="session")
def tail_shots():
    """Longer shots whose potential reaches well past 50."""
    return {k: shooting.integrate(_seed(k), s_max=7.5, tol=1.0e-11)
            for k in (0.1, 0.5, 1.0)}


@pytest.fixture(scope="session")
def degenerate_shot():
    seed = shooting.HorizonSeed(kappa=-1, radius=kl.R_CRIT,
                                surface_gravity=0.0, genus=2)
    return shooting.integrate(seed, s_max=9.0, tol=1.0e-11)
