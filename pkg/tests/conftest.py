"""Shared fixtures: relaxations are the slow part, so ground states are
cached per session and reused by every module that needs a realistic cloud."""
import dataclasses

import numpy as np
import pytest

from slowlight import imaginary_time_relax
from slowlight.engine import build_grid
from slowlight.scenarios import preset


class Cloud:
    """Bundle of config / params / grid (edges set) / ground state."""

    def __init__(self, cfg, n_points=1024):
        if n_points is not None:
            cfg = dataclasses.replace(cfg, n_points=n_points)
        self.cfg = cfg
        self.params = cfg.to_params()
        self.grid = build_grid(cfg, self.params)
        self.ground = imaginary_time_relax(self.params, self.grid)
        self.grid.set_edges_from_density(np.abs(self.ground.psi1G) ** 2)

    @property
    def psi1G(self):
        return self.ground.psi1G


@pytest.fixture(scope="session")
def na_cloud():
    return Cloud(preset("usl_na_fig2"), n_points=1024)


@pytest.fixture(scope="session")
def rb9_cloud():
    return Cloud(preset("gauss_write_fig9"), n_points=1024)


@pytest.fixture(scope="session")
def rb4_cloud():
    return Cloud(preset("fringes_rb_fig4"), n_points=1024)
