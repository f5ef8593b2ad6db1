import numpy as np
import pytest

from fracsys import GLConfig, GridSpec, callback_rule, gradient_flow_s_harmonic, ginzburg_landau_solve


def smooth_unit_phase(amplitude=0.6):
    def g(pts):
        th = amplitude * np.tanh(pts[:, 0])
        return np.stack([np.cos(th), np.sin(th)], axis=-1)

    return callback_rule(g)


@pytest.fixture(scope="session")
def flow_grid():
    return GridSpec(dim=1, h=1.0 / 256.0, radius=1.0)


@pytest.fixture(scope="session")
def flow_solution(flow_grid):
    """Converged sphere-constrained flow at s = 1/2 with smooth unit data."""
    field, report = gradient_flow_s_harmonic(flow_grid, smooth_unit_phase(), 0.5,
                                             m=2, steps=30000, tol=1e-8)
    return field, report


@pytest.fixture(scope="session")
def gl_solution(flow_grid):
    cfg = GLConfig(epsilon=1e-3, s=0.5, max_steps=60000, tol=1e-7)
    field, report = ginzburg_landau_solve(cfg, smooth_unit_phase(), flow_grid, m=2)
    return field, report
