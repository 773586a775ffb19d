import numpy as np
import pytest

from pftomo.fem import triangulate
from pftomo.inversion import InversionProblem
from pftomo.phase_field import ModelParams
from pftomo.profile import epsilon_for_width
from pftomo.scenarios import TruthField, experiment, generate_data


def disk_problem(hbar=1 / 20, sigma=1e-4, gamma=1e-2, width=4, nu=0.0, refine=2, seed=0, h=None,
                 exp="full_boundary_center", smin=2.0, smax=4.0):
    truth = TruthField("circular_disk", smin, smax)
    ex = experiment(exp)
    obs = generate_data(truth, ex, hbar if h is None else h, refine, nu=nu, seed=seed)
    mesh = triangulate(1, 1, hbar, ex.bc)
    params = ModelParams(epsilon_for_width(width, hbar, gamma), gamma, sigma, smin, smax,
                         nu if nu > 0 else None)
    return InversionProblem.from_observations(obs, mesh, params, h=h)


@pytest.fixture
def small_disk():
    return disk_problem()


def smooth_state(problem, seed=0):
    rng = np.random.default_rng(seed)
    x, y = problem.mesh.nodes.T
    a, b, c = rng.uniform(1, 3, 3)
    u = 0.8 * np.sin(a * x + 0.3) * np.cos(b * y - 0.2) + 0.1 * c * (x - 0.5)
    return problem.state(np.clip(u, -0.95, 0.95))
