import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pftomo.fem import MixedSystem, triangulate
from pftomo.phase_field import (FeasibilityError, ModelParams, PhaseState, double_obstacle,
                                energy_terms, full_gradient, perimeter_estimate, regularizer)
from pftomo.profile import profile_data

from conftest import disk_problem, smooth_state


@pytest.fixture(scope="module")
def system():
    return MixedSystem(triangulate(1, 1, 0.1))


def test_params_validation():
    with pytest.raises(ValueError):
        ModelParams(0.1, 1e-2, 1e-4, 2, 2)
    with pytest.raises(ValueError):
        ModelParams(-0.1, 1e-2, 1e-4, 1, 2)
    with pytest.raises(ValueError):
        ModelParams(0.1, 1e-2, 1e-4, 1, 2, nu=0.0)


def test_noise_and_contrast_scaling():
    p = ModelParams(0.1, 1e-2, 1e-3, 1, 1.1, nu=1e-2)
    assert p.noise_weight == pytest.approx(1e4)
    assert p.sigma_effective == pytest.approx(10.0)
    q = ModelParams(0.1, 1e-2, 1e-3, 1, 1.1, contrast_rescale=True)
    assert q.sigma_effective == pytest.approx(1e-3 * 2 / 0.1)


def test_double_obstacle():
    np.testing.assert_allclose(double_obstacle([-1, 0, 1]), [0, 0.5, 0])
    assert np.isinf(double_obstacle([1.5]))[0]


def test_pure_phases_have_zero_energy(system):
    p = ModelParams(0.05, 1e-2, 1.0, 1, 2)
    for v in (-1.0, 1.0):
        u = np.full(system.mesh.size, v)
        st_ = PhaseState(u, np.zeros_like(u))
        assert regularizer(st_, p, system.M, system.S, system.area) == pytest.approx(0, abs=1e-14)


def test_zero_phase_is_obstacle_only(system):
    p = ModelParams(0.05, 1e-2, 3.0, 1, 2)
    z = np.zeros(system.mesh.size)
    assert regularizer(PhaseState(z, z), p, system.M, system.S, system.area) == pytest.approx(
        3.0 * system.area / (2 * 0.05))


def test_infeasible_state_raises(system):
    u = np.full(system.mesh.size, 1.2)
    with pytest.raises(FeasibilityError):
        energy_terms(u, np.zeros_like(u), 0.1, 1e-2, system.M, system.S, system.area)


def test_gradient_trivial_cases(system):
    n = system.mesh.size
    p = ModelParams(0.05, 1e-2, 0.0, 1, 2)
    g0 = np.random.default_rng(0).normal(size=n)
    st_ = PhaseState(np.random.default_rng(1).uniform(-1, 1, n), np.zeros(n))
    np.testing.assert_array_equal(full_gradient(st_, p, g0, system.M, system.S), g0)
    p1 = ModelParams(0.05, 1e-2, 1.0, 1, 2)
    z = np.zeros(n)
    np.testing.assert_allclose(full_gradient(PhaseState(z, z), p1, z, system.M, system.S), 0)
    with pytest.raises(ValueError):
        full_gradient(st_, p, g0[:-1], system.M, system.S)


def test_regularizer_gradient_by_finite_differences(system):
    p = ModelParams(0.07, 1e-1, 1.0, 1, 2)
    rng = np.random.default_rng(2)
    u = rng.uniform(-0.9, 0.9, system.mesh.size)
    st_ = PhaseState(u, system.solve_w(u))
    fixed = system.mesh.dirichlet
    g = full_gradient(st_, p, np.zeros_like(u), system.M, system.S, fixed)
    J = lambda v: regularizer(PhaseState(v, system.solve_w(v)), p, system.M, system.S, system.area)
    for m in np.flatnonzero(~fixed)[::7]:
        e = np.zeros_like(u)
        e[m] = 1e-5
        fd = (J(u + e) - J(u - e)) / 2e-5
        assert fd == pytest.approx(g[m], rel=1e-5, abs=1e-9)


def test_full_pipeline_gradient_by_finite_differences():
    prob = disk_problem(hbar=1 / 16, refine=2)
    st_ = smooth_state(prob)
    g = prob.gradient(st_)
    f = lambda u: prob.evaluate(prob.state(u)).objective
    free = np.flatnonzero(~prob.fixed)
    rng = np.random.default_rng(5)
    bad = 0
    picks = rng.choice(free, 30, replace=False)
    for m in picks:
        e = np.zeros_like(st_.u)
        e[m] = 1e-5
        fd = (f(st_.u + e) - f(st_.u - e)) / 2e-5
        if abs(fd - g[m]) > 1e-4 * max(abs(fd), abs(g[m])):
            bad += 1
    assert bad <= 0.05 * len(picks)
    assert np.all(g[prob.fixed] == 0)


def test_objective_decomposition_and_sigma_scaling():
    prob = disk_problem(hbar=1 / 16, refine=2)
    st_ = smooth_state(prob)
    ev = prob.evaluate(st_)
    assert ev.objective == ev.misfit + ev.regularizer
    prob2 = disk_problem(hbar=1 / 16, refine=2, sigma=2e-4)
    ev2 = prob2.evaluate(st_)
    assert ev2.regularizer == pytest.approx(2 * ev.regularizer, rel=1e-14)
    assert ev2.misfit == ev.misfit


def test_truth_like_state_beats_background():
    prob = disk_problem(hbar=1 / 20, refine=2)
    x, y = prob.mesh.nodes.T
    truth = prob.state(np.where((x - 0.5) ** 2 + (y - 0.5) ** 2 <= 1 / 16, 1.0, -1.0))
    assert prob.evaluate(prob.initial_state()).objective > prob.evaluate(truth).objective


def test_perimeter_estimate():
    pd = profile_data(1e-2)
    assert perimeter_estimate(0.0, pd) == 0.0
    assert perimeter_estimate(pd.energy * np.pi / 2, pd) == pytest.approx(np.pi / 2)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_energy_terms_nonnegative(seed):
    sysm = MixedSystem(triangulate(1, 1, 0.125))
    u = np.random.default_rng(seed).uniform(-1, 1, sysm.mesh.size)
    t = energy_terms(u, sysm.solve_w(u), 0.05, 1e-2, sysm.M, sysm.S, sysm.area)
    assert t["laplace"] >= 0 and t["gradient"] >= 0 and t["obstacle"] >= -1e-15
    assert t["J"] == pytest.approx(t["laplace"] + t["gradient"] + t["obstacle"])
