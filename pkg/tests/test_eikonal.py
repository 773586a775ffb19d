import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pftomo.eikonal import (EikonalError, EikonalSolver, local_update, sample_slowness,
                            solve_eikonal)
from pftomo.grid import build_grid

from oracles import gauss_seidel_eikonal, scheme_residual


def test_local_update_examples():
    assert local_update([0.0, np.inf], 1.0, 1.0) == 1.0
    assert local_update([0.0, 0.0], 1.0, 1.0) == pytest.approx(math.sqrt(2) / 2, abs=1e-15)
    # second neighbour too late to contribute
    assert local_update([0.0, 10.0], 1.0, 1.0) == 1.0


def test_local_update_rejects_bad_input():
    with pytest.raises(EikonalError):
        local_update([0.0], 0.0, 1.0)
    with pytest.raises(EikonalError):
        local_update([np.inf], 1.0, 1.0)


@given(st.lists(st.floats(0, 10), min_size=1, max_size=4), st.floats(0.1, 5), st.floats(0.01, 1))
def test_local_update_solves_quadratic(t, s, h):
    T = local_update(t, s, h)
    assert T >= min(t)
    lhs = sum(max(T - v, 0.0) ** 2 for v in t)
    assert lhs == pytest.approx((s * h) ** 2, rel=1e-9, abs=1e-12)


def test_interior_patch_by_hand():
    g = build_grid(3, 3, 1.0)
    tt = solve_eikonal(g, np.ones(g.size), g.index(1, 1))
    T = tt.values
    assert T[g.index(2, 1)] == 1.0
    assert T[g.index(1, 2)] == 1.0
    assert T[g.index(2, 2)] == pytest.approx(1 + math.sqrt(2) / 2, abs=1e-15)


def test_two_by_two_lattice():
    g = build_grid(1, 1, 1.0)
    T = solve_eikonal(g, np.ones(4), 0).values
    np.testing.assert_allclose(T, [0, 1, 1, 1 + math.sqrt(2) / 2], atol=1e-15)


def test_smallest_lattice_center_source():
    g = build_grid(1, 1, 0.5, (0.5, 0.5))
    T = solve_eikonal(g, np.ones(9)).values
    walls = [1, 3, 5, 7]
    np.testing.assert_allclose(T[walls], 0.5)
    # corners close on the two adjacent wall nodes
    np.testing.assert_allclose(T[[0, 2, 6, 8]], 0.5 + 0.5 * math.sqrt(2) / 2)


@pytest.mark.parametrize("seed", range(20))
def test_matches_gauss_seidel_on_random_7x7(seed):
    rng = np.random.default_rng(seed)
    g = build_grid(6, 6, 1.0)
    s = rng.uniform(0.2, 3.0, g.size)
    src = _pick_source(rng, g)
    T = solve_eikonal(g, s, src).values
    ref = gauss_seidel_eikonal(g, s, src)
    np.testing.assert_allclose(T, ref, rtol=0, atol=1e-12)


def test_scheme_residual_vanishes():
    rng = np.random.default_rng(3)
    g = build_grid(1, 1, 1 / 20)
    s = rng.uniform(0.5, 2.0, g.size)
    src = g.node_at(0.3, 0.6)
    T = solve_eikonal(g, s, src).values
    r = scheme_residual(g, T, s, src)
    assert np.max(np.abs(r) / s**2) < 1e-12


def test_constant_slowness_distance_error_shrinks():
    errs = []
    for n in (20, 40, 80):
        g = build_grid(1, 1, 1 / n, (0.5, 0.5))
        T = solve_eikonal(g, np.ones(g.size)).values
        d = np.linalg.norm(g.coords - 0.5, axis=1)
        assert np.all(T >= d - 1e-14)  # monotone scheme overestimates
        errs.append(np.max(T - d))
    assert errs[0] > errs[1] > errs[2]


def _pick_source(rng, g):
    return int(rng.choice(np.flatnonzero(~g.corner_mask)))


def test_unreachable_and_bad_slowness():
    g = build_grid(1, 1, 0.25, (0.5, 0.5))
    with pytest.raises(EikonalError):
        solve_eikonal(g, np.zeros(g.size))
    with pytest.raises(EikonalError):
        solve_eikonal(g, np.ones(g.size - 1))
    with pytest.raises(EikonalError):
        solve_eikonal(build_grid(1, 1, 0.25), np.ones(g.size))
    with pytest.raises(EikonalError):
        solve_eikonal(g, np.ones(g.size), 0)


grids = st.builds(lambda nx, nz, seed: (build_grid(nx - 1, nz - 1, 1.0), seed),
                  st.integers(3, 12), st.integers(3, 12), st.integers(0, 2**32 - 1))


@settings(max_examples=40, deadline=None)
@given(grids, st.floats(0.1, 50))
def test_homogeneity(gs, c):
    g, seed = gs
    rng = np.random.default_rng(seed)
    s = rng.uniform(0.5, 2.0, g.size)
    src = _pick_source(rng, g)
    T1 = solve_eikonal(g, s, src).values
    T2 = solve_eikonal(g, c * s, src).values
    np.testing.assert_allclose(T2, c * T1, rtol=1e-13, atol=0)


@settings(max_examples=40, deadline=None)
@given(grids)
def test_order_and_monotonicity(gs):
    g, seed = gs
    rng = np.random.default_rng(seed)
    s = rng.uniform(0.5, 2.0, g.size)
    src = _pick_source(rng, g)
    tt = solve_eikonal(g, s, src)
    assert tt.order[0] == src
    assert sorted(tt.order.tolist()) == list(range(g.size))
    assert np.all(np.diff(tt.values[tt.order]) >= 0)
    # increasing the slowness can only delay arrivals
    T2 = solve_eikonal(g, s + rng.uniform(0, 1, g.size), src).values
    assert np.all(T2 >= tt.values - 1e-13)


def test_solver_reuse_is_deterministic():
    g = build_grid(1, 1, 1 / 30, (0.5, 0.5))
    solver = EikonalSolver(g)
    s = np.random.default_rng(0).uniform(1, 2, g.size)
    a, b = solver.solve(s), solver.solve(s)
    assert np.array_equal(a.values, b.values) and np.array_equal(a.order, b.order)


def test_sample_slowness():
    np.testing.assert_allclose(sample_slowness(np.array([-1.0, 0.0, 1.0]), 2, 4), [2, 3, 4])
    with pytest.raises(EikonalError):
        sample_slowness(np.array([1.5]), 2, 4)
