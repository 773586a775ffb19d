"""Discrete adjoint of the upwind Eikonal scheme and the misfit gradient.

The linearised scheme is triangular in the Fast Marching acceptance order,
so its transpose is solved by one back-substitution sweep in decreasing
traveltime.  With ``P`` the adjoint field, the derivative of the boundary
misfit with respect to the phase-field coefficient ``u_m`` is

    -h^2 (smax - smin)/2 * sum_a P_a s_a phi_m(x_a).
"""
from __future__ import annotations

import numba
import numpy as np

from .eikonal import TravelTimes, dependents, eikonal_stencil
from .grid import Grid, ReceiverSegment


class AdjointError(RuntimeError):
    pass


@numba.njit(cache=True)
def _sweep(stencil, deps, T, order, rhs, h):
    n = T.shape[0]
    P = np.zeros(n)
    done = np.zeros(n, dtype=np.bool_)
    inv_h2 = 1.0 / (h * h)
    src = order[0]
    done[src] = True
    for q in range(n - 1, 0, -1):
        a = order[q]
        ta = T[a]
        diag = 0.0
        for r in range(4):
            b = stencil[a, r]
            if b >= 0 and T[b] < ta:
                diag += (ta - T[b]) * inv_h2
        acc = rhs[a]
        for r in range(4):
            b = deps[a, r]
            if b >= 0 and T[b] > ta:
                if not done[b]:
                    return P, a, 1
                acc += (T[b] - ta) * inv_h2 * P[b]
        if diag <= 0.0:
            return P, a, 2
        P[a] = acc / diag
        done[a] = True
    return P, -1, 0


class AdjointSolver:
    def __init__(self, grid: Grid, stencil=None, deps=None):
        self.grid = grid
        self.stencil = eikonal_stencil(grid) if stencil is None else stencil
        self.deps = dependents(self.stencil) if deps is None else deps

    def solve(self, tt: TravelTimes, residuals, segment: ReceiverSegment,
              noise_weight: float = 1.0) -> np.ndarray:
        grid = self.grid
        rhs = np.zeros(grid.size)
        rhs[segment.nodes] = segment.weights / grid.h**2 * noise_weight * np.asarray(residuals)
        rhs[tt.source] = 0.0
        P, node, flag = _sweep(self.stencil, self.deps, tt.values, tt.order, rhs, grid.h)
        if flag == 1:
            raise AdjointError(f"sweep read an unset adjoint value at node {node}")
        if flag == 2:
            raise AdjointError(f"zero diagonal at non-source node {node}")
        return P


def solve_adjoint(grid: Grid, tt: TravelTimes, residuals, segment: ReceiverSegment,
                  noise_weight: float = 1.0) -> np.ndarray:
    """Adjoint field for residuals ``T_obs - T`` observed on ``segment``."""
    return AdjointSolver(grid).solve(tt, residuals, segment, noise_weight)


def misfit_value(tt: TravelTimes, observed, segment: ReceiverSegment,
                 noise_weight: float = 1.0) -> float:
    r = tt.values[segment.nodes] - observed
    return 0.5 * noise_weight * float(np.sum(segment.weights * r * r))


def misfit_gradient(P, s, grid: Grid, smin: float, smax: float, interp=None, fixed=None):
    P = np.asarray(P)
    s = np.asarray(s)
    if P.shape != s.shape or P.shape != (grid.size,):
        raise ValueError("adjoint and slowness fields must live on the grid")
    g_nodes = -grid.h**2 * 0.5 * (smax - smin) * P * s
    g = g_nodes if interp is None else interp.T @ g_nodes
    g = np.array(g, dtype=float)
    if fixed is not None:
        g[fixed] = 0.0
    return g
