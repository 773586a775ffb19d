"""Fast Marching solver for the monotone upwind Eikonal scheme.

At every node other than the source the discrete traveltime ``T`` solves

    sum_b [ ((T_a - T_b) / h)^+ ]^2 = s_a^2

over the node's stencil, with ``T = 0`` at the source.  Boundary nodes only
see interior neighbours, which is the discrete form of rays never
re-entering the domain.  The four lattice corners have no interior axis
neighbour; they are closed with their two adjacent wall nodes, and nothing
downstream reads them.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numba
import numpy as np

from .grid import Grid


class EikonalError(ValueError):
    pass


@dataclass(frozen=True)
class TravelTimes:
    """Solution of one forward solve.

    ``order`` lists nodes in acceptance order; traveltimes are
    non-decreasing along it and the source comes first.
    """

    values: np.ndarray
    order: np.ndarray
    source: int


def eikonal_stencil(grid: Grid) -> np.ndarray:
    stencil = grid._stencil.copy()
    nx, nz = grid.nx, grid.nz
    corners = {
        0: (1, nx),
        nx - 1: (nx - 2, 2 * nx - 1),
        (nz - 1) * nx: ((nz - 2) * nx, (nz - 1) * nx + 1),
        nz * nx - 1: ((nz - 1) * nx - 1, nz * nx - 2),
    }
    for c, (a, b) in corners.items():
        stencil[c] = (a, b, -1, -1)
    return stencil


def dependents(stencil: np.ndarray) -> np.ndarray:
    """Transpose of the stencil: nodes whose equation reads each node."""
    n = stencil.shape[0]
    rows = np.repeat(np.arange(n), stencil.shape[1])
    cols = stencil.ravel()
    keep = cols >= 0
    rows, cols = rows[keep], cols[keep]
    sort = np.lexsort((rows, cols))
    rows, cols = rows[sort], cols[sort]
    starts = np.searchsorted(cols, np.arange(n))
    slot = np.arange(len(cols)) - starts[cols]
    out = np.full((n, 4), -1, dtype=np.int64)
    out[cols, slot] = rows
    return out


@numba.njit(cache=True)
def _local_solve(t, k, sh):
    # t[:k] sorted ascending; root of sum ((T - t_i)^+)^2 = sh^2
    s1 = 0.0
    s2 = 0.0
    for m in range(k):
        s1 += t[m]
        s2 += t[m] * t[m]
        n = m + 1
        disc = s1 * s1 - n * (s2 - sh * sh)
        if disc < 0.0:
            disc = 0.0
        root = (s1 + math.sqrt(disc)) / n
        if m + 1 == k or root <= t[m + 1]:
            return root
    return np.inf


def local_update(neighbor_times, s: float, h: float) -> float:
    """Upwind candidate traveltime from neighbouring values.

    Only neighbours below the returned value contribute, so passing the
    per-axis minima reproduces the classical two-axis update with its
    one-sided fallback.
    """
    if s <= 0 or h <= 0:
        raise EikonalError("slowness and spacing must be positive")
    t = np.sort(np.asarray(neighbor_times, dtype=float))
    t = t[np.isfinite(t)]
    if len(t) == 0:
        raise EikonalError("no finite neighbour value")
    return float(_local_solve(t, len(t), s * h))


@numba.njit(cache=True)
def _fmm(stencil, deps, s, h, source):
    n = s.shape[0]
    T = np.full(n, np.inf)
    accepted = np.zeros(n, dtype=np.bool_)
    order = np.empty(n, dtype=np.int64)
    buf = np.empty(4)
    T[source] = 0.0
    heap = [(0.0, source)]
    count = 0
    while len(heap) > 0:
        t, a = heapq.heappop(heap)
        if accepted[a] or t > T[a]:
            continue
        accepted[a] = True
        order[count] = a
        count += 1
        for q in range(4):
            b = deps[a, q]
            if b < 0 or accepted[b]:
                continue
            k = 0
            for r in range(4):
                c = stencil[b, r]
                if c >= 0 and accepted[c]:
                    v = T[c]
                    p = k
                    while p > 0 and buf[p - 1] > v:
                        buf[p] = buf[p - 1]
                        p -= 1
                    buf[p] = v
                    k += 1
            cand = _local_solve(buf, k, s[b] * h)
            if cand < T[b]:
                T[b] = cand
                heapq.heappush(heap, (cand, b))
    return T, order[:count]


class EikonalSolver:
    """Reusable solver for one grid (stencil tables built once)."""

    def __init__(self, grid: Grid):
        self.grid = grid
        self.stencil = eikonal_stencil(grid)
        self.deps = dependents(self.stencil)

    def solve(self, s: np.ndarray, source: int | None = None) -> TravelTimes:
        grid = self.grid
        if source is None:
            source = grid.source
        if source is None:
            raise EikonalError("no source node given")
        if np.all(self.deps[source] < 0):
            # e.g. a lattice corner: no equation reads it, so nothing is reached
            raise EikonalError(f"no node depends on source {source}")
        s = np.ascontiguousarray(s, dtype=float)
        if s.shape != (grid.size,):
            raise EikonalError(f"slowness has shape {s.shape}, expected ({grid.size},)")
        if not np.all(s > 0):
            raise EikonalError("slowness must be strictly positive")
        T, order = _fmm(self.stencil, self.deps, s, grid.h, int(source))
        if len(order) != grid.size:
            raise EikonalError("some nodes are unreachable from the source")
        return TravelTimes(T, order, int(source))


def solve_eikonal(grid: Grid, s: np.ndarray, source: int | None = None) -> TravelTimes:
    return EikonalSolver(grid).solve(s, source)


def slowness_map(u, smin: float, smax: float):
    return 0.5 * (smax - smin) * u + 0.5 * (smax + smin)


def sample_slowness(u: np.ndarray, smin: float, smax: float, interp=None) -> np.ndarray:
    """Slowness at the finite-difference nodes from phase-field coefficients.

    ``interp`` maps FE coefficients to values at FD nodes (exact P1
    evaluation); it is the identity when the two node sets coincide.
    """
    if not 0 < smin < smax:
        raise EikonalError("need 0 < smin < smax")
    u = np.asarray(u, dtype=float)
    if u.size and (u.min() < -1.0 or u.max() > 1.0):
        raise EikonalError("phase field leaves [-1, 1]")
    uh = u if interp is None else interp @ u
    return slowness_map(uh, smin, smax)
