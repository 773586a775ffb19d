"""Assembled inverse problem: objective and gradient over phase-field coefficients."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .adjoint import AdjointSolver, misfit_gradient, misfit_value
from .eikonal import EikonalSolver, TravelTimes, sample_slowness
from .fem import Mesh, MixedSystem, interpolation_matrix
from .grid import Grid, ReceiverSegment, build_grid, receiver_segment
from .phase_field import ModelParams, PhaseState, energy_terms, full_gradient
from .profile import profile_data


class CompatibilityError(ValueError):
    pass


@dataclass
class SourceData:
    source: int
    segment: ReceiverSegment
    observed: np.ndarray


@dataclass
class Evaluation:
    objective: float
    misfit: float
    regularizer: float
    J: float
    s: np.ndarray = field(repr=False)
    forward: list = field(repr=False)


class InversionProblem:
    def __init__(self, grid: Grid, mesh: Mesh, params: ModelParams, data: list[SourceData],
                 *, dirichlet_values=-1.0, lumped: bool = False):
        self.grid = grid
        self.mesh = mesh
        self.params = params
        self.data = data
        self.system = MixedSystem(mesh, lumped=lumped)
        self.M, self.S = self.system.M, self.system.S
        self.area = self.system.area
        self.interp = interpolation_matrix(mesh, grid)
        self.eikonal = EikonalSolver(grid)
        self.adjoint = AdjointSolver(grid, self.eikonal.stencil, self.eikonal.deps)
        self.fixed = mesh.dirichlet.copy()
        self.u_dirichlet = np.broadcast_to(np.asarray(dirichlet_values, dtype=float), (mesh.size,)).copy()
        self.profile = profile_data(params.gamma)

    @classmethod
    def from_observations(cls, obs_set, mesh: Mesh, params: ModelParams, *, h: float | None = None,
                          **kwargs) -> "InversionProblem":
        """Problem on an FD grid of spacing ``h`` (default: the mesh spacing)."""
        h = mesh.hbar if h is None else h
        if abs(obs_set.lx - mesh.lx) > 1e-12 or abs(obs_set.lz - mesh.lz) > 1e-12:
            raise CompatibilityError("observations and mesh cover different domains")
        grid = build_grid(mesh.lx, mesh.lz, h)
        data = []
        for k, obs in enumerate(obs_set.observations):
            try:
                src = grid.node_at(*obs.source)
            except ValueError as exc:
                raise CompatibilityError(f"source {k}: {exc}") from None
            seg = receiver_segment(grid, obs.segment)
            coords = grid.coords[seg.nodes]
            if coords.shape != obs.receivers.shape or not np.allclose(coords, obs.receivers, atol=1e-9 * h):
                raise CompatibilityError(
                    f"source {k}: receivers on segment {obs.segment!r} do not match the "
                    f"inversion grid (h={h}, data h={obs_set.h})")
            data.append(SourceData(src, seg, np.asarray(obs.times, dtype=float)))
        return cls(grid, mesh, params, data, **kwargs)

    def pin(self, u: np.ndarray) -> np.ndarray:
        u = np.array(u, dtype=float)
        u[self.fixed] = self.u_dirichlet[self.fixed]
        return u

    def state(self, u) -> PhaseState:
        u = self.pin(u)
        return PhaseState(u, self.system.solve_w(u))

    def initial_state(self, value: float = -1.0) -> PhaseState:
        return self.state(np.full(self.mesh.size, float(value)))

    def slowness(self, u) -> np.ndarray:
        return sample_slowness(u, self.params.smin, self.params.smax, self.interp)

    def forward(self, u) -> list[TravelTimes]:
        s = self.slowness(u)
        return [self.eikonal.solve(s, d.source) for d in self.data]

    def evaluate(self, state: PhaseState) -> Evaluation:
        p = self.params
        s = self.slowness(state.u)
        fwd = [self.eikonal.solve(s, d.source) for d in self.data]
        mis = sum(misfit_value(tt, d.observed, d.segment, p.noise_weight) for tt, d in zip(fwd, self.data))
        J = energy_terms(state.u, state.w, p.eps, p.gamma, self.M, self.S, self.area)["J"]
        reg = p.sigma_effective * J
        return Evaluation(mis + reg, mis, reg, J, s, fwd)

    def misfit_gradient(self, ev: Evaluation) -> np.ndarray:
        p = self.params
        g = np.zeros(self.grid.size)
        for tt, d in zip(ev.forward, self.data):
            residual = d.observed - tt.values[d.segment.nodes]
            g += self.adjoint.solve(tt, residual, d.segment, p.noise_weight)
        return misfit_gradient(g, ev.s, self.grid, p.smin, p.smax, self.interp, self.fixed)

    def gradient(self, state: PhaseState, ev: Evaluation | None = None) -> np.ndarray:
        if ev is None:
            ev = self.evaluate(state)
        return full_gradient(state, self.params, self.misfit_gradient(ev), self.M, self.S, self.fixed)

    def perimeter(self, ev: Evaluation) -> float:
        return ev.J / self.profile.energy

    def mass_norm2(self, v) -> float:
        return float(v @ (self.M @ v))
