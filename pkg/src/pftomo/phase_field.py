"""Discrete phase-field energy, objective and gradient in mixed form."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .profile import ProfileData


@dataclass(frozen=True)
class ModelParams:
    """Model constants.

    ``sigma`` is the regularisation weight as configured.  When ``nu`` is
    given the misfit is weighted by ``1/nu^2`` and the weight becomes
    ``sigma/nu^2``; with ``contrast_rescale`` it is further multiplied by
    ``2/(smax - smin)``.
    """

    eps: float
    gamma: float
    sigma: float
    smin: float
    smax: float
    nu: float | None = None
    contrast_rescale: bool = False

    def __post_init__(self):
        for name in ("eps", "gamma", "smin", "smax"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if not self.smin < self.smax:
            raise ValueError("need smin < smax")
        if self.nu is not None and not self.nu > 0:
            raise ValueError("nu must be positive when given")

    @property
    def noise_weight(self) -> float:
        return 1.0 if self.nu is None else 1.0 / self.nu**2

    @property
    def sigma_effective(self) -> float:
        sigma = self.sigma * self.noise_weight
        if self.contrast_rescale:
            sigma *= 2.0 / (self.smax - self.smin)
        return sigma


@dataclass
class PhaseState:
    u: np.ndarray
    w: np.ndarray

    def copy(self) -> "PhaseState":
        return PhaseState(self.u.copy(), self.w.copy())


class FeasibilityError(ValueError):
    pass


def double_obstacle(u):
    u = np.asarray(u, dtype=float)
    return np.where(np.abs(u) <= 1.0, 0.5 * (1.0 - u * u), np.inf)


def _check_feasible(u):
    if u.min() < -1.0 or u.max() > 1.0:
        raise FeasibilityError("phase field outside [-1, 1]")


def energy_terms(u, w, eps, gamma, M, S, area) -> dict:
    """Unweighted pieces of the phase-field energy ``J``."""
    u = np.asarray(u)
    _check_feasible(u)
    Mu = M @ u
    terms = {
        "laplace": gamma * eps**3 / 2 * float(w @ (M @ w)),
        "gradient": eps / 2 * float(u @ (S @ u)),
        "obstacle": 0.5 * (area - float(u @ Mu)) / eps,
    }
    terms["J"] = terms["laplace"] + terms["gradient"] + terms["obstacle"]
    return terms


def phase_energy(u, w, eps, gamma, M, S, area) -> float:
    return energy_terms(u, w, eps, gamma, M, S, area)["J"]


def regularizer(state: PhaseState, params: ModelParams, M, S, area: float) -> float:
    return params.sigma_effective * phase_energy(state.u, state.w, params.eps, params.gamma, M, S, area)


def objective(misfit: float, reg: float) -> float:
    return misfit + reg


def full_gradient(state: PhaseState, params: ModelParams, misfit_grad, M, S, fixed=None):
    u, w = state.u, state.w
    misfit_grad = np.asarray(misfit_grad)
    if misfit_grad.shape != u.shape:
        raise ValueError("gradient and state dimensions differ")
    eps, gamma = params.eps, params.gamma
    g = misfit_grad + params.sigma_effective * (S @ (gamma * eps**3 * w + eps * u) - (M @ u) / eps)
    if fixed is not None:
        g[fixed] = 0.0
    return g


def perimeter_estimate(J: float, profile: ProfileData) -> float:
    return J / profile.energy
