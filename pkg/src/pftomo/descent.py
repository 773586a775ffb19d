"""Projected descent with dyadic backtracking for the phase-field problem.

Each step clamps ``u - alpha g`` to [-1, 1] (Dirichlet coefficients stay
pinned), re-solves ``M w = S u`` and accepts the largest
``alpha = alpha_init / 2^j`` with

    I(new) - I(old) < -(eta / alpha^2) ||u_new - u_old||^2,

``||v||^2`` the squared Euclidean norm of the coefficient vector (or
``v^T M v`` with ``norm="mass"``).  Iteration stops once
``||u_new - u_old||^2 / alpha^2`` falls below ``tol``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .phase_field import PhaseState

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DescentConfig:
    alpha_init: float = 1e4
    eta: float = 1e-5
    tol: float = 1e-12
    max_iter: int = 1000
    alpha_min: float | None = None
    norm: str = "euclidean"

    def __post_init__(self):
        if self.norm not in ("euclidean", "mass"):
            raise ValueError("norm must be 'euclidean' or 'mass'")
        if not self.alpha_init > 0:
            raise ValueError("alpha_init must be positive")
        if not 0 < self.eta < 1:
            raise ValueError("eta must lie in (0, 1)")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 0:
            raise ValueError("max_iter must be non-negative")

    @property
    def alpha_floor(self) -> float:
        return self.alpha_init * 2.0**-60 if self.alpha_min is None else self.alpha_min


@dataclass(frozen=True)
class IterationRecord:
    k: int
    objective: float
    misfit: float
    regularizer: float
    alpha: float
    stationarity: float
    trials: int = 0


@dataclass
class InversionResult:
    state: PhaseState
    history: list
    reason: str
    evaluation: object
    perimeter: float | None = None
    extras: dict = field(default_factory=dict)

    @property
    def iterations(self) -> int:
        return len(self.history) - 1


def trial_step(state: PhaseState, g, alpha: float, solve_w, fixed=None) -> PhaseState:
    """Clamped step; ``solve_w(u, w_guess)`` re-solves the mixed constraint."""
    u = np.clip(state.u - alpha * g, -1.0, 1.0)
    if fixed is not None:
        u[fixed] = state.u[fixed]
    return PhaseState(u, solve_w(u, state.w))


@dataclass
class LineSearchResult:
    state: PhaseState | None
    value: object
    alpha: float
    stationarity: float
    trials: int
    status: str  # "accepted", "stationary" or "stall"


def line_search(state: PhaseState, f0: float, g, cfg: DescentConfig, objective_fn, solve_w,
                norm2, fixed=None) -> LineSearchResult:
    """Largest dyadic step meeting the sufficient-decrease test.

    ``objective_fn(state)`` returns either a float or an object with an
    ``objective`` attribute; the latter is passed back so callers can reuse
    forward solves.  A step that leaves ``u`` unchanged means the projected
    gradient vanishes, and no smaller step can move either.
    """
    alpha = cfg.alpha_init
    trials = 0
    while alpha >= cfg.alpha_floor:
        new = trial_step(state, g, alpha, solve_w, fixed)
        du = new.u - state.u
        if not np.any(du):
            return LineSearchResult(None, None, alpha, 0.0, trials, "stationary")
        value = objective_fn(new)
        trials += 1
        f1 = getattr(value, "objective", value)
        step2 = norm2(du)
        if f1 - f0 < -cfg.eta / alpha**2 * step2:
            return LineSearchResult(new, value, alpha, step2 / alpha**2, trials, "accepted")
        alpha *= 0.5
    return LineSearchResult(None, None, alpha, float("nan"), trials, "stall")


def _euclidean2(v) -> float:
    return float(v @ v)


def run(problem, cfg: DescentConfig, state: PhaseState | None = None, callback=None) -> InversionResult:
    """Descend from ``state`` (default ``u = -1``) until the stopping rule.

    ``callback(record, state, evaluation)`` is invoked after every accepted
    step; returning ``True`` stops the run.
    """
    if state is None:
        state = problem.initial_state(-1.0)
    norm2 = problem.mass_norm2 if cfg.norm == "mass" else _euclidean2
    ev = problem.evaluate(state)
    history = [IterationRecord(0, ev.objective, ev.misfit, ev.regularizer, float("nan"), float("nan"))]
    reason = "iteration cap"
    for k in range(1, cfg.max_iter + 1):
        g = problem.gradient(state, ev)
        ls = line_search(state, ev.objective, g, cfg, problem.evaluate, problem.system.solve_w,
                         norm2, problem.fixed)
        if ls.status != "accepted":
            reason = ls.status
            break
        state, ev = ls.state, ls.value
        rec = IterationRecord(k, ev.objective, ev.misfit, ev.regularizer, ls.alpha,
                              ls.stationarity, ls.trials)
        history.append(rec)
        if k % 50 == 0:
            log.info("iter %d objective %.6e alpha %.3e stationarity %.3e",
                     k, rec.objective, rec.alpha, rec.stationarity)
        if callback is not None and callback(rec, state, ev):
            reason = "callback"
            break
        if ls.stationarity < cfg.tol:
            reason = "converged"
            break
    return InversionResult(state, history, reason, ev, problem.perimeter(ev))
