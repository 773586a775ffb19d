"""High-level runs shared by the command line and the experiment scripts."""
from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .config import RunConfig
from .descent import InversionResult, run
from .eikonal import EikonalSolver
from .fem import triangulate
from .grid import build_grid
from .inversion import InversionProblem
from .scenarios import ObservationSet, TruthField, generate_data

DISK_PERIMETER = math.pi / 2  # circumference of the radius-1/4 disk


def generate(cfg: RunConfig) -> ObservationSet:
    g = cfg.grid
    exp = cfg.experiment.build(g.lx, g.lz)
    return generate_data(cfg.truth_field(), exp, g.h_fd, cfg.data.refine, cfg.data.nu,
                         cfg.data.seed, g.lx, g.lz, cfg.truth.mollify)


def _truth_from(obs: ObservationSet, cfg: RunConfig) -> TruthField | None:
    if obs.truth is not None:
        t = obs.truth
        return TruthField(t["name"], t["smin"], t["smax"])
    return cfg.truth_field()


def build_problem(cfg: RunConfig, obs: ObservationSet) -> InversionProblem:
    g = cfg.grid
    exp = cfg.experiment.build(g.lx, g.lz)
    mesh = triangulate(g.lx, g.lz, g.hbar, exp.bc)
    truth = _truth_from(obs, cfg)
    params = cfg.model_params(truth.smin, truth.smax)
    if obs.nu != cfg.data.nu:
        params = replace(params, nu=obs.nu if (obs.nu > 0 and cfg.model.weight_by_noise) else None)
    dv = cfg.model.dirichlet_value
    if dv == "truth":
        dv = truth.phase(*mesh.nodes.T)
    return InversionProblem.from_observations(obs, mesh, params, h=g.h_fd, dirichlet_values=dv,
                                              lumped=cfg.model.lumped)


def misclassified_fraction(problem: InversionProblem, u, truth: TruthField) -> float:
    """Area where ``sign(u)`` disagrees with the truth, as a fraction of the domain."""
    wrong = (np.asarray(u) > 0) != truth.indicator(*problem.mesh.nodes.T)
    return float(problem.system.ones_mass @ wrong) / problem.area


@dataclass
class InversionOutcome:
    problem: InversionProblem
    result: InversionResult
    summary: dict


def invert(cfg: RunConfig, obs: ObservationSet, callback=None) -> InversionOutcome:
    problem = build_problem(cfg, obs)
    t0 = time.perf_counter()
    state = problem.initial_state(cfg.init)
    result = run(problem, cfg.descent, state, callback)
    elapsed = time.perf_counter() - t0
    ev = result.evaluation
    P = problem.profile.energy
    truth = _truth_from(obs, cfg)
    summary = {
        "reason": result.reason,
        "iterations": result.iterations,
        "seconds": elapsed,
        "objective": ev.objective,
        "misfit": ev.misfit,
        "regularizer": ev.regularizer,
        "J": ev.J,
        "P": P,
        "perimeter": result.perimeter,
        "sigma_effective": problem.params.sigma_effective,
        "sigma_J_over_P": float(ev.regularizer / P),
        "objective_over_P": float(ev.misfit + ev.regularizer / P),
        "eps": problem.params.eps,
        "delta": problem.profile.delta,
        "final_stationarity": result.history[-1].stationarity if result.iterations else None,
        "mixed_residual_ok": bool(problem.system.residual_ok(result.state.u, result.state.w)),
    }
    if truth is not None:
        summary["truth"] = truth.name
        summary["misclassified_fraction"] = misclassified_fraction(problem, result.state.u, truth)
        if truth.name == "circular_disk" and cfg.grid.lx == 1 and cfg.grid.lz == 1:
            summary["perimeter_error"] = abs(result.perimeter - DISK_PERIMETER)
    return InversionOutcome(problem, result, summary)


def forward_field(cfg: RunConfig, smax: float | None = None):
    """Traveltime field of the configured truth from ``forward.source``."""
    g = cfg.grid
    grid = build_grid(g.lx, g.lz, g.h_fd)
    src = grid.node_at(*cfg.forward.source, snap=True)
    tf = cfg.truth_field()
    if smax is not None:
        tf = TruthField(tf.name, tf.smin, smax)
    s = tf.slowness(*grid.coords.T, cfg.truth.mollify)
    return grid, EikonalSolver(grid).solve(s, src)


def write_field_csv(path, coords, values) -> None:
    """``x,z,value`` rows with shortest round-trip float formatting."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "z", "value"])
        for (x, z), v in zip(coords, values):
            w.writerow([repr(float(x)), repr(float(z)), repr(float(v))])


def read_field_csv(path) -> tuple[np.ndarray, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if rows[0] != ["x", "z", "value"]:
        raise ValueError(f"{path}: unexpected header {rows[0]}")
    data = np.array([[float(c) for c in r] for r in rows[1:]])
    return data[:, :2], data[:, 2]


def write_history_csv(path, history) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "objective", "misfit", "regularizer", "alpha", "stationarity", "trials"])
        for r in history:
            w.writerow([r.k, repr(r.objective), repr(r.misfit), repr(r.regularizer), repr(r.alpha),
                        repr(r.stationarity), r.trials])


def write_table_csv(path, rows: list[dict]) -> None:
    if not rows:
        Path(path).write_text("")
        return
    cols = list(rows[0])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([repr(float(r[c])) if isinstance(r[c], (float, np.floating)) else r[c] for c in cols])
