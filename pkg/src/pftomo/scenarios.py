"""Truth slowness fields, source-receiver layouts and synthetic data."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .eikonal import EikonalSolver
from .grid import Grid, build_grid, receiver_segment

TRUTHS = ("circular_disk", "banded_layers", "right_angle", "arbitrary_shape", "shielded_disk")
EXPERIMENTS = ("full_boundary_center", "random", "wells")

# Ten interior source points drawn once with
# numpy.random.default_rng(12131415).uniform(0.1, 0.9, (10, 2)), rounded to 1e-3.
RANDOM_SOURCES = (
    (0.34, 0.7), (0.884, 0.385), (0.25, 0.598), (0.461, 0.792), (0.112, 0.224),
    (0.507, 0.156), (0.275, 0.3), (0.851, 0.137), (0.318, 0.117), (0.539, 0.124),
)


class ScenarioError(ValueError):
    pass


def _disk(x, y, cx, cy, r):
    return (x - cx) ** 2 + (y - cy) ** 2 <= r * r


def truth_indicator(name: str, x, y):
    """True where the truth takes the high slowness value."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if name == "circular_disk":
        return _disk(x, y, 0.5, 0.5, 0.25)
    if name == "banded_layers":
        root = np.sqrt(2.6**2 - (2 * x - 1) ** 2)
        upper = (0.5 * (3.7 - root) <= y) & (y <= 0.5 * (4.1 - root))
        lower = (0.5 * (2.8 - root) <= y) & (y <= 0.5 * (3.2 - root))
        return upper | lower
    if name == "right_angle":
        return (y >= 2 / 3 * x + 0.4) | (y >= -1.5 * x + 0.9)
    if name == "arbitrary_shape":
        return (_disk(x, y, 2 / 3, 0.5, 1 / 5) | _disk(x, y, 7 / 15, 0.7, 1 / 6)
                | _disk(x, y, 7 / 15, 0.3, 1 / 8))
    if name == "shielded_disk":
        outside_cut = (x - 4 / 9) ** 2 + (y - 0.5) ** 2 >= 1 / 16
        crescent = _disk(x, y, 2 / 3, 0.5, 3 / 8) & outside_cut
        return _disk(x, y, 2 / 3, 0.5, 1 / 6) | crescent
    raise ScenarioError(f"unknown truth {name!r}")


@dataclass(frozen=True)
class TruthField:
    name: str
    smin: float = 1.0
    smax: float = 1.1

    def __post_init__(self):
        if self.name not in TRUTHS:
            raise ScenarioError(f"unknown truth {self.name!r}")
        if not 0 < self.smin < self.smax:
            raise ScenarioError("need 0 < smin < smax")

    @classmethod
    def preset(cls, name: str) -> "TruthField":
        return cls(name, 1.0, 1.4 if name == "shielded_disk" else 1.1)

    def indicator(self, x, y):
        return truth_indicator(self.name, x, y)

    def phase(self, x, y):
        return np.where(self.indicator(x, y), 1.0, -1.0)

    def slowness(self, x, y, mollify: float = 0.0):
        if mollify <= 0:
            return np.where(self.indicator(x, y), self.smax, self.smin)
        # box average of the indicator over a 5 x 5 sub-sample
        offsets = np.linspace(-mollify, mollify, 5)
        frac = np.zeros(np.shape(x))
        for dx in offsets:
            for dy in offsets:
                frac += self.indicator(np.asarray(x) + dx, np.asarray(y) + dy)
        frac /= 25.0
        return self.smin + (self.smax - self.smin) * frac


def truth_value(name: str, x: float, y: float, smin: float = 1.0, smax: float = 1.1) -> float:
    if not (0 <= x <= 1 and 0 <= y <= 1):
        raise ScenarioError("point outside the unit square")
    return smax if truth_indicator(name, x, y) else smin


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    sources: tuple
    receivers: str
    bc: dict = field(hash=False)

    def source_nodes(self, grid: Grid) -> list[int]:
        return [grid.node_at(x, z, snap=True) for x, z in self.sources]


def experiment(name: str, lx: float = 1.0, lz: float = 1.0, n_sources: int = 10) -> ExperimentConfig:
    dirichlet = {w: "dirichlet" for w in ("left", "right", "bottom", "top")}
    if name == "full_boundary_center":
        return ExperimentConfig(name, ((0.5 * lx, 0.5 * lz),), "boundary", dirichlet)
    if name == "random":
        pts = tuple((x * lx, z * lz) for x, z in RANDOM_SOURCES)
        return ExperimentConfig(name, pts, "boundary", dirichlet)
    if name == "wells":
        pts = tuple((0.0, i / (n_sources + 1) * lz) for i in range(1, n_sources + 1))
        bc = {"left": "dirichlet", "right": "dirichlet", "bottom": "neumann", "top": "neumann"}
        return ExperimentConfig(name, pts, "right", bc)
    raise ScenarioError(f"unknown experiment {name!r}")


@dataclass
class Observations:
    """Traveltimes from one source read at an ordered set of receivers."""

    source: tuple
    receivers: np.ndarray
    times: np.ndarray
    segment: str
    nu: float = 0.0
    seed: int = 0


@dataclass
class ObservationSet:
    observations: list
    lx: float
    lz: float
    h: float
    refine: int
    nu: float
    seed: int
    truth: dict | None = None
    experiment: str | None = None

    def to_dict(self) -> dict:
        return {
            "version": 1,
            "grid": {"lx": self.lx, "lz": self.lz, "h": self.h, "refine": self.refine},
            "nu": self.nu,
            "seed": self.seed,
            "truth": self.truth,
            "experiment": self.experiment,
            "sources": [
                {
                    "source": list(o.source),
                    "segment": o.segment,
                    "receivers": o.receivers.tolist(),
                    "times": o.times.tolist(),
                    "nu": o.nu,
                    "seed": o.seed,
                }
                for o in self.observations
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ObservationSet":
        obs = [
            Observations(tuple(o["source"]), np.asarray(o["receivers"], dtype=float),
                         np.asarray(o["times"], dtype=float), o["segment"], o["nu"], o["seed"])
            for o in d["sources"]
        ]
        g = d["grid"]
        return cls(obs, g["lx"], g["lz"], g["h"], g["refine"], d["nu"], d["seed"],
                   d.get("truth"), d.get("experiment"))

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    @classmethod
    def load(cls, path) -> "ObservationSet":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def generate_data(truth: TruthField, exp: ExperimentConfig, h: float, refine: int = 8,
                  nu: float = 0.0, seed: int = 0, lx: float = 1.0, lz: float = 1.0,
                  mollify: float = 0.0) -> ObservationSet:
    """Synthetic traveltimes solved on a grid ``refine`` times finer than ``h``.

    Noise for source ``k`` comes from ``default_rng([seed, k])`` drawn in
    receiver order, so each value depends only on (seed, source, receiver).
    """
    if refine < 1 or int(refine) != refine:
        raise ScenarioError("refine must be a positive integer")
    refine = int(refine)
    coarse = build_grid(lx, lz, h)
    fine = build_grid(lx, lz, h / refine)
    segment = receiver_segment(coarse, exp.receivers)
    rec_coords = coarse.coords[segment.nodes]
    ci, cj = segment.nodes % coarse.nx, segment.nodes // coarse.nx
    rec_fine = cj * refine * fine.nx + ci * refine
    if not np.allclose(fine.coords[rec_fine], rec_coords, rtol=0, atol=1e-12):
        raise ScenarioError("receiver not on the fine lattice")
    xf, zf = fine.coords.T
    s = truth.slowness(xf, zf, mollify)
    solver = EikonalSolver(fine)
    out = []
    for k, src in enumerate(exp.source_nodes(coarse)):
        i, j = coarse.ij(src)
        tt = solver.solve(s, fine.index(i * refine, j * refine))
        times = tt.values[rec_fine].copy()
        if nu > 0:
            times += nu * np.random.default_rng([seed, k]).standard_normal(len(times))
        out.append(Observations(tuple(coarse.coords[src]), rec_coords.copy(), times,
                                exp.receivers, nu, seed))
    return ObservationSet(out, lx, lz, h, refine, nu, seed,
                          {"name": truth.name, "smin": truth.smin, "smax": truth.smax}, exp.name)
