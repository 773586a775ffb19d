"""Uniform finite-difference lattice over a rectangle.

Nodes are indexed row-major from the origin: ``index = j * nx + i`` with
``x = i * h`` and ``z = j * h``.  The lattice perimeter holds the discrete
boundary; its four corners touch the interior only diagonally.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

WALLS = ("left", "right", "bottom", "top")


class GridError(ValueError):
    pass


def _node_count(length: float, h: float, what: str) -> int:
    ratio = length / h
    n = int(round(ratio))
    if n < 1 or abs(ratio - n) > 1e-12 * ratio:
        raise GridError(f"{what}={length!r} is not an integer multiple of h={h!r}")
    return n + 1


@dataclass(frozen=True)
class Grid:
    lx: float
    lz: float
    h: float
    nx: int
    nz: int
    source: int | None = None
    _coords: np.ndarray = field(init=False, repr=False, compare=False)
    _stencil: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        i = np.tile(np.arange(self.nx), self.nz)
        j = np.repeat(np.arange(self.nz), self.nx)
        coords = np.column_stack([i * self.h, j * self.h])
        coords.setflags(write=False)
        object.__setattr__(self, "_coords", coords)
        object.__setattr__(self, "_stencil", _build_stencil(self.nx, self.nz))

    @property
    def size(self) -> int:
        return self.nx * self.nz

    @property
    def coords(self) -> np.ndarray:
        return self._coords

    def ij(self, node: int) -> tuple[int, int]:
        return node % self.nx, node // self.nx

    def index(self, i: int, j: int) -> int:
        return j * self.nx + i

    @property
    def interior_mask(self) -> np.ndarray:
        i, j = self._coords_ij()
        return (i > 0) & (i < self.nx - 1) & (j > 0) & (j < self.nz - 1)

    @property
    def boundary_mask(self) -> np.ndarray:
        return ~self.interior_mask

    @property
    def corner_mask(self) -> np.ndarray:
        i, j = self._coords_ij()
        return ((i == 0) | (i == self.nx - 1)) & ((j == 0) | (j == self.nz - 1))

    def _coords_ij(self):
        idx = np.arange(self.size)
        return idx % self.nx, idx // self.nx

    def node_at(self, x: float, z: float, *, snap: bool = False) -> int:
        """Index of the node at ``(x, z)``.

        With ``snap`` the nearest node is returned; otherwise the point must
        coincide with a node to within 1e-9 h.
        """
        fi, fj = x / self.h, z / self.h
        i, j = int(round(fi)), int(round(fj))
        if not (0 <= i < self.nx and 0 <= j < self.nz):
            raise GridError(f"point ({x}, {z}) lies outside the domain")
        if not snap and (abs(fi - i) > 1e-9 or abs(fj - j) > 1e-9):
            raise GridError(f"point ({x}, {z}) is not a grid node")
        return self.index(i, j)

    def with_source(self, source: int) -> "Grid":
        return Grid(self.lx, self.lz, self.h, self.nx, self.nz, int(source))

    def wall_nodes(self, wall: str) -> np.ndarray:
        """Nodes of one wall, ordered by increasing coordinate along it."""
        nx, nz = self.nx, self.nz
        if wall == "left":
            return np.arange(nz) * nx
        if wall == "right":
            return np.arange(nz) * nx + nx - 1
        if wall == "bottom":
            return np.arange(nx)
        if wall == "top":
            return (nz - 1) * nx + np.arange(nx)
        raise GridError(f"unknown wall {wall!r}")

    def perimeter_loop(self) -> np.ndarray:
        """All perimeter nodes, counter-clockwise from the origin."""
        nx, nz = self.nx, self.nz
        bottom = np.arange(nx)
        right = np.arange(1, nz) * nx + nx - 1
        top = (nz - 1) * nx + np.arange(nx - 2, -1, -1)
        left = np.arange(nz - 2, 0, -1) * nx
        return np.concatenate([bottom, right, top, left])


def _build_stencil(nx: int, nz: int) -> np.ndarray:
    """Axis-neighbour table, padded with -1.

    Interior nodes see all four axis neighbours; perimeter nodes see their
    interior neighbours only.
    """
    n = nx * nz
    stencil = np.full((n, 4), -1, dtype=np.int64)
    idx = np.arange(n)
    i, j = idx % nx, idx // nx
    interior = (i > 0) & (i < nx - 1) & (j > 0) & (j < nz - 1)
    offsets = [(-1, 0), (1, 0), (0, -1), (0, 1)]
    for k, (di, dj) in enumerate(offsets):
        ni, nj = i + di, j + dj
        inside = (ni >= 0) & (ni < nx) & (nj >= 0) & (nj < nz)
        nb = np.where(inside, nj * nx + ni, -1)
        nb_interior = inside & (ni > 0) & (ni < nx - 1) & (nj > 0) & (nj < nz - 1)
        keep = np.where(interior, inside, nb_interior)
        stencil[:, k] = np.where(keep, nb, -1)
    return stencil


def build_grid(lx: float, lz: float, h: float, source=None) -> Grid:
    """Build the lattice over ``[0, lx] x [0, lz]`` with spacing ``h``.

    ``source`` is an optional ``(x, z)`` pair that must sit on a node.
    """
    if lx <= 0 or lz <= 0 or h <= 0:
        raise GridError("extents and spacing must be positive")
    nx = _node_count(lx, h, "Lx")
    nz = _node_count(lz, h, "Lz")
    grid = Grid(float(lx), float(lz), float(h), nx, nz)
    if source is not None:
        grid = grid.with_source(grid.node_at(*source))
    return grid


def neighbors(grid: Grid, node: int) -> list[int]:
    row = grid._stencil[node]
    return [int(b) for b in row if b >= 0]


@dataclass(frozen=True)
class ReceiverSegment:
    """Ordered receiver nodes with their boundary quadrature weights."""

    name: str
    nodes: np.ndarray
    weights: np.ndarray
    closed: bool = False

    def __len__(self):
        return len(self.nodes)

    @property
    def length(self) -> float:
        return float(self.weights.sum())


def _path_weights(points: np.ndarray, closed: bool) -> np.ndarray:
    if len(points) == 1:
        return np.zeros(1)
    seg = np.linalg.norm(np.diff(points, axis=0), axis=1)
    if closed:
        closing = np.linalg.norm(points[0] - points[-1])
        before = np.concatenate([[closing], seg])
        after = np.concatenate([seg, [closing]])
    else:
        before = np.concatenate([[0.0], seg])
        after = np.concatenate([seg, [0.0]])
    return 0.5 * (before + after)


def receiver_segment(grid: Grid, spec) -> ReceiverSegment:
    """Receiver path on the lattice perimeter.

    ``spec`` is ``"boundary"`` for the closed perimeter loop, one wall name,
    or a sequence of node indices forming an open path.
    """
    if isinstance(spec, str):
        if spec == "boundary":
            nodes, closed, name = grid.perimeter_loop(), True, spec
        else:
            nodes, closed, name = grid.wall_nodes(spec), False, spec
    else:
        nodes, closed, name = np.asarray(spec, dtype=np.int64), False, "custom"
    if len(nodes) == 0:
        raise GridError("empty receiver segment")
    if len(np.unique(nodes)) != len(nodes):
        raise GridError("receiver segment visits a node twice")
    if not grid.boundary_mask[nodes].all():
        raise GridError("receivers must lie on the discrete boundary")
    weights = _path_weights(grid.coords[nodes], closed)
    return ReceiverSegment(name, np.asarray(nodes, dtype=np.int64), weights, closed)
