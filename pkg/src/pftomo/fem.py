"""P1 finite elements on a structured triangulation of the rectangle.

Each square cell of side ``hbar`` is split along its bottom-left to
top-right diagonal.  The mixed variable ``w`` stands for ``-Laplace(u)``
and is tied to ``u`` through ``M w = S u`` on the admissible test space.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import cg

from .grid import WALLS, Grid, GridError, _node_count


class FEMError(RuntimeError):
    pass


@dataclass(frozen=True)
class Mesh:
    lx: float
    lz: float
    hbar: float
    nx: int
    nz: int
    nodes: np.ndarray
    triangles: np.ndarray
    walls: dict
    dirichlet: np.ndarray
    neumann: np.ndarray
    bc: dict

    @property
    def size(self) -> int:
        return self.nx * self.nz

    @property
    def area(self) -> float:
        return self.lx * self.lz

    @property
    def free(self) -> np.ndarray:
        return ~self.dirichlet


def _normalise_bc(bc) -> dict:
    if bc is None:
        bc = "dirichlet"
    if isinstance(bc, str):
        bc = {w: bc for w in WALLS}
    out = {}
    for wall in WALLS:
        kind = bc.get(wall, "dirichlet")
        if kind not in ("dirichlet", "neumann"):
            raise FEMError(f"wall {wall!r}: unknown condition {kind!r}")
        out[wall] = kind
    unknown = set(bc) - set(WALLS)
    if unknown:
        raise FEMError(f"unknown walls in boundary spec: {sorted(unknown)}")
    return out


def triangulate(lx: float, lz: float, hbar: float, bc=None) -> Mesh:
    """Structured P1 mesh with per-wall boundary tags.

    ``bc`` maps each wall to ``"dirichlet"`` or ``"neumann"`` (a single
    string applies to all walls).  A corner shared by a Dirichlet and a
    Neumann wall is Dirichlet.
    """
    try:
        nx = _node_count(lx, hbar, "Lx")
        nz = _node_count(lz, hbar, "Lz")
    except GridError as exc:
        raise FEMError(str(exc)) from None
    bc = _normalise_bc(bc)
    i = np.tile(np.arange(nx), nz)
    j = np.repeat(np.arange(nz), nx)
    nodes = np.column_stack([i * hbar, j * hbar])

    ci, cj = np.meshgrid(np.arange(nx - 1), np.arange(nz - 1))
    n00 = (cj * nx + ci).ravel()
    n10, n01, n11 = n00 + 1, n00 + nx, n00 + nx + 1
    triangles = np.concatenate([
        np.column_stack([n00, n10, n11]),
        np.column_stack([n00, n11, n01]),
    ])

    walls = {
        "left": np.arange(nz) * nx,
        "right": np.arange(nz) * nx + nx - 1,
        "bottom": np.arange(nx),
        "top": (nz - 1) * nx + np.arange(nx),
    }
    dirichlet = np.zeros(nx * nz, dtype=bool)
    neumann = np.zeros(nx * nz, dtype=bool)
    for wall, kind in bc.items():
        (dirichlet if kind == "dirichlet" else neumann)[walls[wall]] = True
    neumann &= ~dirichlet
    return Mesh(float(lx), float(lz), float(hbar), nx, nz, nodes, triangles,
                walls, dirichlet, neumann, bc)


def _element_geometry(mesh: Mesh):
    p = mesh.nodes[mesh.triangles]
    e1 = p[:, 1] - p[:, 0]
    e2 = p[:, 2] - p[:, 0]
    area = 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    return p, area


def _scatter(mesh: Mesh, local: np.ndarray) -> sp.csr_matrix:
    tri = mesh.triangles
    rows = np.repeat(tri, 3, axis=1).ravel()
    cols = np.tile(tri, (1, 3)).ravel()
    return sp.csr_matrix((local.ravel(), (rows, cols)), shape=(mesh.size, mesh.size))


def assemble_mass(mesh: Mesh, lumped: bool = False) -> sp.csr_matrix:
    _, area = _element_geometry(mesh)
    ref = (np.ones((3, 3)) + np.eye(3)) / 12.0
    M = _scatter(mesh, area[:, None, None] * ref)
    if lumped:
        M = sp.diags(np.asarray(M.sum(axis=1)).ravel()).tocsr()
    return M


def assemble_stiffness(mesh: Mesh) -> sp.csr_matrix:
    p, area = _element_geometry(mesh)
    # gradients of the barycentric coordinates: rotated opposite edges / (2 area)
    edges = np.stack([p[:, 2] - p[:, 1], p[:, 0] - p[:, 2], p[:, 1] - p[:, 0]], axis=1)
    grads = np.stack([-edges[..., 1], edges[..., 0]], axis=-1) / (2 * area[:, None, None])
    local = area[:, None, None] * np.einsum("tik,tjk->tij", grads, grads)
    S = _scatter(mesh, local)
    S.sum_duplicates()
    return S


def interpolation_matrix(mesh: Mesh, grid: Grid) -> sp.csr_matrix | None:
    """Exact P1 evaluation at FD nodes, ``None`` when the node sets coincide."""
    ratio = mesh.hbar / grid.h
    r = int(round(ratio))
    if abs(ratio - r) > 1e-9 or r < 1:
        raise FEMError("hbar must be an integer multiple of h")
    if abs(grid.lx - mesh.lx) > 1e-12 or abs(grid.lz - mesh.lz) > 1e-12:
        raise FEMError("grid and mesh cover different domains")
    if r == 1:
        return None
    idx = np.arange(grid.size)
    gi, gj = idx % grid.nx, idx // grid.nx
    ci = np.minimum(gi // r, mesh.nx - 2)
    cj = np.minimum(gj // r, mesh.nz - 2)
    a = (gi - ci * r) / r
    b = (gj - cj * r) / r
    n00 = cj * mesh.nx + ci
    n10, n01, n11 = n00 + 1, n00 + mesh.nx, n00 + mesh.nx + 1
    lower = a >= b
    cols = np.stack([n00, np.where(lower, n10, n01), n11], axis=1)
    vals = np.stack([
        np.where(lower, 1 - a, 1 - b),
        np.where(lower, a - b, b - a),
        np.where(lower, b, a),
    ], axis=1)
    rows = np.repeat(idx, 3)
    B = sp.csr_matrix((vals.ravel(), (rows, cols.ravel())), shape=(grid.size, mesh.size))
    B.eliminate_zeros()
    return B


class MixedSystem:
    """Solver for the mixed constraint ``M w = S u``.

    With Dirichlet walls the constraint is imposed against test functions
    vanishing there, and ``w`` is taken zero on the Dirichlet nodes: among
    all ``w`` satisfying the constrained rows that one has least
    ``integral w^2``.  Without Dirichlet walls the full system is solved
    with zero mean.
    """

    def __init__(self, mesh: Mesh, M=None, S=None, *, lumped: bool = False,
                 rtol: float = 1e-10, maxiter: int | None = None):
        self.mesh = mesh
        self.M = assemble_mass(mesh, lumped) if M is None else M
        self.S = assemble_stiffness(mesh) if S is None else S
        self.dirichlet = mesh.dirichlet.copy()
        self.free = ~self.dirichlet
        self.pure_neumann = not self.dirichlet.any()
        self.rtol = rtol
        self.maxiter = 10 * mesh.size if maxiter is None else maxiter
        self.M_free = self.M[self.free][:, self.free].tocsr()
        self.jacobi = sp.diags(1.0 / self.M_free.diagonal()).tocsr()
        self.ones_mass = np.asarray(self.M.sum(axis=1)).ravel()
        self.area = float(self.ones_mass.sum())

    def solve_w(self, u: np.ndarray, x0=None) -> np.ndarray:
        rhs = self.S @ u
        w = np.zeros_like(rhs)
        b = rhs[self.free]
        if self.pure_neumann:
            b = b - b.sum() / self.area * self.ones_mass
        if not np.any(b):
            return w
        guess = None if x0 is None else x0[self.free]
        sol, info = cg(self.M_free, b, x0=guess, rtol=self.rtol, atol=0.0,
                       maxiter=self.maxiter, M=self.jacobi)
        if info != 0:
            raise FEMError(f"conjugate gradients did not converge (info={info})")
        w[self.free] = sol
        if self.pure_neumann:
            w -= (self.ones_mass @ w) / self.area
        return w

    def residual(self, u: np.ndarray, w: np.ndarray) -> float:
        """Norm of ``M w - S u`` on the constrained rows."""
        r = (self.M @ w - self.S @ u)[self.free]
        return float(np.linalg.norm(r))

    def residual_ok(self, u, w, tol: float = 1e-10) -> bool:
        su = np.linalg.norm((self.S @ u)[self.free])
        return self.residual(u, w) <= tol * max(1.0, su)


def solve_w(M, S, u, dirichlet=None, *, rtol: float = 1e-10) -> np.ndarray:
    """One-off solve of the mixed constraint; see :class:`MixedSystem`."""
    n = M.shape[0]
    mask = np.zeros(n, dtype=bool) if dirichlet is None else np.asarray(dirichlet, dtype=bool)
    stub = _StubMesh(n, mask)
    return MixedSystem(stub, M=sp.csr_matrix(M), S=sp.csr_matrix(S), rtol=rtol).solve_w(u)


@dataclass(frozen=True)
class _StubMesh:
    size: int
    dirichlet: np.ndarray
