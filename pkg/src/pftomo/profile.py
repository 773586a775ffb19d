"""One-dimensional optimal interface profile of the double-obstacle energy.

The profile ``z`` minimises

    j(z) = int  gamma/2 (z'')^2 + 1/2 (z')^2 + Psi(z)  dt

among odd, non-decreasing ``C^2`` transitions from -1 to 1.  On its support
``(-delta, delta)`` it is ``C1 sinh(l1 t) + C2 sin(l2 t)``, where ``+-l1`` and
``+-i l2`` are the roots of ``gamma x^4 - x^2 - 1``.  Its energy ``P`` turns
phase-field energy into interface length.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


def lambdas(gamma: float) -> tuple[float, float]:
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    root = math.sqrt(1.0 + 4.0 * gamma)
    lam1 = math.sqrt((1.0 + root) / (2.0 * gamma))
    # (root - 1)/(2 gamma) rewritten as 2/(root + 1): no cancellation as gamma -> 0
    lam2 = math.sqrt(2.0 / (root + 1.0))
    return lam1, lam2


def delta_residual(gamma: float, delta: float) -> float:
    """Residual of ``l2 tan(l2 d) = -l1 tanh(l1 d)`` in well-scaled form.

    Multiplying through by ``cos(l2 d) / l1`` gives
    ``(l2/l1) sin(l2 d) + tanh(l1 d) cos(l2 d)``, which has slope of order
    one at the root for every gamma.
    """
    lam1, lam2 = lambdas(gamma)
    return lam2 / lam1 * math.sin(lam2 * delta) + math.tanh(lam1 * delta) * math.cos(lam2 * delta)


def delta(gamma: float) -> float:
    """Half-width of the profile support: first positive root, by bisection."""
    lam1, lam2 = lambdas(gamma)
    lo = math.pi / (2 * lam2) + 1e-12
    hi = math.pi / lam2 - 1e-12
    f_lo = delta_residual(gamma, lo)
    f_hi = delta_residual(gamma, hi)
    assert f_lo > 0 > f_hi, "root not bracketed"
    while hi - lo > 1e-14:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if delta_residual(gamma, mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class ProfileData:
    gamma: float
    lam1: float
    lam2: float
    delta: float
    c1: float
    c2: float
    energy: float

    def eval(self, t):
        return profile_eval(self, t)


def _sinh_ratio(lam1, t, d):
    # sinh(l1 t) / sinh(l1 d) and cosh(l1 t) / sinh(l1 d) without overflow
    at = np.abs(t)
    scale = np.exp(lam1 * (at - d)) / -np.expm1(-2.0 * lam1 * d)
    decay = np.exp(-2.0 * lam1 * at)
    return np.sign(t) * scale * (1.0 - decay), scale * (1.0 + decay)


def profile_eval(pd: ProfileData, t):
    """Profile value and first two derivatives, clamped outside the support."""
    t = np.asarray(t, dtype=float)
    lam1, lam2, d = pd.lam1, pd.lam2, pd.delta
    inside = np.abs(t) <= d
    tc = np.clip(t, -d, d)
    a = lam2**2 / (lam1**2 + lam2**2)
    sh, ch = _sinh_ratio(lam1, tc, d)
    z = a * sh + pd.c2 * np.sin(lam2 * tc)
    dz = a * lam1 * ch + pd.c2 * lam2 * np.cos(lam2 * tc)
    ddz = a * lam1**2 * sh - pd.c2 * lam2**2 * np.sin(lam2 * tc)
    z = np.where(inside, z, np.sign(t))
    dz = np.where(inside, dz, 0.0)
    ddz = np.where(inside, ddz, 0.0)
    return z, dz, ddz


def energy_density(pd: ProfileData, t):
    z, dz, ddz = profile_eval(pd, t)
    return 0.5 * pd.gamma * ddz**2 + 0.5 * dz**2 + 0.5 * (1.0 - z**2)


def _simpson(f, a, b, n):
    x = np.linspace(a, b, n + 1)
    y = f(x)
    return (b - a) / (3 * n) * (y[0] + y[-1] + 4 * y[1:-1:2].sum() + 2 * y[2:-1:2].sum())


def transition_energy(pd: ProfileData, tol: float = 1e-10, max_panels: int = 2**24) -> float:
    """Energy of the profile by composite Simpson, doubling panels to ``tol``."""
    f = lambda t: energy_density(pd, t)
    n = 64
    prev = 2 * _simpson(f, 0.0, pd.delta, n)
    while n < max_panels:
        n *= 2
        cur = 2 * _simpson(f, 0.0, pd.delta, n)
        if abs(cur - prev) < tol:
            return cur
        prev = cur
    raise RuntimeError("transition energy quadrature did not settle")


@lru_cache(maxsize=64)
def profile_data(gamma: float) -> ProfileData:
    lam1, lam2 = lambdas(gamma)
    d = delta(gamma)
    denom = lam1**2 + lam2**2
    c1 = lam2**2 / (denom * math.sinh(lam1 * d)) if lam1 * d < 700 else 0.0
    c2 = lam1**2 / (denom * math.sin(lam2 * d))
    pd = ProfileData(gamma, lam1, lam2, d, c1, c2, float("nan"))
    energy = transition_energy(pd)
    return ProfileData(gamma, lam1, lam2, d, c1, c2, energy)


def epsilon_for_width(width_nodes: float, hbar: float, gamma: float) -> float:
    """Interface scale giving a transition layer ``width_nodes * hbar`` wide."""
    if width_nodes <= 0 or hbar <= 0:
        raise ValueError("width and spacing must be positive")
    return width_nodes * hbar / (2.0 * delta(gamma))
