"""Harmonic-oscillator eigenfunctions and their Wronskian-conjugate solutions.

Indexing follows the Landau-level convention: ``n = 1`` is the ground state,
with energy ``E_n = 2n - 1``. Internally the recurrence runs over the 0-based
index ``m = n - 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.polynomial.hermite import hermgauss

from hallfiber import _kernels

__all__ = [
    "SolutionPairSample",
    "landau_gamma",
    "hermite_eval",
    "hermite_zeros",
    "second_solution",
    "solution_pair_on",
    "asymptotic_eval",
]

PI_QUARTER = math.pi ** -0.25
# RK4 substep cap; keeps Wronskian drift below 1e-10 out to |x| = 15.
MAX_SUBSTEP = 2.5e-4


def _check_index(n: int) -> int:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValueError(f"oscillator index must be an integer >= 1, got {n!r}")
    return int(n)


def landau_gamma(n: int) -> tuple[float, float]:
    """Return ``(E_n, gamma_n)`` with ``gamma_n = (2^(n-1) (n-1)! sqrt(pi))^(-1/2)``."""
    n = _check_index(n)
    log_norm = (n - 1) * math.log(2.0) + math.lgamma(n) + 0.5 * math.log(math.pi)
    return float(2 * n - 1), math.exp(-0.5 * log_norm)


def hermite_eval(n: int, x):
    """Evaluate Psi_n and Psi_n' at ``x`` (scalar or array).

    Uses the normalized three-term recurrence on the Gaussian-damped functions
    so nothing overflows for |x| <= 40, n <= 20.
    """
    n = _check_index(n)
    xa = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xa)):
        raise ValueError("hermite_eval requires finite abscissae")
    prev = np.zeros_like(xa)
    cur = PI_QUARTER * np.exp(-0.5 * xa * xa)
    for m in range(1, n):
        nxt = xa * math.sqrt(2.0 / m) * cur - math.sqrt((m - 1) / m) * prev
        prev, cur = cur, nxt
    m = n - 1
    deriv = math.sqrt(2.0 * m) * prev - xa * cur
    if np.ndim(x) == 0:
        return float(cur), float(deriv)
    return cur, deriv


def hermite_zeros(n: int) -> np.ndarray:
    """Real zeros of Psi_n in increasing order (empty for the ground state)."""
    n = _check_index(n)
    if n == 1:
        return np.empty(0)
    return np.sort(hermgauss(n - 1)[0])


@dataclass(frozen=True)
class SolutionPairSample:
    n: int
    grid: np.ndarray
    psi: np.ndarray
    dpsi: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    wronskian_error: float


def _phi_seed(n: int) -> tuple[float, float]:
    # Data at x = 0 giving Psi*Phi' - Psi'*Phi = 1. For odd n this is the
    # base-point-0 integral representation; for even n the even solution.
    psi0, dpsi0 = hermite_eval(n, 0.0)
    if n % 2 == 1:
        return 0.0, 1.0 / psi0
    return -1.0 / dpsi0, 0.0


def _phi_on(n: int, grid: np.ndarray, step: float) -> tuple[np.ndarray, np.ndarray]:
    energy = 2.0 * n - 1.0
    substep = min(step, MAX_SUBSTEP)
    phi = np.empty_like(grid)
    dphi = np.empty_like(grid)
    v0, w0 = _phi_seed(n)
    left = grid <= 0.0
    if left.any():
        xs = np.concatenate(([0.0], grid[left][::-1]))
        v, w = _kernels.integrate_path(xs, 0.0, energy, 0.0, v0, w0, substep, np.inf)
        phi[left] = v[1:][::-1]
        dphi[left] = w[1:][::-1]
    right = ~left
    if right.any():
        xs = np.concatenate(([0.0], grid[right]))
        v, w = _kernels.integrate_path(xs, 0.0, energy, 0.0, v0, w0, substep, np.inf)
        phi[right] = v[1:]
        dphi[right] = w[1:]
    return phi, dphi


def second_solution(
    n: int,
    x_left: float,
    x_right: float,
    step: float = 1e-3,
    *,
    tol: float = 1e-8,
    strict: bool = True,
) -> SolutionPairSample:
    """Sample the Wronskian-normalized second solution Phi_n on [x_left, x_right].

    Phi_n is the solution of u'' = (x^2 - E_n) u with Psi_n Phi_n' - Psi_n' Phi_n = 1,
    fixed by its data at x = 0 and integrated outwards from there with RK4, so
    that it is always computed in the direction where it grows. On the left
    tail it agrees with the textbook integral representation up to a multiple
    of Psi_n.

    With ``strict`` the window must lie left of every zero of Psi_n.
    """
    n = _check_index(n)
    if not (np.isfinite(x_left) and np.isfinite(x_right)):
        raise ValueError("window endpoints must be finite")
    if x_left > x_right:
        raise ValueError(f"empty window [{x_left}, {x_right}]")
    if step <= 0:
        raise ValueError("step must be positive")
    zeros = hermite_zeros(n)
    if strict and zeros.size and x_right >= zeros[0]:
        raise ValueError(
            f"window reaches the oscillatory region of Psi_{n} "
            f"(first zero at {zeros[0]:.6f}, x_right={x_right})"
        )
    if x_left == x_right:
        return solution_pair_on(n, np.array([float(x_left)]), step, tol=tol)
    cells = max(1, math.ceil((x_right - x_left) / step))
    return solution_pair_on(n, np.linspace(x_left, x_right, cells + 1), step, tol=tol)


def solution_pair_on(n: int, points, step: float = 1e-3, *, tol: float = 1e-8) -> SolutionPairSample:
    """Psi_n, Phi_n and derivatives at arbitrary increasing abscissae.

    RK4 substeps never exceed ``min(step, MAX_SUBSTEP)``; no check against the
    zeros of Psi_n is made here.
    """
    n = _check_index(n)
    grid = np.asarray(points, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or not np.all(np.isfinite(grid)):
        raise ValueError("points must be a nonempty finite 1-d array")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("points must be strictly increasing")
    if step <= 0:
        raise ValueError("step must be positive")
    psi, dpsi = hermite_eval(n, grid)
    phi, dphi = _phi_on(n, grid, step)
    wr = float(np.max(np.abs(psi * dphi - dpsi * phi - 1.0)))
    if not wr <= tol:
        raise ArithmeticError(f"Wronskian drift {wr:.3e} exceeds tolerance {tol:.1e}")
    return SolutionPairSample(n, grid, psi, dpsi, phi, dphi, wr)


def asymptotic_eval(n: int, x: float, which: Literal["psi", "dpsi", "phi", "dphi"]) -> float:
    """Leading-order x -> -infinity forms of Psi_n, Psi_n', Phi_n, Phi_n'."""
    n = _check_index(n)
    if not x < 0:
        raise ValueError("asymptotic forms are for x < 0")
    _, g = landau_gamma(n)
    if which == "psi":
        return g * 2 ** (n - 1) * x ** (n - 1) * math.exp(-0.5 * x * x)
    if which == "dpsi":
        return -g * 2 ** (n - 1) * x**n * math.exp(-0.5 * x * x)
    if which == "phi":
        return math.exp(0.5 * x * x) / (g * 2**n * x**n)
    if which == "dphi":
        return math.exp(0.5 * x * x) / (g * 2**n * x ** (n - 1))
    raise ValueError(f"unknown branch {which!r}")
