"""Eigenpairs of the Dirichlet fiber operator h(k) = -d^2/dx^2 + (x - k)^2 on x > 0.

Two independent routes are provided:

* shooting: RK4 integration of the decaying solution from the far right,
  root-finding on the boundary value at x = 0;
* a finite-difference oracle: second-order central differences, Sturm-count
  bisection, Richardson extrapolation over two grids.

A third check uses the full-line operator -d^2/dx^2 + (|x| - k)^2, whose
2n-th eigenvalue equals lambda_n(k) by parity.

Energies are carried internally as ``E_n + excess`` so the tiny gap above a
Landau level is never formed by cancellation.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal, Sequence

import numpy as np
from scipy.integrate import simpson, trapezoid
from scipy.optimize import brentq

from hallfiber import _kernels
from hallfiber.errors import (
    BracketError,
    DomainError,
    PrecisionFloorError,
    SolverDisagreement,
    SolverError,
    reason_of,
)

__all__ = [
    "SolverConfig",
    "FiberPoint",
    "BandPoint",
    "EigenfunctionSample",
    "SweepFailure",
    "sturm_count",
    "fd_oracle",
    "shoot",
    "eigenvalue",
    "eigenfunction",
    "hadamard_derivative",
    "iwatsuka_crosscheck",
    "full_line_eigenvalue",
    "band_sweep",
]

# Smallest excess lambda_n(k) - E_n the shooting root can resolve.
EXCESS_FLOOR = 1e-13
# Above this k the asymptotic bracket is used instead of the FD bracket.
ASYMPTOTIC_SEED_K = 2.5
DISAGREEMENT_LIMIT = 1e-6
_RTOL = 4 * np.finfo(float).eps


@dataclass(frozen=True)
class SolverConfig:
    domain_margin: float = 14.0
    step: float = 5e-4
    lambda_tol: float = 1e-12
    renorm_threshold: float = 1e100

    def __post_init__(self):
        for name in ("domain_margin", "step", "lambda_tol", "renorm_threshold"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        if self.domain_margin < 8:
            raise ValueError("domain_margin must be at least 8")
        if self.renorm_threshold < 1e10:
            raise ValueError("renorm_threshold must be at least 1e10")


@dataclass(frozen=True)
class FiberPoint:
    n: int
    k: float

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise ValueError(f"band index must be an integer >= 1, got {self.n!r}")
        if not math.isfinite(self.k):
            raise ValueError(f"quasi-momentum must be finite, got {self.k!r}")

    @property
    def landau(self) -> float:
        return 2.0 * self.n - 1.0


@dataclass(frozen=True)
class BandPoint:
    n: int
    k: float
    lam: float
    dlam: float
    err_est: float
    method: Literal["shooting", "fd_oracle", "iwatsuka"]
    excess: float  # lam - (2n - 1), computed without cancellation


@dataclass(frozen=True)
class EigenfunctionSample:
    n: int
    k: float
    excess: float
    grid: np.ndarray
    values: np.ndarray
    slopes: np.ndarray
    boundary_slope: float
    norm_check: float
    matching_defect: float


@dataclass(frozen=True)
class SweepFailure:
    n: int
    k: float
    reason: str
    message: str


def _right_end(k: float, config: SolverConfig) -> tuple[int, float]:
    # Grid nodes sit at exact multiples of the step so nearby k share a grid.
    cells = math.ceil((max(k, 0.0) + config.domain_margin) / config.step)
    return cells, cells * config.step


def _check_truncation(k: float, lam: float, x_right: float, config: SolverConfig):
    turning = k + math.sqrt(max(lam, 0.0))
    if x_right - turning < 0.5 * config.domain_margin:
        raise DomainError(
            f"eigenvalue {lam:.6g} at k={k} too high for domain [0, {x_right:.3f}]; "
            f"increase domain_margin"
        )


def _lead_excess(n: int, k: float) -> float:
    from hallfiber.asymptotics import leading_terms

    lt = leading_terms(n, k)
    return lt.lambda_lead - (2 * n - 1)


# -- finite differences ------------------------------------------------------


def _half_line_diag(k: float, h: float, x_right: float) -> np.ndarray:
    cells = math.ceil(x_right / h)
    x = np.arange(1, cells) * h
    return 2.0 / h**2 + (x - k) ** 2


def _full_line_diag(k: float, h: float, half_width: float) -> np.ndarray:
    cells = math.ceil(half_width / h)
    x = np.arange(-cells + 1, cells) * h
    return 2.0 / h**2 + (np.abs(x) - k) ** 2


def _check_grid(h: float, lam: float):
    if h * math.sqrt(max(lam, 0.0)) > 0.1:
        raise ValueError(f"grid too coarse: step*sqrt(lambda) = {h * math.sqrt(lam):.3g} > 0.1")


def sturm_count(k: float, lam: float, config: SolverConfig = SolverConfig(), step: float | None = None) -> int:
    """Number of eigenvalues below ``lam`` of the FD matrix of h(k) on [0, k + margin]."""
    if not math.isfinite(lam):
        raise ValueError("lambda must be finite")
    h = config.step if step is None else step
    _check_grid(h, lam)
    _, x_right = _right_end(k, config)
    diag = _half_line_diag(k, h, x_right)
    return int(_kernels.sturm_count(diag, 1.0 / h**4, float(lam)))


def _bisect_index(diag: np.ndarray, h: float, index: int) -> float:
    """Eigenvalue number ``index`` (0-based) of the FD matrix by Sturm bisection."""
    off_sq = 1.0 / h**4
    lo = float(np.min(diag)) - 2.0 / h**2
    hi = lo + 1.0
    while _kernels.sturm_count(diag, off_sq, hi) <= index:
        hi = lo + 2.0 * (hi - lo)
        if hi - lo > 1e8:
            raise BracketError("could not bracket finite-difference eigenvalue")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _kernels.sturm_count(diag, off_sq, mid) > index:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-15 * max(1.0, abs(hi)):
            break
    return 0.5 * (lo + hi)


def _richardson(diag_of, index: int, config: SolverConfig) -> tuple[float, float]:
    values = []
    for h in (4.0 * config.step, 2.0 * config.step):
        lam = _bisect_index(diag_of(h), h, index)
        _check_grid(h, lam)
        values.append(lam)
    coarse, fine = values
    extrapolated = (4.0 * fine - coarse) / 3.0
    return extrapolated, abs(extrapolated - fine)


def full_line_eigenvalue(m: int, k: float, config: SolverConfig = SolverConfig()) -> tuple[float, float]:
    """m-th eigenvalue (m >= 1) of -d^2/dx^2 + (|x| - k)^2 on the line, with an error estimate."""
    if isinstance(m, bool) or int(m) != m or m < 1:
        raise ValueError(f"eigenvalue index must be an integer >= 1, got {m!r}")
    if not math.isfinite(k):
        raise ValueError("k must be finite")
    _, x_right = _right_end(k, config)
    lam, err = _richardson(lambda h: _full_line_diag(k, h, x_right), int(m) - 1, config)
    _check_truncation(k, lam, x_right, config)
    return lam, err


def fd_oracle(p: FiberPoint, config: SolverConfig = SolverConfig()) -> BandPoint:
    """Independent eigenvalue estimate from Richardson-extrapolated finite differences.

    Grids use 4x and 2x the configured step; ``err_est`` is the size of the
    Richardson correction, which bounds the fine-grid error.
    """
    _, x_right = _right_end(p.k, config)
    lam, err = _richardson(lambda h: _half_line_diag(p.k, h, x_right), p.n - 1, config)
    _check_truncation(p.k, lam, x_right, config)
    return BandPoint(p.n, p.k, lam, math.nan, err, "fd_oracle", lam - p.landau)


def iwatsuka_crosscheck(p: FiberPoint, config: SolverConfig = SolverConfig()) -> BandPoint:
    """lambda_n(k) as the 2n-th eigenvalue of -d^2/dx^2 + (|x| - k)^2 on the full line."""
    lam, err = full_line_eigenvalue(2 * p.n, p.k, config)
    return BandPoint(p.n, p.k, lam, math.nan, err, "iwatsuka", lam - p.landau)


# -- shooting ------------------------------------------------------------------


def _boundary_value(n: int, k: float, excess: float, config: SolverConfig, step: float | None = None) -> float:
    h = config.step if step is None else step
    cells = math.ceil((max(k, 0.0) + config.domain_margin) / h)
    value, _, ok = _kernels.shoot_inward(k, 2.0 * n - 1.0, excess, h, cells, config.renorm_threshold)
    if not ok:
        raise SolverError(f"shooting failed (non-finite state or no decay at x_R) for k={k}")
    return value


def shoot(lam: float, p: FiberPoint, config: SolverConfig = SolverConfig()) -> float:
    """Scale-normalized boundary value F(lam) = v(0) / max|v| of the inward-decaying solution.

    F changes sign at every eigenvalue of h(k).
    """
    if not math.isfinite(lam):
        raise ValueError("lambda must be finite")
    cells, x_right = _right_end(p.k, config)
    _check_truncation(p.k, lam, x_right, config)
    return _boundary_value(p.n, p.k, lam - p.landau, config)


def _fd_guess(n: int, k: float, config: SolverConfig) -> float:
    h = 4.0 * config.step
    _, x_right = _right_end(k, config)
    return _bisect_index(_half_line_diag(k, h, x_right), h, n - 1)


def _bracket(n: int, k: float, config: SolverConfig, f) -> tuple[float, float]:
    energy = 2.0 * n - 1.0
    if k >= ASYMPTOTIC_SEED_K:
        lead = _lead_excess(n, k)
        if lead < EXCESS_FLOOR:
            raise PrecisionFloorError(
                f"lambda_{n}({k}) - E_{n} ~ {lead:.2e} is below the double-precision floor"
            )
        if lead < 0.1:
            a, b = 0.25 * lead, 4.0 * lead
            if f(a) * f(b) < 0:
                return a, b
    centre = _fd_guess(n, k, config) - energy
    width = 1e-4 * max(1.0, abs(centre + energy))
    while width <= 0.5:
        a, b = centre - width, centre + width
        if f(a) * f(b) < 0:
            return a, b
        width *= 4.0
    raise BracketError(f"no sign change of the shooting function near lambda_{n}({k})")


def _root(n: int, k: float, config: SolverConfig, step: float | None = None, bracket=None) -> float:
    def f(d):
        return _boundary_value(n, k, d, config, step)

    a, b = _bracket(n, k, config, f) if bracket is None else bracket
    if f(a) * f(b) >= 0:
        raise BracketError(f"bracket [{a}, {b}] does not isolate lambda_{n}({k})")
    scale = min(1.0, max(abs(a), abs(b)))
    return brentq(f, a, b, xtol=config.lambda_tol * scale, rtol=_RTOL, maxiter=200)


@lru_cache(maxsize=8192)
def _excess(n: int, k: float, config: SolverConfig) -> float:
    """Excess lambda_n(k) - E_n by shooting."""
    _, x_right = _right_end(k, config)
    excess = _root(n, k, config)
    _check_truncation(k, 2 * n - 1 + excess, x_right, config)
    if excess <= 0:
        raise PrecisionFloorError(f"lambda_{n}({k}) not resolved above E_{n}")
    return excess


@lru_cache(maxsize=4096)
def _solve(n: int, k: float, config: SolverConfig) -> tuple[float, float]:
    """Excess with an error estimate from a re-solve at twice the step."""
    excess = _excess(n, k, config)
    width = max(1e3 * config.lambda_tol * min(1.0, abs(excess)), 1e-3 * abs(excess))
    try:
        coarse = _root(n, k, config, 2.0 * config.step, (excess - width, excess + width))
    except BracketError:
        coarse = _root(n, k, config, 2.0 * config.step)
    # Richardson assumes the h^4 regime; rounding in the RK4 sweep puts a floor
    # of a few ulp of lambda under that, which dominates once the excess is tiny.
    rounding = 16.0 * np.finfo(float).eps * (2.0 * n - 1.0 + abs(excess))
    return excess, abs(excess - coarse) / 15.0 + config.lambda_tol * min(1.0, abs(excess)) + rounding


# -- eigenfunctions --------------------------------------------------------------


def _matching_index(k: float, lam: float, cells: int, h: float) -> int:
    x_m = k + math.sqrt(max(lam, 0.0))
    x_m = min(max(x_m, min(1.0, 0.5 * cells * h)), cells * h - 4.0)
    return int(round(x_m / h))


@lru_cache(maxsize=4096)
def _eigenfunction(n: int, k: float, excess: float, config: SolverConfig) -> EigenfunctionSample:
    # Outward Dirichlet solution from x = 0 matched to the inward decaying
    # solution at the outer turning point; both pieces are integrated in
    # their stable direction, so u'(0) keeps full relative accuracy.
    h = config.step
    cells, x_right = _right_end(k, config)
    energy = 2.0 * n - 1.0
    lam = energy + excess
    grid = np.arange(cells + 1) * h
    im = _matching_index(k, lam, cells, h)
    thr = config.renorm_threshold
    v_out, w_out = _kernels.integrate_path(grid[: im + 1], k, energy, excess, 0.0, 1.0, h, thr)
    q_right = ((x_right - k) ** 2 - energy) - excess
    if q_right <= 0:
        raise DomainError(f"no decay at x_R = {x_right} for k={k}")
    v_in, w_in = _kernels.integrate_path(grid[im:][::-1], k, energy, excess, 1.0, -math.sqrt(q_right), h, thr)
    if not (np.all(np.isfinite(v_out)) and np.all(np.isfinite(v_in))):
        raise SolverError(f"eigenfunction integration overflow for k={k}")
    scale = v_out[-1] / v_in[-1]
    values = np.concatenate((v_out[:-1], scale * v_in[::-1]))
    slopes = np.concatenate((w_out[:-1], scale * w_in[::-1]))
    defect = abs(w_out[-1] - scale * w_in[-1]) / max(abs(w_out[-1]), abs(v_out[-1]))
    norm = math.sqrt(trapezoid(values * values, dx=h))
    values /= norm
    slopes /= norm
    values[0] = 0.0
    norm_check = float(simpson(values * values, dx=h))
    tail = values[-1] ** 2 / (2.0 * math.sqrt(q_right))
    if tail > 1e-12:
        raise DomainError(f"tail mass {tail:.2e} beyond x_R = {x_right:.3f}")
    signs = np.sign(values[1:])
    signs = signs[signs != 0]
    zeros = int(np.count_nonzero(signs[1:] != signs[:-1]))
    if zeros != n - 1:
        raise SolverError(f"eigenfunction has {zeros} interior zeros, expected {n - 1}")
    for arr in (grid, values, slopes):
        arr.flags.writeable = False
    return EigenfunctionSample(n, k, excess, grid, values, slopes, float(slopes[0]), norm_check, defect)


def _energy_excess(n: int, k: float, config: SolverConfig) -> float:
    """Excess used for eigenfunctions: the shooting root, or the asymptotic value past the floor."""
    if k >= ASYMPTOTIC_SEED_K:
        lead = _lead_excess(n, k)
        if lead < EXCESS_FLOOR:
            return lead
    return _excess(n, k, config)


def eigenfunction(p: FiberPoint, config: SolverConfig = SolverConfig()) -> EigenfunctionSample:
    """Normalized real eigenfunction u_n(., k) on [0, x_R] with u_n'(0, k) > 0.

    Beyond the precision floor the energy is taken from the leading asymptotics;
    the eigenfunction (and its boundary slope) stays accurate because both
    pieces are integrated in their stable directions.
    """
    return _eigenfunction(p.n, p.k, _energy_excess(p.n, p.k, config), config)


def hadamard_derivative(p: FiberPoint, config: SolverConfig = SolverConfig()) -> float:
    """lambda_n'(k) = -u_n'(0, k)^2."""
    return -eigenfunction(p, config).boundary_slope ** 2


def eigenvalue(p: FiberPoint, config: SolverConfig = SolverConfig(), *, cross_check: bool = True) -> BandPoint:
    """lambda_n(k) by shooting, with lambda_n'(k) from the Hadamard formula.

    With ``cross_check`` the finite-difference oracle is run as well and a
    disagreement above 1e-6 raises :class:`SolverDisagreement`.
    """
    excess, err = _solve(p.n, p.k, config)
    lam = p.landau + excess
    if cross_check:
        oracle = fd_oracle(p, config)
        if abs(oracle.lam - lam) > DISAGREEMENT_LIMIT:
            raise SolverDisagreement(
                f"shooting {lam!r} vs finite differences {oracle.lam!r} at n={p.n}, k={p.k}"
            )
    dlam = -_eigenfunction(p.n, p.k, excess, config).boundary_slope ** 2
    return BandPoint(p.n, p.k, lam, dlam, err, "shooting", excess)


def band_sweep(
    n: int,
    k_values: Sequence[float],
    config: SolverConfig = SolverConfig(),
    *,
    cross_check: bool = True,
    workers: int | None = None,
) -> list[BandPoint | SweepFailure]:
    """Evaluate one band on a list of k; failures are returned in place, the sweep goes on."""
    ks = [float(k) for k in k_values]
    if not all(math.isfinite(k) for k in ks):
        raise ValueError("k values must be finite")

    def one(k):
        try:
            return eigenvalue(FiberPoint(n, k), config, cross_check=cross_check)
        except (SolverError, ValueError, ArithmeticError) as exc:
            return SweepFailure(n, k, reason_of(exc), str(exc))

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, ks))
    return [one(k) for k in ks]
