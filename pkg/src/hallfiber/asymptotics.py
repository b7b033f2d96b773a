"""Large-k expansions of the band functions and their comparison with the solver."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from hallfiber import fiber_solver as fs
from hallfiber.errors import PrecisionFloorError
from hallfiber.hermite import landau_gamma

__all__ = [
    "AsymptoticPoint",
    "ThresholdMomentum",
    "VelocityEnvelope",
    "ConvergenceRow",
    "ConvergenceReport",
    "leading_terms",
    "k_expansion",
    "k_delta",
    "invert_band",
    "envelope",
    "velocity_envelope",
    "calibrate_mu",
    "sandwich_check",
    "convergence_report",
]

DELTA_FLOOR = 1e-11
ENVELOPE_POINTS = 81
ENVELOPE_SPAN = 4.0


@dataclass(frozen=True)
class AsymptoticPoint:
    n: int
    k: float
    lambda_lead: float
    dlambda_lead: float
    excess_lead: float  # lambda_lead - E_n without the cancellation


@dataclass(frozen=True)
class ThresholdMomentum:
    n: int
    delta: float
    k_numeric: float
    k_expansion: float
    residual: float  # lambda_n(k_numeric) - E_n - delta


@dataclass(frozen=True)
class VelocityEnvelope:
    n: int
    delta: float
    k_delta: float
    bound: float
    sweep_sup: float
    argmax_k: float
    mu_used: float
    mu_min: float  # smallest mu for which bound >= sweep_sup


@dataclass(frozen=True)
class ConvergenceRow:
    k: float
    excess: float
    excess_lead: float
    rho: float
    dlam: float
    dlam_lead: float
    rho_prime: float


@dataclass(frozen=True)
class ConvergenceReport:
    n: int
    rows: tuple[ConvergenceRow, ...]
    slope: float
    slope_prime: float


def leading_terms(n: int, k: float) -> AsymptoticPoint:
    """Leading large-k behaviour of lambda_n and lambda_n'."""
    energy, g = landau_gamma(n)
    if not (math.isfinite(k) and k > 0):
        raise ValueError(f"leading terms are large-k forms; need k > 0, got {k!r}")
    log_a = (2 * n - 1) * math.log(2.0) + 2 * math.log(g) + (2 * n - 1) * math.log(k) - k * k
    excess = math.exp(log_a)
    return AsymptoticPoint(n, k, energy + excess, -2.0 * k * excess, excess)


def _check_delta(delta: float) -> float:
    if not (math.isfinite(delta) and 0 < delta < 2):
        raise ValueError(f"delta must lie in (0, 2), got {delta!r}")
    if delta < DELTA_FLOOR:
        raise PrecisionFloorError(
            f"delta = {delta:.1e} is below the resolvable floor {DELTA_FLOOR:.0e}"
        )
    return float(delta)


def k_expansion(n: int, delta: float) -> float:
    """Two-term small-delta expansion of the threshold momentum k_n(delta)."""
    if not (math.isfinite(delta) and 0 < delta < 1):
        raise ValueError(f"expansion needs delta in (0, 1), got {delta!r}")
    big_l = abs(math.log(delta))
    return math.sqrt(big_l) + 0.25 * (2 * n - 1) * math.log(big_l) / math.sqrt(big_l)


def _log_gap(n: int, k: float, delta: float, config: fs.SolverConfig) -> float:
    return math.log(fs._excess(n, k, config)) - math.log(delta)


def _usable_hi(n: int, hi: float, lo: float) -> float:
    # Pull the upper end back until the band gap is resolvable there.
    while hi - lo > 1e-3 and leading_terms(n, hi).excess_lead < 10 * fs.EXCESS_FLOOR:
        hi -= 0.1
    return hi


def k_delta(n: int, delta: float, config: fs.SolverConfig = fs.SolverConfig()) -> ThresholdMomentum:
    """The k at which band n sits delta above its Landau level.

    Root-finding is done on log(lambda_n(k) - E_n) - log(delta), which is well
    scaled across many decades of delta.
    """
    delta = _check_delta(delta)
    k_exp = k_expansion(n, delta) if delta < 1 else math.nan
    if delta < 1 / math.e and math.isfinite(k_exp):
        lo, hi = max(0.0, k_exp - 0.5), k_exp + 0.5
    else:
        lo, hi = 0.0, 2.0
    g = lambda k: _log_gap(n, k, delta, config)
    hi = _usable_hi(n, hi, lo)
    while g(lo) <= 0:
        if lo == 0.0:
            raise ValueError(f"delta = {delta} exceeds lambda_{n}(0) - E_{n}")
        lo = max(0.0, lo - 0.5)
    while g(hi) >= 0:
        hi += 0.5
        if leading_terms(n, hi).excess_lead < 10 * fs.EXCESS_FLOOR:
            raise PrecisionFloorError(f"k_{n}({delta:.1e}) lies beyond the resolvable range")
    k_num = brentq(g, lo, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps)
    residual = fs._excess(n, k_num, config) - delta
    return ThresholdMomentum(n, delta, k_num, k_exp, residual)


def invert_band(n: int, energy: float, config: fs.SolverConfig = fs.SolverConfig()) -> float:
    """The unique k with lambda_n(k) = energy, for any energy above E_n."""
    e_n = 2.0 * n - 1.0
    if not (math.isfinite(energy) and energy > e_n):
        raise ValueError(f"energy must exceed E_{n} = {e_n}, got {energy!r}")
    if energy - e_n < 2.0:
        return k_delta(n, energy - e_n, config).k_numeric
    f = lambda k: fs._excess(n, k, config) - (energy - e_n)
    if f(0.0) == 0.0:
        return 0.0
    if f(0.0) > 0:
        hi = 2.0
        while f(hi) > 0:
            hi += 2.0
        return brentq(f, 0.0, hi, xtol=1e-13)
    # lambda_n(k) >= k^2 on k <= 0 bounds the root from below
    return brentq(f, -math.sqrt(energy) - 1e-9, 0.0, xtol=1e-13)


def envelope(delta: float, mu: float, sign: float = 1.0) -> float:
    """2 delta sqrt(L) + sign * mu * delta log(L) / sqrt(L), L = |log delta|."""
    big_l = abs(math.log(delta))
    return 2 * delta * math.sqrt(big_l) + sign * mu * delta * math.log(big_l) / math.sqrt(big_l)


def velocity_envelope(
    n: int,
    delta: float,
    mu: float | None = None,
    config: fs.SolverConfig = fs.SolverConfig(),
) -> VelocityEnvelope:
    """Compare sup |lambda_n'| on [k_n(delta), k_n(delta) + 4] with the analytic envelope."""
    mu_used = float(2 * n - 1) if mu is None else float(mu)
    if mu_used < 0:
        raise ValueError("mu must be nonnegative")
    kd = k_delta(n, delta, config).k_numeric
    ks = np.linspace(kd, kd + ENVELOPE_SPAN, ENVELOPE_POINTS)
    speeds = np.array([-fs.hadamard_derivative(fs.FiberPoint(n, float(k)), config) for k in ks])
    i = int(np.argmax(speeds))
    sup = float(speeds[i])
    big_l = abs(math.log(delta))
    mu_min = max(0.0, (sup - 2 * delta * math.sqrt(big_l)) * math.sqrt(big_l) / (delta * math.log(big_l)))
    return VelocityEnvelope(n, delta, kd, envelope(delta, mu_used), sup, float(ks[i]), mu_used, mu_min)


def calibrate_mu(
    n: int, deltas: Sequence[float], config: fs.SolverConfig = fs.SolverConfig()
) -> float:
    """Smallest mu for which the envelope dominates the measured velocity at every delta."""
    return max(velocity_envelope(n, d, None, config).mu_min for d in deltas)


def sandwich_check(
    n: int,
    delta_lo: float,
    delta_hi: float,
    mu: float,
    points: int = 41,
    config: fs.SolverConfig = fs.SolverConfig(),
) -> tuple[bool, float, float, float, float]:
    """Check that |lambda_n'| on [k_n(delta_hi), k_n(delta_lo)] lies between the two envelopes.

    Returns (ok, lower_envelope, min_speed, max_speed, upper_envelope).
    """
    if not delta_lo < delta_hi:
        raise ValueError("need delta_lo < delta_hi")
    k_left = k_delta(n, delta_hi, config).k_numeric
    k_right = k_delta(n, delta_lo, config).k_numeric
    ks = np.linspace(k_left, k_right, points)
    speeds = np.array([-fs.hadamard_derivative(fs.FiberPoint(n, float(k)), config) for k in ks])
    lower = envelope(delta_lo, mu, -1.0)
    upper = envelope(delta_hi, mu, 1.0)
    lo_s, hi_s = float(speeds.min()), float(speeds.max())
    return lower <= lo_s and hi_s <= upper, lower, lo_s, hi_s, upper


def convergence_report(
    n: int, k_grid: Sequence[float], config: fs.SolverConfig = fs.SolverConfig()
) -> ConvergenceReport:
    """Solver-to-formula ratios on a k-grid and the log-log decay rate of their defect."""
    ks = sorted(float(k) for k in k_grid)
    if len(ks) < 3:
        raise ValueError("convergence fit needs at least 3 points")
    if ks[0] < 2.5 or ks[-1] > 5.0:
        raise ValueError("k grid must lie in [2.5, 5]")
    rows = []
    for k in ks:
        lead = leading_terms(n, k)
        bp = fs.eigenvalue(fs.FiberPoint(n, k), config, cross_check=False)
        rows.append(
            ConvergenceRow(
                k,
                bp.excess,
                lead.excess_lead,
                bp.excess / lead.excess_lead,
                bp.dlam,
                lead.dlambda_lead,
                bp.dlam / lead.dlambda_lead,
            )
        )
    logk = np.log(ks)
    slope = float(np.polyfit(logk, np.log([abs(r.rho - 1) for r in rows]), 1)[0])
    slope_p = float(np.polyfit(logk, np.log([abs(r.rho_prime - 1) for r in rows]), 1)[0])
    return ConvergenceReport(n, tuple(rows), slope, slope_p)
