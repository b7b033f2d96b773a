"""Edge-corrected quasi-modes for bands at large k.

The quasi-mode glues the bulk Landau state Psi_n(x - k) to a multiple of the
growing solution Phi_n(x - k), switched off by a cutoff on [k/2, 3k/4], so the
Dirichlet condition holds exactly at x = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.integrate import simpson
from scipy.special import expit

from hallfiber import fiber_solver as fs
from hallfiber.hermite import hermite_eval, hermite_zeros, solution_pair_on

__all__ = [
    "CutoffSpec",
    "QuasiMode",
    "KatoTempleEnclosure",
    "Residual",
    "Comparison",
    "coefficients",
    "build",
    "energy_and_residual",
    "interaction_term",
    "kato_temple",
    "eigen_comparison",
]

K_MIN = 2.0


@dataclass(frozen=True)
class CutoffSpec:
    """Smooth non-increasing cutoff: 1 on [0, 1/2], 0 on [3/4, inf)."""

    transition: Literal["exp_bump", "smoothstep7"] = "exp_bump"

    def __post_init__(self):
        if self.transition not in ("exp_bump", "smoothstep7"):
            raise ValueError(f"unknown cutoff transition {self.transition!r}")

    def _ramp(self, t):
        # Returns (S, S', S'') in s = 4(t - 1/2) on the open ramp, with chi = 1 - S.
        t = np.asarray(t, dtype=float)
        s = 4.0 * (t - 0.5)
        inside = (s > 0) & (s < 1)
        S = np.where(s >= 1, 1.0, 0.0)
        dS = np.zeros_like(s)
        d2S = np.zeros_like(s)
        si = s[inside]
        if self.transition == "smoothstep7":
            S[inside] = si**4 * (35 - 84 * si + 70 * si**2 - 20 * si**3)
            dS[inside] = 140 * si**3 * (1 - si) ** 3
            d2S[inside] = 420 * si**2 * (1 - si) ** 2 * (1 - 2 * si)
        else:
            u = 1.0 / (1.0 - si) - 1.0 / si
            du = 1.0 / si**2 + 1.0 / (1.0 - si) ** 2
            d2u = 2.0 / (1.0 - si) ** 3 - 2.0 / si**3
            p = expit(u)
            q = expit(-u)
            S[inside] = p
            dS[inside] = p * q * du
            d2S[inside] = p * q * ((q - p) * du * du + d2u)
        return S, dS, d2S

    def chi(self, t):
        return 1.0 - self._ramp(t)[0]

    def dchi(self, t):
        return -4.0 * self._ramp(t)[1]

    def d2chi(self, t):
        return -16.0 * self._ramp(t)[2]


@dataclass(frozen=True)
class QuasiMode:
    n: int
    k: float
    alpha: float
    beta: float
    cutoff: CutoffSpec
    grid: np.ndarray
    values: np.ndarray
    slopes: np.ndarray
    residual: np.ndarray  # (h(k) - E_n) f on the grid
    boundary_slope: float
    phi_origin: float  # Phi_n(-k)
    norm_check: float
    wronskian_error: float


@dataclass(frozen=True)
class Residual:
    eta: float
    eta_excess: float  # eta - E_n, from <r, f>
    eta_form: float  # eta from the quadratic form, independent check
    residual_norm: float
    epsilon: float
    support_ok: bool


@dataclass(frozen=True)
class KatoTempleEnclosure:
    eta: float
    epsilon: float
    gap_lo: float
    gap_hi: float
    lower: float
    upper: float
    valid: bool

    def contains(self, lam: float) -> bool:
        return bool(self.valid and self.lower <= lam <= self.upper)


@dataclass(frozen=True)
class Comparison:
    sup_diff: float
    sup_slope_diff: float
    sign: int
    sign_aligned: bool


def _check_k(n: int, k: float):
    if not math.isfinite(k):
        raise ValueError("k must be finite")
    zeros = hermite_zeros(n)
    k_min = max(K_MIN, (abs(zeros[0]) + 0.5) if zeros.size else 0.0)
    if k < k_min:
        raise ValueError(f"quasi-modes need k >= {k_min:.3f} for n={n}, got {k}")


def _assemble(n: int, k: float, cutoff: CutoffSpec, config: fs.SolverConfig):
    p = fs.FiberPoint(n, k)
    _check_k(p.n, k)
    cells, _ = fs._right_end(k, config)
    h = config.step
    grid = np.arange(cells + 1) * h
    psi, dpsi = hermite_eval(n, grid - k)
    live = grid < 0.75 * k  # chi vanishes from 3k/4 on
    pair = solution_pair_on(n, grid[live] - k, h)
    phi = np.zeros_like(grid)
    dphi = np.zeros_like(grid)
    phi[live] = pair.phi
    dphi[live] = pair.dphi
    t = grid / k
    chi, dchi, d2chi = cutoff.chi(t), cutoff.dchi(t) / k, cutoff.d2chi(t) / k**2
    b = -psi[0] / phi[0]  # beta / alpha
    g = psi + b * chi * phi
    dg = dpsi + b * (dchi * phi + chi * dphi)
    g[0] = 0.0
    rg = -b * (d2chi * phi + 2.0 * dchi * dphi)
    alpha = 1.0 / math.sqrt(simpson(g * g, dx=h))
    return grid, alpha, b, g, dg, rg, phi[0], dphi[0], pair.wronskian_error


def coefficients(n: int, k: float, config: fs.SolverConfig = fs.SolverConfig()) -> tuple[float, float]:
    """(alpha, beta): normalization and Dirichlet-matching weights of the quasi-mode."""
    _, alpha, b, *_ = _assemble(n, k, CutoffSpec(), config)
    return alpha, alpha * b


def build(n: int, k: float, cutoff: CutoffSpec = CutoffSpec(), config: fs.SolverConfig = fs.SolverConfig()) -> QuasiMode:
    """Sample the quasi-mode and its residual on the solver grid [0, k + margin]."""
    grid, alpha, b, g, dg, rg, phi0, dphi0, wr = _assemble(n, k, cutoff, config)
    psi0, dpsi0 = hermite_eval(n, -k)
    values, slopes, residual = alpha * g, alpha * dg, alpha * rg
    for arr in (grid, values, slopes, residual):
        arr.flags.writeable = False
    return QuasiMode(
        n=n,
        k=float(k),
        alpha=alpha,
        beta=alpha * b,
        cutoff=cutoff,
        grid=grid,
        values=values,
        slopes=slopes,
        residual=residual,
        boundary_slope=alpha * dpsi0 + alpha * b * dphi0,
        phi_origin=phi0,
        norm_check=float(simpson(values * values, x=grid)),
        wronskian_error=wr,
    )


def energy_and_residual(qm: QuasiMode) -> Residual:
    """Energy eta = <h f, f>, residual norms and the support check of r.

    eta - E_n is evaluated as <r, f> so it keeps full relative accuracy when
    it is far below machine epsilon relative to E_n.
    """
    x, f, r = qm.grid, qm.values, qm.residual
    energy = 2.0 * qm.n - 1.0
    norm2 = simpson(f * f, x=x)
    excess = simpson(r * f, x=x) / norm2
    form = simpson(qm.slopes**2 + (x - qm.k) ** 2 * f * f, x=x) / norm2
    defect = r - excess * f
    outside = (x < 0.5 * qm.k) | (x > 0.75 * qm.k)
    return Residual(
        eta=float(energy + excess),
        eta_excess=float(excess),
        eta_form=float(form),
        residual_norm=math.sqrt(simpson(r * r, x=x)),
        epsilon=math.sqrt(max(simpson(defect * defect, x=x), 0.0) / norm2),
        support_ok=bool(np.all(r[outside] == 0.0)),
    )


def interaction_term(qm: QuasiMode) -> float:
    """-beta f'(0) Phi_n(-k): the boundary contribution that dominates eta - E_n."""
    return -qm.beta * qm.boundary_slope * qm.phi_origin


def kato_temple(eta: float, epsilon: float, gap_lo: float, gap_hi: float) -> KatoTempleEnclosure:
    """Eigenvalue enclosure from a quasi-mode with energy eta and defect epsilon.

    Valid when (gap_lo, gap_hi) contains no spectrum other than the target
    eigenvalue and epsilon^2 < (gap_hi - eta)(eta - gap_lo).
    """
    eta, epsilon, gap_lo, gap_hi = (float(v) for v in (eta, epsilon, gap_lo, gap_hi))
    if not all(math.isfinite(v) for v in (eta, epsilon, gap_lo, gap_hi)):
        raise ValueError("enclosure inputs must be finite")
    if gap_lo >= gap_hi:
        raise ValueError(f"empty gap ({gap_lo}, {gap_hi})")
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    e2 = epsilon * epsilon
    if not (gap_lo < eta < gap_hi and e2 < (gap_hi - eta) * (eta - gap_lo)):
        return KatoTempleEnclosure(eta, epsilon, gap_lo, gap_hi, math.nan, math.nan, False)
    lower = eta - e2 / (gap_hi - eta)
    upper = eta + e2 / (eta - gap_lo)
    return KatoTempleEnclosure(eta, epsilon, gap_lo, gap_hi, lower, upper, True)


def eigen_comparison(
    n: int,
    k: float,
    cutoff: CutoffSpec = CutoffSpec(),
    config: fs.SolverConfig = fs.SolverConfig(),
) -> Comparison:
    """Sup-norm distance between the quasi-mode and the true eigenfunction, gauge-fixed."""
    qm = build(n, k, cutoff, config)
    ef = fs.eigenfunction(fs.FiberPoint(n, k), config)
    best = None
    for sign in (1, -1):
        d = float(np.max(np.abs(qm.values - sign * ef.values)))
        if best is None or d < best[0]:
            best = (d, sign)
    d, sign = best
    ds = float(np.max(np.abs(qm.slopes - sign * ef.slopes)))
    aligned = bool(np.sign(qm.boundary_slope) == np.sign(sign * ef.boundary_slope))
    return Comparison(d, ds, sign, aligned)
