"""Single-band states built from Fourier profiles in k: currents, strip masses, synthesis."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Literal, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import cumulative_trapezoid, simpson
from scipy.interpolate import CubicHermiteSpline

from hallfiber import asymptotics as asy
from hallfiber import fiber_solver as fs
from hallfiber.hermite import hermite_eval

__all__ = [
    "BulkProfile",
    "CurrentReport",
    "StateDiagnostics",
    "make_profile",
    "refine",
    "current",
    "edge_current_bounds",
    "localization_mass",
    "strip_shape",
    "synthesize_state",
    "diagnose",
    "rescale_field",
]

Family = Literal["indicator", "gaussian", "power"]

# Beyond this k the band is flat to far below double precision; nodes there
# use the bulk Landau state Psi_n(x - k) and the leading-order velocity.
FAR_K = 10.0
GAUSS_CUT = 8.58  # exp(-x^2/2) < 1e-16
PANEL_WIDTH = 0.25
BASE_ORDER = 8
MAX_ORDER = 128
NORM_TOL = 1e-10


@dataclass(frozen=True)
class BulkProfile:
    n: int
    delta: float
    family: Family
    params: tuple[float, ...]
    support_left: float  # k_n(delta)
    support: tuple[float, float]
    panels: tuple[tuple[float, float], ...]
    order: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)  # |phi_n(k)|, normalized


@dataclass(frozen=True)
class CurrentReport:
    current: float
    sandwich: tuple[float, float]
    refinement_change: float


@dataclass(frozen=True)
class StateDiagnostics:
    n: int
    delta: float
    norm: float
    current: float
    current_bound: float
    mu: float
    localization: dict  # epsilon -> (mass, bound, strip half-width)
    field_strength: float = 1.0
    energy_window: tuple[float, float] = (math.nan, math.nan)


def _amplitude(family: str, params: tuple[float, ...], kd: float, k: np.ndarray) -> np.ndarray:
    if family == "indicator":
        return np.ones_like(k)
    if family == "gaussian":
        c, w = params
        return np.exp(-0.5 * ((k - c) / w) ** 2)
    (p,) = params
    return (1.0 + k - kd) ** (-p)


def _panels(family: str, params: tuple[float, ...], kd: float) -> tuple[tuple[float, float], tuple]:
    if family == "indicator":
        a, b = params
        lo, hi = a, b
    elif family == "gaussian":
        c, w = params
        lo, hi = c - GAUSS_CUT * w, c + GAUSS_CUT * w
    else:
        (p,) = params
        # (1 + t)^(-2p) drops below 1e-16 of its peak at t = 10^(8/p) - 1
        t_max = 10.0 ** (8.0 / p) - 1.0
        edges = [0.0]
        width = PANEL_WIDTH
        while edges[-1] < t_max:
            edges.append(min(edges[-1] + width, t_max))
            if edges[-1] >= 2.0:
                width *= 2.0
        return (kd, kd + t_max), tuple((kd + a, kd + b) for a, b in zip(edges[:-1], edges[1:]))
    count = max(1, math.ceil((hi - lo) / PANEL_WIDTH))
    edges = np.linspace(lo, hi, count + 1)
    return (lo, hi), tuple((float(a), float(b)) for a, b in zip(edges[:-1], edges[1:]))


def _rule(panels, order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = leggauss(order)
    nodes, weights = [], []
    for a, b in panels:
        half = 0.5 * (b - a)
        nodes.append(a + half * (x + 1.0))
        weights.append(half * w)
    return np.concatenate(nodes), np.concatenate(weights)


def _validate(family: str, params: Sequence[float], kd: float) -> tuple[float, ...]:
    params = tuple(float(v) for v in params)
    if not all(math.isfinite(v) for v in params):
        raise ValueError("profile parameters must be finite")
    if family == "indicator":
        if len(params) != 2 or not params[0] < params[1]:
            raise ValueError("indicator needs (a, b) with a < b")
        if params[0] < kd - 1e-12:
            raise ValueError(f"support [{params[0]}, ...) leaks left of k_n(delta) = {kd:.6f}")
    elif family == "gaussian":
        if len(params) != 2 or params[1] <= 0:
            raise ValueError("gaussian needs (center, width) with width > 0")
        if params[0] - GAUSS_CUT * params[1] < kd:
            raise ValueError(
                f"gaussian support reaches {params[0] - GAUSS_CUT * params[1]:.6f}, "
                f"left of k_n(delta) = {kd:.6f}"
            )
    elif family == "power":
        if len(params) != 1:
            raise ValueError("power needs one exponent p")
        if params[0] <= 0.5:
            raise ValueError(f"power profile needs p > 1/2 for square integrability, got {params[0]}")
    else:
        raise ValueError(f"unknown profile family {family!r}")
    return params


def _assemble(n, delta, family, params, kd, order) -> BulkProfile:
    support, panels = _panels(family, params, kd)
    nodes, weights = _rule(panels, order)
    amp = _amplitude(family, params, kd, nodes)
    norm2 = float(np.sum(weights * amp * amp))
    while True:
        # keep the current order once doubling no longer moves the norm
        fine = _rule(panels, 2 * order)
        fine_norm2 = float(np.sum(fine[1] * _amplitude(family, params, kd, fine[0]) ** 2))
        if abs(fine_norm2 - norm2) <= NORM_TOL * norm2:
            break
        if order >= MAX_ORDER:
            raise ArithmeticError("profile quadrature did not converge")
        order *= 2
        nodes, weights = fine
        amp = _amplitude(family, params, kd, nodes)
        norm2 = fine_norm2
    values = amp / math.sqrt(norm2)
    for arr in (nodes, weights, values):
        arr.flags.writeable = False
    return BulkProfile(n, delta, family, params, kd, support, panels, order, nodes, weights, values)


def make_profile(
    n: int,
    delta: float,
    family: Family,
    params: Sequence[float],
    config: fs.SolverConfig = fs.SolverConfig(),
) -> BulkProfile:
    """Normalized profile supported right of k_n(delta), with Gauss-Legendre panels in k.

    ``indicator`` and ``gaussian`` parameters are absolute k values; ``power``
    is anchored at k_n(delta): |phi(k)| proportional to (1 + k - k_n(delta))^(-p).
    """
    kd = asy.k_delta(n, delta, config).k_numeric
    params = _validate(family, params, kd)
    return _assemble(n, delta, family, params, kd, BASE_ORDER)


def refine(profile: BulkProfile) -> BulkProfile:
    """Same profile with twice the Gauss-Legendre order on every panel."""
    p = profile
    return _assemble(p.n, p.delta, p.family, p.params, p.support_left, 2 * p.order)


def _velocity(n: int, k: float, config: fs.SolverConfig) -> float:
    if k > FAR_K:
        return asy.leading_terms(n, k).dlambda_lead
    return fs.hadamard_derivative(fs.FiberPoint(n, float(k)), config)


def current(profile: BulkProfile, config: fs.SolverConfig = fs.SolverConfig(), *, check: bool = True) -> CurrentReport:
    """Current sum w |phi|^2 lambda_n' and the range of lambda_n' over the nodes.

    With ``check`` the sum is recomputed at doubled order and the change reported.
    """

    def total(p):
        v = np.array([_velocity(p.n, k, config) for k in p.nodes])
        return float(np.sum(p.weights * p.values**2 * v)), v

    j, v = total(profile)
    change = math.nan
    if check:
        j2, v2 = total(refine(profile))
        change = abs(j2 - j)
        v = np.concatenate((v, v2))
    return CurrentReport(j, (float(v.min()), float(v.max())), change)


def edge_current_bounds(
    n: int,
    interval: tuple[float, float],
    points: int = 101,
    config: fs.SolverConfig = fs.SolverConfig(),
) -> tuple[float, float]:
    """(min, max) of |lambda_n'| over the k-range where lambda_n takes values in the interval."""
    lo, hi = (float(v) for v in interval)
    e_n = 2.0 * n - 1.0
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ValueError(f"interval must be bounded and nonempty, got {interval!r}")
    if lo <= e_n <= hi:
        raise ValueError(f"bulk interval: E_{n} = {e_n} lies in the closure of ({lo}, {hi})")
    if hi < e_n:
        raise ValueError(f"band {n} never enters ({lo}, {hi}); it lies above E_{n} = {e_n}")
    k_left = asy.invert_band(n, hi, config)
    k_right = asy.invert_band(n, lo, config)
    speeds = np.array(
        [-_velocity(n, k, config) for k in np.linspace(k_left, k_right, points)]
    )
    return float(speeds.min()), float(speeds.max())


def strip_shape(n: int, delta: float, epsilon: float) -> float:
    """epsilon^(2n-1) delta^(epsilon^2) L^((2n-1)(1-epsilon^2)/2), L = |log delta|."""
    big_l = abs(math.log(delta))
    return epsilon ** (2 * n - 1) * delta ** (epsilon**2) * big_l ** ((2 * n - 1) * (1 - epsilon**2) / 2)


def _strip_mass(n: int, k: float, a: float, config: fs.SolverConfig) -> float:
    if math.isinf(a):
        return 1.0
    if k > FAR_K:
        x = np.linspace(0.0, a, 2001)
        return float(simpson(hermite_eval(n, x - k)[0] ** 2, x=x))
    ef = fs.eigenfunction(fs.FiberPoint(n, float(k)), config)
    if a >= ef.grid[-1]:
        return float(simpson(ef.values**2, x=ef.grid))
    cum = cumulative_trapezoid(ef.values**2, ef.grid, initial=0.0)
    return float(np.interp(a, ef.grid, cum))


def localization_mass(
    profile: BulkProfile,
    epsilon: float,
    c_n: float = 1.0,
    config: fs.SolverConfig = fs.SolverConfig(),
    *,
    half_width: float | None = None,
) -> tuple[float, float, float]:
    """Mass of the state in the strip 0 < x < (1 - epsilon) sqrt|log delta|.

    Returns (mass, c_n * shape, half_width). ``half_width`` overrides the strip
    (``math.inf`` gives the full half-line, i.e. the norm).
    """
    if not (math.isfinite(epsilon) and 0 < epsilon < 1):
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    big_l = abs(math.log(profile.delta))
    a = (1 - epsilon) * math.sqrt(big_l) if half_width is None else float(half_width)
    if a < 0:
        raise ValueError("strip half-width must be nonnegative")
    masses = np.array([_strip_mass(profile.n, k, a, config) for k in profile.nodes])
    mass = float(np.sum(profile.weights * profile.values**2 * masses))
    return mass, c_n * strip_shape(profile.n, profile.delta, epsilon), a


def synthesize_state(
    profile: BulkProfile,
    x_grid,
    y_grid,
    config: fs.SolverConfig = fs.SolverConfig(),
    *,
    shift: float = 0.0,
) -> np.ndarray:
    """Samples of the state on x_grid x y_grid (rows x, columns y).

    The k-integral is realized by the profile's quadrature; ``shift`` translates
    the state by that amount along y.
    """
    x = np.asarray(x_grid, dtype=float)
    y = np.asarray(y_grid, dtype=float)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("grids must be finite")
    if np.any(x < 0):
        raise ValueError("x grid must lie in the half-plane x >= 0")
    u = np.empty((profile.nodes.size, x.size))
    for j, k in enumerate(profile.nodes):
        if k > FAR_K:
            u[j] = hermite_eval(profile.n, x - k)[0]
            continue
        ef = fs.eigenfunction(fs.FiberPoint(profile.n, float(k)), config)
        spline = CubicHermiteSpline(ef.grid, ef.values, ef.slopes, extrapolate=False)
        u[j] = np.nan_to_num(spline(x), nan=0.0)
    coef = profile.weights * profile.values
    phase = np.exp(1j * np.outer(profile.nodes, y - shift))
    return (u.T * coef) @ phase / math.sqrt(2.0 * math.pi)


def diagnose(
    profile: BulkProfile,
    epsilons: Sequence[float] = (0.3, 0.5, 0.7),
    mu: float | None = None,
    c_n: float = 1.0,
    config: fs.SolverConfig = fs.SolverConfig(),
) -> StateDiagnostics:
    """Norm, current with its envelope bound, and strip masses of one profile."""
    n = profile.n
    mu = float(2 * n - 1) if mu is None else float(mu)
    cur = current(profile, config, check=False)
    loc = {float(e): localization_mass(profile, e, c_n, config) for e in epsilons}
    norm = float(np.sum(profile.weights * profile.values**2))
    e_n = 2.0 * n - 1.0
    return StateDiagnostics(
        n=n,
        delta=profile.delta,
        norm=norm,
        current=cur.current,
        current_bound=asy.envelope(profile.delta, mu),
        mu=mu,
        localization=loc,
        field_strength=1.0,
        energy_window=(e_n, e_n + profile.delta),
    )


def rescale_field(diag: StateDiagnostics, b: float) -> StateDiagnostics:
    """Diagnostics at field strength b times the current one.

    Energies scale by b, velocities and currents by sqrt(b), lengths by
    1/sqrt(b); masses are invariant under the unitary dilation.
    """
    if not (math.isfinite(b) and b > 0):
        raise ValueError(f"field strength must be positive, got {b!r}")
    root = math.sqrt(b)
    loc = {e: (m, bound, w / root) for e, (m, bound, w) in diag.localization.items()}
    lo, hi = diag.energy_window
    return replace(
        diag,
        current=diag.current * root,
        current_bound=diag.current_bound * root,
        localization=loc,
        field_strength=diag.field_strength * b,
        energy_window=(lo * b, hi * b),
    )
