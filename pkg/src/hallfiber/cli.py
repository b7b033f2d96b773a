"""Command-line front end.

Every command produces one table, written as CSV (default) or JSON to stdout
or to ``--out``. Arguments may be given as flags or as ``key=value`` tokens,
e.g. ``hallfiber bands n=1 k=0:4:0.5``.

Exit status: 0 success, 2 invalid input or empty table, 3 numerical failure
(bracketing, precision floor, truncated domain), 4 solver disagreement.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from hallfiber import asymptotics as asy
from hallfiber import fiber_solver as fs
from hallfiber import quasimode as qm
from hallfiber import states as st
from hallfiber.errors import SolverDisagreement, SolverError, reason_of

SCHEMA_VERSION = 1
MAX_ROWS = 100_000

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_DISAGREE = 0, 2, 3, 4

COLUMNS: dict[str, list[tuple[str, str]]] = {
    "bands": [
        ("n", "band index"),
        ("k", "quasi-momentum"),
        ("lambda", "band energy lambda_n(k)"),
        ("dlambda", "lambda_n'(k) from the Hadamard formula"),
        ("err_est", "error estimate of lambda"),
        ("method", "solver that produced lambda"),
    ],
    "derivative": [
        ("n", "band index"),
        ("k", "quasi-momentum"),
        ("dlambda", "Hadamard derivative -u'(0)^2"),
        ("fd_dlambda", "central difference of lambda, h = 1e-4"),
        ("rel_dev", "|dlambda - fd_dlambda| / |dlambda|"),
    ],
    "kdelta": [
        ("n", "band index"),
        ("delta", "height above the Landau level"),
        ("k_numeric", "root of lambda_n(k) = E_n + delta"),
        ("k_expansion", "two-term small-delta expansion"),
        ("abs_diff", "|k_numeric - k_expansion|"),
        ("residual", "lambda_n(k_numeric) - E_n - delta"),
    ],
    "quasimode": [
        ("n", "band index"),
        ("k", "quasi-momentum"),
        ("alpha", "quasi-mode normalization weight"),
        ("beta", "weight of the growing solution"),
        ("eta_excess", "quasi-mode energy minus E_n"),
        ("epsilon", "defect ||(h - eta) f||"),
        ("lambda_excess", "solver lambda_n(k) minus E_n"),
        ("lower", "Kato-Temple lower bound, gap (E_n - 1, E_n + 1)"),
        ("upper", "Kato-Temple upper bound"),
        ("valid", "enclosure precondition holds"),
        ("contains", "solver eigenvalue inside the enclosure"),
        ("sup_diff", "sup |f - u| on the grid, gauge-fixed"),
        ("sup_slope_diff", "sup |f' - u'| on the grid"),
    ],
    "verify": [
        ("check", "check family"),
        ("n", "band index"),
        ("k", "quasi-momentum (nan when not applicable)"),
        ("value", "computed quantity"),
        ("reference", "value it is compared to"),
        ("deviation", "|value - reference| (relative for ratios and derivatives)"),
        ("passed", "deviation within the check tolerance"),
    ],
    "bulk": [
        ("n", "band index"),
        ("delta", "energy window height"),
        ("k_delta", "left edge of the momentum support"),
        ("family", "profile family"),
        ("norm", "quadrature norm of the profile"),
        ("current", "J = sum w |phi|^2 lambda'"),
        ("sandwich_lo", "min of lambda' over the nodes"),
        ("sandwich_hi", "max of lambda' over the nodes"),
        ("current_bound", "2 d sqrt(L) + mu d log(L)/sqrt(L), L = |log d|"),
        ("mu", "constant used in the bound"),
        ("field_strength", "magnetic field b"),
    ],
    "edge": [
        ("n", "band index"),
        ("e_lo", "interval lower end"),
        ("e_hi", "interval upper end"),
        ("k_lo", "momentum where lambda_n = e_hi"),
        ("k_hi", "momentum where lambda_n = e_lo"),
        ("c_minus", "min |lambda_n'| over the preimage"),
        ("c_plus", "max |lambda_n'| over the preimage"),
        ("field_strength", "magnetic field b"),
    ],
    "localize": [
        ("n", "band index"),
        ("delta", "energy window height"),
        ("epsilon", "strip parameter"),
        ("half_width", "strip width (1 - epsilon) sqrt|log delta|"),
        ("mass", "probability in the strip"),
        ("shape", "eps^(2n-1) delta^(eps^2) L^((2n-1)(1-eps^2)/2)"),
        ("ratio", "mass / shape"),
        ("field_strength", "magnetic field b"),
    ],
    "synthesize": [
        ("x", "distance from the edge"),
        ("y", "coordinate along the edge"),
        ("re", "real part of the state"),
        ("im", "imaginary part of the state"),
        ("abs2", "probability density"),
    ],
}

KEY_ALIASES = {
    "n": "n",
    "k": "k-range",
    "k_range": "k-range",
    "k-range": "k-range",
    "delta": "delta-list",
    "deltas": "delta-list",
    "delta-list": "delta-list",
    "delta_list": "delta-list",
    "interval": "interval",
    "epsilon": "epsilon",
    "eps": "epsilon",
    "profile": "profile",
    "b": "b",
    "step": "step",
    "margin": "margin",
    "tol": "tol",
    "format": "format",
    "out": "out",
    "x-range": "x-range",
    "x_range": "x-range",
    "y-range": "y-range",
    "y_range": "y-range",
    "workers": "workers",
}

FIELDED = {"bulk", "edge", "localize"}


@dataclass
class Table:
    command: str
    rows: list[dict]
    config: dict = field(default_factory=dict)

    @property
    def columns(self) -> list[str]:
        return [name for name, _ in COLUMNS[self.command]]


# -- parsing -------------------------------------------------------------------


def parse_range(text: str) -> list[float]:
    """``lo:hi:step`` inclusive, generated as lo + i * step; a single number is one point."""
    parts = text.split(":")
    if len(parts) == 1:
        return [_finite(parts[0], "k")]
    if len(parts) != 3:
        raise ValueError(f"range must be lo:hi:step, got {text!r}")
    lo, hi, step = (_finite(p, "range") for p in parts)
    if step <= 0 or hi < lo:
        raise ValueError(f"range needs step > 0 and hi >= lo, got {text!r}")
    count = math.floor((hi - lo) / step * (1 + 1e-12) + 1e-9) + 1
    if count > MAX_ROWS:
        raise ValueError(f"range {text!r} has {count} points, limit {MAX_ROWS}")
    return [lo + i * step for i in range(count)]


def _finite(text: str, what: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ValueError(f"{what}: not a number: {text!r}") from None
    if not math.isfinite(value):
        raise ValueError(f"{what}: must be finite, got {text!r}")
    return value


def parse_list(text: str, what: str) -> list[float]:
    items = [t for t in text.split(",") if t.strip()]
    if not items:
        raise ValueError(f"{what}: empty list")
    return [_finite(t, what) for t in items]


def parse_profile(text: str) -> tuple[str, tuple[float, ...]]:
    """``family:p1,p2``; indicator and gaussian positions are offsets from k_n(delta)."""
    family, _, rest = text.partition(":")
    family = family.strip()
    params = tuple(parse_list(rest, "profile")) if rest.strip() else ()
    expected = {"indicator": 2, "gaussian": 2, "power": 1}
    if family not in expected:
        raise ValueError(f"unknown profile family {family!r}")
    if len(params) != expected[family]:
        raise ValueError(f"{family} profile takes {expected[family]} parameter(s), got {len(params)}")
    return family, params


def _absolute(family: str, params: tuple[float, ...], kd: float) -> tuple[float, ...]:
    if family == "indicator":
        return (kd + params[0], kd + params[1])
    if family == "gaussian":
        return (kd + params[0], params[1])
    return params


def read_config_file(path: str) -> dict[str, str]:
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ValueError(f"cannot read config file {path}: {exc.strerror}") from None
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or key not in KEY_ALIASES:
            raise ValueError(f"{path}:{lineno}: expected key=value with a known key, got {line!r}")
        values[KEY_ALIASES[key].replace("-", "_")] = value.strip()
    return values


def _expand_tokens(argv: Sequence[str]) -> list[str]:
    out = []
    for tok in argv:
        key, sep, value = tok.partition("=")
        if sep and not tok.startswith("-") and key in KEY_ALIASES:
            out.append(f"--{KEY_ALIASES[key]}={value}")
        else:
            out.append(tok)
    return out


def _epilog(command: str) -> str:
    lines = ["columns:"]
    width = max(len(name) for name, _ in COLUMNS[command])
    lines += [f"  {name:<{width}}  {doc}" for name, doc in COLUMNS[command]]
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hallfiber",
        description="Band functions and edge/bulk states of the half-plane Landau Hamiltonian.",
        epilog="exit status: 0 ok, 2 invalid input, 3 numerical failure, 4 solver disagreement",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    helps = {
        "bands": "band energies and velocities on a k grid",
        "derivative": "Hadamard derivative against a central difference",
        "kdelta": "threshold momenta k_n(delta)",
        "quasimode": "quasi-mode energies, defects and Kato-Temple enclosures",
        "verify": "battery of self-checks for one band",
        "bulk": "currents of bulk states from a momentum profile",
        "edge": "velocity bounds on an energy interval",
        "localize": "probability of bulk states near the edge",
        "synthesize": "sample a bulk state on an (x, y) grid",
    }
    for name, text in helps.items():
        p = sub.add_parser(
            name,
            help=text,
            description=text,
            epilog=_epilog(name),
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        p.add_argument("--n", help="band index (>= 1), default 1")
        p.add_argument("--k-range", help="lo:hi:step, inclusive")
        p.add_argument("--delta-list", help="comma-separated heights above E_n")
        p.add_argument("--interval", help="lo,hi energy interval")
        p.add_argument("--epsilon", help="comma-separated strip parameters in (0, 1)")
        p.add_argument("--profile", help="indicator:a,b | gaussian:c,w | power:p (offsets from k_n(delta))")
        p.add_argument("--x-range", help="lo:hi:step grid across the edge (synthesize)")
        p.add_argument("--y-range", help="lo:hi:step grid along the edge (synthesize)")
        p.add_argument("--b", help="field strength (bulk, edge, localize), default 1")
        p.add_argument("--step", help="solver step, default 5e-4")
        p.add_argument("--margin", help="domain margin beyond k, default 14")
        p.add_argument("--tol", help="eigenvalue root tolerance, default 1e-12")
        p.add_argument("--workers", help="threads for k sweeps, default 1")
        p.add_argument("--format", choices=("csv", "json"), help="output format")
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--config", help="key=value file; explicit flags take precedence")
    return parser


DEFAULTS = {
    "n": "1",
    "k_range": "0:4:0.5",
    "delta_list": "1e-4,1e-6,1e-8",
    "interval": "1.5,2.5",
    "epsilon": "0.3,0.5,0.7",
    "profile": "indicator:0,1",
    "x_range": None,
    "y_range": "-10:10:0.5",
    "b": "1",
    "step": None,
    "margin": None,
    "tol": None,
    "workers": "1",
    "format": None,
    "out": None,
}


@dataclass(frozen=True)
class RunConfig:
    command: str
    n: int
    k_values: tuple[float, ...]
    deltas: tuple[float, ...]
    interval: tuple[float, float]
    epsilons: tuple[float, ...]
    profile: tuple[str, tuple[float, ...]]
    x_range: str | None
    y_values: tuple[float, ...]
    b: float
    solver: fs.SolverConfig
    workers: int
    format: str
    out: str | None

    def describe(self) -> dict:
        base = {"command": self.command, "n": self.n, "solver": asdict(self.solver)}
        extra = {
            "bands": {"k": list(self.k_values)},
            "derivative": {"k": list(self.k_values)},
            "quasimode": {"k": list(self.k_values)},
            "kdelta": {"delta": list(self.deltas)},
            "verify": {},
            "bulk": {"delta": list(self.deltas), "profile": self._profile(), "b": self.b},
            "localize": {
                "delta": list(self.deltas),
                "epsilon": list(self.epsilons),
                "profile": self._profile(),
                "b": self.b,
            },
            "edge": {"interval": list(self.interval), "b": self.b},
            "synthesize": {
                "delta": list(self.deltas),
                "profile": self._profile(),
                "x_range": self.x_range,
                "y": [self.y_values[0], self.y_values[-1], len(self.y_values)],
            },
        }[self.command]
        base.update(extra)
        return base

    def _profile(self) -> dict:
        return {"family": self.profile[0], "params": list(self.profile[1])}


def resolve(args: argparse.Namespace) -> RunConfig:
    """Merge file config under flags, apply defaults, validate everything."""
    values = {key: getattr(args, key) for key in DEFAULTS}
    if args.config:
        for key, value in read_config_file(args.config).items():
            if values.get(key) is None:
                values[key] = value
    for key, value in DEFAULTS.items():
        if values[key] is None:
            values[key] = value
    try:
        n = int(str(values["n"]).strip())
    except ValueError:
        n = 0
    if n < 1:
        raise ValueError(f"band index must be an integer >= 1, got {values['n']!r}")
    solver_kw = {}
    for key, attr in (("step", "step"), ("margin", "domain_margin"), ("tol", "lambda_tol")):
        if values[key] is not None:
            solver_kw[attr] = _finite(str(values[key]), key)
    solver = fs.SolverConfig(**solver_kw)
    deltas = tuple(parse_list(str(values["delta_list"]), "delta"))
    for d in deltas:
        if not 0 < d < 2:
            raise ValueError(f"delta must lie in (0, 2), got {d}")
    interval = tuple(parse_list(str(values["interval"]), "interval"))
    if len(interval) != 2 or not interval[0] < interval[1]:
        raise ValueError(f"interval must be lo,hi with lo < hi, got {values['interval']!r}")
    epsilons = tuple(parse_list(str(values["epsilon"]), "epsilon"))
    if not all(0 < e < 1 for e in epsilons):
        raise ValueError("epsilon values must lie in (0, 1)")
    b = _finite(str(values["b"]), "b")
    if b <= 0:
        raise ValueError(f"field strength must be positive, got {b}")
    if b != 1 and args.command not in FIELDED:
        raise ValueError(f"--b applies to {', '.join(sorted(FIELDED))} only")
    try:
        workers = int(str(values["workers"]).strip())
    except ValueError:
        workers = 0
    if workers < 1:
        raise ValueError(f"workers must be an integer >= 1, got {values['workers']!r}")
    fmt = values["format"] or ("json" if args.command == "verify" else "csv")
    if fmt not in ("csv", "json"):
        raise ValueError(f"format must be csv or json, got {fmt!r}")
    profile = parse_profile(str(values["profile"]))
    x_range = values["x_range"]
    if x_range is not None:
        xs = parse_range(str(x_range))
        if xs[0] < 0:
            raise ValueError("x grid must start at x >= 0")
    y_values = tuple(parse_range(str(values["y_range"])))
    k_values = tuple(parse_range(str(values["k_range"])))
    if args.command == "quasimode":
        for k in k_values:
            qm._check_k(n, k)
    return RunConfig(
        command=args.command,
        n=n,
        k_values=k_values,
        deltas=deltas,
        interval=interval,
        epsilons=epsilons,
        profile=profile,
        x_range=x_range,
        y_values=y_values,
        b=b,
        solver=solver,
        workers=workers,
        format=fmt,
        out=values["out"],
    )


# -- commands --------------------------------------------------------------------


def _raise_first(failures):
    # surface the most severe failure: disagreement beats numerical trouble
    for f in failures:
        if f.reason == "solver-disagreement":
            raise SolverDisagreement(f"k={f.k}: {f.message}")
    f = failures[0]
    exc = SolverError(f"k={f.k}: {f.message}")
    exc.reason = f.reason
    raise exc


def run_bands(cfg: RunConfig) -> list[dict]:
    results = fs.band_sweep(cfg.n, cfg.k_values, cfg.solver, workers=cfg.workers)
    failures = [r for r in results if isinstance(r, fs.SweepFailure)]
    if failures:
        _raise_first(failures)
    return [
        {"n": r.n, "k": r.k, "lambda": r.lam, "dlambda": r.dlam, "err_est": r.err_est, "method": r.method}
        for r in results
    ]


def _central_difference(n: int, k: float, config: fs.SolverConfig, h: float = 1e-4) -> float:
    up = fs.eigenvalue(fs.FiberPoint(n, k + h), config, cross_check=False)
    down = fs.eigenvalue(fs.FiberPoint(n, k - h), config, cross_check=False)
    return (up.excess - down.excess) / (2 * h)


def run_derivative(cfg: RunConfig) -> list[dict]:
    rows = []
    for k in cfg.k_values:
        d = fs.hadamard_derivative(fs.FiberPoint(cfg.n, k), cfg.solver)
        fd = _central_difference(cfg.n, k, cfg.solver)
        rows.append({"n": cfg.n, "k": k, "dlambda": d, "fd_dlambda": fd, "rel_dev": abs(d - fd) / abs(d)})
    return rows


def run_kdelta(cfg: RunConfig) -> list[dict]:
    rows = []
    for d in cfg.deltas:
        t = asy.k_delta(cfg.n, d, cfg.solver)
        rows.append(
            {
                "n": cfg.n,
                "delta": d,
                "k_numeric": t.k_numeric,
                "k_expansion": t.k_expansion,
                "abs_diff": abs(t.k_numeric - t.k_expansion),
                "residual": t.residual,
            }
        )
    return rows


def _quasimode_row(n: int, k: float, config: fs.SolverConfig) -> dict:
    mode = qm.build(n, k, qm.CutoffSpec(), config)
    res = qm.energy_and_residual(mode)
    e_n = 2.0 * n - 1.0
    kt = qm.kato_temple(res.eta, res.epsilon, e_n - 1.0, e_n + 1.0)
    bp = fs.eigenvalue(fs.FiberPoint(n, k), config, cross_check=False)
    cmp = qm.eigen_comparison(n, k, qm.CutoffSpec(), config)
    return {
        "n": n,
        "k": k,
        "alpha": mode.alpha,
        "beta": mode.beta,
        "eta_excess": res.eta_excess,
        "epsilon": res.epsilon,
        "lambda_excess": bp.excess,
        "lower": kt.lower,
        "upper": kt.upper,
        "valid": kt.valid,
        "contains": kt.contains(bp.lam),
        "sup_diff": cmp.sup_diff,
        "sup_slope_diff": cmp.sup_slope_diff,
    }


def run_quasimode(cfg: RunConfig) -> list[dict]:
    return [_quasimode_row(cfg.n, k, cfg.solver) for k in cfg.k_values]


def _check(name, n, k, value, reference, deviation, tol) -> dict:
    return {
        "check": name,
        "n": n,
        "k": k,
        "value": value,
        "reference": reference,
        "deviation": deviation,
        "passed": bool(deviation <= tol),
    }


def run_verify(cfg: RunConfig) -> list[dict]:
    n, c = cfg.n, cfg.solver
    e_n = 2.0 * n - 1.0
    rows = []
    zero = fs.eigenvalue(fs.FiberPoint(n, 0.0), c)
    rows.append(_check("anchor_k0", n, 0.0, zero.lam, 4.0 * n - 1, abs(zero.lam - (4 * n - 1)), 1e-8))
    for k in (-2.0, 0.0, 1.0, 2.0, 3.0, 4.0):
        p = fs.FiberPoint(n, k)
        lam = fs.eigenvalue(p, c, cross_check=False).lam
        fd = fs.fd_oracle(p, c).lam
        iw = fs.iwatsuka_crosscheck(p, c).lam
        rows.append(_check("fd_oracle", n, k, lam, fd, abs(lam - fd), 1e-7))
        rows.append(_check("iwatsuka", n, k, lam, iw, abs(lam - iw), 1e-7))
    for k in (0.0, 1.0, 2.0, 3.0, 4.0):
        d = fs.hadamard_derivative(fs.FiberPoint(n, k), c)
        fd = _central_difference(n, k, c)
        rows.append(_check("hadamard_vs_fd", n, k, d, fd, abs(d - fd) / abs(d), 1e-6))
    report = asy.convergence_report(n, (3.0, 3.5, 4.0, 4.5), c)
    for r in report.rows:
        rows.append(_check("rho", n, r.k, r.rho, 1.0, abs(r.rho - 1), 0.2 if r.k >= 4.5 else 1.0))
        rows.append(_check("rho_prime", n, r.k, r.rho_prime, 1.0, abs(r.rho_prime - 1), 0.2 if r.k >= 4.5 else 1.0))
    rows.append(_check("rho_slope", n, math.nan, report.slope, -2.0, abs(report.slope + 2), 1.0))
    rows.append(_check("rho_prime_slope", n, math.nan, report.slope_prime, -2.0, abs(report.slope_prime + 2), 1.0))
    for k in (3.0, 3.5, 4.0, 4.5):
        mode = qm.build(n, k, qm.CutoffSpec(), c)
        res = qm.energy_and_residual(mode)
        kt = qm.kato_temple(res.eta, res.epsilon, e_n - 1.0, e_n + 1.0)
        lam = fs.eigenvalue(fs.FiberPoint(n, k), c, cross_check=False).lam
        inside = kt.contains(lam)
        rows.append(_check("kato_temple", n, k, float(inside), 1.0, 0.0 if inside else 1.0, 0.0))
    return rows


def _profiles(cfg: RunConfig):
    family, rel = cfg.profile
    for d in cfg.deltas:
        kd = asy.k_delta(cfg.n, d, cfg.solver).k_numeric
        yield d, kd, st.make_profile(cfg.n, d, family, _absolute(family, rel, kd), cfg.solver)


def run_bulk(cfg: RunConfig) -> list[dict]:
    rows = []
    for d, kd, prof in _profiles(cfg):
        cur = st.current(prof, cfg.solver, check=False)
        diag = st.rescale_field(
            st.StateDiagnostics(
                n=cfg.n,
                delta=d,
                norm=float(np.sum(prof.weights * prof.values**2)),
                current=cur.current,
                current_bound=asy.envelope(d, 2 * cfg.n - 1),
                mu=float(2 * cfg.n - 1),
                localization={},
            ),
            cfg.b,
        )
        root = math.sqrt(cfg.b)
        rows.append(
            {
                "n": cfg.n,
                "delta": d,
                "k_delta": kd,
                "family": prof.family,
                "norm": diag.norm,
                "current": diag.current,
                "sandwich_lo": cur.sandwich[0] * root,
                "sandwich_hi": cur.sandwich[1] * root,
                "current_bound": diag.current_bound,
                "mu": diag.mu,
                "field_strength": cfg.b,
            }
        )
    return rows


def run_edge(cfg: RunConfig) -> list[dict]:
    # the interval is given at field b; unit-field energies are e / b
    lo, hi = cfg.interval
    c_minus, c_plus = st.edge_current_bounds(cfg.n, (lo / cfg.b, hi / cfg.b), config=cfg.solver)
    k_lo = asy.invert_band(cfg.n, hi / cfg.b, cfg.solver)
    k_hi = asy.invert_band(cfg.n, lo / cfg.b, cfg.solver)
    root = math.sqrt(cfg.b)
    return [
        {
            "n": cfg.n,
            "e_lo": lo,
            "e_hi": hi,
            "k_lo": k_lo * root,
            "k_hi": k_hi * root,
            "c_minus": c_minus * root,
            "c_plus": c_plus * root,
            "field_strength": cfg.b,
        }
    ]


def run_localize(cfg: RunConfig) -> list[dict]:
    rows = []
    for d, _, prof in _profiles(cfg):
        for e in cfg.epsilons:
            mass, shape, a = st.localization_mass(prof, e, 1.0, cfg.solver)
            rows.append(
                {
                    "n": cfg.n,
                    "delta": d,
                    "epsilon": e,
                    "half_width": a / math.sqrt(cfg.b),
                    "mass": mass,
                    "shape": shape,
                    "ratio": mass / shape,
                    "field_strength": cfg.b,
                }
            )
    return rows


def run_synthesize(cfg: RunConfig) -> list[dict]:
    rows = []
    d, kd, prof = next(_profiles(cfg))
    xs = parse_range(cfg.x_range) if cfg.x_range else parse_range(f"0:{kd + 8.0}:0.25")
    field_ = st.synthesize_state(prof, xs, cfg.y_values, cfg.solver)
    for i, x in enumerate(xs):
        for j, y in enumerate(cfg.y_values):
            z = complex(field_[i, j])
            rows.append({"x": x, "y": y, "re": z.real, "im": z.imag, "abs2": abs(z) ** 2})
    return rows


RUNNERS: dict[str, Callable[[RunConfig], list[dict]]] = {
    "bands": run_bands,
    "derivative": run_derivative,
    "kdelta": run_kdelta,
    "quasimode": run_quasimode,
    "verify": run_verify,
    "bulk": run_bulk,
    "edge": run_edge,
    "localize": run_localize,
    "synthesize": run_synthesize,
}


# -- output --------------------------------------------------------------------------


def _csv_cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % float(value)
    return str(value)


def _json_value(value: Any):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else None
    if isinstance(value, dict):
        return {k: _json_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_value(v) for v in value]
    return value


def render(table: Table, fmt: str) -> str:
    if not table.rows:
        raise ValueError("empty table")
    cols = table.columns
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(cols)
        for row in table.rows:
            writer.writerow([_csv_cell(row[c]) for c in cols])
        return buf.getvalue()
    doc = {
        "schema_version": SCHEMA_VERSION,
        "config": _json_value(table.config),
        "rows": [{c: _json_value(row[c]) for c in cols} for row in table.rows],
    }
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def export(table: Table, fmt: str, path: str | None) -> str:
    """Render and write a table; writes go to a temp file renamed into place."""
    text = render(table, fmt)
    if path is None:
        sys.stdout.write(text)
        return text
    directory = os.path.dirname(os.path.abspath(path))
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".hallfiber-", suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return text


def _fail(code: int, reason: str, message: str, fmt: str) -> int:
    if fmt == "json":
        sys.stdout.write(json.dumps({"schema_version": SCHEMA_VERSION, "error": {"reason": reason, "message": message}}) + "\n")
    print(f"hallfiber: {reason}: {message}", file=sys.stderr)
    return code


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(_expand_tokens(argv))
    fmt = args.format or ("json" if args.command == "verify" else "csv")
    try:
        cfg = resolve(args)
    except ValueError as exc:
        return _fail(EXIT_INVALID, "invalid-input", str(exc), fmt)
    fmt = cfg.format
    try:
        rows = RUNNERS[cfg.command](cfg)
        table = Table(cfg.command, rows, cfg.describe())
        if not rows:
            return _fail(EXIT_INVALID, "empty-table", "no rows produced", fmt)
        export(table, fmt, cfg.out)
    except SolverDisagreement as exc:
        return _fail(EXIT_DISAGREE, exc.reason, str(exc), fmt)
    except SolverError as exc:
        return _fail(EXIT_NUMERIC, exc.reason, str(exc), fmt)
    except ArithmeticError as exc:
        return _fail(EXIT_NUMERIC, reason_of(exc), str(exc), fmt)
    except ValueError as exc:
        return _fail(EXIT_INVALID, "invalid-input", str(exc), fmt)
    except OSError as exc:
        return _fail(EXIT_INVALID, "io-error", str(exc), fmt)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
