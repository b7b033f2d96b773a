import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hallfiber import fiber_solver as fs
from hallfiber.asymptotics import leading_terms
from hallfiber.errors import DomainError, PrecisionFloorError
from hallfiber.hermite import hermite_eval

CFG = fs.SolverConfig()


def lam(n, k, **kw):
    return fs.eigenvalue(fs.FiberPoint(n, k), CFG, **kw)


def test_config_validation():
    with pytest.raises(ValueError):
        fs.SolverConfig(domain_margin=6)
    with pytest.raises(ValueError):
        fs.SolverConfig(step=-1e-3)
    with pytest.raises(ValueError):
        fs.SolverConfig(lambda_tol=math.nan)
    with pytest.raises(ValueError):
        fs.FiberPoint(0, 1.0)
    with pytest.raises(ValueError):
        fs.FiberPoint(1, math.inf)


@pytest.mark.parametrize("value, count", [(4.0, 1), (0.5, 0), (8.0, 2)])
def test_sturm_count_examples(value, count):
    assert fs.sturm_count(0.0, value, CFG) == count


def test_sturm_count_rejects_coarse_grid():
    with pytest.raises(ValueError):
        fs.sturm_count(0.0, 50.0, CFG, step=0.05)
    with pytest.raises(ValueError):
        fs.sturm_count(0.0, math.nan, CFG)


@settings(max_examples=25, deadline=None)
@given(k=st.floats(-3, 5), a=st.floats(0, 30), b=st.floats(0, 30))
def test_sturm_count_monotone(k, a, b):
    lo, hi = sorted((a, b))
    assert fs.sturm_count(k, lo, CFG, step=2e-3) <= fs.sturm_count(k, hi, CFG, step=2e-3)


@pytest.mark.parametrize("n, exact", [(1, 3.0), (2, 7.0)])
def test_fd_oracle_parity_anchor(n, exact):
    bp = fs.fd_oracle(fs.FiberPoint(n, 0.0), CFG)
    assert bp.method == "fd_oracle"
    assert abs(bp.lam - exact) < 1e-8
    assert bp.err_est >= 0


def test_fd_oracle_large_k_against_shooting():
    bp = fs.fd_oracle(fs.FiberPoint(1, 3.0), CFG)
    lead = leading_terms(1, 3.0).excess_lead
    assert lead == pytest.approx(4.178e-4, rel=1e-3)
    assert abs(bp.excess / lead - 1) < 1.0 / 9
    assert abs(bp.lam - lam(1, 3.0, cross_check=False).lam) < 1e-8


def test_shoot_examples():
    p = fs.FiberPoint(1, 0.0)
    assert abs(fs.shoot(3.0, p, CFG)) <= 1e-9
    assert fs.shoot(2.9, p, CFG) * fs.shoot(3.1, p, CFG) < 0
    q = fs.FiberPoint(1, 3.0)
    f1, f2 = fs.shoot(1.0, q, CFG), fs.shoot(1.01, q, CFG)
    assert f1 != 0 and f1 * f2 < 0


def test_eigenvalue_examples():
    assert abs(lam(1, 0.0).lam - 3.0) < 1e-10
    assert lam(1, -2.0).lam >= 4.0
    assert lam(1, 2.0).lam > lam(1, 3.0).lam > 1.0


def test_eigenvalue_fields():
    bp = lam(2, 1.5)
    assert bp.method == "shooting"
    assert bp.lam > 3.0 and bp.excess == pytest.approx(bp.lam - 3.0, abs=1e-15)
    assert bp.dlam < 0 and bp.err_est >= 0


def test_eigenfunction_examples():
    ef = fs.eigenfunction(fs.FiberPoint(1, 0.0), CFG)
    assert ef.values[0] == 0.0
    assert ef.boundary_slope > 0
    assert abs(ef.norm_check - 1) < 1e-8
    exact = math.sqrt(2) * hermite_eval(2, ef.grid)[0]
    assert np.max(np.abs(ef.values - exact)) < 1e-8
    ef3 = fs.eigenfunction(fs.FiberPoint(3, 1.0), CFG)
    s = np.sign(ef3.values[1:])
    s = s[s != 0]
    assert np.count_nonzero(s[1:] != s[:-1]) == 2


def test_eigenfunction_grid_covers_domain():
    ef = fs.eigenfunction(fs.FiberPoint(1, 2.0), CFG)
    assert ef.grid[0] == 0.0
    assert ef.grid[-1] >= 2.0 + CFG.domain_margin
    assert not ef.values.flags.writeable


def test_hadamard_examples():
    d3 = fs.hadamard_derivative(fs.FiberPoint(1, 3.0), CFG)
    assert d3 < 0
    assert leading_terms(1, 3.0).dlambda_lead == pytest.approx(-2.507e-3, rel=1e-3)
    assert abs(d3 / leading_terms(1, 3.0).dlambda_lead - 1) < 1.5 / 9
    h = 1e-4
    fd = (lam(1, 1.0 + h, cross_check=False).excess - lam(1, 1.0 - h, cross_check=False).excess) / (2 * h)
    d1 = fs.hadamard_derivative(fs.FiberPoint(1, 1.0), CFG)
    assert abs(d1 - fd) / abs(d1) < 1e-6


def test_iwatsuka_examples():
    assert abs(fs.iwatsuka_crosscheck(fs.FiberPoint(2, 0.0), CFG).lam - 7.0) < 1e-7
    assert abs(fs.iwatsuka_crosscheck(fs.FiberPoint(1, 2.0), CFG).lam - lam(1, 2.0).lam) < 1e-7
    mu1, _ = fs.full_line_eigenvalue(1, 0.0, CFG)
    assert abs(mu1 - 1.0) < 1e-7


def test_band_sweep_examples():
    rows = fs.band_sweep(1, [0.0, 1.0, 2.0, 3.0], CFG)
    lams = [r.lam for r in rows]
    assert all(a > b for a, b in zip(lams, lams[1:]))
    assert fs.band_sweep(1, [], CFG) == []
    dup = fs.band_sweep(2, [1.25, 1.25], CFG, cross_check=False)
    assert dup[0] == dup[1]


def test_band_sweep_reports_failures_in_place():
    rows = fs.band_sweep(1, [1.0, 7.0, 2.0], CFG, cross_check=False)
    assert isinstance(rows[0], fs.BandPoint) and isinstance(rows[2], fs.BandPoint)
    assert isinstance(rows[1], fs.SweepFailure)
    assert rows[1].reason == "precision-floor"
    with pytest.raises(ValueError):
        fs.band_sweep(1, [math.nan], CFG)


def test_band_sweep_threads_match_serial():
    ks = [0.3, 1.1, 2.2, 2.7]
    assert fs.band_sweep(2, ks, CFG, workers=4) == fs.band_sweep(2, ks, CFG)


def test_precision_floor_and_tail_velocity():
    with pytest.raises(PrecisionFloorError):
        lam(1, 6.5)
    d = fs.hadamard_derivative(fs.FiberPoint(1, 6.5), CFG)
    assert d < 0
    assert d / leading_terms(1, 6.5).dlambda_lead == pytest.approx(1.0, abs=0.1)


def test_truncation_domain_error():
    with pytest.raises(DomainError):
        lam(30, 0.0)


def test_seed_insensitivity():
    wide = fs.SolverConfig(domain_margin=28)
    for n, k in ((1, 1.0), (2, 3.0)):
        a = fs.eigenvalue(fs.FiberPoint(n, k), CFG, cross_check=False).lam
        b = fs.eigenvalue(fs.FiberPoint(n, k), wide, cross_check=False).lam
        assert abs(a - b) < 1e-11


def test_interlacing_and_negative_k_bound():
    for k in (-2.0, -0.5, 0.0, 1.5, 3.0):
        vals = [lam(n, k, cross_check=False).lam for n in (1, 2, 3)]
        assert vals[0] < vals[1] < vals[2]
        if k <= 0:
            assert vals[0] >= k * k


@settings(max_examples=15, deadline=None)
@given(n=st.integers(1, 3), k=st.floats(-2.0, 4.0))
def test_band_properties(n, k):
    bp = lam(n, k)  # cross-check raises on disagreement
    assert bp.lam > 2 * n - 1
    assert bp.dlam < 0
    assert abs(bp.lam - fs.fd_oracle(fs.FiberPoint(n, k), CFG).lam) <= 1e-7


@settings(max_examples=10, deadline=None)
@given(n=st.integers(1, 3), k=st.floats(-1.0, 4.0))
def test_monotone_band(n, k):
    a = lam(n, k, cross_check=False)
    b = lam(n, k + 0.1, cross_check=False)
    assert b.lam < a.lam
    assert -a.dlam > 0
