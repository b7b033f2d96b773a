"""Compiled inner loops: RK4 for u'' = (((x - c)^2 - e0) - d) u and Sturm counts.

The energy is split as ``e0 + d`` so that a small excess ``d`` above a
Landau level enters the coefficient without being rounded against ``e0``.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _rk4_step(x, s, v, w, c, e0, d):
    q1 = ((x - c) ** 2 - e0) - d
    xm = x + 0.5 * s
    q2 = ((xm - c) ** 2 - e0) - d
    xe = x + s
    q3 = ((xe - c) ** 2 - e0) - d
    k1v = w
    k1w = q1 * v
    k2v = w + 0.5 * s * k1w
    k2w = q2 * (v + 0.5 * s * k1v)
    k3v = w + 0.5 * s * k2w
    k3w = q2 * (v + 0.5 * s * k2v)
    k4v = w + s * k3w
    k4w = q3 * (v + s * k3v)
    v_new = v + s / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    w_new = w + s / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
    return v_new, w_new


@njit(cache=True, nogil=True)
def shoot_inward(c, e0, d, h, n_steps, threshold):
    """Integrate the decaying solution from x_R = n_steps*h down to 0.

    Returns (v(0)/max|v|, v'(0)/max|v|, ok).
    """
    xr = n_steps * h
    q0 = ((xr - c) ** 2 - e0) - d
    if q0 <= 0.0:
        return 0.0, 0.0, False
    v = 1.0
    w = -np.sqrt(q0)
    vmax = 1.0
    for i in range(n_steps):
        x = xr - i * h
        v, w = _rk4_step(x, -h, v, w, c, e0, d)
        a = abs(v)
        if a > threshold:
            v /= a
            w /= a
            vmax /= a
            a = 1.0
        if a > vmax:
            vmax = a
        if not (np.isfinite(v) and np.isfinite(w)):
            return 0.0, 0.0, False
    return v / vmax, w / vmax, True


@njit(cache=True, nogil=True)
def integrate_path(xs, c, e0, d, v0, w0, max_step, threshold):
    """RK4 along the monotone node sequence ``xs`` starting from (v0, w0) at xs[0].

    Between consecutive nodes the interval is split into equal substeps no
    longer than ``max_step``. Whenever |v| exceeds ``threshold`` the whole
    path computed so far is rescaled, so returned values share one scale.
    """
    m = xs.shape[0]
    vs = np.empty(m)
    ws = np.empty(m)
    v = v0
    w = w0
    vs[0] = v
    ws[0] = w
    for j in range(1, m):
        x0 = xs[j - 1]
        delta = xs[j] - x0
        nsub = int(np.ceil(abs(delta) / max_step))
        if nsub < 1:
            nsub = 1
        s = delta / nsub
        for i in range(nsub):
            v, w = _rk4_step(x0 + i * s, s, v, w, c, e0, d)
        vs[j] = v
        ws[j] = w
        a = abs(v)
        if a > threshold:
            v /= a
            w /= a
            for i in range(j + 1):
                vs[i] /= a
                ws[i] /= a
    return vs, ws


@njit(cache=True, nogil=True)
def sturm_count(diag, off_sq, lam):
    """Number of eigenvalues of a symmetric tridiagonal matrix below ``lam``.

    ``diag`` holds the diagonal, ``off_sq`` the squared (constant) off-diagonal.
    """
    count = 0
    tiny = 1e-300
    p = diag[0] - lam
    if p == 0.0:
        p = -tiny
    if p < 0.0:
        count += 1
    for i in range(1, diag.shape[0]):
        p = (diag[i] - lam) - off_sq / p
        if p == 0.0:
            p = -tiny
        if p < 0.0:
            count += 1
    return count
