"""Compiled fixed-step RK4 kernels shared by the Filippov and smoothed integrators."""

from __future__ import annotations

import math

import numpy as np
from numba import config, njit, prange

# skip the TBB layer: the installed TBB is too old and numba warns on every import
config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

_TWO_PI = 2.0 * math.pi


@njit(cache=True)
def _ice_rate(flux, e, zeta):
    if flux > 0.0:
        return flux
    return zeta * flux / (zeta - e)


@njit(cache=True)
def _filippov_f(t, e, side, mp, ap, pp, mm, am, pm, b, zeta):
    if side > 0:
        return mp + ap * math.cos(_TWO_PI * t - pp) - b * e
    return _ice_rate(mm + am * math.cos(_TWO_PI * t - pm), e, zeta)


@njit(cache=True)
def filippov_step(t, e, h, side, mp, ap, pp, mm, am, pm, b, zeta):
    k1 = _filippov_f(t, e, side, mp, ap, pp, mm, am, pm, b, zeta)
    k2 = _filippov_f(t + 0.5 * h, e + 0.5 * h * k1, side, mp, ap, pp, mm, am, pm, b, zeta)
    k3 = _filippov_f(t + 0.5 * h, e + 0.5 * h * k2, side, mp, ap, pp, mm, am, pm, b, zeta)
    k4 = _filippov_f(t + h, e + h * k3, side, mp, ap, pp, mm, am, pm, b, zeta)
    return e + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@njit(cache=True)
def filippov_segment(e, t0, n, h, side, mp, ap, pp, mm, am, pm, b, zeta, ts, es):
    """Advance ``n`` steps on one side of E = 0, stopping before a crossing.

    Samples go to ``ts``/``es`` (length ``n + 1``).  Returns the number of
    completed steps; a value below ``n`` means the next step crosses E = 0.
    """
    ts[0] = t0
    es[0] = e
    for k in range(n):
        t = t0 + k * h
        e_new = filippov_step(t, e, h, side, mp, ap, pp, mm, am, pm, b, zeta)
        if (side > 0 and e_new <= 0.0) or (side < 0 and e_new > 0.0):
            return k
        e = e_new
        ts[k + 1] = t0 + (k + 1) * h
        es[k + 1] = e
    return n


@njit(cache=True)
def _smoothed_f(j, e, l_m, sw, lw, delta_alpha, delta_e, b, zeta):
    flux = (1.0 + delta_alpha * math.tanh(e / delta_e)) * sw[j] - (l_m + lw[j])
    if e >= 0.0:
        return flux - b * e
    return _ice_rate(flux, e, zeta)


@njit(cache=True)
def smoothed_run(e, n, h, l_m, sw, lw, delta_alpha, delta_e, b, zeta):
    """Integrate ``n`` RK4 steps; ``sw``/``lw`` hold the forcing at half steps.

    Returns ``(e_end, e_min, e_max)``; a non-finite state stops the run early.
    """
    e_min = e
    e_max = e
    for k in range(n):
        j = 2 * k
        k1 = _smoothed_f(j, e, l_m, sw, lw, delta_alpha, delta_e, b, zeta)
        k2 = _smoothed_f(j + 1, e + 0.5 * h * k1, l_m, sw, lw, delta_alpha, delta_e, b, zeta)
        k3 = _smoothed_f(j + 1, e + 0.5 * h * k2, l_m, sw, lw, delta_alpha, delta_e, b, zeta)
        k4 = _smoothed_f(j + 2, e + h * k3, l_m, sw, lw, delta_alpha, delta_e, b, zeta)
        e = e + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not math.isfinite(e):
            return e, e_min, e_max
        if e < e_min:
            e_min = e
        if e > e_max:
            e_max = e
    return e, e_min, e_max


@njit(cache=True)
def smoothed_samples(e, n, h, l_m, sw, lw, delta_alpha, delta_e, b, zeta, es):
    es[0] = e
    for k in range(n):
        j = 2 * k
        k1 = _smoothed_f(j, e, l_m, sw, lw, delta_alpha, delta_e, b, zeta)
        k2 = _smoothed_f(j + 1, e + 0.5 * h * k1, l_m, sw, lw, delta_alpha, delta_e, b, zeta)
        k3 = _smoothed_f(j + 1, e + 0.5 * h * k2, l_m, sw, lw, delta_alpha, delta_e, b, zeta)
        k4 = _smoothed_f(j + 2, e + h * k3, l_m, sw, lw, delta_alpha, delta_e, b, zeta)
        e = e + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        es[k + 1] = e


@njit(cache=True, parallel=True)
def smoothed_run_many(e0s, n, h, l_m, sw, lw, delta_alpha, delta_e, b, zeta):
    m = e0s.shape[0]
    out = np.empty((m, 3))
    for i in prange(m):
        a, lo, hi = smoothed_run(e0s[i], n, h, l_m, sw, lw, delta_alpha, delta_e, b, zeta)
        out[i, 0] = a
        out[i, 1] = lo
        out[i, 2] = hi
    return out


# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = 9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
_E1, _E3, _E4, _E5, _E6, _E7 = (71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0,
                                22.0 / 525.0, -1.0 / 40.0)


@njit(cache=True)
def smoothed_field(t, e, l_m, delta_alpha, s_a, l_a, phi, delta_e, b, zeta):
    """Smoothed tendency and its derivative in ``e``."""
    sw = 1.0 - s_a * math.cos(_TWO_PI * t)
    th = math.tanh(e / delta_e)
    flux = (1.0 + delta_alpha * th) * sw - (l_m + l_a * math.cos(_TWO_PI * (t - phi)))
    dflux = delta_alpha * (1.0 - th * th) / delta_e * sw
    if e >= 0.0:
        return flux - b * e, dflux - b
    if flux > 0.0:
        return flux, dflux
    g = zeta / (zeta - e)
    return g * flux, g * dflux + g * flux / (zeta - e)


@njit(cache=True)
def _hermite_extrema(h, e0, f0, e1, f1, lo, hi):
    # cubic Hermite on [0, h]; derivative is a quadratic in s = t / h
    d0, d1 = f0 * h, f1 * h
    a = 6.0 * (e0 - e1) + 3.0 * (d0 + d1)
    bq = -6.0 * (e0 - e1) - 4.0 * d0 - 2.0 * d1
    c = d0
    roots = np.empty(2)
    m = 0
    if abs(a) < 1e-300:
        if abs(bq) > 1e-300:
            roots[0] = -c / bq
            m = 1
    else:
        disc = bq * bq - 4.0 * a * c
        if disc >= 0.0:
            sq = math.sqrt(disc)
            roots[0] = (-bq - sq) / (2.0 * a)
            roots[1] = (-bq + sq) / (2.0 * a)
            m = 2
    for i in range(m):
        s = roots[i]
        if 0.0 < s < 1.0:
            h00 = 2 * s**3 - 3 * s**2 + 1
            h10 = s**3 - 2 * s**2 + s
            h01 = -2 * s**3 + 3 * s**2
            h11 = s**3 - s**2
            v = h00 * e0 + h10 * d0 + h01 * e1 + h11 * d1
            if v < lo:
                lo = v
            if v > hi:
                hi = v
    return lo, hi


@njit(cache=True)
def dp45_run(e, t0, t1, l_m, delta_alpha, s_a, l_a, phi, delta_e, b, zeta, rtol, atol, h_near, h_far):
    """Adaptive Dormand-Prince 5(4) over ``[t0, t1]`` with the variational equation.

    Returns ``(e_end, slope, e_min, e_max, n_steps, status, t_fail)``; ``status``
    is 0 on success, 1 for a non-finite state, 2 for step-size underflow.
    """
    pa = (l_m, delta_alpha, s_a, l_a, phi, delta_e, b, zeta)
    t = t0
    v = 1.0
    e_min = e
    e_max = e
    f1, j1 = smoothed_field(t, e, *pa)
    h = min(h_near, t1 - t0)
    n_steps = 0
    while t < t1:
        h_cap = h_near if abs(e) < 4.0 * delta_e else h_far
        if h > h_cap:
            h = h_cap
        last = False
        if t + h >= t1:
            h = t1 - t
            last = True
        if h < 1e-14:
            return e, v, e_min, e_max, n_steps, 2, t
        k1, q1 = f1, j1 * v
        y = e + h * _A21 * k1
        w = v + h * _A21 * q1
        k2, j = smoothed_field(t + _C2 * h, y, *pa)
        q2 = j * w
        y = e + h * (_A31 * k1 + _A32 * k2)
        w = v + h * (_A31 * q1 + _A32 * q2)
        k3, j = smoothed_field(t + _C3 * h, y, *pa)
        q3 = j * w
        y = e + h * (_A41 * k1 + _A42 * k2 + _A43 * k3)
        w = v + h * (_A41 * q1 + _A42 * q2 + _A43 * q3)
        k4, j = smoothed_field(t + _C4 * h, y, *pa)
        q4 = j * w
        y = e + h * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4)
        w = v + h * (_A51 * q1 + _A52 * q2 + _A53 * q3 + _A54 * q4)
        k5, j = smoothed_field(t + _C5 * h, y, *pa)
        q5 = j * w
        y = e + h * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5)
        w = v + h * (_A61 * q1 + _A62 * q2 + _A63 * q3 + _A64 * q4 + _A65 * q5)
        k6, j = smoothed_field(t + h, y, *pa)
        q6 = j * w
        e_new = e + h * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)
        v_new = v + h * (_B1 * q1 + _B3 * q3 + _B4 * q4 + _B5 * q5 + _B6 * q6)
        k7, j7 = smoothed_field(t + h, e_new, *pa)
        q7 = j7 * v_new
        if not (math.isfinite(e_new) and math.isfinite(v_new)):
            if h < 1e-10:
                return e, v, e_min, e_max, n_steps, 1, t
            h *= 0.25
            continue
        err_e = h * abs(_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6 + _E7 * k7)
        err_v = h * abs(_E1 * q1 + _E3 * q3 + _E4 * q4 + _E5 * q5 + _E6 * q6 + _E7 * q7)
        sc_e = atol + rtol * max(abs(e), abs(e_new))
        sc_v = atol + rtol * max(abs(v), abs(v_new))
        err = max(err_e / sc_e, err_v / sc_v)
        if err <= 1.0:
            e_min, e_max = _hermite_extrema(h, e, k1, e_new, k7, e_min, e_max)
            t = t1 if last else t + h
            e, v = e_new, v_new
            f1, j1 = k7, j7
            if e < e_min:
                e_min = e
            if e > e_max:
                e_max = e
            n_steps += 1
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            h *= fac
        else:
            h *= max(0.2, 0.9 * err ** -0.2)
    return e, v, e_min, e_max, n_steps, 0, t


@njit(cache=True, parallel=True)
def dp45_run_many(e0s, t0, t1, l_m, delta_alpha, s_a, l_a, phi, delta_e, b, zeta, rtol, atol, h_near, h_far):
    m = e0s.shape[0]
    out = np.empty((m, 5))
    for i in prange(m):
        r = dp45_run(e0s[i], t0, t1, l_m, delta_alpha, s_a, l_a, phi, delta_e, b, zeta, rtol, atol, h_near, h_far)
        out[i, 0] = r[0]
        out[i, 1] = r[1]
        out[i, 2] = r[2]
        out[i, 3] = r[3]
        out[i, 4] = r[5]
    return out
