"""Periodic orbits of the Filippov system, their stability, and trajectory tools.

Three kinds of period-1 orbit exist: ice-free (``E > 0`` all year),
ice-covered (``E < 0`` all year) and seasonal (one melt-out at ``t_m`` and one
freeze-up at ``t_f`` per year).  Every phase has a closed-form solution:

* open water: ``(e^{B tau} E)' = e^{B tau} F_+``;
* melting ice (``F_- > 0``): ``E' = F_-``;
* growing ice (``F_- < 0``): ``(zeta E - E^2/2)' = zeta F_-``.

The integrals ``I_+`` and ``I_-`` below are the exact antiderivatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from ._kernels import filippov_segment, filippov_step
from .exceptions import (
    BoundaryEvaluationError,
    InconsistentBranchError,
    IntegrationError,
    ParameterError,
    SlidingEntryError,
)
from .forcing import TWO_PI, ForcingParams, f_minus, f_plus, harmonic
from .sliding import ATTRACTING, DEGENERATE, TWO_REPELLING, find_boundary_times, side_roots

ICE_FREE = "ice-free"
ICE_COVERED = "ice-covered"
SEASONAL = "seasonal"

DEFAULT_STEPS_PER_YEAR = 4096


def integral_i_plus(p: ForcingParams, t0, t1):
    """``int_{t0}^{t1} e^{B s} F_+(s) ds`` in closed form (vectorized)."""
    mean, amp, phase = harmonic(p, 1)
    b = p.b

    def prim(t):
        t = np.asarray(t, dtype=float)
        ebt = np.exp(b * t)
        arg = TWO_PI * t - phase
        return ebt * (mean / b + amp * (b * np.cos(arg) + TWO_PI * np.sin(arg)) / (b * b + TWO_PI**2))

    out = prim(t1) - prim(t0)
    return float(out) if np.ndim(out) == 0 else out


def integral_i_minus(p: ForcingParams, t0, t1):
    """``int_{t0}^{t1} F_-(s) ds`` in closed form (vectorized)."""
    mean, amp, phase = harmonic(p, -1)
    t0 = np.asarray(t0, dtype=float)
    t1 = np.asarray(t1, dtype=float)
    out = mean * (t1 - t0) + amp / TWO_PI * (np.sin(TWO_PI * t1 - phase) - np.sin(TWO_PI * t0 - phase))
    return float(out) if np.ndim(out) == 0 else out


def mean_f_minus(p: ForcingParams) -> float:
    """Annual mean of ``F_-``: ``1 - delta_alpha - L_m``."""
    return 1.0 - p.delta_alpha - p.lm


def _growth_solve(c, zeta: float):
    """Negative root of ``E - E^2/(2 zeta) = c`` (ice growth from a known state)."""
    arg = 1.0 - 2.0 * np.asarray(c, dtype=float) / zeta
    if np.any(arg < -1e-12):
        raise InconsistentBranchError("ice-growth invariant has no real solution", min_argument=float(np.min(arg)))
    out = zeta * (1.0 - np.sqrt(np.maximum(arg, 0.0)))
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class BranchPoint:
    """One periodic orbit at a fixed ``l_m``.

    ``e_init`` is the energy at the reference time ``t0`` (``t_a`` for
    ice-free orbits, ``t_b`` otherwise).  ``e_c`` is the energy at ``t_c`` for
    ice-covered orbits.  ``floquet`` is the return-map multiplier.
    """

    kind: str
    l_m: float
    e_init: float
    t0: float
    floquet: float
    stable: bool
    min_e: float
    max_e: float
    e_c: float | None = None
    t_m: float | None = None
    t_f: float | None = None
    flags: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "kind": self.kind, "l_m": self.l_m, "e_init": self.e_init, "t0": self.t0,
            "floquet": self.floquet, "stable": self.stable, "min_e": self.min_e, "max_e": self.max_e,
            "e_c": self.e_c, "t_m": self.t_m, "t_f": self.t_f, "flags": list(self.flags),
        }


@dataclass
class Trajectory:
    tau: np.ndarray
    e: np.ndarray
    kind: str = ""
    events: list[tuple[float, str]] = field(default_factory=list)
    halted: str | None = None


def _bounded_extremum(fun, lo: float, hi: float, n: int = 512, maximize: bool = False) -> float:
    ts = np.linspace(lo, hi, n)
    vals = np.asarray(fun(ts))
    sign = -1.0 if maximize else 1.0
    i = int(np.argmin(sign * vals))
    a, c = ts[max(i - 1, 0)], ts[min(i + 1, n - 1)]
    if c > a:
        res = minimize_scalar(lambda t: sign * float(fun(t)), bounds=(a, c), method="bounded",
                              options={"xatol": 1e-13})
        best = min(sign * vals[i], res.fun)
    else:
        best = sign * vals[i]
    return sign * best


# --- ice-free --------------------------------------------------------------

def _ice_free_reference(p: ForcingParams) -> tuple[float | None, tuple[str, ...]]:
    roots = side_roots(p, 1)
    if roots.has_roots:
        return roots.rising, ()
    if roots.sign > 0:
        # F_+ never changes sign: use the phase of its minimum
        _, _, phase = harmonic(p, 1)
        return ((math.pi + phase) / TWO_PI) % 1.0, ("reference-phase",)
    return None, ()


def ice_free_margin(p: ForcingParams) -> float:
    """``E_0*`` at ``t_a``; positive exactly where the ice-free orbit exists (nan if undefined)."""
    t_a, _ = _ice_free_reference(p)
    if t_a is None:
        return math.nan
    return integral_i_plus(p, t_a, t_a + 1.0) * math.exp(-p.b * t_a) / math.expm1(p.b)


def ice_free_branch(p: ForcingParams) -> BranchPoint | None:
    """The ice-free orbit, or None when ``E_0* <= 0`` or ``F_+ < 0`` all year."""
    t_a, flags = _ice_free_reference(p)
    if t_a is None:
        return None
    e0 = ice_free_margin(p)
    if not e0 > 0.0:
        return None

    def energy(t):
        return np.exp(-p.b * np.asarray(t)) * (e0 * math.exp(p.b * t_a) + integral_i_plus(p, t_a, t))

    lo = _bounded_extremum(energy, t_a, t_a + 1.0)
    hi = _bounded_extremum(energy, t_a, t_a + 1.0, maximize=True)
    mu = math.exp(-p.b)
    return BranchPoint(ICE_FREE, p.lm, e0, t_a, mu, True, float(min(lo, e0)), float(max(hi, e0)), flags=flags)


# --- ice-covered -----------------------------------------------------------

def _melt_season(p: ForcingParams) -> tuple[float, float] | None:
    roots = side_roots(p, -1)
    if not roots.has_roots:
        return None
    t_b = roots.rising
    t_c = t_b + (roots.falling - t_b) % 1.0
    return t_b, t_c


def ice_covered_margin(p: ForcingParams) -> float:
    """``E_c``, the energy at ``t_c``; negative exactly where the ice-covered orbit exists."""
    season = _melt_season(p)
    if season is None:
        return math.nan
    t_b, t_c = season
    melt = integral_i_minus(p, t_b, t_c)
    e_b = p.zeta * mean_f_minus(p) / melt - 0.5 * melt
    return e_b + melt


def ice_covered_branch(p: ForcingParams) -> BranchPoint | None:
    """The ice-covered orbit, or None when ``E_c >= 0`` or ``F_-`` has no roots.

    ``F_- < 0`` all year means unbounded ice growth and no periodic orbit.
    """
    season = _melt_season(p)
    if season is None:
        return None
    t_b, t_c = season
    melt = integral_i_minus(p, t_b, t_c)
    e_b = p.zeta * mean_f_minus(p) / melt - 0.5 * melt
    e_c = e_b + melt
    if not e_c < 0.0:
        return None
    mu = (p.zeta - e_c) / (p.zeta - e_b)
    return BranchPoint(ICE_COVERED, p.lm, e_b, t_b, mu, bool(mu < 1.0), e_b, e_c, e_c=e_c)


# --- seasonal --------------------------------------------------------------

@dataclass(frozen=True)
class _Frame:
    """Seasonal frame unwrapped to increase from ``t_b``.

    ``(m_lo, m_hi]`` is the admissible melt-out window (``F_- > 0`` and
    ``F_+ > 0``) and ``(f_lo, f_hi]`` the freeze-up window (both negative).
    With two repelling intervals these are ``(t_b, t_c]`` and ``(t_d, t_a + 1]``.
    ``t_a1`` closes the ``F_+ < 0`` arc that starts at ``t_d``.
    """

    t_b: float
    t_c: float
    t_d: float
    t_a1: float
    m_lo: float
    m_hi: float
    f_lo: float
    f_hi: float
    attracting: bool = False


def _seasonal_frame(p: ForcingParams) -> _Frame | None:
    si = find_boundary_times(p)
    usable = si.classification in (TWO_REPELLING, ATTRACTING) or (
        si.classification == DEGENERATE and p.delta_alpha == 0.0)
    if not usable or si.plus is None or si.minus is None or not (si.plus.has_roots and si.minus.has_roots):
        return None
    tb = si.t_b
    tc = _after(si.t_c, tb)
    # the F_+ positive arc that starts before melt-out can end
    ta = tc - (tc - si.t_a) % 1.0
    if ta == tc:
        ta -= 1.0
    td = _after(si.t_d, ta)
    m_lo, m_hi = max(tb, ta), min(tc, td)
    f_lo, f_hi = max(tc, td), min(tb, ta) + 1.0
    if not (m_hi > m_lo and f_hi > f_lo):
        return None
    return _Frame(tb, tc, td, ta + 1.0, m_lo, m_hi, f_lo, f_hi, si.classification == ATTRACTING)


def _after(t: float, ref: float) -> float:
    return ref + (t - ref) % 1.0


def _freeze_times(p: ForcingParams, t_m: np.ndarray, fr: _Frame) -> np.ndarray:
    """First ``t_f`` in ``(t_d, t_a + 1]`` with ``I_+(t_m, t_f) = 0``, by vectorized bisection."""
    lo = np.full_like(t_m, fr.t_d)
    hi = np.full_like(t_m, fr.t_a1)
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        pos = integral_i_plus(p, t_m, mid) > 0.0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
        if np.all(hi - lo <= 4e-16 * np.maximum(1.0, np.abs(hi))):
            break
    return 0.5 * (lo + hi)


def _seasonal_residual(p: ForcingParams, t_m, fr: _Frame):
    t_m = np.atleast_1d(np.asarray(t_m, dtype=float))
    t_f = _freeze_times(p, t_m, fr)
    melt = integral_i_minus(p, fr.t_b, t_m)
    return melt + melt * melt / (2.0 * p.zeta) + integral_i_minus(p, t_f, fr.t_b + 1.0), t_f


def seasonal_domain(p: ForcingParams) -> tuple[_Frame, float, float] | None:
    """Frame and the admissible melt-out range ``[lo, hi]``, or None.

    ``t_f`` decreases as ``t_m`` grows, so ``t_f <= f_hi`` bounds ``t_m``
    from below and ``t_f >= f_lo`` bounds it from above.
    """
    fr = _seasonal_frame(p)
    if fr is None:
        return None

    def late(t):
        return integral_i_plus(p, t, fr.f_hi)

    def early(t):
        return integral_i_plus(p, t, fr.f_lo)

    if late(fr.m_hi) > 0.0:
        return None
    lo = fr.m_lo if late(fr.m_lo) <= 0.0 else brentq(late, fr.m_lo, fr.m_hi, xtol=1e-15, rtol=1e-15)
    if fr.f_lo == fr.t_d or early(fr.m_hi) >= 0.0:
        hi = fr.m_hi
    elif early(lo) < 0.0:
        return None
    else:
        hi = brentq(early, lo, fr.m_hi, xtol=1e-15, rtol=1e-15)
    return fr, lo, hi


def seasonal_residual(p: ForcingParams, t_m):
    """Closure residual ``R(t_m)``; roots are seasonal orbits.  nan outside the domain."""
    dom = seasonal_domain(p)
    t_m = np.asarray(t_m, dtype=float)
    if dom is None:
        return np.full_like(t_m, np.nan) if t_m.ndim else math.nan
    fr, lo, hi = dom
    r, _ = _seasonal_residual(p, t_m, fr)
    r = np.where((t_m >= lo) & (t_m <= hi), r, np.nan)
    return float(r[0]) if t_m.ndim == 0 else r


def _seasonal_point(p: ForcingParams, t_m: float, fr: _Frame, grazing_lo: bool) -> BranchPoint:
    t_f = float(_freeze_times(p, np.array([t_m]), fr)[0])
    e_b = -integral_i_minus(p, fr.t_b, t_m)
    fm_tm, fp_tm = f_minus(p, t_m), f_plus(p, t_m)
    fm_tf, fp_tf = f_minus(p, t_f), f_plus(p, t_f)
    flags = []
    if abs(t_m - fr.m_hi) < 1e-9:
        flags.append("grazing-melt")
    if abs(t_f - fr.f_hi) < 1e-9 or (fr.f_lo > fr.t_d and abs(t_f - fr.f_lo) < 1e-9) or grazing_lo:
        flags.append("grazing-freeze")
    if fr.attracting:
        flags.append("attracting-interval-present")
    if any(f.startswith("grazing") for f in flags) or fm_tm <= 0.0 or fp_tm <= 0.0 or fp_tf >= 0.0 or fm_tf >= 0.0:
        mu = math.inf
        flags.append("diverging-floquet")
    else:
        mu = (math.exp(-p.b * (t_f - t_m)) * p.zeta / (p.zeta - e_b)
              * (fm_tf / fp_tf) * (fp_tm / fm_tm))

    def energy(t):
        return np.exp(-p.b * np.asarray(t)) * integral_i_plus(p, t_m, t)

    hi = _bounded_extremum(energy, t_m, t_f, n=256, maximize=True) if t_f > t_m else 0.0
    return BranchPoint(SEASONAL, p.lm, e_b, fr.t_b, mu, bool(mu < 1.0), e_b, float(max(hi, 0.0)),
                       t_m=t_m, t_f=t_f, flags=tuple(flags))


def seasonal_solutions(p: ForcingParams, n_grid: int = 2000) -> list[BranchPoint]:
    """All seasonal orbits at ``p.l_m``, sorted by ``t_m``.

    ``R(t_m)`` is sampled on ``n_grid`` points; sign changes are refined with
    Brent's method, and local extrema of ``|R|`` without a sign change are
    probed so that root pairs closer than the grid spacing near a fold are
    not missed.
    """
    dom = seasonal_domain(p)
    if dom is None:
        return []
    fr, lo, hi = dom
    tms = np.linspace(lo, hi, n_grid)
    rs, _ = _seasonal_residual(p, tms, fr)

    def res(t):
        return float(_seasonal_residual(p, np.array([t]), fr)[0][0])

    roots: list[float] = []
    for i in range(n_grid - 1):
        if rs[i] == 0.0:
            roots.append(float(tms[i]))
        elif rs[i] * rs[i + 1] < 0.0:
            roots.append(brentq(res, tms[i], tms[i + 1], xtol=1e-15, rtol=1e-15))
    if rs[-1] == 0.0:
        roots.append(float(tms[-1]))
    for i in range(1, n_grid - 1):
        a, m, c = rs[i - 1], rs[i], rs[i + 1]
        if a * m <= 0.0 or m * c <= 0.0:
            continue
        if abs(m) > abs(a) or abs(m) > abs(c):
            continue
        s = 1.0 if m > 0 else -1.0
        ext = minimize_scalar(lambda t: s * res(t), bounds=(tms[i - 1], tms[i + 1]), method="bounded",
                              options={"xatol": 1e-14})
        if ext.fun <= 0.0:
            x = float(ext.x)
            if ext.fun == 0.0:
                roots.append(x)
                continue
            roots.append(brentq(res, tms[i - 1], x, xtol=1e-15, rtol=1e-15))
            roots.append(brentq(res, x, tms[i + 1], xtol=1e-15, rtol=1e-15))
    roots.sort()
    unique: list[float] = []
    for r in roots:
        if not unique or r - unique[-1] > 1e-12:
            unique.append(r)
    return [_seasonal_point(p, t, fr, grazing_lo=(lo > fr.t_b and abs(t - lo) < 1e-9)) for t in unique]


def all_branches(p: ForcingParams, n_grid: int = 2000) -> list[BranchPoint]:
    out = []
    for bp in (ice_free_branch(p), ice_covered_branch(p)):
        if bp is not None:
            out.append(bp)
    return out + seasonal_solutions(p, n_grid=n_grid)


# --- reconstruction --------------------------------------------------------

def orbit_energy(bp: BranchPoint, p: ForcingParams, tau):
    """Energy of the periodic orbit ``bp`` at times ``tau`` (any real values)."""
    tau = np.asarray(tau, dtype=float)
    s = bp.t0 + np.mod(tau - bp.t0, 1.0)
    if bp.kind == ICE_FREE:
        out = np.exp(-p.b * s) * (bp.e_init * math.exp(p.b * bp.t0) + integral_i_plus(p, bp.t0, s))
    elif bp.kind == ICE_COVERED:
        t_b = bp.t0
        _, t_c = _melt_season(p) or (None, None)
        if t_c is None:
            raise InconsistentBranchError("F_- has no roots for these parameters")
        melt = bp.e_init + integral_i_minus(p, t_b, s)
        e_c = bp.e_init + integral_i_minus(p, t_b, t_c)
        grow_c = e_c - e_c * e_c / (2.0 * p.zeta) + integral_i_minus(p, t_c, np.maximum(s, t_c))
        out = np.where(s <= t_c, melt, _growth_solve(np.where(s <= t_c, 0.0, grow_c), p.zeta))
    elif bp.kind == SEASONAL:
        t_b, t_m, t_f = bp.t0, bp.t_m, bp.t_f
        melt = bp.e_init + integral_i_minus(p, t_b, np.minimum(s, t_m))
        open_water = np.exp(-p.b * s) * integral_i_plus(p, t_m, s)
        grow = _growth_solve(np.where(s >= t_f, integral_i_minus(p, t_f, s), 0.0), p.zeta)
        out = np.where(s <= t_m, melt, np.where(s < t_f, open_water, grow))
    else:
        raise InconsistentBranchError(f"unknown branch kind {bp.kind!r}")
    return float(out) if np.ndim(out) == 0 else out


def reconstruct_trajectory(bp: BranchPoint, p: ForcingParams, n_samples: int = 1001) -> Trajectory:
    """Sample one period of ``bp`` from its closed-form phases.

    Raises :class:`InconsistentBranchError` when ``bp`` does not close up
    under ``p`` (for example when it was computed at another ``l_m``).
    """
    if bp.l_m != p.l_m:
        raise InconsistentBranchError("branch point and parameters disagree on l_m", bp_l_m=bp.l_m, l_m=p.l_m)
    tau = np.linspace(bp.t0, bp.t0 + 1.0, n_samples)
    e = np.array(orbit_energy(bp, p, tau[:-1]), dtype=float)
    end = _closure_value(bp, p)
    if not abs(end - bp.e_init) <= 1e-8 * max(1.0, abs(bp.e_init)):
        raise InconsistentBranchError("orbit does not close after one year", start=bp.e_init, end=end)
    events = []
    if bp.kind == SEASONAL:
        events = [(bp.t_m, "melt-out"), (bp.t_f, "freeze-up")]
    return Trajectory(tau, np.append(e, end), kind=bp.kind, events=events)


def _closure_value(bp: BranchPoint, p: ForcingParams) -> float:
    t1 = bp.t0 + 1.0
    if bp.kind == ICE_FREE:
        return math.exp(-p.b * t1) * (bp.e_init * math.exp(p.b * bp.t0) + integral_i_plus(p, bp.t0, t1))
    if bp.kind == ICE_COVERED:
        season = _melt_season(p)
        if season is None:
            raise InconsistentBranchError("F_- has no roots for these parameters")
        e_c = bp.e_init + integral_i_minus(p, bp.t0, season[1])
        return _growth_solve(e_c - e_c * e_c / (2.0 * p.zeta) + integral_i_minus(p, season[1], t1), p.zeta)
    melt_end = bp.e_init + integral_i_minus(p, bp.t0, bp.t_m)
    if abs(melt_end) > 1e-9 or abs(integral_i_plus(p, bp.t_m, bp.t_f)) > 1e-9:
        raise InconsistentBranchError("seasonal switching times do not match the parameters",
                                      melt_end=melt_end)
    return _growth_solve(integral_i_minus(p, bp.t_f, t1), p.zeta)


# --- direct simulation -----------------------------------------------------

def _next_break(t: float, breaks: list[float]) -> float:
    best = math.inf
    for r in breaks:
        cand = r + math.floor(t - r) + 1.0
        if cand - t < 1e-12:
            cand += 1.0
        best = min(best, cand)
    return best


def simulate_filippov(
    p: ForcingParams,
    e0: float,
    t_start: float = 0.0,
    t_end: float = 1.0,
    steps_per_year: int = DEFAULT_STEPS_PER_YEAR,
) -> Trajectory:
    """Integrate the Filippov system with RK4 and exact switching at ``E = 0``.

    Steps are aligned with the roots of ``F_-`` so that no step straddles the
    kink of the ice-side field.  Crossings of ``E = 0`` are located by
    bisection on the step length to 1e-12.  Reaching an attracting interval
    or touching a repelling interval raises :class:`SlidingEntryError` with
    the trajectory computed so far.
    """
    if not p.is_filippov:
        raise ParameterError("simulate_filippov needs delta_e == 0", key="delta_e", value=p.delta_e)
    if e0 == 0.0:
        raise BoundaryEvaluationError("initial state lies on E = 0", tau=t_start)
    if t_end <= t_start:
        raise ParameterError("t_end must exceed t_start", t_start=t_start, t_end=t_end)
    mp, ap, pp = harmonic(p, 1)
    mm, am, pm = harmonic(p, -1)
    args = (mp, ap, pp, mm, am, pm, p.b, p.zeta)
    roots = side_roots(p, -1)
    breaks = [roots.rising, roots.falling] if roots.has_roots else [0.0]
    h_nom = 1.0 / steps_per_year

    taus: list[np.ndarray] = [np.array([t_start])]
    es: list[np.ndarray] = [np.array([e0])]
    events: list[tuple[float, str]] = []
    t, e, side = float(t_start), float(e0), (1 if e0 > 0 else -1)

    def traj(halt=None):
        return Trajectory(np.concatenate(taus), np.concatenate(es), kind="simulation", events=events, halted=halt)

    while t < t_end - 1e-14:
        seg_end = min(_next_break(t, breaks), t_end)
        n = max(1, math.ceil((seg_end - t) / h_nom - 1e-9))
        h = (seg_end - t) / n
        ts_buf = np.empty(n + 1)
        es_buf = np.empty(n + 1)
        k = filippov_segment(e, t, n, h, side, *args, ts_buf, es_buf)
        taus.append(ts_buf[1:k + 1])
        es.append(es_buf[1:k + 1])
        if not np.all(np.isfinite(es_buf[1:k + 1])):
            raise IntegrationError("non-finite energy", tau=t)
        if k == n:
            t, e = seg_end, float(es_buf[n])
            continue
        t_k, e_k = float(ts_buf[k]), float(es_buf[k])
        lo, hi = 0.0, h
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            e_mid = filippov_step(t_k, e_k, mid, side, *args)
            if abs(e_mid) < 1e-12 and hi - lo < 1e-12:
                break
            if (e_mid > 0.0) == (side > 0):
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-15:
                break
        t = t_k + 0.5 * (lo + hi)
        e = 0.0
        taus.append(np.array([t]))
        es.append(np.array([0.0]))
        fp, fm = f_plus(p, t), f_minus(p, t)
        if side > 0:
            if fp >= 0.0:
                raise SlidingEntryError("trajectory touched a repelling sliding interval", traj("repelling"),
                                        tau=t, kind="repelling", f_plus=fp, f_minus=fm)
            if fm > 0.0:
                raise SlidingEntryError("trajectory entered an attracting sliding interval", traj("attracting"),
                                        tau=t, kind="attracting", f_plus=fp, f_minus=fm)
            events.append((t, "freeze-up"))
            side = -1
        else:
            if fm <= 0.0:
                raise SlidingEntryError("trajectory touched a repelling sliding interval", traj("repelling"),
                                        tau=t, kind="repelling", f_plus=fp, f_minus=fm)
            if fp <= 0.0:
                raise SlidingEntryError("trajectory entered an attracting sliding interval", traj("attracting"),
                                        tau=t, kind="attracting", f_plus=fp, f_minus=fm)
            events.append((t, "melt-out"))
            side = 1
    return traj()
