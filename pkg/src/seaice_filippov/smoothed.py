"""The albedo-smoothed system (``delta_e > 0``): one-year maps, fixed points, branch curves.

The default integrator is an adaptive Dormand-Prince 5(4) pair (rtol = atol
= 1e-10, steps capped at 1e-3 year while ``|E| < 4 delta_e``) that carries the
variational equation, so map slopes come out with the map itself.
``method="rk4"`` selects fixed-step RK4 and ``method="dop853"`` routes
through :func:`scipy.integrate.solve_ivp` as an independent cross-check.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq, minimize_scalar

from . import _kernels
from .exceptions import IntegrationError, ParameterError
from .forcing import TWO_PI, ForcingParams, rhs

RTOL = 1e-10
ATOL = 1e-10
H_NEAR = 1e-3
H_FAR = 0.02
RK4_STEPS = 4096

METHODS = ("dp45", "rk4", "dop853")


@dataclass(frozen=True)
class YearResult:
    image: float
    slope: float
    min_e: float
    max_e: float


def _require_smoothed(p: ForcingParams) -> None:
    if p.delta_e <= 0.0:
        raise ParameterError("the smoothed system needs delta_e > 0", key="delta_e", value=p.delta_e)


def _dp45_args(p: ForcingParams, l_m: float | None = None):
    return (p.lm if l_m is None else l_m, p.delta_alpha, p.s_a, p.l_a, p.phi, p.delta_e, p.b, p.zeta,
            RTOL, ATOL, H_NEAR, H_FAR)


def _rk4_tables(p: ForcingParams, t0: float, n: int):
    tt = t0 + np.arange(2 * n + 1) * (0.5 / n)
    sw = 1.0 - p.s_a * np.cos(TWO_PI * tt)
    lw = p.l_a * np.cos(TWO_PI * (tt - p.phi))
    return sw, lw


def _rk4_year(p: ForcingParams, e0: float, t0: float, n: int = RK4_STEPS) -> YearResult:
    sw, lw = _rk4_tables(p, t0, n)
    h = 1.0 / n

    def run(e):
        return _kernels.smoothed_run(e, n, h, p.lm, sw, lw, p.delta_alpha, p.delta_e, p.b, p.zeta)

    image, lo, hi = run(e0)
    d = 1e-6
    slope = (run(e0 + d)[0] - run(e0 - d)[0]) / (2 * d)
    return YearResult(image, slope, lo, hi)


def _dop853_year(p: ForcingParams, e0: float, t0: float) -> YearResult:
    def fun(t, y):
        return [rhs(p, t, y[0])]

    sol = solve_ivp(fun, (t0, t0 + 1.0), [e0], method="DOP853", rtol=RTOL, atol=ATOL,
                    max_step=H_NEAR, dense_output=True)
    if not sol.success or not np.isfinite(sol.y[0, -1]):
        raise IntegrationError("DOP853 integration failed", message_detail=sol.message, e0=e0, t0=t0)
    ts = np.linspace(t0, t0 + 1.0, 4097)
    samples = sol.sol(ts)[0]
    d = 1e-6
    up = solve_ivp(fun, (t0, t0 + 1.0), [e0 + d], method="DOP853", rtol=RTOL, atol=ATOL, max_step=H_NEAR)
    dn = solve_ivp(fun, (t0, t0 + 1.0), [e0 - d], method="DOP853", rtol=RTOL, atol=ATOL, max_step=H_NEAR)
    slope = (up.y[0, -1] - dn.y[0, -1]) / (2 * d)
    return YearResult(float(sol.y[0, -1]), float(slope), float(samples.min()), float(samples.max()))


def year_result(p: ForcingParams, e0: float, t0: float = 0.0, method: str = "dp45") -> YearResult:
    """Image, map slope and min/max of ``E`` over one year from ``(t0, e0)``."""
    _require_smoothed(p)
    if method == "dp45":
        e, slope, lo, hi, _, status, t_fail = _kernels.dp45_run(float(e0), t0, t0 + 1.0, *_dp45_args(p))
        if status != 0:
            raise IntegrationError("non-finite state in the smoothed integration", e0=float(e0), tau=t_fail,
                                   status=int(status))
        return YearResult(e, slope, lo, hi)
    if method == "rk4":
        res = _rk4_year(p, float(e0), t0)
    elif method == "dop853":
        res = _dop853_year(p, float(e0), t0)
    else:
        raise ParameterError(f"unknown method {method!r}", key="method", choices=list(METHODS))
    if not math.isfinite(res.image):
        raise IntegrationError("non-finite state in the smoothed integration", e0=float(e0), tau=t0)
    return res


def integrate_year(p: ForcingParams, e0: float, t0: float = 0.0, method: str = "dp45") -> float:
    """One-period flow map ``P(e0)`` of the smoothed system at section phase ``t0``."""
    return year_result(p, e0, t0, method).image


def year_map(p: ForcingParams, e0s, t0: float = 0.0, l_m: float | None = None) -> np.ndarray:
    """Vectorized adaptive map: rows ``(image, slope, min_e, max_e, status)`` per initial energy."""
    _require_smoothed(p)
    e0s = np.ascontiguousarray(e0s, dtype=float)
    return _kernels.dp45_run_many(e0s, t0, t0 + 1.0, *_dp45_args(p, l_m))


@dataclass(frozen=True)
class FixedPoint:
    e_star: float
    slope: float
    stable: bool
    min_e: float
    max_e: float
    residual: float
    flags: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {"e_star": self.e_star, "slope": self.slope, "stable": self.stable, "min_e": self.min_e,
                "max_e": self.max_e, "residual": self.residual, "flags": list(self.flags)}


@dataclass
class PoincareScan:
    e_grid: np.ndarray
    e_mapped: np.ndarray
    fixed_points: list[FixedPoint]
    params: ForcingParams
    t0: float
    warnings: list[str] = field(default_factory=list)

    @property
    def g(self) -> np.ndarray:
        return self.e_grid - self.e_mapped


def poincare_fixed_points(
    p: ForcingParams,
    t0: float = 0.0,
    e_range: tuple[float, float] = (-3.0, 2.0),
    n_grid: int = 512,
    method: str = "dp45",
) -> PoincareScan:
    """Fixed points of the one-year map from sign changes of ``G(E) = E - P(E)``.

    Grid images that are not finite (runaway cooling) are left as nan and do
    not produce roots.  Adjacent sign changes trigger a warning suggesting a
    finer grid, since a root pair could hide between two samples.
    """
    _require_smoothed(p)
    if n_grid < 64:
        raise ParameterError("n_grid must be at least 64", key="n_grid", value=n_grid)
    lo, hi = e_range
    if not hi > lo:
        raise ParameterError("e_range must be increasing", e_range=list(e_range))
    grid = np.linspace(lo, hi, n_grid)
    if method == "dp45":
        rows = year_map(p, grid, t0)
        mapped = np.where(rows[:, 4] == 0, rows[:, 0], np.nan)
    else:
        mapped = np.array([_safe_image(p, e, t0, method) for e in grid])
    g = grid - mapped
    notes: list[str] = []
    changes = [i for i in range(n_grid - 1) if np.isfinite(g[i]) and np.isfinite(g[i + 1])
               and (g[i] == 0.0 or g[i] * g[i + 1] < 0.0)]
    if any(b - a == 1 for a, b in zip(changes, changes[1:])):
        msg = f"adjacent sign changes of G on the grid; increase n_grid above {n_grid}"
        notes.append(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)

    def resid(e):
        return e - integrate_year(p, e, t0, method)

    fps = []
    for i in changes:
        e_star = grid[i] if g[i] == 0.0 else brentq(resid, grid[i], grid[i + 1], xtol=1e-12, rtol=1e-15)
        res = year_result(p, e_star, t0, method)
        flags = []
        if res.slope <= 0.0:
            flags.append("nonpositive-slope")
        residual = abs(res.image - e_star)
        if residual > 1e-9:
            flags.append("residual-above-tolerance")
        fps.append(FixedPoint(float(e_star), float(res.slope), bool(res.slope < 1.0), float(res.min_e),
                              float(res.max_e), float(residual), tuple(flags)))
    return PoincareScan(grid, mapped, fps, p, t0, notes)


def _safe_image(p, e, t0, method):
    try:
        return integrate_year(p, e, t0, method)
    except IntegrationError:
        return math.nan


@dataclass
class SectionCurve:
    """Smoothed periodic orbits parametrized by their section energy.

    The map image decreases strictly with ``l_m`` (every case of the field
    has negative ``l_m``-derivative), so each section energy ``E`` belongs to
    at most one periodic orbit, at ``l_m = Lambda(E)``.  Folds of the
    bifurcation diagram are the interior extrema of ``Lambda``.
    """

    e: np.ndarray
    l_m: np.ndarray
    slope: np.ndarray
    min_e: np.ndarray
    max_e: np.ndarray
    params: ForcingParams
    t0: float

    @property
    def stable(self) -> np.ndarray:
        return self.slope < 1.0

    def folds(self) -> list[dict]:
        """Refined interior extrema of ``Lambda`` as ``{"l_m", "e", "min_e", "kind"}``."""
        out = []
        lam = self.l_m
        for i in range(1, len(lam) - 1):
            if not (np.isfinite(lam[i - 1]) and np.isfinite(lam[i]) and np.isfinite(lam[i + 1])):
                continue
            d0, d1 = lam[i] - lam[i - 1], lam[i + 1] - lam[i]
            if d0 * d1 < 0.0:
                e_f, l_f = _refine_fold(self.params, self.t0, self.e[i - 1], self.e[i + 1], d0 > 0)
                res = year_result(self.params.with_lm(l_f), e_f, self.t0)
                out.append({"l_m": l_f, "e": e_f, "min_e": res.min_e, "kind": "max" if d0 > 0 else "min"})
        return out


def section_lm(p: ForcingParams, e: float, t0: float = 0.0, bracket: tuple[float, float] = (0.0, 3.0)) -> float:
    """``Lambda(E)``: the ``l_m`` at which ``E`` is a fixed point of the map, nan if outside ``bracket``."""
    base = p if p.l_m is not None else p.with_lm(1.0)

    def g(lm):
        out = _kernels.dp45_run(e, t0, t0 + 1.0, *_dp45_args(base, lm))
        if out[5] != 0:
            return -math.inf
        return out[0] - e

    lo, hi = bracket
    g_lo, g_hi = g(lo), g(hi)
    if not (g_lo > 0.0 > g_hi):
        return math.nan
    return brentq(g, lo, hi, xtol=1e-13, rtol=1e-15)


def _refine_fold(p, t0, e_lo, e_hi, is_max):
    sign = -1.0 if is_max else 1.0
    res = minimize_scalar(lambda e: sign * section_lm(p, e, t0), bounds=(e_lo, e_hi), method="bounded",
                          options={"xatol": 1e-9})
    return float(res.x), float(sign * res.fun)


def section_curve(
    p: ForcingParams,
    e_values=None,
    t0: float = 0.0,
    bracket: tuple[float, float] = (0.0, 3.0),
) -> SectionCurve:
    """Trace ``Lambda(E)`` over section energies (default 561 points on [-1.2, 1.6])."""
    _require_smoothed(p)
    es = np.linspace(-1.2, 1.6, 561) if e_values is None else np.asarray(e_values, dtype=float)
    base = p if p.l_m is not None else p.with_lm(1.0)
    lam = np.array([section_lm(base, e, t0, bracket) for e in es])
    slope = np.full_like(es, np.nan)
    lo = np.full_like(es, np.nan)
    hi = np.full_like(es, np.nan)
    for i, (e, lm) in enumerate(zip(es, lam)):
        if np.isfinite(lm):
            r = year_result(base.with_lm(lm), e, t0)
            slope[i], lo[i], hi[i] = r.slope, r.min_e, r.max_e
    return SectionCurve(es, lam, slope, lo, hi, base, t0)
