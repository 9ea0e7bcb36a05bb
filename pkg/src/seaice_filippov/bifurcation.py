"""Bifurcation points, diagrams, and parameter sweeps.

Grazing-sliding points ``l_o`` (ice-free branch) and ``l_i`` (ice-covered
branch) are roots of closed-form margins in ``l_m``.  Seasonal branches are
followed over an ``l_m`` grid; a change of two in the solution count with no
grazing in between brackets a saddle-node, which is then located as the
``l_m`` where the local extremum of the closure residual ``R(t_m)`` touches
zero.  That extremum condition is equivalent to ``mu = 1``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import branches as br
from .exceptions import InverseMappingError, ModelError, NotFoundError
from .forcing import ForcingParams, to_standard_form
from .param_map import StandardTarget, from_standard_form
from .sliding import detect_attracting, find_boundary_times
from .smoothed import poincare_fixed_points, section_curve

L_RANGE = (0.6, 1.6)
N_SWEEP = 400
SCAN_STEP = 0.0025
SCAN_GRID = 400

SADDLE_NODE = "saddle-node"
GRAZING_MELT = "grazing-melt"
GRAZING_FREEZE = "grazing-freeze"


# --- grazing-sliding of the perennial branches -----------------------------

def _margin_root(margin, l_range, n_scan, name):
    # both margins fall from positive to negative as l_m grows
    ls = np.linspace(*l_range, n_scan)
    vals = np.array([margin(l) for l in ls])
    for i in range(n_scan - 1):
        a, b = vals[i], vals[i + 1]
        if not (np.isfinite(a) and np.isfinite(b)):
            continue
        if a == 0.0:
            return float(ls[i])
        if a > 0.0 > b:
            return brentq(margin, ls[i], ls[i + 1], xtol=1e-13, rtol=1e-15)
    raise NotFoundError(f"no sign change of the {name} margin in l_m range", l_range=list(l_range),
                        scan_l_m=ls.tolist(), scan_margin=[None if not np.isfinite(v) else float(v) for v in vals])


def find_l_o(p: ForcingParams, l_range: tuple[float, float] = (0.0, 3.0), n_scan: int = 301) -> float:
    """``l_m`` where ``I_+(t_a, t_a + 1)`` changes sign (the ice-free branch grazes E = 0)."""
    return _margin_root(lambda l: br.ice_free_margin(p.with_lm(l)), l_range, n_scan, "ice-free")


def find_l_i(p: ForcingParams, l_range: tuple[float, float] = (0.0, 3.0), n_scan: int = 301) -> float:
    """``l_m`` where ``E_c*`` changes sign (the ice-covered branch grazes E = 0)."""
    return _margin_root(lambda l: br.ice_covered_margin(p.with_lm(l)), l_range, n_scan, "ice-covered")


# --- seasonal events -------------------------------------------------------

@dataclass(frozen=True)
class SeasonalEvent:
    kind: str
    l_m: float
    point: br.BranchPoint | None = None

    @property
    def min_e(self) -> float:
        return self.point.min_e if self.point is not None else math.nan

    def to_dict(self) -> dict:
        return {"kind": self.kind, "l_m": self.l_m, "point": None if self.point is None else self.point.to_dict()}


def _melt_grazing_residual(p: ForcingParams) -> float:
    dom = br.seasonal_domain(p)
    if dom is None:
        return math.nan
    fr, _, hi = dom
    r, _ = br._seasonal_residual(p, np.array([hi]), fr)
    return float(r[0])


def _freeze_grazing_residual(p: ForcingParams) -> float:
    dom = br.seasonal_domain(p)
    if dom is None:
        return math.nan
    fr, lo, _ = dom
    if lo <= fr.t_b:
        return math.nan
    r, _ = br._seasonal_residual(p, np.array([lo]), fr)
    return float(r[0])


def _roots_on_grid(fun, ls: np.ndarray) -> list[float]:
    vals = np.array([fun(l) for l in ls])
    out = []
    for i in range(len(ls) - 1):
        a, b = vals[i], vals[i + 1]
        if np.isfinite(a) and np.isfinite(b) and a * b < 0.0:
            g = lambda l: fun(l)
            try:
                out.append(brentq(g, ls[i], ls[i + 1], xtol=1e-13, rtol=1e-15))
            except ValueError:
                continue
    return out


def _grazing_point(p: ForcingParams, kind: str, l_m: float) -> SeasonalEvent:
    q = p.with_lm(l_m)
    dom = br.seasonal_domain(q)
    point = None
    if dom is not None:
        fr, lo, hi = dom
        t_m = hi if kind == GRAZING_MELT else lo
        point = br._seasonal_point(q, t_m, fr, grazing_lo=(kind == GRAZING_FREEZE))
    return SeasonalEvent(kind, l_m, point)


def seasonal_gs_boundaries(
    p: ForcingParams, l_range: tuple[float, float] = L_RANGE, step: float = SCAN_STEP
) -> list[SeasonalEvent]:
    """``l_m`` values where a seasonal orbit reaches an end of its melt-out or freeze-up window."""
    ls = _l_grid(l_range, step)
    events = [_grazing_point(p, GRAZING_MELT, l)
              for l in _roots_on_grid(lambda l: _melt_grazing_residual(p.with_lm(l)), ls)]
    events += [_grazing_point(p, GRAZING_FREEZE, l)
               for l in _roots_on_grid(lambda l: _freeze_grazing_residual(p.with_lm(l)), ls)]
    return sorted(events, key=lambda ev: ev.l_m)


def _l_grid(l_range, step):
    n = max(2, int(round((l_range[1] - l_range[0]) / step)) + 1)
    return np.linspace(l_range[0], l_range[1], n)


def _tm_roots(p: ForcingParams, l_m: float, n_grid: int) -> list[float]:
    return [bp.t_m for bp in br.seasonal_solutions(p.with_lm(l_m), n_grid=n_grid)]


def _vanishing_pair(more: list[float], fewer: list[float]) -> tuple[int, int] | None:
    used = set()
    for t in fewer:
        cands = [(abs(m - t), j) for j, m in enumerate(more) if j not in used]
        if cands:
            used.add(min(cands)[1])
    left = [j for j in range(len(more)) if j not in used]
    if len(left) != 2:
        return None
    return left[0], left[1]


def _fold_peak(p: ForcingParams, l_m: float, window: tuple[float, float], sigma: float) -> tuple[float, float]:
    """Max of ``sigma * R`` over the ``t_m`` window; nan when the domain is empty."""
    q = p.with_lm(l_m)
    dom = br.seasonal_domain(q)
    if dom is None:
        return math.nan, math.nan
    fr, lo, hi = dom
    a, b = max(window[0], lo), min(window[1], hi)
    if not b > a:
        return math.nan, math.nan
    ts = np.linspace(a, b, 201)
    vals = sigma * br._seasonal_residual(q, ts, fr)[0]
    i = int(np.argmax(vals))
    lo_t, hi_t = ts[max(i - 1, 0)], ts[min(i + 1, 200)]
    res = minimize_scalar(lambda t: -sigma * float(br._seasonal_residual(q, np.array([t]), fr)[0][0]),
                          bounds=(lo_t, hi_t), method="bounded", options={"xatol": 1e-13})
    if -res.fun >= vals[i]:
        return float(-res.fun), float(res.x)
    return float(vals[i]), float(ts[i])


def _refine_fold(p, l_more, l_fewer, roots_more, pair, n_grid):
    r1, r2 = roots_more[pair[0]], roots_more[pair[1]]
    q = p.with_lm(l_more)
    fr, _, _ = br.seasonal_domain(q)
    sigma = math.copysign(1.0, float(br._seasonal_residual(q, np.array([0.5 * (r1 + r2)]), fr)[0][0]))
    others = [r for j, r in enumerate(roots_more) if j not in pair]
    spread = max(r2 - r1, 2e-3 * (fr.t_c - fr.t_b))
    left = max([r1 - 4 * spread] + [0.5 * (r1 + o) for o in others if o < r1])
    right = min([r2 + 4 * spread] + [0.5 * (r2 + o) for o in others if o > r2])
    window = (left, right)
    h_more = _fold_peak(p, l_more, window, sigma)[0]
    h_less = _fold_peak(p, l_fewer, window, sigma)[0]
    if np.isfinite(h_more) and np.isfinite(h_less) and h_more > 0.0 > h_less:
        l_f = brentq(lambda l: _fold_peak(p, l, window, sigma)[0], l_more, l_fewer, xtol=1e-13, rtol=1e-15)
    else:
        # fall back to bisection on whether the pair still exists
        a, b = l_more, l_fewer
        n_more = len(roots_more)
        while abs(b - a) > 1e-11:
            m = 0.5 * (a + b)
            if len(_tm_roots(p, m, n_grid)) >= n_more:
                a = m
            else:
                b = m
        l_f = 0.5 * (a + b)
    _, t_star = _fold_peak(p, l_f, window, sigma)
    q = p.with_lm(l_f)
    dom = br.seasonal_domain(q)
    point = None
    if dom is not None and np.isfinite(t_star):
        point = br._seasonal_point(q, t_star, dom[0], grazing_lo=False)
    return SeasonalEvent(SADDLE_NODE, float(l_f), point)


def find_saddle_nodes(
    p: ForcingParams,
    l_range: tuple[float, float] = L_RANGE,
    step: float = SCAN_STEP,
    n_grid: int = SCAN_GRID,
    grazings: list[SeasonalEvent] | None = None,
    notes: list[str] | None = None,
) -> list[SeasonalEvent]:
    """Saddle-nodes of the seasonal branches in ``l_range``, sorted by ``l_m``.

    Cells of the ``l_m`` grid that also contain a grazing point are split
    until folds and grazings are separated.
    """
    if grazings is None:
        grazings = seasonal_gs_boundaries(p, l_range, step)
    g_ls = [ev.l_m for ev in grazings]
    ls = _l_grid(l_range, step)
    roots = [_tm_roots(p, l, n_grid) for l in ls]
    out: list[SeasonalEvent] = []

    def handle(a, b, ra, rb, depth=0):
        n_graz = sum(1 for g in g_ls if a < g <= b)
        delta = len(rb) - len(ra)
        if n_graz == 0:
            if delta == 0:
                return
            if abs(delta) == 2:
                more, fewer, l_more, l_fewer = (ra, rb, a, b) if delta < 0 else (rb, ra, b, a)
                pair = _vanishing_pair(more, fewer)
                if pair is not None:
                    out.append(_refine_fold(p, l_more, l_fewer, more, pair, n_grid))
                    return
        elif b - a <= 1e-4 and abs(delta) == n_graz:
            # isolated grazing endpoints explain the count change
            return
        if depth > 40 or b - a < 1e-9:
            if notes is not None:
                notes.append(f"unresolved seasonal count change near l_m={0.5 * (a + b):.9f}")
            return
        m = 0.5 * (a + b)
        rm = _tm_roots(p, m, n_grid)
        handle(a, m, ra, rm, depth + 1)
        handle(m, b, rm, rb, depth + 1)

    for i in range(len(ls) - 1):
        handle(ls[i], ls[i + 1], roots[i], roots[i + 1])
    return sorted(out, key=lambda ev: ev.l_m)


# --- bifurcation points ----------------------------------------------------

@dataclass
class BifurcationPoints:
    """Bifurcation values of ``l_m`` for one parameter set.

    ``l_sn1``/``l_sn2`` are the saddle-nodes with the highest/lowest minimum
    energy.  ``seasonal_gs`` lists the seasonal grazing-sliding endpoints.
    """

    l_o: float | None
    l_i: float | None
    l_sn1: float | None = None
    l_sn2: float | None = None
    seasonal_gs: list[SeasonalEvent] = field(default_factory=list)
    saddle_nodes: list[SeasonalEvent] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def gaps(self) -> list[tuple[float, float, str]]:
        """Gaps of the diagram, each bounded by two grazing-sliding points.

        The ice-free end ``l_o`` pairs with the nearest freeze-grazing
        endpoint and ``l_i`` with the nearest melt-grazing endpoint.
        Zero-width pairs (no albedo jump) are not gaps.
        """
        out = []
        for anchor, kind, label in ((self.l_o, GRAZING_FREEZE, "S1"), (self.l_i, GRAZING_MELT, "S2")):
            cands = [ev.l_m for ev in self.seasonal_gs if ev.kind == kind]
            if anchor is None or not cands:
                continue
            partner = min(cands, key=lambda l: abs(l - anchor))
            lo, hi = sorted((anchor, partner))
            if hi - lo > 1e-6:
                out.append((lo, hi, label))
        return out

    def to_dict(self) -> dict:
        return {
            "l_o": self.l_o, "l_i": self.l_i, "l_sn1": self.l_sn1, "l_sn2": self.l_sn2,
            "seasonal_gs": [ev.to_dict() for ev in self.seasonal_gs],
            "saddle_nodes": [ev.to_dict() for ev in self.saddle_nodes],
            "gaps": [list(g) for g in self.gaps()], "notes": list(self.notes),
        }


def find_bifurcation_points(
    p: ForcingParams,
    l_range: tuple[float, float] = L_RANGE,
    step: float = SCAN_STEP,
    n_grid: int = SCAN_GRID,
    saddle_nodes: bool = True,
) -> BifurcationPoints:
    """Grazing and saddle-node points in ``l_range``; ``saddle_nodes=False`` skips the fold search."""
    notes: list[str] = []
    try:
        l_o = find_l_o(p)
    except NotFoundError:
        l_o = None
        notes.append("l_o not found in [0, 3]")
    try:
        l_i = find_l_i(p)
    except NotFoundError:
        l_i = None
        notes.append("l_i not found in [0, 3]")
    gs = seasonal_gs_boundaries(p, l_range, step)
    sns = find_saddle_nodes(p, l_range, step, n_grid, grazings=gs, notes=notes) if saddle_nodes else []
    if any(n.startswith("unresolved") for n in notes):
        warnings.warn("some seasonal folds were not resolved on the l_m grid; reduce the step",
                      RuntimeWarning, stacklevel=2)
    l_sn1 = l_sn2 = None
    ranked = [ev for ev in sns if ev.point is not None]
    if ranked:
        ranked.sort(key=lambda ev: ev.min_e)
        l_sn1 = ranked[-1].l_m
        l_sn2 = ranked[0].l_m if len(ranked) > 1 else None
    return BifurcationPoints(l_o, l_i, l_sn1, l_sn2, gs, sns, notes)


# --- diagrams --------------------------------------------------------------

@dataclass(frozen=True)
class DiagramRow:
    l_m: float
    branch_kind: str
    branch_id: str
    min_e: float
    floquet: float
    stable: bool


DIAGRAM_COLUMNS = ("l_m", "branch_kind", "branch_id", "min_e", "floquet", "stable")


@dataclass
class Diagram:
    rows: list[DiagramRow]
    params: ForcingParams
    delta_e: float
    l_grid: np.ndarray
    points: BifurcationPoints | None = None
    events: list[DiagramRow] = field(default_factory=list)
    excluded: list[tuple[float, str]] = field(default_factory=list)
    saddle_node_pairs: int | None = None
    annotations: list[tuple[float, str]] = field(default_factory=list)

    @property
    def n_gaps(self) -> int:
        return len(self.points.gaps()) if self.points is not None else 0

    def branch(self, branch_id: str) -> list[DiagramRow]:
        return [r for r in self.rows if r.branch_id == branch_id]


def _refined_grid(base: np.ndarray, events: list[float], half_width: float = 0.02, step: float = 5e-4):
    extra = [np.arange(ev - half_width, ev + half_width + step / 2, step) for ev in events if np.isfinite(ev)]
    grid = np.concatenate([base] + extra) if extra else base
    lo, hi = base[0], base[-1]
    grid = grid[(grid >= lo) & (grid <= hi)]
    return np.unique(np.round(grid, 12))


def branch_diagram(
    p: ForcingParams,
    l_grid=None,
    n_grid: int = 2000,
    refine: bool = True,
    points: BifurcationPoints | None = None,
    exclude_attracting: bool = True,
) -> Diagram:
    """Filippov bifurcation diagram: every branch at every grid ``l_m`` plus event rows.

    Seasonal sub-branches are labelled ``seasonal-<segment>-<k>``: segments
    are the ``l_m`` intervals between consecutive seasonal events and ``k``
    orders solutions by ``t_m`` within a segment.  Grid points with
    attracting sliding are excluded and listed in ``excluded``.  With
    ``exclude_attracting=False`` they are kept and listed in ``annotations``
    instead: the periodic orbits found never meet ``E = 0`` inside the
    attracting interval, so they remain valid Filippov solutions.
    """
    base = np.linspace(*L_RANGE, N_SWEEP) if l_grid is None else np.asarray(l_grid, dtype=float)
    l_range = (float(base[0]), float(base[-1]))
    if points is None:
        points = find_bifurcation_points(p, l_range)
    ev_ls = [v for v in (points.l_o, points.l_i) if v is not None]
    ev_ls += [ev.l_m for ev in points.seasonal_gs + points.saddle_nodes]
    grid = _refined_grid(base, ev_ls) if refine else base
    seasonal_cuts = sorted(ev.l_m for ev in points.seasonal_gs + points.saddle_nodes)

    rows: list[DiagramRow] = []
    excluded: list[tuple[float, str]] = []
    notes: list[tuple[float, str]] = []
    for l in grid:
        q = p.with_lm(float(l))
        flag, witness = detect_attracting(q)
        if flag:
            msg = f"attracting sliding on [{witness[0]:.6f}, {witness[1]:.6f}]"
            if exclude_attracting:
                excluded.append((float(l), msg))
                continue
            notes.append((float(l), msg))
        for bp in (br.ice_free_branch(q), br.ice_covered_branch(q)):
            if bp is not None:
                rows.append(DiagramRow(float(l), bp.kind, bp.kind, bp.min_e, bp.floquet, bp.stable))
        seg = int(np.searchsorted(seasonal_cuts, l))
        for k, bp in enumerate(br.seasonal_solutions(q, n_grid=n_grid)):
            rows.append(DiagramRow(float(l), br.SEASONAL, f"seasonal-{seg}-{k}", bp.min_e, bp.floquet, bp.stable))

    events = []
    if points.l_o is not None:
        events.append(DiagramRow(points.l_o, "bifurcation", "l_o", 0.0, math.exp(-p.b), True))
    if points.l_i is not None:
        bp = br.ice_covered_branch(p.with_lm(points.l_i + 1e-12))
        e_b = bp.min_e if bp is not None else math.nan
        mu = bp.floquet if bp is not None else math.nan
        events.append(DiagramRow(points.l_i, "bifurcation", "l_i", e_b, mu, bool(mu < 1.0)))
    for name, val in (("l_sn1", points.l_sn1), ("l_sn2", points.l_sn2)):
        if val is None:
            continue
        ev = next(e for e in points.saddle_nodes if e.l_m == val)
        events.append(DiagramRow(val, "bifurcation", name, ev.min_e,
                                 ev.point.floquet if ev.point else math.nan, False))
    for i, ev in enumerate(points.seasonal_gs):
        events.append(DiagramRow(ev.l_m, "bifurcation", f"{ev.kind}-{i}", ev.min_e, math.inf, False))
    events.sort(key=lambda r: r.l_m)
    return Diagram(rows, p, p.delta_e, grid, points, events, excluded, annotations=notes)


def smoothed_diagram(p: ForcingParams, l_grid=None, method: str = "section", e_values=None) -> Diagram:
    """Bifurcation diagram of the smoothed system.

    ``method="section"`` traces the periodic orbits through their section
    energy (each section energy belongs to exactly one ``l_m``), so folds
    are resolved exactly; rows lie on the curve rather than on ``l_grid``.
    ``method="scan"`` runs :func:`poincare_fixed_points` at every grid ``l_m``.
    Saddle-node pairs are counted from the folds of the section curve.
    """
    base = np.linspace(*L_RANGE, N_SWEEP) if l_grid is None else np.asarray(l_grid, dtype=float)
    curve = section_curve(p, e_values)
    folds = curve.folds()
    rows: list[DiagramRow] = []
    if method == "section":
        cut = sorted(f["e"] for f in folds)
        for e, lm, slope, lo in zip(curve.e, curve.l_m, curve.slope, curve.min_e):
            if not np.isfinite(lm) or not base[0] <= lm <= base[-1]:
                continue
            seg = int(np.searchsorted(cut, e))
            rows.append(DiagramRow(float(lm), "smoothed", f"smoothed-{seg}", float(lo), float(slope), bool(slope < 1.0)))
        rows.sort(key=lambda r: (r.branch_id, r.l_m))
    elif method == "scan":
        for l in base:
            scan = poincare_fixed_points(p.with_lm(float(l)))
            for k, fp in enumerate(scan.fixed_points):
                rows.append(DiagramRow(float(l), "smoothed", f"fixed-{k}", fp.min_e, fp.slope, fp.stable))
    else:
        raise ValueError(f"unknown method {method!r}")
    events = [DiagramRow(f["l_m"], "bifurcation", f"fold-{i}", f["min_e"], 1.0, False)
              for i, f in enumerate(sorted(folds, key=lambda f: f["l_m"]))]
    return Diagram(rows, p, p.delta_e, base, None, events, [], saddle_node_pairs=len(folds) // 2)


# --- sliding widths at gap medians -----------------------------------------

_SWEEP_KEYS = {"dpsi": "delta_psi", "ftp": "f_tilde_plus", "ftm": "f_tilde_minus"}


@dataclass(frozen=True)
class WidthResult:
    varied: str
    value: float
    params: ForcingParams | None
    gap_s1: tuple[float, float] | None
    gap_s2: tuple[float, float] | None
    width_s1: float
    width_s2: float
    note: str = ""


def _default_target() -> StandardTarget:
    return StandardTarget.from_params(ForcingParams(l_m=1.0))


def sliding_width_sweep(varied: str, values, base: StandardTarget | None = None) -> list[WidthResult]:
    """Sliding-interval widths at the median ``l_m`` of each diagram gap.

    ``varied`` is ``dpsi``, ``ftp`` or ``ftm``; the other standard-form
    quantities keep the values of ``base`` (default: those of the default
    parameters).  ``|S1|`` is measured at the middle of the gap bounded by
    ``l_o`` and ``|S2|`` at the middle of the gap bounded by ``l_i``.
    """
    if varied not in _SWEEP_KEYS:
        raise ValueError(f"varied must be one of {sorted(_SWEEP_KEYS)}")
    base = _default_target() if base is None else base
    out = []
    for v in values:
        target = base.replace(**{_SWEEP_KEYS[varied]: float(v)})
        try:
            q = from_standard_form(target).replace(l_m=None)
        except InverseMappingError as exc:
            out.append(WidthResult(varied, float(v), None, None, None, math.nan, math.nan, f"mapping failed: {exc}"))
            continue
        pts = find_bifurcation_points(q, saddle_nodes=False)
        gaps = {label: (lo, hi) for lo, hi, label in pts.gaps()}
        w1 = w2 = math.nan
        if "S1" in gaps:
            w1 = find_boundary_times(q.with_lm(0.5 * sum(gaps["S1"]))).width_s1
        if "S2" in gaps:
            w2 = find_boundary_times(q.with_lm(0.5 * sum(gaps["S2"]))).width_s2
        note = "" if len(gaps) == 2 else f"gaps found: {sorted(gaps)}"
        out.append(WidthResult(varied, float(v), q, gaps.get("S1"), gaps.get("S2"), w1, w2, note))
    return out


# --- jump in minimum energy ------------------------------------------------

@dataclass(frozen=True)
class JumpResult:
    l_i: float
    delta_min_e: float
    outcome: str
    params: ForcingParams | None = None
    landing_min_e: float = math.nan
    covered_min_e: float = math.nan
    attracting: bool = False

    def to_dict(self) -> dict:
        return {"l_i": self.l_i, "delta_min_e": self.delta_min_e, "outcome": self.outcome,
                "landing_min_e": self.landing_min_e, "covered_min_e": self.covered_min_e,
                "attracting": self.attracting,
                "params": None if self.params is None else self.params.to_dict()}


def jump_min_e(p: ForcingParams, n_grid: int = 2000, exclude_attracting: bool = True) -> JumpResult:
    """Size of the drop in ``min E`` when the ice-covered branch ends at ``l_i``.

    The landing orbit is the stable seasonal orbit at ``l_i`` whose minimum
    energy is nearest the ice-covered endpoint; without one, the ice-free
    orbit.  Attracting sliding at ``l_i`` gives ``attracting-excluded``
    unless ``exclude_attracting`` is False, in which case the outcome is
    computed and ``attracting`` is set.
    """
    base = p.replace(l_m=None)
    try:
        l_i = find_l_i(base)
    except NotFoundError:
        return JumpResult(math.nan, math.nan, "no-ice-covered-branch", base)
    q = base.with_lm(l_i)
    attracting = detect_attracting(q)[0]
    if attracting and exclude_attracting:
        return JumpResult(l_i, math.nan, "attracting-excluded", base, attracting=True)
    season = br._melt_season(q)
    melt = br.integral_i_minus(q, *season)
    e_cov = q.zeta * br.mean_f_minus(q) / melt - 0.5 * melt
    stable = [bp for bp in br.seasonal_solutions(q, n_grid=n_grid) if bp.stable]
    if stable:
        land = min(stable, key=lambda bp: abs(bp.min_e - e_cov))
        return JumpResult(l_i, abs(land.min_e - e_cov), "to-seasonal", base, land.min_e, e_cov, attracting)
    free = br.ice_free_branch(q)
    if free is not None:
        return JumpResult(l_i, abs(free.min_e - e_cov), "to-ice-free", base, free.min_e, e_cov, attracting)
    return JumpResult(l_i, math.nan, "no-stable-landing", base, math.nan, e_cov, attracting)


def grid_params(delta_psi: float, delta_alpha: float, base: ForcingParams | None = None) -> ForcingParams:
    """Parameters for one cell of the (delta_psi, delta_alpha) jump grid.

    Amplitudes come from the default ``(S_a, L_a, phi)`` with the new
    ``delta_alpha``; the inverse map then imposes ``delta_psi``.
    """
    base = ForcingParams() if base is None else base
    ref = base.replace(delta_alpha=delta_alpha, l_m=1.0)
    sf = to_standard_form(ref)
    target = StandardTarget(sf.f_bar_plus, sf.f_bar_minus, sf.f_tilde_plus, sf.f_tilde_minus, delta_psi)
    return from_standard_form(target, b=base.b, zeta=base.zeta, delta_e=base.delta_e).replace(l_m=None)


def jump_grid(delta_psi_values, delta_alpha_values, base: ForcingParams | None = None,
              exclude_attracting: bool = True) -> list[list[JumpResult]]:
    """``JumpResult`` matrix indexed ``[i_delta_alpha][j_delta_psi]``."""
    out = []
    for da in delta_alpha_values:
        row = []
        for dpsi in delta_psi_values:
            try:
                q = grid_params(float(dpsi), float(da), base)
            except (InverseMappingError, ModelError) as exc:
                row.append(JumpResult(math.nan, math.nan, "mapping-failed:" + type(exc).__name__))
                continue
            row.append(jump_min_e(q, exclude_attracting=exclude_attracting))
        out.append(row)
    return out


# --- bifurcation sets ------------------------------------------------------

BIFSET_COLUMNS = ("value", "l_o", "l_i", "l_sn1", "l_sn2", "excluded")


@dataclass(frozen=True)
class BifurcationSetRow:
    value: float
    l_o: float
    l_i: float
    l_sn1: float
    l_sn2: float
    excluded: str = ""


@dataclass
class BifurcationSet:
    secondary: str
    rows: list[BifurcationSetRow]
    base: ForcingParams

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)


def _nan(x):
    return math.nan if x is None else float(x)


def bifurcation_set(
    secondary: str, values, base: ForcingParams | None = None, l_range: tuple[float, float] | None = None
) -> BifurcationSet:
    """``l_o``, ``l_i``, ``l_sn1``, ``l_sn2`` as functions of ``delta_alpha`` or ``phi``.

    Missing saddle-nodes are nan.  ``excluded`` names the reason a value is
    outside the analysis: no melt season (``t_b = t_c``), attracting sliding,
    or a failed computation.
    """
    if secondary not in ("delta_alpha", "phi"):
        raise ValueError("secondary must be 'delta_alpha' or 'phi'")
    base = ForcingParams() if base is None else base.replace(l_m=None)
    rows = []
    for v in values:
        q = base.replace(**{secondary: float(v)})
        try:
            pts = find_bifurcation_points(q, l_range or _auto_range(q))
        except ModelError as exc:
            rows.append(BifurcationSetRow(float(v), math.nan, math.nan, math.nan, math.nan, f"failed: {exc}"))
            continue
        reason = _exclusion(q, pts)
        rows.append(BifurcationSetRow(float(v), _nan(pts.l_o), _nan(pts.l_i), _nan(pts.l_sn1), _nan(pts.l_sn2),
                                      reason))
    return BifurcationSet(secondary, rows, base)


def _auto_range(q: ForcingParams) -> tuple[float, float]:
    marks = []
    for finder in (find_l_o, find_l_i):
        try:
            marks.append(finder(q))
        except NotFoundError:
            pass
    if not marks:
        return L_RANGE
    return max(0.0, min(marks) - 0.4), max(marks) + 0.1


def _exclusion(q: ForcingParams, pts: BifurcationPoints) -> str:
    probes = [v for v in (pts.l_o, pts.l_i) if v is not None]
    for l in probes:
        qq = q.with_lm(l)
        if detect_attracting(qq)[0]:
            return "attracting sliding"
        si = find_boundary_times(qq)
        if si.minus is not None and not si.minus.has_roots:
            return "no repelling interval: t_b = t_c"
    if pts.l_i is None:
        return "no ice-covered grazing"
    return ""
