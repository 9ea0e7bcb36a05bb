"""Acceptance criteria, one test each, at the stated tolerances.

Every test appends one ``CRITERION n: PASS|FAIL`` line to the terminal
summary before asserting, so a full run lists all outcomes together.
"""

import json
import math

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from seaice_filippov import (
    ForcingParams,
    StandardTarget,
    all_branches,
    branch_diagram,
    find_boundary_times,
    from_standard_form,
    grid_params,
    ice_covered_branch,
    ice_free_branch,
    jump_min_e,
    orbit_energy,
    poincare_fixed_points,
    seasonal_solutions,
    simulate_filippov,
    sliding_width_sweep,
    smoothed_diagram,
    to_standard_form,
)
from seaice_filippov.cli import WIDTH_DEFAULTS, main
from seaice_filippov.forcing import wrap_angle
from seaice_filippov.sliding import TWO_REPELLING

import oracles
from reference import TABLE_ROWS

P = ForcingParams()
DEFAULT_TARGET = StandardTarget.from_params(P.with_lm(1.0))
KEYS = {"dpsi": "delta_psi", "ftp": "f_tilde_plus", "ftm": "f_tilde_minus"}


def report(n, ok, detail):
    line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def info(n, detail):
    line = f"    criterion {n} note: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def map_params_cli(target, tmp_path, capsys):
    f = tmp_path / "target.json"
    f.write_text(json.dumps(target.to_dict()))
    code = main(["map-params", str(f)])
    out, err = capsys.readouterr()
    if code != 0:
        return None, err
    return ForcingParams.from_dict(json.loads(out)["params"]), ""


def table_misses(rows_params):
    misses = []
    for row, q in rows_params:
        varied, dpsi, ftp, ftm, s_a, l_a, phi = row
        if q is None:
            misses.append(f"{varied}={row[1:4]} mapping failed")
            continue
        for name, got, want in (("S_a", q.s_a, s_a), ("L_a", q.l_a, l_a), ("phi", q.phi, phi)):
            if abs(got - want) > 0.01 + 1e-12:
                misses.append(f"{varied} row {row[1:4]}: {name}={got:.4f} vs {want:.2f}")
    return misses


def test_criterion_1_table(tmp_path, capsys):
    # other standard-form quantities at their exact default values, the varied one as printed
    exact, printed, round_trip = [], [], []
    for row in TABLE_ROWS:
        varied, dpsi, ftp, ftm = row[:4]
        t_exact = DEFAULT_TARGET.replace(**{KEYS[varied]: {"dpsi": dpsi, "ftp": ftp, "ftm": ftm}[varied]})
        t_printed = StandardTarget(DEFAULT_TARGET.f_bar_plus, DEFAULT_TARGET.f_bar_minus, ftp, ftm, dpsi)
        q_exact, _ = map_params_cli(t_exact, tmp_path, capsys)
        q_printed, _ = map_params_cli(t_printed, tmp_path, capsys)
        exact.append((row, q_exact))
        printed.append((row, q_printed))
        if q_exact is not None:
            sf = to_standard_form(q_exact)
            round_trip.append(max(abs(sf.f_tilde_plus - t_exact.f_tilde_plus),
                                  abs(sf.f_tilde_minus - t_exact.f_tilde_minus),
                                  abs(wrap_angle(sf.delta_psi - t_exact.delta_psi))))
    miss_exact = table_misses(exact)
    miss_printed = table_misses(printed)
    rt = max(round_trip) if round_trip else math.nan
    info(1, f"printed-values reading misses {len(miss_printed)} cells: {miss_printed}")
    ok = not miss_exact and len(round_trip) == 12 and rt <= 1e-9
    report(1, ok, f"12 rows, exact-default reading misses {len(miss_exact)} cells {miss_exact}; "
                  f"round-trip max error {rt:.2e}")


def test_criterion_2_standard_form():
    sf = to_standard_form(P.replace(l_m=1.0))
    ok = (abs(sf.f_tilde_plus - 2.64) <= 0.01 and abs(sf.f_tilde_minus - 1.41) <= 0.01
          and abs(sf.delta_psi + 0.21) <= 0.01)
    report(2, ok, f"F~+={sf.f_tilde_plus:.4f} F~-={sf.f_tilde_minus:.4f} dpsi={sf.delta_psi:.4f}")


def _seasonal_samples(rng, n):
    psi051 = from_standard_form(DEFAULT_TARGET.replace(delta_psi=0.51))
    out = []
    while len(out) < n:
        if rng.random() < 0.7:
            p = P.with_lm(rng.uniform(0.85, 0.96))
        else:
            p = psi051.with_lm(rng.uniform(1.14, 1.245))
        sols = [b for b in seasonal_solutions(p) if not any("grazing" in f for f in b.flags)]
        if sols:
            out.append((p, sols[int(rng.integers(len(sols)))]))
    return out


def test_criterion_3_floquet():
    rng = np.random.default_rng(31)
    # ice-free: the formula is exactly exp(-B); ice-covered: 10^3 draws where the branch exists
    free_err = 0.0
    covered = []
    while len(covered) < 1000:
        p = ForcingParams(l_m=rng.uniform(0.3, 2.0), delta_alpha=rng.uniform(0.05, 0.8),
                          s_a=rng.uniform(0.0, 3.0), l_a=rng.uniform(0.0, 2.0), phi=rng.uniform(-0.5, 0.5),
                          b=rng.uniform(0.2, 1.0), zeta=rng.uniform(0.05, 0.3))
        bp = ice_free_branch(p)
        if bp is not None:
            free_err = max(free_err, abs(bp.floquet - math.exp(-p.b)))
        bp = ice_covered_branch(p)
        if bp is not None:
            covered.append(bp.floquet)
    covered = np.array(covered)
    cov_ok = bool(np.all((covered > 0) & (covered < 1)))

    rel = []
    for p, bp in _seasonal_samples(rng, 50):
        # adaptive extrapolated differences; fixed steps are too coarse next to grazing where mu is large
        fd = oracles.map_derivative(p, bp.e_init, bp.t0)
        rel.append(abs(fd - bp.floquet) / abs(bp.floquet))
    worst = max(rel)
    ok = free_err == 0.0 and cov_ok and worst <= 1e-4
    report(3, ok, f"ice-free |mu-exp(-B)| max {free_err:.1e}; ice-covered mu in "
                  f"[{covered.min():.4f}, 1 - {1 - covered.max():.1e}] over 1000 draws; "
                  f"seasonal max rel FD error {worst:.2e} over 50 points")


@pytest.fixture(scope="module")
def default_diagram():
    return branch_diagram(P)


def test_criterion_4_topology(default_diagram):
    pts = default_diagram.points
    gaps = pts.gaps()
    sns = sorted(ev.l_m for ev in pts.saddle_nodes)
    checks = {"two gaps": len(gaps) == 2, "two saddle-nodes": len(sns) == 2}
    detail = f"gaps {[(round(a, 5), round(b, 5), s) for a, b, s in gaps]}; saddle-nodes {[round(s, 5) for s in sns]}"
    if len(sns) == 2 and pts.l_i is not None and pts.l_o is not None:
        tiny = min(sns, key=lambda s: abs(s - pts.l_i))
        large = max(sns, key=lambda s: abs(s - pts.l_i))
        extent = abs(tiny - pts.l_i)
        checks["tiny within 0.02 of l_i"] = extent <= 0.02
        checks["tiny extent < 0.05"] = extent < 0.05
        # stated order under a downward sweep: l_i, tiny saddle-node, large saddle-node, l_o
        seq = [pts.l_i, tiny, large, pts.l_o]
        checks["stated order l_i > sn_tiny > sn_large > l_o"] = all(a > b for a, b in zip(seq, seq[1:]))
        found = sorted([("l_i", pts.l_i), ("sn_tiny", tiny), ("sn_large", large), ("l_o", pts.l_o)],
                       key=lambda kv: -kv[1])
        detail += f"; downward order found {[k for k, _ in found]}; tiny loop extent {extent:.4f}"
    failed = [k for k, v in checks.items() if not v]
    report(4, not failed, detail + (f"; failed: {failed}" if failed else ""))


def test_criterion_5_smoothing():
    pairs = {de: smoothed_diagram(P.replace(delta_e=de)).saddle_node_pairs for de in (0.08, 0.02)}
    ok = pairs[0.08] == 1 and pairs[0.02] == 2
    report(5, ok, f"saddle-node pairs: dE=0.08 -> {pairs[0.08]}, dE=0.02 -> {pairs[0.02]}")


def test_criterion_6_convergence():
    # each smoothed stable fixed point is paired with the nearest stable Filippov orbit value at t0 = 0
    widths = (0.08, 0.04, 0.02)
    problems, tracks, unmatched = [], [], []
    for l_m in (0.92, 1.10, 1.25):
        p = P.with_lm(l_m)
        fil = {bp.kind + (f"@{bp.t_m:.3f}" if bp.t_m else ""): float(orbit_energy(bp, p, 0.0))
               for bp in all_branches(p) if bp.stable}
        dev: dict[str, dict[float, float]] = {k: {} for k in fil}
        for de in widths:
            for fp in poincare_fixed_points(p.replace(delta_e=de)).fixed_points:
                if not fp.stable:
                    continue
                key = min(fil, key=lambda k: abs(fil[k] - fp.e_star))
                d = abs(fil[key] - fp.e_star)
                dev[key][de] = min(d, dev[key].get(de, math.inf))
        for key, by_de in dev.items():
            if not by_de:
                unmatched.append(f"L={l_m} {key}")
                continue
            seq = [by_de[de] for de in widths if de in by_de]
            mono = all(b <= a for a, b in zip(seq, seq[1:]))
            final_de = min(by_de)
            final_ok = by_de[final_de] <= 3 * final_de
            tracks.append(f"L={l_m} {key}: {['%.1e' % s for s in seq]}")
            if not (mono and final_ok and 0.02 in by_de):
                problems.append(f"L={l_m} {key}")
    if unmatched:
        info(6, f"stable Filippov orbits with no nearby smoothed fixed point at these dE: {unmatched}")
    report(6, not problems, f"{len(tracks)} tracks; " + "; ".join(tracks)
           + (f"; failing {problems}" if problems else ""))


def test_criterion_7_jump():
    res0 = jump_min_e(P)
    q = grid_params(0.27, 0.3)
    res1 = jump_min_e(q)
    checks = {
        "defaults": abs(res0.delta_min_e - 0.04) <= 0.02,
        "grid cell": abs(res1.delta_min_e - 0.30) <= 0.05,
        "S_a": abs(q.s_a - 1.68) <= 0.05,
        "L_a": abs(q.l_a - 1.03) <= 0.05,
        "phi": abs(q.phi + 0.24) <= 0.02,
    }
    failed = [k for k, v in checks.items() if not v]
    report(7, not failed, f"defaults {res0.delta_min_e:.4f} ({res0.outcome}); (0.27, 0.3) {res1.delta_min_e:.4f} "
                          f"({res1.outcome}) with S_a={q.s_a:.3f} L_a={q.l_a:.3f} phi={q.phi:.3f}"
                          + (f"; failed: {failed}" if failed else ""))


def test_criterion_8_widths():
    dpsi = {r.value: r for r in sliding_width_sweep("dpsi", WIDTH_DEFAULTS["dpsi"])}
    checks = {
        "dpsi=-0.21 S1>S2": dpsi[-0.21].width_s1 > dpsi[-0.21].width_s2,
        "dpsi=0.51 S2>S1": dpsi[0.51].width_s2 > dpsi[0.51].width_s1,
    }
    parts = [f"dpsi -0.21: {dpsi[-0.21].width_s1:.4f}/{dpsi[-0.21].width_s2:.4f}",
             f"dpsi 0.51: {dpsi[0.51].width_s1:.4f}/{dpsi[0.51].width_s2:.4f}"]
    for varied in ("ftp", "ftm"):
        for r in sliding_width_sweep(varied, WIDTH_DEFAULTS[varied]):
            checks[f"{varied}={r.value} S2<S1"] = r.width_s2 < r.width_s1
            parts.append(f"{varied} {r.value}: {r.width_s1:.4f}/{r.width_s2:.4f}")
    failed = [k for k, v in checks.items() if not v]
    report(8, not failed, "|S1|/|S2| " + "; ".join(parts) + (f"; failed: {failed}" if failed else ""))


def test_criterion_9_oracles():
    rng = np.random.default_rng(9)
    sets, worst, count_mismatch = 0, 0.0, []
    # feasible: two repelling intervals and at least one seasonal orbit found by the brute-force scan
    while sets < 10:
        p = ForcingParams(l_m=rng.uniform(0.85, 1.0), delta_alpha=rng.uniform(0.3, 0.55),
                          s_a=rng.uniform(1.3, 1.7), l_a=rng.uniform(0.6, 0.9), phi=rng.uniform(0.1, 0.2))
        if find_boundary_times(p).classification != TWO_REPELLING:
            continue
        brute = oracles.brute_force_seasonal(p, n=2000)
        if not brute:
            continue
        sets += 1
        got = [(bp.t_m, bp.t_f) for bp in seasonal_solutions(p)]
        if len(got) != len(brute):
            count_mismatch.append((p.to_dict(), len(got), len(brute)))
            continue
        for (a, b), (c, d) in zip(got, brute):
            worst = max(worst, abs(a - c), abs(b - d))

    sim_fail, n_stable = [], 0
    for _ in range(20):
        l_m, e0 = rng.uniform(0.6, 1.6), rng.uniform(-1.0, 1.5)
        p = P.with_lm(l_m)
        stable = [bp for bp in all_branches(p) if bp.stable]
        if not stable:
            continue
        n_stable += 1
        tr = simulate_filippov(p, e0, 0.0, 60.0)
        dist = min(abs(tr.e[-1] - orbit_energy(bp, p, 60.0)) for bp in stable)
        if not dist < 1e-6:
            mu = max(bp.floquet for bp in stable)
            sim_fail.append(f"L={l_m:.4f} E0={e0:.3f} dist={dist:.1e} (max mu {mu:.3f}, mu^60={mu ** 60:.1e})")
    ok = not count_mismatch and worst <= 1e-6 and not sim_fail
    report(9, ok, f"10 sets, count mismatches {count_mismatch}, max time error {worst:.1e}; "
                  f"{n_stable}/20 runs with a stable branch, {len(sim_fail)} not converged after 60 years"
                  + (f": {sim_fail}" if sim_fail else ""))


def test_criterion_10_phase_scenario():
    q = from_standard_form(DEFAULT_TARGET.replace(delta_psi=0.51)).replace(l_m=None)
    dg = branch_diagram(q, exclude_attracting=False)
    pts = dg.points
    sns = [ev.l_m for ev in pts.saddle_nodes]
    res = jump_min_e(q, exclude_attracting=False)
    stable_at_li = [bp for bp in seasonal_solutions(q.with_lm(pts.l_i)) if bp.stable]
    checks = {
        "loop next to l_o": len(sns) == 2 and all(abs(s - pts.l_o) <= 0.02 for s in sns),
        "loop extent < 0.05": len(sns) == 2 and max(sns + [pts.l_o]) - min(sns + [pts.l_o]) < 0.05,
        "no stable seasonal at l_i": not stable_at_li,
        "lands ice-free": res.outcome == "to-ice-free",
    }
    sm = smoothed_diagram(q.replace(delta_e=0.08))
    lower = min(sm.events, key=lambda r: r.l_m) if sm.events else None
    if lower is not None:
        below = poincare_fixed_points(q.replace(delta_e=0.08).with_lm(lower.l_m - 1e-3)).fixed_points
        landing = [fp.min_e for fp in below if fp.stable]
        checks["smoothed: one loop"] = sm.saddle_node_pairs == 1
        checks["smoothed lands ice-free"] = bool(landing) and all(m > 0 for m in landing)
    else:
        checks["smoothed fold found"] = False
        landing = []
    if dg.annotations:
        info(10, f"attracting sliding at {len(dg.annotations)} grid points (l_m from "
                 f"{dg.annotations[0][0]:.3f} to {dg.annotations[-1][0]:.3f}) kept: orbits do not reach E = 0 there")
    failed = [k for k, v in checks.items() if not v]
    report(10, not failed, f"l_o={pts.l_o:.5f} saddle-nodes {[round(s, 5) for s in sns]} l_i={pts.l_i:.5f}; "
                           f"Filippov jump {res.delta_min_e:.3f} {res.outcome}; smoothed dE=0.08 lower fold "
                           f"{lower.l_m if lower else math.nan:.4f} landing min E {[round(m, 3) for m in landing]}"
                           + (f"; failed: {failed}" if failed else ""))
