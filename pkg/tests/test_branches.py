import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seaice_filippov import (
    ForcingParams,
    InconsistentBranchError,
    SlidingEntryError,
    BoundaryEvaluationError,
    detect_attracting,
    find_boundary_times,
    all_branches,
    ice_covered_branch,
    ice_free_branch,
    integral_i_minus,
    integral_i_plus,
    orbit_energy,
    reconstruct_trajectory,
    seasonal_solutions,
    simulate_filippov,
)
from seaice_filippov.bifurcation import grid_params
from seaice_filippov.branches import ICE_COVERED, ICE_FREE, SEASONAL, seasonal_residual

import oracles
from reference import (
    ICE_COVERED_MAX_110,
    ICE_COVERED_MAX_TOL,
    ICE_FREE_MIN_092,
    SEASONAL_DEFAULT,
)

P = ForcingParams()


@settings(max_examples=60, deadline=None)
@given(st.floats(0.5, 1.5), st.floats(-1.0, 1.0), st.floats(0.0, 1.5))
def test_integrals_match_quadrature(l_m, t0, span):
    p = P.with_lm(l_m)
    t1 = t0 + span
    assert integral_i_plus(p, t0, t1) == pytest.approx(oracles.quad_i_plus(p, t0, t1), abs=1e-12)
    assert integral_i_minus(p, t0, t1) == pytest.approx(oracles.quad_i_minus(p, t0, t1), abs=1e-12)


def test_ice_free_branch_at_092():
    p = P.with_lm(0.92)
    bp = ice_free_branch(p)
    assert bp.kind == ICE_FREE and bp.stable
    assert bp.floquet == math.exp(-p.b)
    assert bp.min_e == pytest.approx(ICE_FREE_MIN_092, abs=1e-10)
    assert bp.min_e > 0


def test_ice_free_absent_above_l_o():
    assert ice_free_branch(P.with_lm(1.3)) is None


def test_ice_covered_branch_at_110():
    p = P.with_lm(1.1)
    bp = ice_covered_branch(p)
    assert bp.kind == ICE_COVERED and bp.stable
    assert 0 < bp.floquet < 1
    assert bp.max_e == pytest.approx(ICE_COVERED_MAX_110, abs=ICE_COVERED_MAX_TOL)
    assert bp.e_c == bp.max_e < 0
    assert ice_covered_branch(P.with_lm(0.9)) is None


@pytest.mark.parametrize("l_m", sorted(SEASONAL_DEFAULT))
def test_seasonal_matches_brute_force(l_m):
    sols = seasonal_solutions(P.with_lm(l_m))
    expected = SEASONAL_DEFAULT[l_m]
    assert len(sols) == len(expected)
    for bp, (tm, tf) in zip(sols, expected):
        assert bp.t_m == pytest.approx(tm, abs=1e-9)
        assert bp.t_f == pytest.approx(tf, abs=1e-9)
        assert bp.t0 < bp.t_m < bp.t_f < bp.t0 + 1


def test_seasonal_pair_stability_at_092():
    sols = seasonal_solutions(P.with_lm(0.92))
    assert [bp.stable for bp in sols] == [False, True]
    assert sols[0].floquet > 1 > sols[1].floquet > 0


def test_seasonal_floquet_matches_period_map():
    p = P.with_lm(0.94)
    for bp in seasonal_solutions(p):
        assert bp.floquet == pytest.approx(oracles.map_derivative(p, bp.e_init, bp.t0), rel=1e-6)


def test_residual_nan_outside_domain():
    p = P.with_lm(0.92)
    assert math.isnan(seasonal_residual(p, 0.0))
    sols = seasonal_solutions(p)
    assert seasonal_residual(p, sols[0].t_m) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("l_m", [0.92, 0.94, 1.1])
def test_reconstruction_invariants(l_m):
    p = P.with_lm(l_m)
    for bp in all_branches(p):
        tr = reconstruct_trajectory(bp, p, n_samples=2001)
        assert tr.e[-1] == pytest.approx(tr.e[0], abs=1e-8)
        assert tr.e.min() == pytest.approx(bp.min_e, abs=1e-6)
        if bp.kind == ICE_FREE:
            assert np.all(tr.e > 0)
        elif bp.kind == ICE_COVERED:
            assert np.all(tr.e < 0)
        else:
            tau = tr.tau
            assert np.all(tr.e[(tau > bp.t0 + 1e-9) & (tau < bp.t_m - 1e-9)] < 0)
            assert np.all(tr.e[(tau > bp.t_m + 1e-9) & (tau < bp.t_f - 1e-9)] > 0)
            assert np.all(tr.e[(tau > bp.t_f + 1e-9) & (tau < bp.t0 + 1 - 1e-9)] < 0)
            assert abs(orbit_energy(bp, p, bp.t_m)) < 1e-10
            assert abs(orbit_energy(bp, p, bp.t_f)) < 1e-10
            assert [e for _, e in tr.events] == ["melt-out", "freeze-up"]


def test_reconstruction_rejects_foreign_parameters():
    bp = ice_covered_branch(P.with_lm(1.1))
    with pytest.raises(InconsistentBranchError):
        reconstruct_trajectory(bp, P.with_lm(1.0))


def test_ice_growth_invariant():
    # along the growth phase E - E^2/(2 zeta) changes by the integral of F_-
    p = P.with_lm(1.1)
    bp = ice_covered_branch(p)
    si = find_boundary_times(p)
    t_c = si.t_b + (si.t_c - si.t_b) % 1.0
    e_c = bp.e_c
    for t in np.linspace(t_c + 0.01, si.t_b + 1 - 0.01, 5):
        e = orbit_energy(bp, p, t)
        lhs = (e - e * e / (2 * p.zeta)) - (e_c - e_c * e_c / (2 * p.zeta))
        assert lhs == pytest.approx(oracles.quad_i_minus(p, t_c, t), abs=1e-10)


@pytest.mark.parametrize("e0,kind", [(-0.5, ICE_COVERED), (-0.1, SEASONAL), (0.3, ICE_FREE)])
def test_simulation_converges_to_each_stable_orbit(e0, kind):
    # three stable orbits coexist at 0.92
    p = P.with_lm(0.92)
    target = [bp for bp in all_branches(p) if bp.kind == kind and bp.stable][0]
    t_b = find_boundary_times(p).t_b
    tr = simulate_filippov(p, e0, t_start=t_b, t_end=t_b + 60)
    assert tr.halted is None
    assert tr.e[-1] == pytest.approx(orbit_energy(target, p, t_b), abs=1e-8)
    if kind == SEASONAL:
        assert {k for _, k in tr.events} == {"melt-out", "freeze-up"}


def test_simulation_matches_ice_free_orbit():
    p = P.with_lm(0.92)
    bp = ice_free_branch(p)
    tr = simulate_filippov(p, bp.e_init, t_start=bp.t0, t_end=bp.t0 + 1)
    assert tr.e[-1] == pytest.approx(bp.e_init, abs=1e-10)


def test_simulation_stops_at_attracting_interval():
    p = ForcingParams(l_m=0.2, l_a=0.7, phi=0.5)
    _, (start, end) = detect_attracting(p)
    with pytest.raises(SlidingEntryError) as err:
        simulate_filippov(p, 1e-4, t_start=start, t_end=start + 2)
    assert err.value.diagnostics["kind"] == "attracting"
    tr = err.value.trajectory
    assert tr.halted == "attracting"
    assert start <= tr.tau[-1] <= end and tr.e[-1] == 0.0


def test_simulation_rejects_boundary_start():
    with pytest.raises(BoundaryEvaluationError):
        simulate_filippov(P.with_lm(1.0), 0.0)


def test_attracting_set_keeps_valid_orbits():
    q = grid_params(0.51, 0.43).with_lm(1.2)
    sols = seasonal_solutions(q)
    assert len(sols) == 1
    bp = sols[0]
    # the orbit closes under direct integration
    end = oracles.period_map_filippov(q, bp.e_init, bp.t0)
    assert end == pytest.approx(bp.e_init, abs=1e-8)
    flagged = grid_params(0.51, 0.43).with_lm(1.0)
    assert seasonal_solutions(flagged) == []
    assert ice_covered_branch(flagged) is not None
