import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seaice_filippov import BoundaryEvaluationError, ForcingParams, ParameterError
from seaice_filippov.forcing import (
    delta_psi_arccos,
    f_minus,
    f_plus,
    f_smoothed,
    harmonic,
    normalize_phase,
    rhs,
    to_standard_form,
    wrap_angle,
)

from oracles import flux

params = st.builds(
    ForcingParams,
    l_m=st.floats(0.0, 2.0),
    delta_alpha=st.floats(0.0, 0.9),
    s_a=st.floats(0.0, 3.0),
    l_a=st.floats(0.0, 2.5),
    phi=st.floats(-0.5, 0.5),
)


def test_default_standard_form():
    sf = to_standard_form(ForcingParams(l_m=1.0))
    assert sf.f_tilde_plus == pytest.approx(2.64, abs=0.01)
    assert sf.f_tilde_minus == pytest.approx(1.41, abs=0.01)
    assert sf.delta_psi == pytest.approx(-0.21, abs=0.01)
    assert sf.f_bar_plus - sf.f_bar_minus == pytest.approx(0.86)


def test_l_m_required_for_pointwise_evaluation():
    with pytest.raises(ParameterError) as err:
        f_plus(ForcingParams(), 0.3)
    assert err.value.diagnostics["key"] == "l_m"


@pytest.mark.parametrize("bad", [{"delta_alpha": 1.5}, {"b": 0.0}, {"zeta": -1.0}, {"s_a": -0.1},
                                 {"l_m": float("nan")}])
def test_invalid_parameters_rejected(bad):
    with pytest.raises(ParameterError):
        ForcingParams(**bad)


def test_from_dict_is_strict():
    with pytest.raises(ParameterError):
        ForcingParams.from_dict({"l_m": 1.0, "lm": 1.0})
    with pytest.raises(ParameterError):
        ForcingParams.from_dict({"l_m": "1.0"})
    p = ForcingParams.from_dict({"l_m": 1.1, "phi": 0.2})
    assert ForcingParams.from_dict(p.to_dict()) == p


def test_phase_normalization():
    assert normalize_phase(0.5) == -0.5
    assert normalize_phase(1.15) == pytest.approx(0.15)
    assert ForcingParams(phi=0.65).phi == pytest.approx(-0.35)
    assert wrap_angle(-math.pi) == math.pi


def test_rhs_rejects_boundary_in_filippov_limit():
    p = ForcingParams(l_m=1.0)
    with pytest.raises(BoundaryEvaluationError):
        rhs(p, 0.2, 0.0)
    assert rhs(p.replace(delta_e=0.08), 0.2, 0.0) == pytest.approx(f_smoothed(p.replace(delta_e=0.08), 0.2, 0.0))


def test_smoothed_flux_needs_width():
    with pytest.raises(ParameterError):
        f_smoothed(ForcingParams(l_m=1.0), 0.1, 0.2)


def test_rhs_phases():
    p = ForcingParams(l_m=1.0)
    tau = 0.6
    assert rhs(p, tau, 0.3) == pytest.approx(f_plus(p, tau) - p.b * 0.3)
    # melting at the surface: the energy rises at the flux rate
    assert f_minus(p, tau) > 0
    assert rhs(p, tau, -0.2) == pytest.approx(f_minus(p, tau))
    tau = 0.0
    fm = f_minus(p, tau)
    assert fm < 0
    assert rhs(p, tau, -0.2) == pytest.approx(p.zeta * fm / (p.zeta + 0.2))


@settings(max_examples=60, deadline=None)
@given(params, st.floats(0.0, 1.0))
def test_harmonic_matches_raw_forcing(p, tau):
    for side in (1, -1):
        mean, amp, phase = harmonic(p, side)
        assert amp >= 0
        assert mean + amp * math.cos(2 * math.pi * tau - phase) == pytest.approx(flux(p, tau, side), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(params)
def test_delta_psi_two_routes_agree(p):
    sf = to_standard_form(p)
    if min(sf.f_tilde_plus, sf.f_tilde_minus) < 1e-6:
        return
    assert wrap_angle(sf.delta_psi - delta_psi_arccos(p)) == pytest.approx(0.0, abs=1e-7)


def test_vectorized_fluxes():
    p = ForcingParams(l_m=1.0)
    tau = np.linspace(0, 1, 7)
    assert np.allclose(f_plus(p, tau) - f_minus(p, tau), 2 * p.delta_alpha * (1 - p.s_a * np.cos(2 * np.pi * tau)))
