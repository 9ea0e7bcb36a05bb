"""Seasonal forcing, right-hand sides, and the amplitude/phase standard form.

Time ``tau`` is measured in years; every forcing term is period-1 in ``tau``.
The shared-longwave case is the only one modelled: both sides of the albedo
jump see the same outgoing longwave term ``L_m + L_a cos(2 pi (tau - phi))``.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from .exceptions import BoundaryEvaluationError, ParameterError

TWO_PI = 2.0 * math.pi

PARAM_KEYS = ("delta_alpha", "s_a", "l_m", "l_a", "phi", "b", "zeta", "delta_e")

#: Reference parameter set (everything except ``l_m``, which must be given).
DEFAULTS: dict[str, float] = {
    "delta_alpha": 0.43,
    "s_a": 1.5,
    "l_a": 0.73,
    "phi": 0.15,
    "b": 0.45,
    "zeta": 0.12,
    "delta_e": 0.0,
}


def normalize_phase(phi: float) -> float:
    """Reduce a year-fraction phase into [-1/2, 1/2)."""
    out = (phi + 0.5) % 1.0 - 0.5
    # float rounding can land exactly on +1/2
    return -0.5 if out >= 0.5 else out


def wrap_angle(x: float) -> float:
    """Wrap an angle in radians into (-pi, pi]."""
    w = (x + math.pi) % TWO_PI - math.pi
    return math.pi if w <= -math.pi else w


@dataclass(frozen=True)
class ForcingParams:
    """Physical parameters of the forcing plus thermodynamic constants.

    ``l_m`` is the bifurcation parameter and may be left as ``None`` for
    operations that sweep it; every pointwise evaluation requires it.
    ``delta_e == 0`` selects the Filippov (discontinuous albedo) system.
    """

    l_m: float | None = None
    delta_alpha: float = DEFAULTS["delta_alpha"]
    s_a: float = DEFAULTS["s_a"]
    l_a: float = DEFAULTS["l_a"]
    phi: float = DEFAULTS["phi"]
    b: float = DEFAULTS["b"]
    zeta: float = DEFAULTS["zeta"]
    delta_e: float = DEFAULTS["delta_e"]

    def __post_init__(self):
        for name in PARAM_KEYS:
            value = getattr(self, name)
            if value is None:
                continue
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite", key=name, value=value)
            object.__setattr__(self, name, float(value))
        if not 0.0 <= self.delta_alpha <= 1.0:
            raise ParameterError("delta_alpha must lie in [0, 1]", key="delta_alpha", value=self.delta_alpha)
        for name in ("s_a", "l_a", "delta_e"):
            if getattr(self, name) < 0.0:
                raise ParameterError(f"{name} must be nonnegative", key=name, value=getattr(self, name))
        if self.l_m is not None and self.l_m < 0.0:
            raise ParameterError("l_m must be nonnegative", key="l_m", value=self.l_m)
        for name in ("b", "zeta"):
            if getattr(self, name) <= 0.0:
                raise ParameterError(f"{name} must be positive", key=name, value=getattr(self, name))
        object.__setattr__(self, "phi", normalize_phase(self.phi))

    @property
    def lm(self) -> float:
        """``l_m``, raising :class:`ParameterError` when it was not set."""
        if self.l_m is None:
            raise ParameterError("l_m is required", key="l_m")
        return self.l_m

    @property
    def is_filippov(self) -> bool:
        return self.delta_e == 0.0

    def replace(self, **changes: Any) -> "ForcingParams":
        return dataclasses.replace(self, **changes)

    def with_lm(self, l_m: float) -> "ForcingParams":
        return dataclasses.replace(self, l_m=l_m)

    def to_dict(self) -> dict[str, float | None]:
        return {key: getattr(self, key) for key in PARAM_KEYS}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ForcingParams":
        unknown = set(data) - set(PARAM_KEYS)
        if unknown:
            raise ParameterError(f"unknown parameter keys: {sorted(unknown)}", keys=sorted(unknown))
        values: dict[str, Any] = {}
        for key in PARAM_KEYS:
            if key in data and data[key] is not None:
                value = data[key]
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    raise ParameterError(f"{key} must be a number", key=key, value=value)
                values[key] = float(value)
        return cls(**values)


@dataclass(frozen=True)
class StandardForm:
    """Amplitude/phase form ``F_pm(tau) = f_bar_pm + f_tilde_pm cos(2 pi tau - psi_pm)``.

    Phases are in radians; ``delta_psi = psi_plus - psi_minus`` wrapped to (-pi, pi].
    """

    f_bar_plus: float
    f_bar_minus: float
    f_tilde_plus: float
    f_tilde_minus: float
    psi_plus: float
    psi_minus: float
    delta_psi: float

    def to_dict(self) -> dict[str, float]:
        return dataclasses.asdict(self)


def harmonic(p: ForcingParams, side: int) -> tuple[float, float, float]:
    """Mean, amplitude and phase of ``F_+`` (``side=+1``) or ``F_-`` (``side=-1``).

    ``F_side(tau) = mean + amplitude * cos(2 pi tau - phase)`` with amplitude >= 0.
    """
    if side not in (1, -1):
        raise ValueError("side must be +1 or -1")
    k = 1.0 + side * p.delta_alpha
    mean = k - p.lm
    c = -k * p.s_a - p.l_a * math.cos(TWO_PI * p.phi)
    s = -p.l_a * math.sin(TWO_PI * p.phi)
    return mean, math.hypot(c, s), math.atan2(s, c)


def _shortwave(p: ForcingParams, tau):
    return 1.0 - p.s_a * np.cos(TWO_PI * np.asarray(tau, dtype=float))


def _longwave(p: ForcingParams, tau):
    return p.lm + p.l_a * np.cos(TWO_PI * (np.asarray(tau, dtype=float) - p.phi))


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def f_plus(p: ForcingParams, tau):
    """Net flux on the open-ocean side, ``(1 + da)(1 - S_a cos 2 pi tau) - longwave``."""
    return _scalar((1.0 + p.delta_alpha) * _shortwave(p, tau) - _longwave(p, tau))


def f_minus(p: ForcingParams, tau):
    """Net flux on the ice side, ``(1 - da)(1 - S_a cos 2 pi tau) - longwave``."""
    return _scalar((1.0 - p.delta_alpha) * _shortwave(p, tau) - _longwave(p, tau))


def f_side(p: ForcingParams, tau, side: int):
    return f_plus(p, tau) if side > 0 else f_minus(p, tau)


def f_smoothed(p: ForcingParams, tau, e):
    """Flux with the albedo jump smoothed by ``tanh(E / delta_e)``."""
    if p.delta_e <= 0.0:
        raise ParameterError("f_smoothed needs delta_e > 0; use f_plus/f_minus", key="delta_e", value=p.delta_e)
    albedo = 1.0 + p.delta_alpha * np.tanh(np.asarray(e, dtype=float) / p.delta_e)
    return _scalar(albedo * _shortwave(p, tau) - _longwave(p, tau))


def rhs(p: ForcingParams, tau, e):
    """Energy tendency ``dE/dtau`` of the Filippov or the albedo-smoothed system.

    For ``E >= 0`` the mixed layer radiates linearly; for ``E < 0`` the ice
    either melts at the surface (``F > 0``) or grows with the self-insulating
    rate ``zeta F / (zeta - E)``.  With ``delta_e == 0`` the field is
    undefined on ``E == 0`` and :class:`BoundaryEvaluationError` is raised.
    """
    e_arr = np.asarray(e, dtype=float)
    if p.is_filippov:
        if np.any(e_arr == 0.0):
            raise BoundaryEvaluationError("Filippov field is not single-valued on E = 0", tau=_scalar(tau))
        flux = np.where(e_arr > 0.0, f_plus(p, tau), f_minus(p, tau))
    else:
        flux = np.asarray(f_smoothed(p, tau, e_arr))
    ice = np.where(flux > 0.0, flux, p.zeta * flux / (p.zeta - np.minimum(e_arr, 0.0)))
    return _scalar(np.where(e_arr >= 0.0, flux - p.b * e_arr, ice))


def to_standard_form(p: ForcingParams) -> StandardForm:
    """Convert physical parameters to means, amplitudes and phases of ``F_pm``.

    ``l_m`` only shifts the means but is still required.
    """
    fbp, ftp, psp = harmonic(p, 1)
    fbm, ftm, psm = harmonic(p, -1)
    psp, psm = wrap_angle(psp), wrap_angle(psm)
    return StandardForm(
        f_bar_plus=fbp,
        f_bar_minus=fbm,
        f_tilde_plus=ftp,
        f_tilde_minus=ftm,
        psi_plus=psp,
        psi_minus=psm,
        delta_psi=wrap_angle(psp - psm),
    )


def delta_psi_arccos(p: ForcingParams) -> float:
    """Phase difference from the ``-sgn(phi) arccos(...)`` closed form.

    Kept as an independent cross-check of the two-argument arctangent route.
    """
    k_p, k_m = 1.0 + p.delta_alpha, 1.0 - p.delta_alpha
    c2 = math.cos(TWO_PI * p.phi)
    ftp = math.sqrt(k_p**2 * p.s_a**2 + 2 * k_p * p.s_a * p.l_a * c2 + p.l_a**2)
    ftm = math.sqrt(k_m**2 * p.s_a**2 + 2 * k_m * p.s_a * p.l_a * c2 + p.l_a**2)
    if ftp == 0.0 or ftm == 0.0:
        return 0.0
    num = (1 - p.delta_alpha**2) * p.s_a**2 + 2 * p.s_a * p.l_a * c2 + p.l_a**2
    arg = min(1.0, max(-1.0, num / (ftp * ftm)))
    return -math.copysign(1.0, p.phi) * math.acos(arg) if p.phi != 0.0 else 0.0
