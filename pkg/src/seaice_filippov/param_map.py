"""Inverse of the standard-form map: (F_bar, F_tilde, delta_psi) -> physical parameters.

The amplitude pair fixes ``S_+ = (1 + da) S_a`` and ``L_ac = L_a cos 2 pi phi``
as functions of ``L_a^2``; the phase difference then pins ``L_a^2`` through a
quadratic that may have two nonnegative roots.  Both roots are exposed.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Literal

from .exceptions import (
    BranchSelectionError,
    DegenerateRatioError,
    InfeasibleAmplitudesError,
    InverseMappingError,
    NoRealRootError,
    ParameterError,
)
from .forcing import TWO_PI, ForcingParams, normalize_phase, to_standard_form, wrap_angle

RootChoice = Literal["smaller", "larger"]

_ROUNDING = 1e-12
_MATCH_TOL = 1e-9


@dataclass(frozen=True)
class StandardTarget:
    f_bar_plus: float
    f_bar_minus: float
    f_tilde_plus: float
    f_tilde_minus: float
    delta_psi: float

    def __post_init__(self):
        if not (self.f_tilde_plus > 0.0 and self.f_tilde_minus > 0.0):
            raise ParameterError(
                "standard-form amplitudes must be strictly positive",
                f_tilde_plus=self.f_tilde_plus,
                f_tilde_minus=self.f_tilde_minus,
            )
        if not 0.0 <= self.delta_alpha <= 1.0:
            raise ParameterError("(f_bar_plus - f_bar_minus)/2 must lie in [0, 1]", delta_alpha=self.delta_alpha)
        if self.l_m < 0.0:
            raise ParameterError("1 - (f_bar_plus + f_bar_minus)/2 must be nonnegative", l_m=self.l_m)

    @property
    def delta_alpha(self) -> float:
        return 0.5 * (self.f_bar_plus - self.f_bar_minus)

    @property
    def l_m(self) -> float:
        return 1.0 - 0.5 * (self.f_bar_plus + self.f_bar_minus)

    @property
    def ratio(self) -> float:
        return (1.0 - self.delta_alpha) / (1.0 + self.delta_alpha)

    def replace(self, **changes) -> "StandardTarget":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, float]:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data) -> "StandardTarget":
        keys = ("f_bar_plus", "f_bar_minus", "f_tilde_plus", "f_tilde_minus", "delta_psi")
        missing = [k for k in keys if k not in data]
        if missing:
            raise ParameterError(f"missing target keys: {missing}", keys=missing)
        extra = sorted(set(data) - set(keys))
        if extra:
            raise ParameterError(f"unknown target keys: {extra}", keys=extra)
        return cls(**{k: float(data[k]) for k in keys})

    @classmethod
    def from_params(cls, p: ForcingParams) -> "StandardTarget":
        sf = to_standard_form(p)
        return cls(sf.f_bar_plus, sf.f_bar_minus, sf.f_tilde_plus, sf.f_tilde_minus, sf.delta_psi)


@dataclass(frozen=True)
class InverseIntermediates:
    r: float
    s_plus: float
    l_ac: float
    l_as: float
    l_a_squared_roots: tuple[float, ...]


@dataclass(frozen=True)
class InverseBranch:
    """Outcome of the inverse map for one root of the ``L_a^2`` quadratic."""

    root_choice: str
    l_a_squared: float
    params: ForcingParams | None
    intermediates: InverseIntermediates | None
    error: InverseMappingError | None = None

    def to_dict(self) -> dict:
        out: dict = {"root_choice": self.root_choice, "l_a_squared": self.l_a_squared}
        if self.params is not None:
            out["params"] = self.params.to_dict()
        if self.intermediates is not None:
            out["intermediates"] = dataclasses.asdict(self.intermediates)
        if self.error is not None:
            out["error"] = self.error.to_dict()
        return out


def _check_ratio(r: float) -> None:
    if not 0.0 < r < 1.0:
        raise DegenerateRatioError(
            "amplitude ratio r must lie strictly inside (0, 1)", r=r,
            reason="r = 1 means no albedo jump, r = 0 means delta_alpha = 1",
        )


def solve_la_squared(target: StandardTarget, r: float) -> list[float]:
    """Nonnegative roots ``L_a^2`` of the phase-difference quadratic, ascending.

    The ``1 + tan^2`` normalization is written with ``cos^2`` so that phase
    differences near a tangent pole stay finite.

    Raises
    ------
    DegenerateRatioError
        If ``r`` is 0 or 1.
    NoRealRootError
        If the discriminant is negative or no root is nonnegative.
    """
    _check_ratio(r)
    fp2, fm2 = target.f_tilde_plus**2, target.f_tilde_minus**2
    plus = fm2 + r * r * fp2
    minus = fm2 - r * r * fp2
    one_r = 1.0 - r
    c2, s2 = math.cos(target.delta_psi) ** 2, math.sin(target.delta_psi) ** 2
    lin = 2.0 * plus / one_r**2
    const = (minus**2 * c2 + plus**2 * s2) / one_r**4
    disc = lin * lin - 4.0 * const
    if disc < -_ROUNDING * max(1.0, lin * lin):
        raise NoRealRootError("L_a^2 quadratic has no real solution", discriminant=disc, r=r)
    sq = math.sqrt(max(disc, 0.0))
    # product form avoids cancellation in the small root
    big = 0.5 * (lin + sq)
    small = const / big if big > 0.0 else 0.0
    roots = sorted(x for x in (small, big) if x >= -_ROUNDING)
    if not roots:
        raise NoRealRootError("L_a^2 quadratic has no nonnegative root", roots=[small, big], r=r)
    return [max(x, 0.0) for x in roots]


def _invert_with_root(
    target: StandardTarget, r: float, la2: float, roots: tuple[float, ...]
) -> tuple[float, float, float, InverseIntermediates]:
    fp2, fm2 = target.f_tilde_plus**2, target.f_tilde_minus**2
    s_plus_sq = (r * fp2 - fm2 + la2 * (1.0 - r)) / (r * (1.0 - r))
    if s_plus_sq < -_ROUNDING:
        raise InfeasibleAmplitudesError(
            "S_+^2 is negative for this L_a^2", failed="S_+^2 >= 0", s_plus_squared=s_plus_sq, l_a_squared=la2
        )
    # S_+^2 at rounding level is a zero amplitude; its square root would amplify the noise
    s_plus = math.sqrt(s_plus_sq) if s_plus_sq > 1e-12 * max(1.0, fp2) else 0.0
    s_plus_l_ac = (r * r * fp2 - fm2 + la2 * (1.0 - r * r)) / (2.0 * r * (r - 1.0))
    if s_plus == 0.0:
        if abs(s_plus_l_ac) > 1e-6 * max(1.0, fp2):
            raise InfeasibleAmplitudesError("S_+ = 0 but S_+ L_ac != 0", failed="S_+ L_ac consistency")
        l_ac = -math.sqrt(la2)  # F_tilde_pm^2 = L_a^2 only; any phase matching psi works
    else:
        l_ac = s_plus_l_ac / s_plus
    las2 = la2 - l_ac * l_ac
    if las2 < -1e-10 * max(1.0, la2):
        raise InfeasibleAmplitudesError(
            "|L_ac| exceeds L_a", failed="L_ac^2 <= L_a^2", l_ac=l_ac, l_a_squared=la2
        )
    # sin(dpsi) * F_tilde_+ * F_tilde_- = (r - 1) S_+ L_as: L_as takes the sign
    # opposite to sin(dpsi); the identity is used directly because the square
    # root loses all precision when L_as is near zero.
    sin_dpsi = math.sin(target.delta_psi)
    if s_plus > 0.0:
        l_as = target.f_tilde_plus * target.f_tilde_minus * sin_dpsi / ((r - 1.0) * s_plus)
        if abs(l_as * l_as - las2) > 1e-6 * max(1.0, la2):
            raise BranchSelectionError(
                "phase identity and L_a^2 root disagree on |L_as|",
                l_as_from_phase=l_as, l_as_squared_from_root=las2, l_a_squared=la2,
            )
    else:
        l_as = -math.copysign(math.sqrt(max(las2, 0.0)), sin_dpsi)
    inter = InverseIntermediates(r=r, s_plus=s_plus, l_ac=l_ac, l_as=l_as, l_a_squared_roots=roots)
    delta_alpha = target.delta_alpha
    s_a = s_plus / (1.0 + delta_alpha)
    l_a = math.sqrt(la2)
    phi = normalize_phase(math.atan2(l_as, l_ac) / TWO_PI) if l_a > 0.0 else 0.0
    return s_a, l_a, phi, inter


def _mismatch(target: StandardTarget, p: ForcingParams) -> dict[str, float]:
    sf = to_standard_form(p)
    return {
        "f_tilde_plus": sf.f_tilde_plus - target.f_tilde_plus,
        "f_tilde_minus": sf.f_tilde_minus - target.f_tilde_minus,
        "delta_psi": wrap_angle(sf.delta_psi - target.delta_psi),
    }


def inverse_branches(
    target: StandardTarget, *, b: float = 0.45, zeta: float = 0.12, delta_e: float = 0.0
) -> list[InverseBranch]:
    """Run the inverse map on every nonnegative ``L_a^2`` root.

    Each branch carries either the recovered parameters or the error that
    rejected it.  The quadratic only sees ``tan^2``, so a root can reproduce
    ``delta_psi + pi`` instead of ``delta_psi``; such branches fail with
    :class:`BranchSelectionError`.
    """
    r = target.ratio
    roots = tuple(solve_la_squared(target, r))
    labels = ["smaller", "larger"] if len(roots) == 2 else ["smaller"]
    out = []
    for label, la2 in zip(labels, roots):
        try:
            s_a, l_a, phi, inter = _invert_with_root(target, r, la2, roots)
        except InverseMappingError as exc:
            out.append(InverseBranch(label, la2, None, None, exc))
            continue
        p = ForcingParams(
            l_m=target.l_m, delta_alpha=target.delta_alpha, s_a=s_a, l_a=l_a, phi=phi,
            b=b, zeta=zeta, delta_e=delta_e,
        )
        mismatch = _mismatch(target, p)
        if max(abs(v) for v in mismatch.values()) > _MATCH_TOL:
            err = BranchSelectionError("root does not reproduce the target", mismatch=mismatch, l_a_squared=la2)
            out.append(InverseBranch(label, la2, p, inter, err))
        else:
            out.append(InverseBranch(label, la2, p, inter))
    return out


def from_standard_form(
    target: StandardTarget,
    root_choice: RootChoice = "smaller",
    *,
    b: float = 0.45,
    zeta: float = 0.12,
    delta_e: float = 0.0,
) -> ForcingParams:
    """Physical parameters reproducing ``target``; ``b``, ``zeta``, ``delta_e`` are passed through.

    Raises the branch's :class:`InverseMappingError` (with both-branch
    diagnostics attached) when the chosen root is infeasible.
    """
    if root_choice not in ("smaller", "larger"):
        raise ParameterError("root_choice must be 'smaller' or 'larger'", root_choice=root_choice)
    branches = inverse_branches(target, b=b, zeta=zeta, delta_e=delta_e)
    chosen = branches[0] if root_choice == "smaller" else branches[-1]
    if chosen.error is not None:
        chosen.error.diagnostics["branches"] = [br.to_dict() for br in branches]
        raise chosen.error
    assert chosen.params is not None
    return chosen.params
