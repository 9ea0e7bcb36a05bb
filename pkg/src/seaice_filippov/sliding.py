"""Roots of ``F_pm`` and classification of the E = 0 discontinuity boundary.

Each ``F_pm`` is a mean plus one cosine harmonic, so it has either no roots,
a double root (tangency) or two simple roots per year, all in closed form.
``t_a``/``t_d`` are the rising/falling roots of ``F_+``; ``t_b``/``t_c`` those
of ``F_-``.  Repelling sliding happens where ``F_+ >= 0 >= F_-``: the spring
interval ``S1 = [t_a, t_b]`` and the autumn interval ``S2 = [t_c, t_d]``.
When an attracting interval is present the widths measure whichever of the
two repelling intervals survive, and are zero for the one that does not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .forcing import TWO_PI, ForcingParams, harmonic

TWO_REPELLING = "two-repelling"
DEGENERATE = "degenerate"
ATTRACTING = "attracting-present"
NO_SLIDING = "no-sliding"

_TANGENCY = 1e-12


@dataclass(frozen=True)
class SideRoots:
    """Roots of one forcing side; ``sign`` is its constant sign when rootless."""

    rising: float | None
    falling: float | None
    sign: int = 0
    tangent: bool = False

    @property
    def has_roots(self) -> bool:
        return self.rising is not None and not self.tangent


@dataclass(frozen=True)
class SlidingIntervals:
    t_a: float | None
    t_b: float | None
    t_c: float | None
    t_d: float | None
    width_s1: float
    width_s2: float
    classification: str
    reason: str = ""
    plus: SideRoots | None = field(default=None, repr=False)
    minus: SideRoots | None = field(default=None, repr=False)

    def frame_a(self) -> tuple[float, float, float, float]:
        """``(t_a, t_b, t_c, t_d)`` unwrapped to increase from ``t_a`` in [0, 1)."""
        ta, tb, tc, td = self._require()
        tb = _after(tb, ta)
        tc = _after(tc, tb)
        td = _after(td, tc)
        return ta, tb, tc, td

    def frame_b(self) -> tuple[float, float, float, float]:
        """``(t_b, t_c, t_d, t_a + k)`` unwrapped to increase from ``t_b`` in [0, 1)."""
        ta, tb, tc, td = self._require()
        tc = _after(tc, tb)
        td = _after(td, tc)
        ta1 = _after(ta, td)
        return tb, tc, td, ta1

    def _require(self):
        if None in (self.t_a, self.t_b, self.t_c, self.t_d):
            raise ValueError(f"boundary times undefined ({self.classification}: {self.reason})")
        return self.t_a, self.t_b, self.t_c, self.t_d

    def to_dict(self) -> dict:
        return {
            "t_a": self.t_a, "t_b": self.t_b, "t_c": self.t_c, "t_d": self.t_d,
            "width_s1": self.width_s1, "width_s2": self.width_s2,
            "classification": self.classification, "reason": self.reason,
        }


def _after(t: float, ref: float) -> float:
    """Shift ``t`` by whole years so that it falls in [ref, ref + 1)."""
    return ref + (t - ref) % 1.0


def side_roots(p: ForcingParams, side: int) -> SideRoots:
    """Rising and falling roots of ``F_side`` in [0, 1).

    The arccos roots are polished by Newton steps so the residual stays at
    rounding level even when the roots are close together.
    """
    mean, amp, phase = harmonic(p, side)
    if amp == 0.0 or abs(mean) > amp + _TANGENCY * max(1.0, amp):
        return SideRoots(None, None, sign=1 if mean > 0 else -1)
    if abs(abs(mean) - amp) <= _TANGENCY * max(1.0, amp):
        # double root at the extremum touching zero
        theta = math.pi if mean > 0 else 0.0
        t = ((theta + phase) / TWO_PI) % 1.0
        return SideRoots(t, t, sign=1 if mean > 0 else -1, tangent=True)
    theta = math.acos(-mean / amp)
    # F' = -2 pi amp sin(theta): rising where sin(theta) < 0
    rising = _polish(mean, amp, phase, ((-theta + phase) / TWO_PI) % 1.0)
    falling = _polish(mean, amp, phase, ((theta + phase) / TWO_PI) % 1.0)
    return SideRoots(rising, falling)


def _polish(mean: float, amp: float, phase: float, t: float) -> float:
    for _ in range(3):
        arg = TWO_PI * t - phase
        f = mean + amp * math.cos(arg)
        df = -TWO_PI * amp * math.sin(arg)
        if df == 0.0:
            break
        step = f / df
        t -= step
        if abs(step) < 1e-16:
            break
    return t % 1.0


def find_boundary_times(p: ForcingParams) -> SlidingIntervals:
    """Locate ``t_a .. t_d`` and classify the boundary ``E = 0``.

    ``delta_e`` is ignored: sliding is a property of the discontinuous limit.
    """
    plus = side_roots(p, 1)
    minus = side_roots(p, -1)
    ta, td = plus.rising, plus.falling
    tb, tc = minus.rising, minus.falling
    kw = dict(t_a=ta, t_b=tb, t_c=tc, t_d=td, plus=plus, minus=minus)

    if p.delta_alpha == 0.0:
        return SlidingIntervals(width_s1=0.0, width_s2=0.0, classification=DEGENERATE,
                                reason="no albedo jump: F+ == F-", **kw)
    if plus.tangent or minus.tangent:
        return SlidingIntervals(width_s1=0.0, width_s2=0.0, classification=DEGENERATE,
                                reason="tangency: double root of " + ("F+" if plus.tangent else "F-"), **kw)
    if plus.has_roots and minus.has_roots:
        # F-'s positive arc (t_b, t_c) must sit inside F+'s positive arc (t_a, t_d)
        off_b = (tb - ta) % 1.0
        off_c = (tc - ta) % 1.0
        span = (td - ta) % 1.0
        if 0.0 < off_b < off_c < span:
            return SlidingIntervals(width_s1=off_b, width_s2=span - off_c, classification=TWO_REPELLING, **kw)
        # the repelling parts that remain: [t_a, t_b] if F- rises after F+, [t_c, t_d] if it falls before
        w1 = max(0.0, _signed(tb - ta))
        w2 = max(0.0, _signed(td - tc))
        return SlidingIntervals(width_s1=w1, width_s2=w2, classification=ATTRACTING,
                                reason="F- > 0 where F+ < 0", **kw)
    if not plus.has_roots and not minus.has_roots:
        if plus.sign > 0 > minus.sign:
            return SlidingIntervals(width_s1=0.0, width_s2=0.0, classification=DEGENERATE,
                                    reason="F+ > 0 > F- all year: boundary repels everywhere", **kw)
        if plus.sign < 0 < minus.sign:
            return SlidingIntervals(width_s1=0.0, width_s2=0.0, classification=ATTRACTING,
                                    reason="F+ < 0 < F- all year", **kw)
        return SlidingIntervals(width_s1=0.0, width_s2=0.0, classification=NO_SLIDING,
                                reason="F+ and F- share a constant sign", **kw)
    if plus.has_roots:
        if minus.sign < 0:
            return SlidingIntervals(width_s1=0.0, width_s2=0.0, classification=DEGENERATE,
                                    reason="F- < 0 all year: no ablation season (t_b = t_c limit)", **kw)
        return SlidingIntervals(width_s1=0.0, width_s2=0.0, classification=ATTRACTING,
                                reason="F- > 0 all year while F+ changes sign", **kw)
    if plus.sign > 0:
        return SlidingIntervals(width_s1=0.0, width_s2=0.0, classification=DEGENERATE,
                                reason="F+ > 0 all year: single repelling interval (t_a undefined)", **kw)
    return SlidingIntervals(width_s1=0.0, width_s2=0.0, classification=ATTRACTING,
                            reason="F+ < 0 all year while F- changes sign", **kw)


def _signed(dt: float) -> float:
    """``dt`` wrapped to [-0.5, 0.5)."""
    return (dt + 0.5) % 1.0 - 0.5


def _positive_arc(roots: SideRoots) -> tuple[float, float] | None:
    """``(start, length)`` of the arc where the side is positive, or None."""
    if roots.has_roots:
        return roots.rising, (roots.falling - roots.rising) % 1.0
    return (0.0, 1.0) if roots.sign > 0 else None


def _negative_arc(roots: SideRoots) -> tuple[float, float] | None:
    if roots.has_roots:
        return roots.falling, (roots.rising - roots.falling) % 1.0
    return (0.0, 1.0) if roots.sign < 0 else None


def _intersect(a: tuple[float, float], b: tuple[float, float]) -> tuple[float, float] | None:
    start_a, len_a = a
    rel = (b[0] - start_a) % 1.0
    best = None
    for shift in (rel, rel - 1.0):
        lo, hi = max(0.0, shift), min(len_a, shift + b[1])
        if hi > lo and (best is None or hi - lo > best[1] - best[0]):
            best = (lo, hi)
    if best is None:
        return None
    return start_a + best[0], start_a + best[1]


def detect_attracting(p: ForcingParams) -> tuple[bool, tuple[float, float] | None]:
    """Whether some ``tau`` has ``F_+(tau) < 0 < F_-(tau)``.

    Returns ``(flag, witness)`` where ``witness`` is ``(start, end)`` of one
    such interval (``end`` may exceed 1 when it wraps past year end).
    """
    if p.delta_alpha == 0.0:
        return False, None
    neg_plus = _negative_arc(side_roots(p, 1))
    pos_minus = _positive_arc(side_roots(p, -1))
    if neg_plus is None or pos_minus is None:
        return False, None
    piece = _intersect(neg_plus, pos_minus)
    if piece is None:
        return False, None
    start, end = piece
    shift = math.floor(start)
    return True, (start - shift, end - shift)
