"""Min-max search over the closed-form mixed-triple ratio ``R(q, t)``.

``q`` is the neutral rounding value at one half and ``t`` the LP value of the
positive edge; the neutral and negative edges sit at 1/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from chromacc.rounding import DEFAULT_PROFILE, RoundingProfile

REFERENCE_POINT = (0.8493, 0.3112)
REFERENCE_RATIO = 2.1334
_INVPHI = (math.sqrt(5) - 1) / 2


def alg_closed_form(q, t, profile: RoundingProfile = DEFAULT_PROFILE):
    f = profile.f_plus(t)
    return 4 - f - q * f - 0.5 * q


def lp_closed_form(q, t, profile: RoundingProfile = DEFAULT_PROFILE):
    f = profile.f_plus(t)
    return 2 + 2 * t - 0.25 * q - f * (0.5 + 0.5 * q + 0.5 * t + q * t)


def ratio_closed_form(q, t, profile: RoundingProfile = DEFAULT_PROFILE):
    return alg_closed_form(q, t, profile) / lp_closed_form(q, t, profile)


@dataclass
class SaddleResult:
    q_star: float
    t_star: float
    ratio_star: float
    grad_norm: float
    dR_dq: float
    dR_dt: float
    degenerate: list[tuple[float, float]] = field(default_factory=list)
    t_domain: tuple[float, float] = (0.0, 1.0)

    def to_dict(self) -> dict:
        return {
            "q_star": self.q_star,
            "t_star": self.t_star,
            "ratio_star": self.ratio_star,
            "grad_norm": self.grad_norm,
            "dR_dq": self.dR_dq,
            "dR_dt": self.dR_dt,
            "degenerate_points": len(self.degenerate),
            "t_domain": list(self.t_domain),
        }


class _Ratio:
    """``R`` with a record of every evaluation where the LP charge is not
    positive."""

    def __init__(self, profile: RoundingProfile):
        self.profile = profile
        self.degenerate: list[tuple[float, float]] = []

    def __call__(self, q, t):
        lp = lp_closed_form(q, np.clip(t, 0.0, 1.0), self.profile)
        alg = alg_closed_form(q, np.clip(t, 0.0, 1.0), self.profile)
        bad = np.asarray(lp) <= 0
        if np.any(bad):
            qq, tt = np.broadcast_arrays(q, t)
            self.degenerate.extend(zip(np.asarray(qq)[bad].tolist(), np.asarray(tt)[bad].tolist()))
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(bad, np.nan, alg / lp)


def golden_section(fn, lo: float, hi: float, tol: float, maximize: bool = False) -> float:
    """Golden-section search on ``[lo, hi]``; returns the best of the final
    bracket and its endpoints (the optimum may sit on a boundary)."""
    sgn = -1.0 if maximize else 1.0
    g = lambda z: sgn * float(fn(z))  # noqa: E731
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = g(c), g(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = g(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = g(d)
    cands = [(g(lo), lo), (g(hi), hi), (fc, c), (fd, d)]
    return min(cands)[1]


def _inner_max(R: _Ratio, q: float, ts: np.ndarray, step: float, tol: float, t_lo: float, t_hi: float):
    vals = R(q, ts)
    k = int(np.nanargmax(vals))
    lo, hi = max(t_lo, ts[k] - step), min(t_hi, ts[k] + step)
    t = golden_section(lambda z: R(q, z), lo, hi, tol, maximize=True)
    v = float(R(q, t))
    if vals[k] > v:
        t, v = float(ts[k]), float(vals[k])
    return t, v


def partials(q: float, t: float, profile: RoundingProfile = DEFAULT_PROFILE, h: float = 1e-5):
    """Central differences of ``R`` (``t`` is evaluated on the closed form
    extended past ``[0, 1]`` by the clamped rounding curve)."""
    R = lambda a, b: float(alg_closed_form(a, b, profile) / lp_closed_form(a, b, profile))  # noqa: E731
    fp = lambda b: profile.f_plus(min(max(b, 0.0), 1.0))  # noqa: E731

    def Rt(a, b):
        f = fp(b)
        return (4 - f - a * f - 0.5 * a) / (2 + 2 * b - 0.25 * a - f * (0.5 + 0.5 * a + 0.5 * b + a * b))

    dq = (R(q + h, t) - R(q - h, t)) / (2 * h)
    dt = (Rt(q, t + h) - Rt(q, t - h)) / (2 * h)
    return dq, dt


def kkt_residual(q, t, dq, dt, t_domain=(0.0, 1.0), bound_tol: float = 1e-9) -> float:
    """Projected-gradient norm: ``q`` is minimised over [0, 1] and ``t``
    maximised over ``t_domain``; a partial pointing out of the box at an
    active bound does not count."""
    gq = dq
    if q <= bound_tol and dq > 0 or q >= 1 - bound_tol and dq < 0:
        gq = 0.0
    gt = dt
    if t <= t_domain[0] + bound_tol and dt < 0 or t >= t_domain[1] - bound_tol and dt > 0:
        gt = 0.0
    return math.hypot(gq, gt)


def saddle_search(
    profile: RoundingProfile = DEFAULT_PROFILE,
    grid_step: float = 0.005,
    refine_tol: float = 1e-6,
    t_domain: tuple[float, float] | str = "full",
) -> SaddleResult:
    """``min_q max_t R(q, t)`` by nested grid scan plus golden-section
    refinement.

    ``t_domain`` is ``"full"`` ([0, 1]), ``"active"`` (the ramp of ``f+``) or
    an explicit interval. Grid ties go to the smallest argument.
    """
    if t_domain == "full":
        t_domain = (0.0, 1.0)
    elif t_domain == "active":
        t_domain = (profile.a_break, profile.b_break)
    t_lo, t_hi = map(float, t_domain)
    R = _Ratio(profile)
    qs = np.linspace(0.0, 1.0, int(round(1 / grid_step)) + 1)
    ts = np.linspace(t_lo, t_hi, max(2, int(round((t_hi - t_lo) / grid_step)) + 1))

    outer = np.array([_inner_max(R, q, ts, grid_step, refine_tol, t_lo, t_hi)[1] for q in qs])
    k = int(np.argmin(outer))
    q_lo, q_hi = max(0.0, qs[k] - grid_step), min(1.0, qs[k] + grid_step)
    m = lambda q: _inner_max(R, q, ts, grid_step, refine_tol, t_lo, t_hi)[1]  # noqa: E731
    q_star = golden_section(m, q_lo, q_hi, refine_tol)
    if m(q_star) > outer[k]:
        q_star = float(qs[k])
    t_star, r_star = _inner_max(R, q_star, ts, grid_step, refine_tol, t_lo, t_hi)
    dq, dt = partials(q_star, t_star, profile)
    return SaddleResult(
        q_star=float(q_star),
        t_star=float(t_star),
        ratio_star=float(r_star),
        grad_norm=kkt_residual(q_star, t_star, dq, dt, (t_lo, t_hi)),
        dR_dq=dq,
        dR_dt=dt,
        degenerate=R.degenerate,
        t_domain=(t_lo, t_hi),
    )


def reference_report(ramps=(1.0, 1.5, 2.0, 2.5, 3.0, 4.0), base: RoundingProfile = DEFAULT_PROFILE) -> list[dict]:
    """``R`` at the reference point and the saddle for each ramp exponent."""
    rows = []
    q0, t0 = REFERENCE_POINT
    for r in ramps:
        prof = RoundingProfile(base.a_break, base.b_break, r, base.q_neutral)
        val = float(ratio_closed_form(q0, t0, prof))
        sf = saddle_search(prof)
        sa = saddle_search(prof, t_domain="active")
        rows.append(
            {
                "ramp": r,
                "R_reference": val,
                "deviation": val - REFERENCE_RATIO,
                "saddle_full": sf.to_dict(),
                "saddle_active": sa.to_dict(),
            }
        )
    return rows
