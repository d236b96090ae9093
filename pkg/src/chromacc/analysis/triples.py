"""Local triple analysis: per-pivot costs, LP charges and worst-case ratios.

A triple ``(u, v, w)`` has edges ordered ``(uv, vw, wu)``. Pivot ``w``
charges ``uv`` using the not-join probabilities of ``wu`` and ``vw``; pivot
``u`` charges ``vw`` with ``uv`` and ``wu``; pivot ``v`` charges ``wu`` with
``vw`` and ``uv``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from chromacc.rounding import DEFAULT_PROFILE, MINUS, NEUTRAL, PLUS, RoundingProfile

SIGNS = (PLUS, MINUS, NEUTRAL)
_ALIASES = {"+": PLUS, "-": MINUS, "o": NEUTRAL, "°": NEUTRAL, "0": NEUTRAL, "n": NEUTRAL}
# (charged edge, first probability edge, second probability edge)
PIVOT_TERMS = ((0, 2, 1), (1, 0, 2), (2, 1, 0))
TRIANGLE_TOL = 1e-12


class TripleError(ValueError):
    pass


def parse_sign(s: str) -> str:
    try:
        return _ALIASES[s]
    except KeyError:
        raise TripleError(f"invalid sign token {s!r}") from None


def parse_signs(signs) -> tuple[str, str, str]:
    out = tuple(parse_sign(s) for s in signs)
    if len(out) != 3:
        raise TripleError("a triple has exactly three signs")
    return out


def edge_cost(sign: str, p1, p2):
    """Expected cost of the charged edge given the two not-join probabilities."""
    sign = parse_sign(sign)
    if sign == PLUS:
        return p1 * (1 - p2) + (1 - p1) * p2
    if sign == MINUS:
        return (1 - p1) * (1 - p2)
    return 1 - p1 * p2


def edge_lp(sign: str, p1, p2, x_edge, x_triple):
    """LP charge of the charged edge; the neutral branch uses
    ``max(1/2, 1 - x)`` over all three edges of the triple."""
    sign = parse_sign(sign)
    decided = 1 - p1 * p2
    if sign == PLUS:
        return decided * x_edge
    if sign == MINUS:
        return decided * (1 - x_edge)
    a, b, c = x_triple
    return decided * np.maximum(np.maximum(0.5, 1 - a), np.maximum(1 - b, 1 - c))


def triangle_ok(x, tol: float = TRIANGLE_TOL):
    a, b, c = x
    return (a + b >= c - tol) & (b + c >= a - tol) & (a + c >= b - tol)


def triple_cost(signs, p):
    """Sum over the three pivots; ``p`` holds the not-join probability of each
    edge in the order ``(uv, vw, wu)``."""
    signs = parse_signs(signs)
    return sum(edge_cost(signs[e], p[i], p[j]) for e, i, j in PIVOT_TERMS)


def triple_lp(signs, x, p):
    signs = parse_signs(signs)
    if not np.all(triangle_ok(x)):
        raise TripleError(f"LP values {tuple(np.round(np.asarray(x, float), 6))} violate the triangle inequality")
    return sum(edge_lp(signs[e], p[i], p[j], x[e], x) for e, i, j in PIVOT_TERMS)


def probabilities(signs, x, profile: RoundingProfile = DEFAULT_PROFILE):
    signs = parse_signs(signs)
    return tuple(profile.f(s, xi) for s, xi in zip(signs, x))


def _ratio(cost, lp):
    cost = np.asarray(cost, dtype=float)
    lp = np.asarray(lp, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(lp > 1e-12, cost / lp, np.where(cost > 1e-12, np.inf, 0.0))
    return r


@dataclass(frozen=True)
class TripleEvaluation:
    signs: tuple[str, str, str]
    x: tuple[float, float, float]
    p: tuple[float, float, float]
    cost_sum: float
    lp_sum: float
    ratio: float

    def to_dict(self) -> dict:
        return {
            "signs": "".join(self.signs),
            "x": list(self.x),
            "p": list(self.p),
            "cost_sum": self.cost_sum,
            "lp_sum": self.lp_sum,
            "ratio": self.ratio,
        }


def evaluate_triple(signs, x, profile: RoundingProfile = DEFAULT_PROFILE) -> TripleEvaluation:
    signs = parse_signs(signs)
    x = tuple(float(v) for v in x)
    p = probabilities(signs, x, profile)
    c = float(triple_cost(signs, p))
    lp = float(triple_lp(signs, x, p))
    return TripleEvaluation(signs, x, tuple(float(v) for v in p), c, lp, float(_ratio(c, lp)))


def _ratio_grid(signs, X: np.ndarray, profile: RoundingProfile) -> np.ndarray:
    xs = (X[:, 0], X[:, 1], X[:, 2])
    p = probabilities(signs, xs, profile)
    c = triple_cost(signs, p)
    lp = sum(edge_lp(signs[e], p[i], p[j], xs[e], xs) for e, i, j in PIVOT_TERMS)
    return _ratio(c, lp)


def feasible_grid(step: float) -> np.ndarray:
    k = int(round(1.0 / step))
    if not np.isclose(k * step, 1.0):
        raise TripleError(f"grid_step must divide 1, got {step}")
    g = np.arange(k + 1) / k
    X = np.stack(np.meshgrid(g, g, g, indexing="ij"), axis=-1).reshape(-1, 3)
    return X[triangle_ok(X.T)]


def _refine(signs, x0: np.ndarray, step: float, profile: RoundingProfile, tol: float) -> tuple[np.ndarray, float]:
    """Compass search inside the feasible region, halving the step to ``tol``."""
    best = x0.copy()
    val = float(_ratio_grid(signs, best[None], profile)[0])
    dirs = np.array([d for d in itertools.product((-1, 0, 1), repeat=3) if any(d)], dtype=float)
    h = step
    while h >= tol:
        improved = False
        cand = np.clip(best + h * dirs, 0.0, 1.0)
        cand = cand[triangle_ok(cand.T)]
        if len(cand):
            r = _ratio_grid(signs, cand, profile)
            k = int(np.argmax(r))
            if r[k] > val + 1e-15:
                best, val, improved = cand[k], float(r[k]), True
        if not improved:
            h /= 2
    return best, val


def sign_patterns(which: str = "all") -> list[tuple[str, str, str]]:
    """``cc``: signs in {+,-}; ``all``: signs in {+,-,o}; ``neutral``: the
    patterns with at least one neutral edge."""
    if which == "cc":
        return list(itertools.product((PLUS, MINUS), repeat=3))
    pats = list(itertools.product(SIGNS, repeat=3))
    if which == "all":
        return pats
    if which == "neutral":
        return [s for s in pats if NEUTRAL in s]
    raise TripleError(f"unknown sign set {which!r}")


def worst_triple_search(
    profile: RoundingProfile = DEFAULT_PROFILE,
    grid_step: float = 0.01,
    signs: str = "all",
    refine_tol: float = 1e-4,
) -> tuple[float, TripleEvaluation]:
    """Supremum of cost/LP over sign patterns and triangle-feasible LP values.

    Grid scan at ``grid_step``, then a compass refinement of each pattern's
    grid argmax down to ``refine_tol``. Ties go to the lexicographically
    smallest ``(signs, x)``.
    """
    if not 0 < grid_step <= 0.1:
        raise TripleError("grid_step must lie in (0, 0.1]")
    X = feasible_grid(grid_step)
    best_val, best = -np.inf, None
    for s in sign_patterns(signs):
        r = _ratio_grid(s, X, profile)
        k = int(np.argmax(r))
        x, val = X[k], float(r[k])
        if np.isfinite(val) and refine_tol:
            x, val = _refine(s, X[k], grid_step / 2, profile, refine_tol)
        if val > best_val + 1e-12 or (abs(val - best_val) <= 1e-12 and best is not None and (s, tuple(x)) < best):
            best_val, best = val, (s, tuple(float(v) for v in x))
    ev = evaluate_triple(best[0], best[1], profile)
    return ev.ratio, ev


def pattern_table(profile: RoundingProfile = DEFAULT_PROFILE, grid_step: float = 0.01, signs: str = "all"):
    """Per sign pattern grid supremum and witness, sorted by ratio."""
    X = feasible_grid(grid_step)
    rows = []
    for s in sign_patterns(signs):
        r = _ratio_grid(s, X, profile)
        k = int(np.argmax(r))
        rows.append(("".join(s), float(r[k]), tuple(float(v) for v in X[k])))
    rows.sort(key=lambda t: (-t[1], t[0]))
    return rows


def independence_witness(x=(0.5, 0.19, 0.5095)) -> list[tuple[str, float, float, bool]]:
    """The three triangle checks of a triple as ``(label, lhs, rhs, holds)``
    rows; with the default the neutral at 1/2 sits beside the two extreme
    positive-curve breakpoints."""
    a, b, c = x
    checks = [(f"{a} + {b} >= {c}", a + b, c), (f"{b} + {c} >= {a}", b + c, a), (f"{c} + {a} >= {b}", c + a, b)]
    return [(label, lhs, rhs, bool(lhs >= rhs)) for label, lhs, rhs in checks]
