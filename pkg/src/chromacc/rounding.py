"""Rounding curves and the pivot-based clustering algorithms.

The rounding curves map an LP separation value to the probability that a
vertex is *not* placed in the pivot's cluster. Each algorithm takes a seed and
derives independent random streams for pivots, cluster colors and join
thresholds, so two algorithms that make the same decisions consume the same
randomness.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from chromacc.instances import GAMMA, CccInstance, Clustering, pair_index
from chromacc.lp.solution import DEFAULT_EPS_FEAS, LpSolution, validate_solution

PLUS, MINUS, NEUTRAL = "+", "-", "o"
INTERVAL_MODES = ("cc", "plus", "signed")
_X_SLOP = 1e-9


class RoundingError(ValueError):
    pass


@dataclass(frozen=True)
class RoundingProfile:
    a_break: float = 0.19
    b_break: float = 0.5095
    ramp: float = 2.0
    q_neutral: float = 0.8493

    def __post_init__(self):
        if not 0.0 <= self.a_break < self.b_break <= 1.0:
            raise RoundingError(f"need 0 <= a_break < b_break <= 1, got {self.a_break}, {self.b_break}")
        if self.ramp <= 0:
            raise RoundingError(f"ramp must be positive, got {self.ramp}")
        if not 0.0 <= self.q_neutral <= 1.0:
            raise RoundingError(f"q_neutral must lie in [0, 1], got {self.q_neutral}")

    def f_plus(self, x):
        x = _check_unit(x)
        a, b = self.a_break, self.b_break
        mid = np.clip((x - a) / (b - a), 0.0, 1.0) ** self.ramp
        return _scalar(np.where(x < a, 0.0, np.where(x >= b, 1.0, mid)))

    def f_minus(self, x):
        return _scalar(_check_unit(x))

    def f_circ(self, x):
        return _scalar(np.clip(np.maximum(_check_unit(x), self.q_neutral), 0.0, 1.0))

    def f(self, sign: str, x):
        if sign == PLUS:
            return self.f_plus(x)
        if sign == MINUS:
            return self.f_minus(x)
        if sign == NEUTRAL:
            return self.f_circ(x)
        raise RoundingError(f"unknown sign {sign!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RoundingProfile":
        unknown = set(data) - {"a_break", "b_break", "ramp", "q_neutral"}
        if unknown:
            raise RoundingError(f"unknown profile keys: {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in data.items()})

    @classmethod
    def load(cls, path) -> "RoundingProfile":
        return cls.from_dict(json.loads(Path(path).read_text()))


DEFAULT_PROFILE = RoundingProfile()


def _check_unit(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(x < -_X_SLOP) or np.any(x > 1 + _X_SLOP) or np.any(np.isnan(x)):
        raise RoundingError("rounding curves are defined on [0, 1]")
    return np.clip(x, 0.0, 1.0)


def _scalar(a: np.ndarray):
    return float(a) if a.ndim == 0 else a


def f_plus(x, profile: RoundingProfile = DEFAULT_PROFILE):
    return profile.f_plus(x)


def f_minus(x):
    return DEFAULT_PROFILE.f_minus(x)


def f_circ(x, profile: RoundingProfile = DEFAULT_PROFILE):
    return profile.f_circ(x)


# -- randomness -----------------------------------------------------------------


@dataclass
class _Streams:
    pivot: np.random.Generator
    color: np.random.Generator
    theta: np.random.Generator


def _streams(seed: int) -> _Streams:
    pivot, color, theta = np.random.SeedSequence(int(seed)).spawn(3)
    return _Streams(*(np.random.default_rng(s) for s in (pivot, color, theta)))


def _pick(rng: np.random.Generator, pool: np.ndarray) -> int:
    return int(pool[rng.integers(len(pool))])


class _Builder:
    def __init__(self, n: int):
        self.assignment = np.full(n, -1, dtype=np.int64)
        self.colors: dict[int, int] = {}

    def add(self, members, color: int) -> None:
        k = len(self.colors)
        self.assignment[np.asarray(members, dtype=np.int64)] = k
        self.colors[k] = int(color)

    def unclustered(self) -> np.ndarray:
        return np.flatnonzero(self.assignment < 0)

    def finish(self, leftover_color: int = 0) -> Clustering:
        for v in self.unclustered():
            self.add([v], leftover_color)
        return Clustering(self.assignment, self.colors)


def _majority(colors: np.ndarray, L: int) -> int | None:
    if not len(colors):
        return None
    return int(np.argmax(np.bincount(colors, minlength=L)))


# -- combinatorial pivots ---------------------------------------------------------


def pivot_chromatic(inst: CccInstance, seed: int = 0) -> Clustering:
    """Pivot with the majority color of the pivot's labeled edges to
    unclustered vertices; the pivot takes every such neighbor of that color."""
    rng = _streams(seed)
    out = _Builder(inst.n)
    U = out.unclustered()
    while len(U):
        w = _pick(rng.pivot, U)
        others = U[U != w]
        row = inst.row(w)[others]
        c = _majority(row[row != GAMMA].astype(np.int64), inst.L)
        if c is None:
            out.add([w], 0)
        else:
            out.add(np.concatenate([[w], others[row == c]]), c)
        U = out.unclustered()
    return out.finish()


def std_cc_round(inst: CccInstance, seed: int = 0) -> Clustering:
    """Color-blind pivot (labeled = +, GAMMA = -), then each cluster takes the
    majority color of its internal labeled pairs."""
    rng = _streams(seed)
    out = _Builder(inst.n)
    U = out.unclustered()
    while len(U):
        w = _pick(rng.pivot, U)
        others = U[U != w]
        members = np.concatenate([[w], others[inst.row(w)[others] != GAMMA]])
        sub = inst.matrix()[np.ix_(members, members)] if inst.is_dense else np.array([inst.row(u)[members] for u in members])
        iu, iv = np.triu_indices(len(members), 1)
        internal = sub[iu, iv]
        c = _majority(internal[internal != GAMMA].astype(np.int64), inst.L)
        out.add(members, 0 if c is None else c)
        U = out.unclustered()
    return out.finish()


# -- LP-based rounding ------------------------------------------------------------


def _check_solution(inst: CccInstance, sol: LpSolution, with_c4: bool, eps_feas: float) -> None:
    report = validate_solution(inst, sol, with_c4=with_c4, eps_feas=eps_feas)
    if report:
        raise RoundingError(f"LP solution is not feasible: {report.summary()}")


def edge_signs(codes: np.ndarray, c: int) -> np.ndarray:
    """Sign of each pair code under processing color ``c``."""
    return np.where(codes == c, PLUS, np.where(codes == GAMMA, MINUS, NEUTRAL))


def _not_join(profile: RoundingProfile, codes: np.ndarray, x: np.ndarray, c: int) -> np.ndarray:
    p = np.empty(len(codes))
    for sign in (PLUS, MINUS, NEUTRAL):
        m = edge_signs(codes, c) == sign
        if m.any():
            p[m] = profile.f(sign, x[m])
    return p


def majority_color_sets(sol: LpSolution) -> list[np.ndarray]:
    """``S_c``: the vertices whose node value for ``c`` is below one half."""
    return [np.flatnonzero(sol.x_node[:, c] < 0.5) for c in range(sol.L)]


def lp_ccc_round(
    inst: CccInstance,
    sol: LpSolution,
    profile: RoundingProfile = DEFAULT_PROFILE,
    seed: int = 0,
    check: bool = True,
    eps_feas: float = DEFAULT_EPS_FEAS,
) -> Clustering:
    """Color-independent LP pivot.

    Colors are processed in ascending order. Within the still-unclustered part
    of ``S_c`` a random pivot ``w`` takes each other vertex ``v`` with
    probability ``1 - f^s(x^c_wv)``, where ``s`` is the sign of ``wv`` under
    ``c``. Vertices in no ``S_c`` end as color-0 singletons.
    """
    if check:
        _check_solution(inst, sol, False, eps_feas)
    rng = _streams(seed)
    n = inst.n
    home = np.full(n, -1)
    below = sol.x_node < 0.5
    has = below.any(axis=1)
    # a feasible point has at most one color below 1/2; argmin settles float ties
    home[has] = np.argmin(np.where(below, sol.x_node, np.inf), axis=1)[has]
    out = _Builder(n)
    for c in range(inst.L):
        U = np.flatnonzero((home == c) & (out.assignment < 0))
        while len(U):
            w = _pick(rng.pivot, U)
            others = U[U != w]
            x = sol.x_pair[pair_index(w, others, n), c]
            p = _not_join(profile, inst.row(w)[others].astype(np.int64), x, c)
            theta = rng.theta.random(len(others))
            out.add(np.concatenate([[w], others[theta < 1.0 - p]]), c)
            U = np.flatnonzero((home == c) & (out.assignment < 0))
    return out.finish()


@dataclass
class RoundRecord:
    pivot: int
    color: int
    color_weights: np.ndarray
    vertices: np.ndarray
    theta: np.ndarray
    starts: np.ndarray  # (len(vertices), L)
    lengths: np.ndarray  # (len(vertices), L)
    joined: np.ndarray


@dataclass
class RoundingTrace:
    rounds: list[RoundRecord] = field(default_factory=list)

    def interval_sums(self) -> np.ndarray:
        if not self.rounds:
            return np.zeros(0)
        return np.concatenate([r.lengths.sum(axis=1) for r in self.rounds])

    def overlaps(self) -> int:
        """(pivot, vertex) records where two positive-length color intervals
        intersect, or where the threshold falls into more than one interval."""
        bad = 0
        for r in self.rounds:
            if not len(r.vertices):
                continue
            lo, hi = r.starts, r.starts + r.lengths
            pos = r.lengths > 0
            for i in range(r.lengths.shape[1]):
                for j in range(i + 1, r.lengths.shape[1]):
                    both = pos[:, i] & pos[:, j]
                    inter = (np.minimum(hi[:, i], hi[:, j]) > np.maximum(lo[:, i], lo[:, j])) & both
                    bad += int(inter.sum())
            hits = ((r.theta[:, None] >= lo) & (r.theta[:, None] < hi) & pos).sum(axis=1)
            bad += int((hits > 1).sum())
        return bad

    def records(self):
        """Flat per-(round, vertex) records for audit dumps."""
        for k, r in enumerate(self.rounds):
            for i, v in enumerate(r.vertices.tolist()):
                yield {
                    "round": k,
                    "pivot": r.pivot,
                    "color": r.color,
                    "vertex": v,
                    "theta": float(r.theta[i]),
                    "intervals": [[float(a), float(a + b)] for a, b in zip(r.starts[i], r.lengths[i])],
                    "joined": bool(r.joined[i]),
                }

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            for rec in self.records():
                fh.write(json.dumps(rec) + "\n")


def interval_lengths(
    profile: RoundingProfile, codes: np.ndarray, x: np.ndarray, mode: str = "cc"
) -> np.ndarray:
    """Join-interval lengths per color for pairs ``(w, v)``.

    ``codes`` holds the pair codes (shape ``(m,)``), ``x`` the LP values
    ``(m, L)``. Modes: ``plus`` uses ``1 - f+`` for every pair; ``cc`` (the
    default) uses ``1 - f-`` for GAMMA pairs and ``1 - f+`` otherwise;
    ``signed`` uses the sign of the pair under each color.
    """
    L = x.shape[1]
    if mode == "plus":
        return 1.0 - profile.f_plus(x)
    if mode == "cc":
        lengths = 1.0 - profile.f_plus(x)
        g = codes == GAMMA
        lengths[g] = 1.0 - profile.f_minus(x[g])
        return lengths
    if mode == "signed":
        return np.column_stack([1.0 - _not_join(profile, codes, x[:, c], c) for c in range(L)])
    raise RoundingError(f"unknown interval mode {mode!r}")


def c4_round(
    inst: CccInstance,
    sol: LpSolution,
    profile: RoundingProfile = DEFAULT_PROFILE,
    seed: int = 0,
    mode: str = "cc",
    check: bool = True,
    eps_feas: float = DEFAULT_EPS_FEAS,
    trace: bool = True,
) -> tuple[Clustering, RoundingTrace | None]:
    """Correlated interval packing.

    Per round: a uniform pivot ``w``; a cluster color drawn with probability
    ``1 - x^c_w``; one threshold per unclustered ``v`` against join intervals
    laid out by ascending color from 0. ``v`` joins iff its threshold lands in
    the interval of the drawn color.
    """
    if check:
        if not sol.c4:
            raise RoundingError("c4 rounding needs a solution of the C4-augmented model")
        _check_solution(inst, sol, True, eps_feas)
    rng = _streams(seed)
    n, L = inst.n, inst.L
    out = _Builder(n)
    tr = RoundingTrace() if trace else None
    U = out.unclustered()
    while len(U):
        w = _pick(rng.pivot, U)
        weights = np.clip(1.0 - sol.x_node[w], 0.0, None)
        total = weights.sum()
        if total <= 0:
            raise RoundingError(f"vertex {w} has no color mass")
        cdf = np.cumsum(weights / total)
        cstar = min(int(np.searchsorted(cdf, rng.color.random(), side="right")), L - 1)
        others = U[U != w]
        x = sol.x_pair[pair_index(w, others, n)]
        lengths = interval_lengths(profile, inst.row(w)[others].astype(np.int64), x, mode)
        sums = lengths.sum(axis=1)
        if len(sums) and sums.max() > 1.0 + eps_feas:
            v = int(others[np.argmax(sums)])
            raise RoundingError(f"join intervals for ({w}, {v}) sum to {sums.max():.6g} > 1; C4 row violated")
        starts = np.cumsum(lengths, axis=1) - lengths
        theta = rng.theta.random(len(others))
        lo, ln = starts[:, cstar], lengths[:, cstar]
        joined = (theta >= lo) & (theta < lo + ln)
        out.add(np.concatenate([[w], others[joined]]), cstar)
        if tr is not None:
            tr.rounds.append(RoundRecord(w, cstar, weights, others, theta, starts, lengths, joined))
        U = out.unclustered()
    return out.finish(), tr


ALGORITHMS = ("pivot", "std_cc", "lp_ccc", "c4")


def run_algorithm(
    name: str,
    inst: CccInstance,
    sol: LpSolution | None = None,
    profile: RoundingProfile = DEFAULT_PROFILE,
    seed: int = 0,
    **kw,
) -> Clustering:
    """Dispatch by algorithm id; LP-based ones need ``sol``."""
    if name == "pivot":
        return pivot_chromatic(inst, seed)
    if name == "std_cc":
        return std_cc_round(inst, seed)
    if sol is None:
        raise RoundingError(f"algorithm {name!r} needs an LP solution")
    if name == "lp_ccc":
        return lp_ccc_round(inst, sol, profile, seed, **kw)
    if name == "c4":
        return c4_round(inst, sol, profile, seed, trace=False, **kw)[0]
    raise RoundingError(f"unknown algorithm {name!r}; choose from {ALGORITHMS}")
