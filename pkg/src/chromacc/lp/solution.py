"""Fractional solutions, feasibility reports and integral encodings."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from chromacc.instances import GAMMA, CccInstance, Clustering, check_clustering, n_pairs, pair_index
from chromacc.lp.model import C4, METRIC, TRIANGLE, VERTEX, triangle_pairs, triples

DEFAULT_EPS_FEAS = 1e-7


class SolverStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    TOLERANCE_WARNING = "tolerance_warning"


@dataclass(frozen=True, eq=False)
class LpSolution:
    """Node values ``x_node[u, c]`` and pair values ``x_pair[k, c]`` where ``k``
    is the row-major pair index."""

    n: int
    L: int
    x_node: np.ndarray
    x_pair: np.ndarray
    objective: float
    status: SolverStatus = SolverStatus.OPTIMAL
    c4: bool = False
    max_violation: float = 0.0
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.x_node.shape != (self.n, self.L):
            raise ValueError(f"x_node has shape {self.x_node.shape}, expected {(self.n, self.L)}")
        if self.x_pair.shape != (n_pairs(self.n), self.L):
            raise ValueError(f"x_pair has shape {self.x_pair.shape}, expected {(n_pairs(self.n), self.L)}")

    @property
    def y_pair(self) -> np.ndarray:
        """Fractional affinity ``1 - x`` per pair and color."""
        return 1.0 - self.x_pair

    @property
    def y_node(self) -> np.ndarray:
        return 1.0 - self.x_node

    def pair(self, u: int, v: int) -> np.ndarray:
        return self.x_pair[pair_index(u, v, self.n)]

    def vector(self) -> np.ndarray:
        """Flat variable vector in model order."""
        return np.concatenate([self.x_node.ravel(), self.x_pair.ravel()])

    @classmethod
    def from_vector(cls, inst: CccInstance, x, **kw) -> "LpSolution":
        x = np.asarray(x, dtype=float)
        n, L = inst.n, inst.L
        node = x[: n * L].reshape(n, L)
        pair = x[n * L :].reshape(n_pairs(n), L)
        obj = kw.pop("objective", None)
        if obj is None:
            obj = lp_objective(inst, pair)
        return cls(n, L, node, pair, obj, **kw)


def lp_objective(inst: CccInstance, x_pair: np.ndarray) -> float:
    codes = inst.pair_colors
    lab = codes != GAMMA
    total = x_pair[np.flatnonzero(lab), codes[lab]].sum()
    total += (1.0 - x_pair[~lab]).sum()
    return float(total)


@dataclass(frozen=True)
class Violation:
    family: str
    where: tuple
    color: int | None
    slack: float


@dataclass
class ViolationReport:
    violations: list[Violation]
    checked: dict[str, int]

    def __bool__(self):
        return bool(self.violations)

    def __len__(self):
        return len(self.violations)

    @property
    def max_violation(self) -> float:
        return max((-v.slack for v in self.violations), default=0.0)

    def by_family(self) -> dict[str, int]:
        out = {}
        for v in self.violations:
            out[v.family] = out.get(v.family, 0) + 1
        return out

    def summary(self, limit: int = 5) -> str:
        if not self.violations:
            return "feasible"
        head = ", ".join(f"{f}={k}" for f, k in sorted(self.by_family().items()))
        ex = "; ".join(f"{v.family}{v.where} c={v.color} slack={v.slack:.3g}" for v in self.violations[:limit])
        return f"{len(self.violations)} violations ({head}); max {self.max_violation:.3g}; e.g. {ex}"


def validate_solution(
    inst: CccInstance, sol: LpSolution, with_c4: bool = False, eps_feas: float = DEFAULT_EPS_FEAS
) -> ViolationReport:
    """List every violated row of the relaxation (and of the C4 rows when
    ``with_c4``) whose slack is below ``-eps_feas``."""
    n, L = inst.n, inst.L
    if (sol.n, sol.L) != (n, L):
        raise ValueError(f"solution is for n={sol.n}, L={sol.L}; instance has n={n}, L={L}")
    xn, xp = sol.x_node, sol.x_pair
    out: list[Violation] = []
    checked = {}

    def collect(family, slack, where_fn, color_axis=True):
        bad = np.argwhere(slack < -eps_feas)
        for idx in bad:
            idx = tuple(int(i) for i in idx)
            where, color = where_fn(idx)
            out.append(Violation(family, where, color, float(slack[idx])))

    for name, arr in (("bound_node", xn), ("bound_pair", xp)):
        checked[name] = arr.size
        lo = arr
        hi = 1.0 - arr
        collect(name, np.minimum(lo, hi), lambda i, name=name: ((i[0],), i[1]))

    iu, iv = np.triu_indices(n, 1)
    for end in (iu, iv):
        slack = xp - xn[end]
        checked[METRIC] = checked.get(METRIC, 0) + slack.size
        collect(METRIC, slack, lambda i, end=end: ((int(iu[i[0]]), int(iv[i[0]]), int(end[i[0]])), i[1]))

    tp = triangle_pairs(n)
    if len(tp):
        t = triples(n)
        a, b, d = xp[tp[:, 0]], xp[tp[:, 1]], xp[tp[:, 2]]
        for s in (a + b - d, a + d - b, b + d - a):
            checked[TRIANGLE] = checked.get(TRIANGLE, 0) + s.size
            collect(TRIANGLE, s, lambda i: (tuple(int(z) for z in t[i[0]]), i[1]))

    vs = xn.sum(axis=1) - (L - 1)
    checked[VERTEX] = n
    collect(VERTEX, -np.abs(vs), lambda i: ((i[0],), None))

    if with_c4:
        s = xp.sum(axis=1) - (L - 1)
        checked[C4] = len(s)
        collect(C4, s, lambda i: ((int(iu[i[0]]), int(iv[i[0]])), None))

    return ViolationReport(out, checked)


def integral_encoding(inst: CccInstance, cl: Clustering) -> LpSolution:
    """The 0/1 point of a clustering: ``x = 0`` exactly where the vertex (pair)
    sits in (shares) a cluster of that color."""
    check_clustering(inst, cl)
    n, L = inst.n, inst.L
    vcol = cl.vertex_colors()
    x_node = np.ones((n, L))
    x_node[np.arange(n), vcol] = 0.0
    iu, iv = np.triu_indices(n, 1)
    x_pair = np.ones((len(iu), L))
    same = np.flatnonzero(cl.assignment[iu] == cl.assignment[iv])
    x_pair[same, vcol[iu[same]]] = 0.0
    return LpSolution(n, L, x_node, x_pair, lp_objective(inst, x_pair), c4=True)
