"""The additive chromatic penalty ``Delta(L) = (L-1)/L * Delta_inf`` and
per-vertex chromatic interference."""

from __future__ import annotations

import math

import numpy as np

from chromacc.instances import GAMMA, CccInstance

GAP_CC = 2.0600
DELTA_INF = 0.0734


def staircase(L, gap_cc: float = GAP_CC, delta_inf: float = DELTA_INF) -> tuple[float, float]:
    """``(delta_L, gap_L)`` for one color count; ``L`` may be ``math.inf``."""
    if not L >= 1:
        raise ValueError(f"L must be >= 1, got {L}")
    frac = 1.0 if math.isinf(L) else (L - 1) / L
    d = frac * delta_inf
    return d, gap_cc + d


def staircase_table(Ls=(1, 2, 3, 4, 10, math.inf), gap_cc: float = GAP_CC, delta_inf: float = DELTA_INF) -> list[dict]:
    rows = []
    for L in Ls:
        d, g = staircase(L, gap_cc, delta_inf)
        rows.append({"L": L, "delta": d, "gap": g})
    return rows


def format_staircase(rows: list[dict], digits: int = 4) -> str:
    out = ["L\tdelta_L\tgap_CCC"]
    for r in rows:
        L = "inf" if math.isinf(r["L"]) else str(int(r["L"]))
        out.append(f"{L}\t{r['delta']:.{digits}f}\t{r['gap']:.{digits}f}")
    return "\n".join(out) + "\n"


def parse_L(token: str) -> float:
    t = str(token).strip().lower()
    if t in ("inf", "infinity", "oo"):
        return math.inf
    return int(t)


def compute_interference(inst: CccInstance, c: int, u: int) -> float:
    """Fraction of the ``n - 1`` pairs at ``u`` labeled with a color other than
    ``c`` (GAMMA pairs count in the denominator only)."""
    if not 0 <= c < inst.L:
        raise ValueError(f"color {c} outside 0..{inst.L - 1}")
    if not 0 <= u < inst.n:
        raise ValueError(f"vertex {u} outside 0..{inst.n - 1}")
    if inst.n < 2:
        return 0.0
    row = np.delete(inst.row(u), u)
    return float(np.count_nonzero((row != GAMMA) & (row != c))) / (inst.n - 1)


def mean_interference(inst: CccInstance, group_of=None) -> float:
    """Average of ``I_c(u)`` over vertices, with ``c`` the vertex's group
    (default: the vertex's block under an equal split into ``L`` groups)."""
    if group_of is None:
        size = inst.n // inst.L
        group_of = np.arange(inst.n) // size
    return float(np.mean([compute_interference(inst, int(group_of[u]), u) for u in range(inst.n)]))
