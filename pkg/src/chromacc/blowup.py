"""Chromatic blowup of a signed CC instance with its fractional LP point.

Vertex ``(u, i)`` of the blowup (base vertex ``u``, plane ``i``) gets index
``u * L + i``.
"""

from __future__ import annotations

import numpy as np

from chromacc.instances import GAMMA, CccInstance, InstanceError, n_pairs
from chromacc.lp.model import triangle_pairs
from chromacc.lp.solution import LpSolution, lp_objective

TRIANGLE_TOL = 1e-9


def _as_pair_vector(a, n: int | None, what: str) -> tuple[np.ndarray, int]:
    a = np.asarray(a)
    if a.ndim == 2:
        if a.shape[0] != a.shape[1]:
            raise InstanceError(f"{what} matrix must be square")
        n = a.shape[0]
        return a[np.triu_indices(n, 1)], n
    if n is None:
        # invert P = n(n-1)/2
        n = int(round((1 + np.sqrt(1 + 8 * len(a))) / 2))
    if len(a) != n_pairs(n):
        raise InstanceError(f"{what} has {len(a)} pair entries, not a valid n(n-1)/2")
    return a, n


def parse_cc_signs(signs) -> np.ndarray:
    """``+1`` / ``-1`` per pair from ints, booleans or ``"+"``/``"-"`` tokens."""
    out = []
    for s in np.asarray(signs).ravel().tolist():
        if s in ("+", 1):
            out.append(1)
        elif s in ("-", -1, 0):
            out.append(-1)
        else:
            raise InstanceError(f"invalid CC sign {s!r}")
    return np.array(out, dtype=int)


def check_metric(x: np.ndarray, n: int, tol: float = TRIANGLE_TOL) -> None:
    if np.any(x < -tol) or np.any(x > 1 + tol):
        raise InstanceError("base LP values must lie in [0, 1]")
    tp = triangle_pairs(n)
    if len(tp):
        a, b, d = x[tp[:, 0]], x[tp[:, 1]], x[tp[:, 2]]
        worst = min((a + b - d).min(), (a + d - b).min(), (b + d - a).min())
        if worst < -tol:
            raise InstanceError(f"base LP values violate the triangle inequality by {-worst:.3g}")


def gen_chromatic_blowup(cc_signs, cc_lp, L: int) -> tuple[CccInstance, LpSolution]:
    """Blow a signed base graph up into ``L`` color planes.

    ``cc_signs`` and ``cc_lp`` are either ``n x n`` matrices or pair vectors in
    row-major upper-triangle order. Parallel pairs ``(u,i),(v,i)`` get color
    ``i`` (``+``) or GAMMA (``-``); every other pair takes the plane of its
    lower-indexed endpoint. The fractional point sets parallel pairs to the base
    value under their own color, every cross-plane pair to 1/2, and node values
    to 0 on the vertex's own plane and 1 elsewhere. Parallel pairs under a
    foreign color are set to 1.
    """
    if L < 1:
        raise InstanceError("L must be >= 1")
    x_base, n = _as_pair_vector(np.asarray(cc_lp, dtype=float), None, "cc_lp")
    sg, n2 = _as_pair_vector(cc_signs, n, "cc_signs")
    if n2 != n:
        raise InstanceError("cc_signs and cc_lp describe different vertex counts")
    sg = parse_cc_signs(sg)
    check_metric(x_base, n)

    N = n * L
    base = np.arange(N) // L
    plane = np.arange(N) % L
    iu, iv = np.triu_indices(N, 1)
    bu, bv, pu, pv = base[iu], base[iv], plane[iu], plane[iv]
    parallel = (pu == pv) & (bu != bv)
    codes = pu.copy()  # lower endpoint's plane
    k_base = np.zeros(len(iu), dtype=int)
    lo, hi = np.minimum(bu, bv), np.maximum(bu, bv)
    k_base[parallel] = (lo * (2 * n - lo - 1) // 2 + (hi - lo - 1))[parallel]
    neg = parallel & (sg[k_base] < 0)
    codes[neg] = GAMMA
    inst = CccInstance.from_pair_colors(N, L, codes)

    x_node = np.ones((N, L))
    x_node[np.arange(N), plane] = 0.0
    x_pair = np.full((len(iu), L), 0.5)
    P = np.flatnonzero(parallel)
    x_pair[P] = 1.0
    x_pair[P, pu[P]] = x_base[k_base[P]]
    sol = LpSolution(N, L, x_node, x_pair, lp_objective(inst, x_pair), info={"construction": "blowup"})
    return inst, sol
