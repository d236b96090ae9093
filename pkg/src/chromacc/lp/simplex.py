"""Dense two-phase tableau simplex for small linear programs.

Solves ``min c.x`` subject to ``A_ge x >= b_ge``, ``A_eq x = b_eq`` and
``0 <= x <= upper``. Upper bounds become explicit rows, so this is only meant
for desk-sized models.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class SimplexError(RuntimeError):
    pass


@dataclass
class SimplexResult:
    x: np.ndarray
    fun: float
    status: str  # "optimal" | "infeasible" | "unbounded"
    iterations: int


_TOL = 1e-9


def _pivot(T: np.ndarray, r: int, c: int) -> None:
    T[r] /= T[r, c]
    col = T[:, c].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])


def _run(T: np.ndarray, basis: np.ndarray, allowed: np.ndarray, max_iter: int) -> tuple[str, int]:
    """Minimise the objective held in the last row of ``T``.

    Dantzig pricing, with Bland's rule after a run of degenerate pivots.
    """
    m = T.shape[0] - 1
    degenerate = 0
    for it in range(max_iter):
        red = T[-1, :-1]
        cand = np.flatnonzero((red < -_TOL) & allowed)
        if not len(cand):
            return "optimal", it
        bland = degenerate > 50
        c = cand[0] if bland else cand[np.argmin(red[cand])]
        col = T[:m, c]
        pos = col > _TOL
        if not pos.any():
            return "unbounded", it
        ratios = np.full(m, np.inf)
        ratios[pos] = T[:m, -1][pos] / col[pos]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + _TOL)
        r = ties[np.argmin(basis[ties])] if bland else ties[0]
        degenerate = degenerate + 1 if best <= _TOL else 0
        _pivot(T, r, c)
        basis[r] = c
    raise SimplexError(f"no convergence after {max_iter} pivots")


def solve_dense(c, A_ge=None, b_ge=None, A_eq=None, b_eq=None, upper=None, max_iter: int = 50_000) -> SimplexResult:
    c = np.asarray(c, dtype=float)
    nv = len(c)
    A_ge = np.zeros((0, nv)) if A_ge is None else np.asarray(A_ge, dtype=float)
    b_ge = np.zeros(0) if b_ge is None else np.asarray(b_ge, dtype=float)
    A_eq = np.zeros((0, nv)) if A_eq is None else np.asarray(A_eq, dtype=float)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float)

    # rows: A_ge x - s = b_ge ; x + s' = upper ; A_eq x = b_eq
    blocks_A = [A_ge]
    blocks_b = [b_ge]
    slack_sign = [-np.ones(len(b_ge))]
    if upper is not None:
        upper = np.broadcast_to(np.asarray(upper, dtype=float), (nv,))
        fin = np.flatnonzero(np.isfinite(upper))
        U = np.zeros((len(fin), nv))
        U[np.arange(len(fin)), fin] = 1.0
        blocks_A.append(U)
        blocks_b.append(upper[fin])
        slack_sign.append(np.ones(len(fin)))
    n_ineq = sum(len(b) for b in blocks_b)
    A = np.vstack(blocks_A + [A_eq])
    b = np.concatenate(blocks_b + [b_eq])
    m = len(b)
    S = np.zeros((m, n_ineq))
    S[np.arange(n_ineq), np.arange(n_ineq)] = np.concatenate(slack_sign)

    flip = b < 0
    A[flip] *= -1
    S[flip] *= -1
    b = np.where(flip, -b, b)

    ncol = nv + n_ineq + m
    T = np.zeros((m + 1, ncol + 1))
    T[:m, :nv] = A
    T[:m, nv : nv + n_ineq] = S
    T[:m, nv + n_ineq : ncol] = np.eye(m)
    T[:m, -1] = b
    basis = np.arange(nv + n_ineq, ncol)

    # phase 1: minimise the sum of artificials
    T[-1, :ncol] = 0.0
    T[-1, nv + n_ineq : ncol] = 1.0
    T[-1, -1] = 0.0
    T[-1] -= T[:m].sum(axis=0)
    allowed = np.ones(ncol, dtype=bool)
    _, it1 = _run(T, basis, allowed, max_iter)
    if -T[-1, -1] > 1e-7:
        return SimplexResult(np.full(nv, np.nan), np.nan, "infeasible", it1)

    # drive remaining artificials out of the basis
    art = np.arange(nv + n_ineq, ncol)
    for r in np.flatnonzero(basis >= nv + n_ineq):
        row = T[r, : nv + n_ineq]
        nz = np.flatnonzero(np.abs(row) > _TOL)
        if len(nz):
            _pivot(T, r, nz[0])
            basis[r] = nz[0]
    allowed[art] = False

    # phase 2
    T[-1, :] = 0.0
    T[-1, :nv] = c
    for r, j in enumerate(basis):
        if T[-1, j] != 0.0:
            T[-1] -= T[-1, j] * T[r]
    status, it2 = _run(T, basis, allowed, max_iter)
    if status != "optimal":
        return SimplexResult(np.full(nv, np.nan), np.nan, status, it1 + it2)
    x = np.zeros(ncol)
    x[basis] = T[:m, -1]
    x = x[:nv]
    return SimplexResult(x, float(c @ x), "optimal", it1 + it2)
