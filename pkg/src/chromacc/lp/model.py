"""Linear-program model for chromatic correlation clustering.

Variables are ordered node-first: ``x_u{u}_c{c}`` at ``u*L + c``, then pair
variables ``x_p{u}_{v}_c{c}`` at ``n*L + k*L + c`` where ``k`` is the
row-major index of the pair ``u < v``. Every row reads ``a . x (>=|=) rhs``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from chromacc.instances import GAMMA, CccInstance, n_pairs, pair_index

METRIC = "metric"
TRIANGLE = "triangle"
VERTEX = "vertex"
C4 = "c4"
FAMILIES = (METRIC, TRIANGLE, VERTEX, C4)


class ModelError(ValueError):
    pass


@lru_cache(maxsize=8)
def triples(n: int) -> np.ndarray:
    """All ``u < v < w`` as an ``(T, 3)`` array."""
    if n < 3:
        return np.zeros((0, 3), dtype=np.int64)
    idx = np.array(np.triu_indices(n, 1)).T
    out = []
    for u in range(n - 2):
        vw = idx[(idx[:, 0] > u)]
        out.append(np.column_stack([np.full(len(vw), u), vw]))
    t = np.concatenate(out)
    t.setflags(write=False)
    return t


@lru_cache(maxsize=8)
def triangle_pairs(n: int) -> np.ndarray:
    """For every triple ``u<v<w`` the pair indices ``(uv, vw, uw)``."""
    t = triples(n)
    out = np.column_stack(
        [pair_index(t[:, 0], t[:, 1], n), pair_index(t[:, 1], t[:, 2], n), pair_index(t[:, 0], t[:, 2], n)]
    )
    out.setflags(write=False)
    return out


def node_var(u, c, L: int):
    return np.asarray(u) * L + np.asarray(c)


def pair_var(k, c, n: int, L: int):
    return n * L + np.asarray(k) * L + np.asarray(c)


def var_names(n: int, L: int) -> list[str]:
    names = [f"x_u{u}_c{c}" for u in range(n) for c in range(L)]
    iu, iv = np.triu_indices(n, 1)
    names += [f"x_p{u}_{v}_c{c}" for u, v in zip(iu.tolist(), iv.tolist()) for c in range(L)]
    return names


@dataclass(frozen=True, eq=False)
class LpModel:
    """Objective ``constant + objective . x`` to be minimised over ``[0,1]``."""

    n: int
    L: int
    objective: np.ndarray
    constant: float
    A: sp.csr_matrix
    senses: np.ndarray  # ">=" or "="
    rhs: np.ndarray
    families: np.ndarray
    has_c4: bool = False

    @property
    def n_vars(self) -> int:
        return len(self.objective)

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]

    @property
    def names(self) -> list[str]:
        return var_names(self.n, self.L)

    def rows_of(self, family: str) -> np.ndarray:
        return np.flatnonzero(self.families == family)

    def row_counts(self) -> dict[str, int]:
        return {f: int(np.count_nonzero(self.families == f)) for f in FAMILIES}

    def evaluate(self, x: np.ndarray) -> float:
        return float(self.constant + self.objective @ x)

    def structurally_equal(self, other: "LpModel") -> bool:
        return (
            self.n == other.n
            and self.L == other.L
            and self.has_c4 == other.has_c4
            and np.array_equal(self.objective, other.objective)
            and self.constant == other.constant
            and np.array_equal(self.senses, other.senses)
            and np.array_equal(self.rhs, other.rhs)
            and np.array_equal(self.families, other.families)
            and self.A.shape == other.A.shape
            and (self.A != other.A).nnz == 0
        )


def _rows(data, cols, nrows, ncols, width):
    r = np.repeat(np.arange(nrows), width)
    return sp.csr_matrix((np.ravel(data), (r, np.ravel(cols))), shape=(nrows, ncols))


def build_ccc_lp(inst: CccInstance) -> LpModel:
    n, L = inst.n, inst.L
    P = n_pairs(n)
    N = n * L + P * L
    codes = inst.pair_colors

    obj = np.zeros(N)
    lab = np.flatnonzero(codes != GAMMA)
    obj[pair_var(lab, codes[lab], n, L)] += 1.0
    gam = np.flatnonzero(codes == GAMMA)
    for c in range(L):
        obj[pair_var(gam, c, n, L)] -= 1.0
    constant = float(L * len(gam))

    blocks, senses, rhs, fams = [], [], [], []

    # x_p(uv,c) - x_u(c) >= 0 and x_p(uv,c) - x_v(c) >= 0
    iu, iv = np.triu_indices(n, 1)
    k = np.repeat(np.arange(P), L)
    c = np.tile(np.arange(L), P)
    for end in (iu, iv):
        uu = np.repeat(end, L)
        cols = np.column_stack([pair_var(k, c, n, L), node_var(uu, c, L)])
        data = np.tile([1.0, -1.0], (len(k), 1))
        blocks.append(_rows(data, cols, len(k), N, 2))
    m = 2 * len(k)
    senses.append(np.full(m, ">="))
    rhs.append(np.zeros(m))
    fams.append(np.full(m, METRIC))

    # three orientations per triple and color
    tp = triangle_pairs(n)
    if len(tp):
        ab, bc, ac = (np.repeat(tp[:, j], L) for j in range(3))
        cc = np.tile(np.arange(L), len(tp))
        orient = [(ab, bc, ac), (ab, ac, bc), (bc, ac, ab)]
        rows = []
        for s1, s2, t in orient:
            rows.append(np.column_stack([pair_var(s1, cc, n, L), pair_var(s2, cc, n, L), pair_var(t, cc, n, L)]))
        # interleave orientations so each triple's rows are adjacent
        cols = np.stack(rows, axis=1).reshape(-1, 3)
        data = np.tile([1.0, 1.0, -1.0], (len(cols), 1))
        blocks.append(_rows(data, cols, len(cols), N, 3))
        senses.append(np.full(len(cols), ">="))
        rhs.append(np.zeros(len(cols)))
        fams.append(np.full(len(cols), TRIANGLE))

    # sum_c x_u(c) = L - 1
    cols = node_var(np.repeat(np.arange(n), L), np.tile(np.arange(L), n), L).reshape(n, L)
    blocks.append(_rows(np.ones((n, L)), cols, n, N, L))
    senses.append(np.full(n, "="))
    rhs.append(np.full(n, float(L - 1)))
    fams.append(np.full(n, VERTEX))

    A = sp.vstack(blocks, format="csr")
    return LpModel(
        n=n,
        L=L,
        objective=obj,
        constant=constant,
        A=A,
        senses=np.concatenate(senses).astype("<U2"),
        rhs=np.concatenate(rhs),
        families=np.concatenate(fams).astype("<U8"),
    )


def augment_c4(model: LpModel) -> LpModel:
    """Add ``sum_c x_p(uv, c) >= L - 1`` for every pair."""
    if model.has_c4:
        raise ModelError("model already carries the C4 rows")
    n, L = model.n, model.L
    P = n_pairs(n)
    cols = pair_var(np.repeat(np.arange(P), L), np.tile(np.arange(L), P), n, L).reshape(P, L)
    block = _rows(np.ones((P, L)), cols, P, model.n_vars, L)
    return replace(
        model,
        A=sp.vstack([model.A, block], format="csr"),
        senses=np.concatenate([model.senses, np.full(P, ">=")]).astype("<U2"),
        rhs=np.concatenate([model.rhs, np.full(P, float(L - 1))]),
        families=np.concatenate([model.families, np.full(P, C4)]).astype("<U8"),
        has_c4=True,
    )
