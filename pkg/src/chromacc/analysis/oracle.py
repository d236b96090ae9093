"""Exact optimum by set-partition enumeration (small instances only)."""

from __future__ import annotations

import numpy as np

from chromacc.instances import GAMMA, CccInstance, Clustering

MAX_N = 10


def restricted_growth_strings(n: int) -> np.ndarray:
    """All set partitions of ``range(n)`` as rows ``a`` with ``a[0] = 0`` and
    ``a[i] <= 1 + max(a[:i])``."""
    if n == 0:
        return np.zeros((1, 0), dtype=np.int8)
    rows = np.zeros((1, 1), dtype=np.int8)
    top = np.zeros(1, dtype=np.int8)
    for _ in range(1, n):
        reps = top + 2
        idx = np.repeat(np.arange(len(rows)), reps)
        new = np.concatenate([np.arange(r) for r in reps]).astype(np.int8)
        rows = np.hstack([rows[idx], new[:, None]])
        top = np.maximum(top[idx], new)
    return rows


def partition_costs(inst: CccInstance, parts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Optimal cost of every partition row plus its color per block.

    Each block takes its most frequent internal color (lowest id on ties, 0 for
    blocks without labeled pairs); for a fixed partition that choice is
    optimal, since blocks contribute independently.
    """
    n, L = inst.n, inst.L
    iu, iv = np.triu_indices(n, 1)
    codes = inst.pair_colors
    m, k = len(parts), n
    counts = np.zeros((m, k, L), dtype=np.int32)
    gamma = np.zeros(m, dtype=np.int32)
    for p in range(len(iu)):
        a = parts[:, iu[p]]
        same = a == parts[:, iv[p]]
        if codes[p] == GAMMA:
            gamma += same
        else:
            np.add.at(counts, (np.flatnonzero(same), a[same], codes[p]), 1)
    best = counts.max(axis=2)
    colors = counts.argmax(axis=2)
    cost = inst.n_labeled - best.sum(axis=1) + gamma
    return cost, colors


def brute_force_opt(inst: CccInstance) -> tuple[Clustering, int]:
    if inst.n > MAX_N:
        raise ValueError(f"brute force is limited to n <= {MAX_N}, got n={inst.n}")
    if inst.n == 0:
        return Clustering(np.zeros(0, int), {}), 0
    parts = restricted_growth_strings(inst.n)
    cost, colors = partition_costs(inst, parts)
    i = int(np.argmin(cost))
    a = parts[i].astype(int)
    return Clustering(a, {k: int(colors[i, k]) for k in np.unique(a).tolist()}), int(cost[i])
