"""Empirical ALG/LP gaps over seeded rounding runs."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from chromacc.instances import CccInstance, cost
from chromacc.lp.solution import LpSolution
from chromacc.rounding import ALGORITHMS, DEFAULT_PROFILE, RoundingError, RoundingProfile, run_algorithm

LP_ZERO = 1e-9
CSV_COLUMNS = ("instance_id", "family", "n", "L", "algorithm", "trial", "seed", "alg_cost", "lp_obj", "ratio")
SUMMARY_COLUMNS = ("instance_id", "algorithm", "trials", "mean", "std", "max", "min", "flagged")

NEEDS_LP = {"lp_ccc", "c4"}


def gap_ratio(alg_cost: float, lp_obj: float) -> tuple[float, str]:
    """``ALG / LP`` with a flag: ``""``, ``"zero"`` (both vanish, ratio 1) or
    ``"inf"`` (LP vanishes, ALG does not)."""
    if lp_obj > LP_ZERO:
        return alg_cost / lp_obj, ""
    if alg_cost == 0:
        return 1.0, "zero"
    return math.inf, "inf"


@dataclass(frozen=True)
class TrialRecord:
    algorithm: str
    trial: int
    seed: int
    alg_cost: int
    lp_obj: float
    ratio: float
    flag: str = ""


@dataclass
class GapReport:
    algorithm: str
    records: list[TrialRecord]
    n: int
    L: int
    family: str = ""
    instance_id: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def ratios(self) -> np.ndarray:
        return np.array([r.ratio for r in self.records], dtype=float)

    @property
    def costs(self) -> np.ndarray:
        return np.array([r.alg_cost for r in self.records], dtype=float)

    @property
    def flagged(self) -> int:
        return sum(1 for r in self.records if r.flag)

    @property
    def mean(self) -> float:
        return float(np.mean(self.ratios)) if self.records else math.nan

    @property
    def std(self) -> float:
        return float(np.std(self.ratios, ddof=1)) if len(self.records) > 1 else 0.0

    @property
    def max(self) -> float:
        return float(np.max(self.ratios)) if self.records else math.nan

    @property
    def min(self) -> float:
        return float(np.min(self.ratios)) if self.records else math.nan

    def summary(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "algorithm": self.algorithm,
            "trials": len(self.records),
            "mean": self.mean,
            "std": self.std,
            "max": self.max,
            "min": self.min,
            "flagged": self.flagged,
        }


def _trial(args):
    name, inst, sol, profile, seed = args
    return cost(inst, run_algorithm(name, inst, sol, profile, seed))


def empirical_gap(
    inst: CccInstance,
    algorithm: str,
    sol: LpSolution | None,
    trials: int = 500,
    seed_base: int = 0,
    profile: RoundingProfile = DEFAULT_PROFILE,
    lp_obj: float | None = None,
    family: str = "",
    instance_id: str = "",
    workers: int = 1,
) -> GapReport:
    """Run ``trials`` executions with seeds ``seed_base + trial``.

    ``lp_obj`` defaults to ``sol.objective``; the rounding-free algorithms can
    be measured against any LP value given explicitly.
    """
    if algorithm not in ALGORITHMS:
        raise RoundingError(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}")
    if algorithm in NEEDS_LP and sol is None:
        raise RoundingError(f"{algorithm} needs an LP solution")
    if algorithm == "c4" and not sol.c4:
        raise RoundingError("c4 rounding needs a solution of the C4-augmented model")
    if lp_obj is None:
        if sol is None:
            raise ValueError("need an LP solution or an explicit lp_obj")
        lp_obj = sol.objective
    seeds = [seed_base + t for t in range(trials)]
    tasks = [(algorithm, inst, sol, profile, s) for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            costs = list(ex.map(_trial, tasks, chunksize=max(1, trials // (4 * workers))))
    else:
        costs = [_trial(t) for t in tasks]
    recs = []
    for t, (s, c) in enumerate(zip(seeds, costs)):
        r, flag = gap_ratio(c, lp_obj)
        recs.append(TrialRecord(algorithm, t, s, int(c), float(lp_obj), r, flag))
    return GapReport(algorithm, recs, inst.n, inst.L, family, instance_id)


def dumps_gap_csv(reports: list[GapReport]) -> str:
    """Per-trial rows, a blank line, then a ``# summary`` block."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for rep in reports:
        for r in rep.records:
            w.writerow([rep.instance_id, rep.family, rep.n, rep.L, r.algorithm, r.trial, r.seed, r.alg_cost, repr(r.lp_obj), repr(r.ratio)])
    buf.write("\n# summary\n")
    w.writerow(SUMMARY_COLUMNS)
    for rep in reports:
        s = rep.summary()
        w.writerow([repr(v) if isinstance(v, float) else v for v in (s[k] for k in SUMMARY_COLUMNS)])
    return buf.getvalue()


def loads_gap_csv(text: str) -> tuple[list[dict], list[dict]]:
    """``(trial rows, summary rows)`` as string dicts."""
    body, _, summary = text.partition("\n# summary\n")
    rows = list(csv.DictReader(io.StringIO(body.strip() + "\n")))
    summ = list(csv.DictReader(io.StringIO(summary))) if summary else []
    return rows, summ


def welch_less(a, b) -> float:
    """One-sided Welch p-value for ``mean(a) < mean(b)``."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    if np.ptp(a) == 0 and np.ptp(b) == 0:
        return 0.0 if a.mean() < b.mean() else 1.0
    return float(stats.ttest_ind(a, b, equal_var=False, alternative="less").pvalue)


def spearman_trend(x, y) -> float:
    rho = stats.spearmanr(x, y).statistic
    return float(rho)
