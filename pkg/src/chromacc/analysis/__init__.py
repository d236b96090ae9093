from chromacc.analysis.gaps import GapReport, TrialRecord, dumps_gap_csv, empirical_gap, gap_ratio, loads_gap_csv
from chromacc.analysis.oracle import brute_force_opt
from chromacc.analysis.saddle import SaddleResult, alg_closed_form, lp_closed_form, ratio_closed_form, saddle_search
from chromacc.analysis.staircase import compute_interference, staircase, staircase_table
from chromacc.analysis.triples import (
    TripleEvaluation,
    evaluate_triple,
    independence_witness,
    triple_cost,
    triple_lp,
    worst_triple_search,
)

__all__ = [
    "GapReport",
    "SaddleResult",
    "TrialRecord",
    "TripleEvaluation",
    "alg_closed_form",
    "brute_force_opt",
    "compute_interference",
    "dumps_gap_csv",
    "empirical_gap",
    "evaluate_triple",
    "gap_ratio",
    "independence_witness",
    "loads_gap_csv",
    "lp_closed_form",
    "ratio_closed_form",
    "saddle_search",
    "staircase",
    "staircase_table",
    "triple_cost",
    "triple_lp",
    "worst_triple_search",
]
