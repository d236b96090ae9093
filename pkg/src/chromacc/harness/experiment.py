"""Config-driven L sweeps: one output directory per experiment."""

from __future__ import annotations

import csv
import io
import json
import logging
from pathlib import Path

from chromacc.analysis.gaps import dumps_gap_csv, empirical_gap
from chromacc.harness.config import ExperimentConfig, derive_seed
from chromacc.harness.pipeline import make_instance, solve_validated
from chromacc.instances import write_instance
from chromacc.lp import write_solution
from chromacc.rounding import RoundingProfile

log = logging.getLogger(__name__)

SUMMARY_COLUMNS = ("L", "n", "algorithm", "trials", "lp_obj", "mean", "std", "max", "flagged")


def _profile(cfg: ExperimentConfig) -> RoundingProfile:
    base = RoundingProfile().to_dict()
    base.update(cfg.profile)
    return RoundingProfile.from_dict(base)


def run_experiment(cfg: ExperimentConfig, base_dir=None, out_root=None) -> Path:
    """Generate, solve and measure every ``L`` of the sweep.

    Layout under ``<out_root>/<name>``: ``config.json``, ``instances/``,
    ``solutions/``, ``reports/gap_L*.csv`` and ``summary.csv``.
    """
    root = Path(out_root if out_root is not None else cfg.output_dir) / cfg.name
    for sub in ("instances", "solutions", "reports"):
        (root / sub).mkdir(parents=True, exist_ok=True)
    (root / "config.json").write_text(cfg.dumps())
    profile = _profile(cfg)
    params = dict(cfg.params)
    params.setdefault("n_policy", cfg.n_policy)

    summary = []
    for L in cfg.L:
        inst, meta = make_instance(cfg.family, params, L, derive_seed(cfg.seed_base, "instance", L), base_dir)
        tag = f"L{L}"
        write_instance(inst, root / "instances" / f"{tag}.json", meta)
        need_base = any(a != "c4" for a in cfg.algorithms)
        sols = {}
        if need_base:
            sols[False] = solve_validated(inst, False, cfg.solver, cfg.eps_feas)
            write_solution(sols[False], root / "solutions" / f"{tag}.sol")
        if "c4" in cfg.algorithms:
            sols[True] = solve_validated(inst, True, cfg.solver, cfg.eps_feas)
            write_solution(sols[True], root / "solutions" / f"{tag}_c4.sol")
        reports = []
        for i, alg in enumerate(cfg.algorithms):
            sol = sols[alg == "c4"]
            rep = empirical_gap(
                inst,
                alg,
                sol,
                cfg.trials,
                derive_seed(cfg.seed_base, f"trials/{alg}", L),
                profile,
                family=cfg.family,
                instance_id=f"{cfg.name}/{tag}",
                workers=cfg.workers,
            )
            reports.append(rep)
            s = rep.summary()
            summary.append(
                {
                    "L": L,
                    "n": inst.n,
                    "algorithm": alg,
                    "trials": s["trials"],
                    "lp_obj": sol.objective,
                    "mean": s["mean"],
                    "std": s["std"],
                    "max": s["max"],
                    "flagged": s["flagged"],
                }
            )
            log.info("L=%d %s: mean ratio %.4f", L, alg, s["mean"])
        (root / "reports" / f"gap_{tag}.csv").write_text(dumps_gap_csv(reports))

    buf = io.StringIO()
    w = csv.DictWriter(buf, SUMMARY_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in summary:
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    (root / "summary.csv").write_text(buf.getvalue())
    (root / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    return root
