"""``chromacc`` command line.

Every failure prints one ``error[E_CODE]: message`` line to stderr and exits
with status 2.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from chromacc.analysis import gaps as gaps_mod
from chromacc.analysis import saddle as saddle_mod
from chromacc.analysis.staircase import DELTA_INF, GAP_CC, format_staircase, parse_L, staircase_table
from chromacc.analysis import triples as triples_mod
from chromacc.harness.config import ConfigError, ExperimentConfig
from chromacc.harness.experiment import run_experiment
from chromacc.harness.pipeline import ValidationFailed, make_instance, solve_validated
from chromacc.instances import InstanceError, cost, read_instance, write_instance
from chromacc.lp import LpInfeasibleError, SolverError, read_solution, write_solution
from chromacc.lp.lpio import LpFormatError
from chromacc.lp.model import ModelError
from chromacc.lp.solution import DEFAULT_EPS_FEAS
from chromacc.lp.solve import EXTERNAL_SOLVER_ENV
from chromacc.rounding import ALGORITHMS, DEFAULT_PROFILE, RoundingError, RoundingProfile, c4_round, run_algorithm

log = logging.getLogger("chromacc")


class CliError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("E_USAGE", f"{self.prog}: {message}")


def _profile(path) -> RoundingProfile:
    return RoundingProfile.load(path) if path else DEFAULT_PROFILE


def _emit(obj, out=None) -> None:
    text = obj if isinstance(obj, str) else json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# -- subcommands ----------------------------------------------------------------


def cmd_generate(args) -> int:
    params = {
        "n": args.n,
        "neg_fraction": args.neg_fraction,
        "p_intra": args.p_intra,
        "p_gamma": args.p_gamma,
        "base": args.base,
        "features": args.features,
        "group_column": args.group_column,
        "delimiter": args.delimiter,
        "edges": args.edges,
        "n_policy": args.n_policy,
    }
    params = {k: v for k, v in params.items() if v is not None}
    if args.family in ("max_interfering", "multirelational") and args.n is None:
        raise CliError("E_PARAM", f"--n is required for family {args.family}")
    need = {"blowup": ("base", "a base CC file"), "tabular": ("features", "a feature table"), "edges": ("edges", "an edge list")}
    if args.family in need and not params.get(need[args.family][0]):
        key, what = need[args.family]
        raise CliError("E_PARAM", f"family {args.family} requires --{key} ({what})")
    if args.family == "tabular":
        params["L"] = args.L  # None: one color per group found
    inst, meta = make_instance(args.family, params, args.L or 1, args.seed)
    meta["L"] = inst.L
    write_instance(inst, args.out, meta)
    _emit({"out": str(args.out), **inst.stats()})
    return 0


def _external_kwargs(args) -> dict:
    kw = {}
    if args.solver == "external":
        kw = {"lp_out": args.lp_out, "sol_in": args.sol_in, "command": args.solver_command}
    elif args.lp_out or args.sol_in:
        raise CliError("E_PARAM", "--lp-out/--sol-in apply to --solver external only")
    return kw


def cmd_solve(args) -> int:
    inst = read_instance(args.instance)
    sol = solve_validated(inst, args.c4, args.solver, args.eps_feas, **_external_kwargs(args))
    if args.out:
        write_solution(sol, args.out)
    _emit({"objective": sol.objective, "status": sol.status.value, "c4": sol.c4, "max_violation": sol.max_violation, "out": args.out})
    return 0


def _load_solutions(paths, inst) -> dict[bool, object]:
    sols = {}
    for p in paths or []:
        s = read_solution(p, inst)
        sols.setdefault(s.c4, s)
    return sols


def _solution_for(alg: str, sols: dict):
    if alg == "c4":
        if True not in sols:
            raise CliError("E_SOLUTION_MISMATCH", "c4 needs a solution of the C4-augmented model (solve --c4)")
        return sols[True]
    if alg == "lp_ccc":
        if False not in sols:
            raise CliError("E_SOLUTION_MISMATCH", "lp_ccc needs a solution of the unaugmented model")
        return sols[False]
    if not sols:
        raise CliError("E_SOLUTION_MISMATCH", f"{alg} needs an LP solution to compute ratios")
    return sols.get(False, sols.get(True))


def cmd_round(args) -> int:
    inst = read_instance(args.instance)
    profile = _profile(args.profile)
    sols = _load_solutions(args.solution, inst)
    sol = _solution_for(args.algorithm, sols) if args.algorithm in ("c4", "lp_ccc") else None
    if args.algorithm == "c4":
        cl, trace = c4_round(inst, sol, profile, args.seed, mode=args.interval_mode, eps_feas=args.eps_feas)
        if args.trace_out:
            trace.dump(args.trace_out)
    else:
        if args.trace_out:
            raise CliError("E_PARAM", "--trace-out is only available for c4")
        cl = run_algorithm(args.algorithm, inst, sol, profile, args.seed)
    doc = {"algorithm": args.algorithm, "seed": args.seed, "cost": cost(inst, cl), **cl.to_dict()}
    _emit(doc, args.out)
    if args.out:
        _emit({"cost": doc["cost"], "clusters": len(doc["clusters"]), "out": args.out})
    return 0


def cmd_gap(args) -> int:
    inst = read_instance(args.instance)
    profile = _profile(args.profile)
    sols = _load_solutions(args.solution, inst)
    reports = []
    for alg in args.algorithms:
        sol = _solution_for(alg, sols)
        reports.append(
            gaps_mod.empirical_gap(
                inst, alg, sol, args.trials, args.seed, profile,
                family=args.family, instance_id=args.instance_id or Path(args.instance).stem, workers=args.workers,
            )
        )
    _emit(gaps_mod.dumps_gap_csv(reports), args.out)
    if args.out:
        _emit({"out": args.out, "summary": [r.summary() for r in reports]})
    return 0


def cmd_staircase(args) -> int:
    Ls = [parse_L(t) for t in args.L]
    rows = staircase_table(Ls, args.gap_cc, args.delta_inf)
    _emit(format_staircase(rows, args.digits), args.out)
    return 0


def cmd_saddle(args) -> int:
    profile = _profile(args.profile)
    res = saddle_mod.saddle_search(profile, args.grid_step, args.refine_tol, args.t_domain)
    q0, t0 = saddle_mod.REFERENCE_POINT
    ref = float(saddle_mod.ratio_closed_form(q0, t0, profile))
    doc = {
        "saddle": res.to_dict(),
        "reference": {"q": q0, "t": t0, "R": ref, "deviation": ref - saddle_mod.REFERENCE_RATIO},
    }
    if args.sweep:
        doc["ramp_sweep"] = saddle_mod.reference_report(base=profile)
    _emit(doc, args.out)
    return 0


def cmd_triples(args) -> int:
    profile = _profile(args.profile)
    ratio, ev = triples_mod.worst_triple_search(profile, args.grid_step, args.signs, args.refine_tol)
    doc = {"signs": args.signs, "grid_step": args.grid_step, "ratio": ratio, "witness": ev.to_dict()}
    if args.table:
        doc["patterns"] = [
            {"signs": s, "ratio": r, "x": list(x)} for s, r, x in triples_mod.pattern_table(profile, args.grid_step, args.signs)
        ]
    if args.witness:
        doc["independence"] = [
            {"check": c, "lhs": lhs, "rhs": rhs, "holds": ok} for c, lhs, rhs, ok in triples_mod.independence_witness()
        ]
    _emit(doc, args.out)
    return 0


def cmd_experiment(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    if args.trials is not None:
        cfg.trials = args.trials
    root = run_experiment(cfg, base_dir=Path(args.config).parent, out_root=args.out_dir)
    _emit({"out": str(root), "summary": str(root / "summary.csv")})
    return 0


# -- parser ---------------------------------------------------------------------


def _solver_flags(p) -> None:
    p.add_argument("--solver", choices=("internal", "highs", "simplex", "external"), default="internal",
                   help="internal: in-process HiGHS; simplex: dense tableau (small models); external: file round-trip")
    p.add_argument("--lp-out", help="where to write the LP text (external solver)")
    p.add_argument("--sol-in", help="name-value solution file to read back (external solver)")
    p.add_argument("--solver-command", help=f"command with {{lp}}/{{sol}} placeholders; defaults to ${EXTERNAL_SOLVER_ENV}")
    p.add_argument("--eps-feas", type=float, default=DEFAULT_EPS_FEAS)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="chromacc", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="write an instance file")
    p.add_argument("--family", required=True, choices=("max_interfering", "multirelational", "blowup", "tabular", "edges"))
    p.add_argument("--n", type=int)
    p.add_argument("--L", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--neg-fraction", type=float, default=0.0)
    p.add_argument("--p-intra", type=float, default=0.0)
    p.add_argument("--p-gamma", type=float, default=0.5)
    p.add_argument("--n-policy", choices=("strict", "floor"), default="strict",
                   help="floor: shrink n to a multiple of L (max_interfering)")
    p.add_argument("--base", help="base CC file (JSON with 'signs' and optional 'lp') for blowup")
    p.add_argument("--features", help="feature table for tabular")
    p.add_argument("--group-column", default="group")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--edges", help="u,v,color rows for edges")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="solve the LP relaxation")
    p.add_argument("instance")
    p.add_argument("--c4", action="store_true", help="add the C4 rows")
    _solver_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("round", help="run one rounding algorithm once")
    p.add_argument("instance")
    p.add_argument("--algorithm", choices=ALGORITHMS, required=True)
    p.add_argument("--solution", action="append", help="solution file (repeatable)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--profile", help="rounding profile JSON")
    p.add_argument("--interval-mode", choices=("cc", "plus", "signed"), default="cc")
    p.add_argument("--eps-feas", type=float, default=DEFAULT_EPS_FEAS)
    p.add_argument("--trace-out", help="JSONL trace of c4 rounds")
    p.add_argument("--out")
    p.set_defaults(func=cmd_round)

    p = sub.add_parser("gap", help="empirical ALG/LP ratios over seeded trials")
    p.add_argument("instance")
    p.add_argument("--solution", action="append", help="solution file (repeatable; c4 needs a --c4 one)")
    p.add_argument("--algorithms", nargs="+", choices=ALGORITHMS, default=list(ALGORITHMS))
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0, help="trial t uses seed + t")
    p.add_argument("--profile")
    p.add_argument("--family", default="")
    p.add_argument("--instance-id")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("staircase", help="Delta(L) and gap(L) table")
    p.add_argument("--L", nargs="+", default=["1", "2", "3", "4", "10", "inf"])
    p.add_argument("--gap-cc", type=float, default=GAP_CC)
    p.add_argument("--delta-inf", type=float, default=DELTA_INF)
    p.add_argument("--digits", type=int, default=4)
    p.add_argument("--out")
    p.set_defaults(func=cmd_staircase)

    p = sub.add_parser("saddle", help="min-max of the closed-form ratio R(q, t)")
    p.add_argument("--profile")
    p.add_argument("--grid-step", type=float, default=0.005)
    p.add_argument("--refine-tol", type=float, default=1e-6)
    p.add_argument("--t-domain", choices=("full", "active"), default="full")
    p.add_argument("--sweep", action="store_true", help="add the ramp-exponent sensitivity sweep")
    p.add_argument("--out")
    p.set_defaults(func=cmd_saddle)

    p = sub.add_parser("triples", help="worst triple ratio search")
    p.add_argument("--profile")
    p.add_argument("--signs", choices=("cc", "all", "neutral"), default="all")
    p.add_argument("--grid-step", type=float, default=0.01)
    p.add_argument("--refine-tol", type=float, default=1e-4)
    p.add_argument("--table", action="store_true", help="per-pattern grid suprema")
    p.add_argument("--witness", action="store_true", help="print the constraint-independence checks")
    p.add_argument("--out")
    p.set_defaults(func=cmd_triples)

    p = sub.add_parser("experiment", help="run a JSON experiment config")
    p.add_argument("config")
    p.add_argument("--out-dir", help="override the config's output_dir")
    p.add_argument("--trials", type=int)
    p.set_defaults(func=cmd_experiment)
    return ap


_CODES = (
    (CliError, None),
    (ValidationFailed, "E_INVALID_SOLUTION"),
    (ConfigError, "E_CONFIG"),
    (InstanceError, "E_INSTANCE"),
    (LpFormatError, "E_FORMAT"),
    (ModelError, "E_MODEL"),
    (LpInfeasibleError, "E_INFEASIBLE"),
    (SolverError, "E_SOLVER"),
    (RoundingError, "E_ROUNDING"),
    (triples_mod.TripleError, "E_PARAM"),
    (FileNotFoundError, "E_IO"),
    (OSError, "E_IO"),
    (json.JSONDecodeError, "E_FORMAT"),
    (KeyError, "E_PARAM"),
    (ValueError, "E_VALUE"),
)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
        return args.func(args)
    except Exception as exc:
        for cls, code in _CODES:
            if isinstance(exc, cls):
                code = code or exc.code
                break
        else:
            raise
        msg = " ".join(str(exc).split()) or type(exc).__name__
        if isinstance(exc, KeyError):
            msg = f"missing parameter {msg}"
        print(f"error[{code}]: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
