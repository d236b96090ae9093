"""Solving LP models.

Backends:

``highs``
    scipy's HiGHS. Triangle rows are separated lazily when the model is large:
    solve without them, add every violated one, repeat until none is violated.
    The optimum is the optimum of the full model.
``simplex``
    the dense tableau simplex in :mod:`chromacc.lp.simplex`; small models only.
``external``
    write the model as LP text, run a command, read ``name value`` lines back.
"""

from __future__ import annotations

import logging
import os
import shlex
import subprocess
import tempfile
from pathlib import Path

import numpy as np
from scipy.optimize import linprog

from chromacc.instances import n_pairs
from chromacc.lp.lpio import export_lp_text, parse_values
from chromacc.lp.model import TRIANGLE, LpModel
from chromacc.lp.simplex import solve_dense
from chromacc.lp.solution import DEFAULT_EPS_FEAS, LpSolution, SolverStatus

log = logging.getLogger(__name__)

EXTERNAL_SOLVER_ENV = "CHROMACC_EXTERNAL_SOLVER"
LAZY_MIN_TRIANGLE_ROWS = 5000
SIMPLEX_MAX_VARS = 400


class LpInfeasibleError(RuntimeError):
    """The model has no feasible point; for these models this means a builder bug."""


class SolverError(RuntimeError):
    pass


def row_slack(model: LpModel, x: np.ndarray, rows: np.ndarray | None = None) -> np.ndarray:
    """Slack per row; negative means violated (``=`` rows report ``-|r|``)."""
    A = model.A if rows is None else model.A[rows]
    rhs = model.rhs if rows is None else model.rhs[rows]
    senses = model.senses if rows is None else model.senses[rows]
    r = A @ x - rhs
    return np.where(senses == "=", -np.abs(r), r)


def _linprog_highs(model: LpModel, rows: np.ndarray) -> np.ndarray:
    A = model.A[rows]
    ge = model.senses[rows] == ">="
    res = linprog(
        model.objective,
        A_ub=-A[ge] if ge.any() else None,
        b_ub=-model.rhs[rows][ge] if ge.any() else None,
        A_eq=A[~ge] if (~ge).any() else None,
        b_eq=model.rhs[rows][~ge] if (~ge).any() else None,
        bounds=(0.0, 1.0),
        method="highs",
    )
    if res.status == 2:
        raise LpInfeasibleError(res.message)
    if res.status != 0:
        raise SolverError(f"HiGHS failed: {res.message}")
    return res.x


def _solve_highs(model: LpModel, lazy: bool) -> tuple[np.ndarray, dict]:
    tri = model.rows_of(TRIANGLE)
    if not lazy or not len(tri):
        return _linprog_highs(model, np.arange(model.n_rows)), {"rounds": 1, "triangle_rows": len(tri)}
    active = np.setdiff1d(np.arange(model.n_rows), tri)
    A_tri = model.A[tri]
    rounds = 0
    while True:
        rounds += 1
        x = _linprog_highs(model, active)
        viol = tri[(A_tri @ x - model.rhs[tri]) < -1e-9]
        log.debug("lazy round %d: %d rows active, %d violated triangles", rounds, len(active), len(viol))
        if not len(viol):
            break
        active = np.union1d(active, viol)
    return x, {"rounds": rounds, "triangle_rows": int(np.isin(active, tri).sum())}


def _solve_simplex(model: LpModel) -> tuple[np.ndarray, dict]:
    if model.n_vars > SIMPLEX_MAX_VARS:
        raise SolverError(f"dense simplex is limited to {SIMPLEX_MAX_VARS} variables, model has {model.n_vars}")
    A = model.A.toarray()
    ge = model.senses == ">="
    res = solve_dense(model.objective, A[ge], model.rhs[ge], A[~ge], model.rhs[~ge], upper=1.0)
    if res.status == "infeasible":
        raise LpInfeasibleError("dense simplex: infeasible")
    if res.status != "optimal":
        raise SolverError(f"dense simplex: {res.status}")
    return res.x, {"iterations": res.iterations}


def _solve_external(model: LpModel, lp_out=None, sol_in=None, command: str | None = None) -> tuple[np.ndarray, dict]:
    """Round-trip through files.

    With ``command`` (or the environment variable), it is run with ``{lp}`` and
    ``{sol}`` substituted; otherwise ``sol_in`` must already hold the values.
    """
    command = command or os.environ.get(EXTERNAL_SOLVER_ENV)
    tmp = None
    if lp_out is None:
        tmp = tempfile.TemporaryDirectory()
        lp_out = Path(tmp.name) / "model.lp"
    Path(lp_out).write_text(export_lp_text(model))
    try:
        if command:
            sol_path = sol_in or Path(lp_out).with_suffix(".sol")
            cmd = command.format(lp=shlex.quote(str(lp_out)), sol=shlex.quote(str(sol_path)))
            proc = subprocess.run(cmd, shell=True, capture_output=True, text=True)
            if proc.returncode:
                raise SolverError(f"external solver exited {proc.returncode}: {proc.stderr.strip()[:200]}")
            sol_in = sol_path
        if sol_in is None:
            raise SolverError(f"no external solver configured (set {EXTERNAL_SOLVER_ENV}) and no solution file given")
        x, _ = parse_values(Path(sol_in).read_text(), model.n, model.L)
    finally:
        if tmp is not None:
            tmp.cleanup()
    return x, {"lp_out": str(lp_out), "sol_in": str(sol_in)}


def solve(
    model: LpModel,
    eps_feas: float = DEFAULT_EPS_FEAS,
    solver: str = "highs",
    lazy: bool | None = None,
    **external,
) -> LpSolution:
    if solver == "highs":
        if lazy is None:
            lazy = len(model.rows_of(TRIANGLE)) >= LAZY_MIN_TRIANGLE_ROWS
        x, info = _solve_highs(model, lazy)
    elif solver == "simplex":
        x, info = _solve_simplex(model)
    elif solver == "external":
        x, info = _solve_external(model, **external)
    else:
        raise ValueError(f"unknown solver {solver!r}")
    x = np.clip(x, 0.0, 1.0)
    slack = row_slack(model, x)
    worst = float(max(0.0, -slack.min())) if len(slack) else 0.0
    status = SolverStatus.OPTIMAL if worst <= eps_feas else SolverStatus.TOLERANCE_WARNING
    if status is SolverStatus.TOLERANCE_WARNING:
        log.warning("solution violates the model by %.3g (> %.3g)", worst, eps_feas)
    n, L = model.n, model.L
    info["solver"] = solver
    return LpSolution(
        n=n,
        L=L,
        x_node=x[: n * L].reshape(n, L).copy(),
        x_pair=x[n * L :].reshape(n_pairs(n), L).copy(),
        objective=model.evaluate(x),
        status=status,
        c4=model.has_c4,
        max_violation=worst,
        info=info,
    )

