"""Building blocks shared by the CLI subcommands and config-driven runs."""

from __future__ import annotations

import csv
import json
import logging
from pathlib import Path

import numpy as np

from chromacc.blowup import gen_chromatic_blowup, parse_cc_signs
from chromacc.instances import (
    CccInstance,
    InstanceError,
    gen_max_interfering,
    gen_random_multirelational,
    ingest_edge_list,
    ingest_tabular,
    read_tabular,
)
from chromacc.lp import LpSolution, augment_c4, build_ccc_lp, solve, validate_solution
from chromacc.lp.solution import DEFAULT_EPS_FEAS

log = logging.getLogger(__name__)


class ValidationFailed(RuntimeError):
    def __init__(self, report):
        super().__init__(report.summary())
        self.report = report


def backend(solver: str) -> str:
    return "highs" if solver == "internal" else solver


def fit_n(n: int, L: int, policy: str = "strict") -> int:
    """``n`` itself, or under ``floor`` the largest multiple of ``L`` not above it."""
    if policy == "floor":
        m = (n // L) * L
        if m < 1:
            raise InstanceError(f"n={n} has no positive multiple of L={L} below it")
        return m
    return n


def load_base_cc(path) -> tuple[np.ndarray, np.ndarray | None]:
    """Base CC document: ``{"n": int, "signs": [...], "lp": [...]?}`` with one
    entry per pair in row-major order (``"+"``/``"-"`` or ``1``/``-1``)."""
    if path is None:
        raise InstanceError("the blowup family needs a base CC file")
    p = Path(path)
    if not p.exists():
        raise InstanceError(f"base CC file not found: {p}")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise InstanceError(f"malformed base CC file {p}: {exc}") from None
    if "signs" not in data:
        raise InstanceError("base CC file lacks 'signs'")
    signs = parse_cc_signs(data["signs"])
    lp = np.asarray(data["lp"], dtype=float) if data.get("lp") is not None else None
    if "n" in data and len(signs) != int(data["n"]) * (int(data["n"]) - 1) // 2:
        raise InstanceError("'signs' length does not match n")
    return signs, lp


def base_cc_metric(signs: np.ndarray, solver: str = "internal") -> np.ndarray:
    """Optimal CC-LP metric of a signed base graph (its single-color CCC-LP)."""
    codes = np.where(signs > 0, 0, -1)
    n = int(round((1 + np.sqrt(1 + 8 * len(codes))) / 2))
    inst = CccInstance.from_pair_colors(n, 1, codes)
    return solve(build_ccc_lp(inst), solver=backend(solver)).x_pair[:, 0]


def make_instance(family: str, params: dict, L: int, seed: int, base_dir=None) -> tuple[CccInstance, dict]:
    """Instance of a family plus metadata; relative paths resolve against
    ``base_dir``."""
    params = dict(params)
    resolve = lambda p: None if p is None else (Path(base_dir) / p if base_dir and not Path(p).is_absolute() else Path(p))  # noqa: E731
    meta = {"family": family, "seed": seed, "L": L}
    if family == "max_interfering":
        n = fit_n(int(params["n"]), L, params.get("n_policy", "strict"))
        inst = gen_max_interfering(n, L, float(params.get("neg_fraction", 0.0)), seed)
        meta.update(n=n, neg_fraction=float(params.get("neg_fraction", 0.0)))
    elif family == "multirelational":
        n = int(params["n"])
        inst = gen_random_multirelational(
            n, L, float(params.get("p_intra", 0.0)), float(params.get("p_gamma", 0.5)), seed
        )
        meta.update(n=n, p_intra=float(params.get("p_intra", 0.0)), p_gamma=float(params.get("p_gamma", 0.5)))
    elif family == "blowup":
        signs, lp = load_base_cc(resolve(params.get("base")))
        if lp is None:
            lp = base_cc_metric(signs, params.get("solver", "internal"))
        inst, _ = gen_chromatic_blowup(signs, lp, L)
        meta.update(n=inst.n, base=str(params.get("base")))
    elif family == "tabular":
        path = resolve(params.get("features"))
        if path is None:
            raise InstanceError("the tabular family needs a features file")
        feats, groups = read_tabular(path, params.get("group_column", "group"), params.get("delimiter", ","))
        inst = ingest_tabular(feats, groups, params.get("L", L))
        meta.update(n=inst.n, features=str(params.get("features")))
    elif family == "edges":
        path = resolve(params.get("edges"))
        if path is None:
            raise InstanceError("the edges family needs an edge-list file")
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh, delimiter=params.get("delimiter", ",")) if r and not r[0].startswith("#")]
        if rows and not rows[0][0].strip().lstrip("-").isdigit():
            rows = rows[1:]
        n = int(params["n"]) if "n" in params else 1 + max(max(int(r[0]), int(r[1])) for r in rows)
        inst = ingest_edge_list([(r[0], r[1], r[2].strip()) for r in rows], n, L, params.get("color_map"))
        meta.update(n=n, edges=str(params.get("edges")))
    else:
        raise InstanceError(f"unknown family {family!r}")
    return inst, meta


def solve_validated(
    inst: CccInstance, c4: bool = False, solver: str = "internal", eps_feas: float = DEFAULT_EPS_FEAS, **external
) -> LpSolution:
    """Solve, then refuse anything :func:`validate_solution` rejects."""
    model = build_ccc_lp(inst)
    if c4:
        model = augment_c4(model)
    sol = solve(model, eps_feas=eps_feas, solver=backend(solver), **external)
    rep = validate_solution(inst, sol, with_c4=c4, eps_feas=eps_feas)
    if rep:
        raise ValidationFailed(rep)
    return sol
