"""CPLEX-LP text export/import and ``name value`` solution files."""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from chromacc.instances import CccInstance
from chromacc.lp.model import FAMILIES, LpModel, var_names
from chromacc.lp.solution import LpSolution, SolverStatus

_PREFIX = {"metric": "met", "triangle": "tri", "vertex": "vsum", "c4": "c4"}
_FAMILY = {v: k for k, v in _PREFIX.items()}
_HEADER = re.compile(r"^\\ chromacc ccc-lp n=(\d+) L=(\d+) c4=([01])$")


class LpFormatError(ValueError):
    pass


def _num(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def _terms(coefs, idx, names) -> str:
    parts = []
    for a, j in zip(coefs, idx):
        sign = "-" if a < 0 else "+"
        mag = abs(a)
        parts.append(f"{sign} {names[j]}" if mag == 1 else f"{sign} {_num(mag)} {names[j]}")
    return " ".join(parts) if parts else "0"


def export_lp_text(model: LpModel) -> str:
    names = model.names
    out = [f"\\ chromacc ccc-lp n={model.n} L={model.L} c4={int(model.has_c4)}", "Minimize"]
    nz = np.flatnonzero(model.objective)
    obj = _terms(model.objective[nz], nz, names)
    if model.constant:
        obj += f" + {_num(model.constant)}"
    out.append(f" obj: {obj}")
    out.append("Subject To")
    counters = {f: 0 for f in FAMILIES}
    A = model.A
    for r in range(model.n_rows):
        fam = model.families[r]
        name = f"{_PREFIX[fam]}_{counters[fam]}"
        counters[fam] += 1
        lo, hi = A.indptr[r], A.indptr[r + 1]
        lhs = _terms(A.data[lo:hi], A.indices[lo:hi], names)
        op = ">=" if model.senses[r] == ">=" else "="
        out.append(f" {name}: {lhs} {op} {_num(model.rhs[r])}")
    out.append("Bounds")
    out.extend(f" 0 <= {nm} <= 1" for nm in names)
    out.append("End")
    return "\n".join(out) + "\n"


_TERM = re.compile(r"([+-])\s*(?:(\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)\s+)?(x_[A-Za-z0-9_]+)|([+-])\s*(\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)(?!\s*x_)")


def _parse_expr(expr: str, index: dict[str, int]):
    expr = expr.strip()
    if not expr.startswith(("+", "-")):
        expr = "+ " + expr
    cols, vals, const = [], [], 0.0
    pos = 0
    for m in _TERM.finditer(expr):
        if expr[pos : m.start()].strip():
            raise LpFormatError(f"cannot parse {expr[pos:m.start()]!r}")
        pos = m.end()
        if m.group(3):
            a = float(m.group(2)) if m.group(2) else 1.0
            if m.group(3) not in index:
                raise LpFormatError(f"unknown variable {m.group(3)}")
            cols.append(index[m.group(3)])
            vals.append(-a if m.group(1) == "-" else a)
        else:
            a = float(m.group(5))
            const += -a if m.group(4) == "-" else a
    if expr[pos:].strip():
        raise LpFormatError(f"cannot parse {expr[pos:]!r}")
    return cols, vals, const


def import_lp_text(text: str) -> LpModel:
    """Inverse of :func:`export_lp_text` (only for files it produced)."""
    lines = text.splitlines()
    if not lines or not (m := _HEADER.match(lines[0].strip())):
        raise LpFormatError("missing chromacc header line")
    n, L, has_c4 = int(m.group(1)), int(m.group(2)), m.group(3) == "1"
    names = var_names(n, L)
    index = {nm: j for j, nm in enumerate(names)}
    section = None
    objective = np.zeros(len(names))
    constant = 0.0
    rows, cols, vals, senses, rhs, fams = [], [], [], [], [], []
    for raw in lines[1:]:
        line = raw.strip()
        if not line or line.startswith("\\"):
            continue
        low = line.lower()
        if low in ("minimize", "subject to", "bounds", "end"):
            section = low
            continue
        if section == "minimize":
            _, expr = line.split(":", 1)
            c, v, constant = _parse_expr(expr, index)
            np.add.at(objective, c, v)
        elif section == "subject to":
            name, body = line.split(":", 1)
            fam = _FAMILY.get(name.strip().rsplit("_", 1)[0])
            if fam is None:
                raise LpFormatError(f"unknown row family in {name!r}")
            op = ">=" if ">=" in body else "="
            lhs, r = body.split(op, 1)
            c, v, k = _parse_expr(lhs, index)
            if k:
                raise LpFormatError("constants on the left-hand side are not supported")
            rows.extend([len(senses)] * len(c))
            cols.extend(c)
            vals.extend(v)
            senses.append(op)
            rhs.append(float(r))
            fams.append(fam)
        elif section == "bounds":
            continue
        elif section is None:
            raise LpFormatError(f"content before a section: {line!r}")
    A = sp.csr_matrix((vals, (rows, cols)), shape=(len(senses), len(names)))
    A.sort_indices()
    return LpModel(
        n=n,
        L=L,
        objective=objective,
        constant=constant,
        A=A,
        senses=np.array(senses, dtype="<U2"),
        rhs=np.array(rhs, dtype=float),
        families=np.array(fams, dtype="<U8"),
        has_c4=has_c4,
    )


# -- solutions ------------------------------------------------------------------


def dumps_solution(sol: LpSolution) -> str:
    names = var_names(sol.n, sol.L)
    head = [
        f"# n {sol.n}",
        f"# L {sol.L}",
        f"# c4 {int(sol.c4)}",
        f"# status {sol.status.value}",
        f"# objective {sol.objective!r}",
    ]
    body = [f"{nm} {v!r}" for nm, v in zip(names, sol.vector().tolist())]
    return "\n".join(head + body) + "\n"


def parse_values(text: str, n: int, L: int) -> tuple[np.ndarray, dict[str, str]]:
    """Parse ``name value`` lines into a model-ordered vector.

    ``#`` lines carry optional ``key value`` metadata. Every variable must be
    present.
    """
    names = var_names(n, L)
    index = {nm: j for j, nm in enumerate(names)}
    x = np.full(len(names), np.nan)
    meta: dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split(None, 1)
            if len(parts) == 2:
                meta[parts[0]] = parts[1].strip()
            continue
        parts = line.split()
        if len(parts) != 2:
            raise LpFormatError(f"expected 'name value', got {line!r}")
        if parts[0] not in index:
            raise LpFormatError(f"unknown variable {parts[0]}")
        x[index[parts[0]]] = float(parts[1])
    if ("n" in meta and int(meta["n"]) != n) or ("L" in meta and int(meta["L"]) != L):
        raise LpFormatError(f"solution is for n={meta.get('n')}, L={meta.get('L')}; expected n={n}, L={L}")
    missing = np.flatnonzero(np.isnan(x))
    if len(missing):
        raise LpFormatError(f"{len(missing)} variables missing, e.g. {names[missing[0]]}")
    return x, meta


def loads_solution(text: str, inst: CccInstance, c4: bool | None = None) -> LpSolution:
    """Solution for ``inst`` from ``name value`` text; the objective is
    recomputed from the values."""
    x, meta = parse_values(text, inst.n, inst.L)
    if c4 is None:
        c4 = meta.get("c4", "0") == "1"
    status = SolverStatus(meta.get("status", SolverStatus.OPTIMAL.value))
    return LpSolution.from_vector(inst, x, c4=c4, status=status)


def write_solution(sol: LpSolution, path) -> None:
    Path(path).write_text(dumps_solution(sol))


def read_solution(path, inst: CccInstance, c4: bool | None = None) -> LpSolution:
    return loads_solution(Path(path).read_text(), inst, c4=c4)

