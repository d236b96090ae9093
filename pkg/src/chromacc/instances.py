"""Chromatic correlation clustering instances, clusterings and the integral cost.

An instance is a complete graph on ``n`` vertices whose pairs carry either one
of ``L`` real colors ``0..L-1`` or the dissimilar label :data:`GAMMA`.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

GAMMA = -1
FORMAT_VERSION = 1
DENSE_MAX_N = 4096


class InstanceError(ValueError):
    """Invalid instance parameters or malformed instance data."""


def pair_index(u, v, n: int):
    """Row-major index of the unordered pair ``{u, v}`` (``u < v``) among the
    ``n(n-1)/2`` pairs; works elementwise on arrays."""
    u = np.asarray(u)
    v = np.asarray(v)
    lo = np.minimum(u, v)
    hi = np.maximum(u, v)
    return lo * n - lo * (lo + 1) // 2 + (hi - lo - 1)


def n_pairs(n: int) -> int:
    return n * (n - 1) // 2


@dataclass(frozen=True, eq=False)
class CccInstance:
    """Immutable colored complete graph.

    Storage is a dense symmetric code matrix up to :data:`DENSE_MAX_N` vertices
    and a sparse adjacency map (GAMMA by default) above that.
    """

    n: int
    L: int
    _dense: np.ndarray | None = field(default=None, repr=False)
    _sparse: Mapping[int, Mapping[int, int]] | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.n < 1:
            raise InstanceError(f"n must be positive, got {self.n}")
        if self.L < 1:
            raise InstanceError(f"L must be positive, got {self.L}")
        if (self._dense is None) == (self._sparse is None):
            raise InstanceError("exactly one storage backend is required")
        if self._dense is not None:
            self._dense.setflags(write=False)

    # -- construction -----------------------------------------------------

    @classmethod
    def from_matrix(cls, colors, L: int) -> "CccInstance":
        m = np.array(colors, dtype=np.int16)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InstanceError("color matrix must be square")
        n = m.shape[0]
        np.fill_diagonal(m, GAMMA)
        if not np.array_equal(m, m.T):
            raise InstanceError("color matrix must be symmetric")
        if m.size and (m.min() < GAMMA or m.max() >= L):
            raise InstanceError(f"color codes must lie in {{0..{L - 1}}} or GAMMA")
        if n > DENSE_MAX_N:
            return cls.from_pairs(n, L, _matrix_pairs(m))
        return cls(n, L, _dense=m)

    @classmethod
    def from_pair_colors(cls, n: int, L: int, codes) -> "CccInstance":
        """Build from a flat array of codes in :func:`pair_index` order."""
        codes = np.asarray(codes, dtype=np.int16)
        if codes.shape != (n_pairs(n),):
            raise InstanceError(f"expected {n_pairs(n)} pair codes, got {codes.shape}")
        if n > DENSE_MAX_N:
            iu, iv = np.triu_indices(n, 1)
            keep = codes != GAMMA
            return cls.from_pairs(n, L, zip(iu[keep], iv[keep], codes[keep]))
        m = np.full((n, n), GAMMA, dtype=np.int16)
        iu, iv = np.triu_indices(n, 1)
        m[iu, iv] = codes
        m[iv, iu] = codes
        return cls.from_matrix(m, L)

    @classmethod
    def from_pairs(cls, n: int, L: int, triples: Iterable[tuple[int, int, int]]) -> "CccInstance":
        """Build from ``(u, v, code)`` triples; unlisted pairs are GAMMA.

        Repeating a pair with the same code is accepted, a conflicting code is not.
        """
        seen: dict[tuple[int, int], int] = {}
        for u, v, c in triples:
            u, v, c = int(u), int(v), int(c)
            if u == v:
                raise InstanceError(f"self pair ({u}, {v})")
            if not (0 <= u < n and 0 <= v < n):
                raise InstanceError(f"vertex out of range in pair ({u}, {v}) for n={n}")
            if not (c == GAMMA or 0 <= c < L):
                raise InstanceError(f"color {c} out of range for L={L}")
            key = (min(u, v), max(u, v))
            if key in seen and seen[key] != c:
                raise InstanceError(f"conflicting duplicate pair {key}: {seen[key]} vs {c}")
            seen[key] = c
        if n <= DENSE_MAX_N:
            m = np.full((n, n), GAMMA, dtype=np.int16)
            for (u, v), c in seen.items():
                m[u, v] = m[v, u] = c
            return cls(n, L, _dense=m)
        adj: dict[int, dict[int, int]] = {}
        for (u, v), c in seen.items():
            if c == GAMMA:
                continue
            adj.setdefault(u, {})[v] = c
            adj.setdefault(v, {})[u] = c
        return cls(n, L, _sparse=adj)

    # -- access -------------------------------------------------------------

    @property
    def is_dense(self) -> bool:
        return self._dense is not None

    def color(self, u: int, v: int) -> int:
        if u == v:
            raise InstanceError("no color on the diagonal")
        if self._dense is not None:
            return int(self._dense[u, v])
        return self._sparse.get(u, {}).get(v, GAMMA)

    def row(self, u: int) -> np.ndarray:
        """Codes of all pairs ``(u, v)``; the entry at ``u`` itself is GAMMA."""
        if self._dense is not None:
            return self._dense[u]
        r = np.full(self.n, GAMMA, dtype=np.int16)
        nbrs = self._sparse.get(u, {})
        if nbrs:
            r[list(nbrs)] = list(nbrs.values())
        return r

    def matrix(self) -> np.ndarray:
        if self._dense is not None:
            return self._dense
        m = np.full((self.n, self.n), GAMMA, dtype=np.int16)
        us, vs, cs = self.labeled
        m[us, vs] = cs
        m[vs, us] = cs
        return m

    @cached_property
    def labeled(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Arrays ``(u, v, color)`` of all non-GAMMA pairs, ``u < v``, sorted."""
        if self._dense is not None:
            iu, iv = np.triu_indices(self.n, 1)
            cs = self._dense[iu, iv]
            keep = cs != GAMMA
            return iu[keep], iv[keep], cs[keep].astype(np.int64)
        items = sorted((u, v, c) for u, nb in self._sparse.items() for v, c in nb.items() if u < v)
        if not items:
            e = np.zeros(0, dtype=np.int64)
            return e, e.copy(), e.copy()
        a = np.array(items, dtype=np.int64)
        return a[:, 0], a[:, 1], a[:, 2]

    @cached_property
    def pair_colors(self) -> np.ndarray:
        """Codes of all pairs in :func:`pair_index` order."""
        codes = np.full(n_pairs(self.n), GAMMA, dtype=np.int64)
        us, vs, cs = self.labeled
        codes[pair_index(us, vs, self.n)] = cs
        return codes

    @property
    def n_labeled(self) -> int:
        return len(self.labeled[0])

    @property
    def n_gamma(self) -> int:
        return n_pairs(self.n) - self.n_labeled

    def color_histogram(self) -> dict[str, int]:
        counts = np.bincount(self.labeled[2], minlength=self.L)
        hist = {str(c): int(k) for c, k in enumerate(counts)}
        hist["gamma"] = self.n_gamma
        return hist

    def stats(self) -> dict:
        total = n_pairs(self.n)
        return {
            "n": self.n,
            "L": self.L,
            "pairs": total,
            "colors": self.color_histogram(),
            "gamma_fraction": self.n_gamma / total if total else 0.0,
        }

    def __eq__(self, other):
        if not isinstance(other, CccInstance):
            return NotImplemented
        return (
            self.n == other.n
            and self.L == other.L
            and np.array_equal(self.pair_colors, other.pair_colors)
        )

    __hash__ = None


def _matrix_pairs(m: np.ndarray):
    iu, iv = np.triu_indices(m.shape[0], 1)
    cs = m[iu, iv]
    keep = cs != GAMMA
    return zip(iu[keep], iv[keep], cs[keep])


@dataclass(frozen=True, eq=False)
class Clustering:
    """A partition of the vertices plus one color per cluster."""

    assignment: np.ndarray
    colors: Mapping[int, int]

    def __post_init__(self):
        a = np.asarray(self.assignment, dtype=np.int64)
        if a.ndim != 1:
            raise InstanceError("assignment must be one-dimensional")
        object.__setattr__(self, "assignment", a)
        object.__setattr__(self, "colors", {int(k): int(c) for k, c in self.colors.items()})
        missing = set(np.unique(a).tolist()) - set(self.colors)
        if missing:
            raise InstanceError(f"clusters without a color: {sorted(missing)}")

    @classmethod
    def from_clusters(cls, n: int, clusters: Sequence[tuple[Iterable[int], int]]) -> "Clustering":
        """Build from ``(members, color)`` pairs covering all ``n`` vertices."""
        a = np.full(n, -1, dtype=np.int64)
        colors = {}
        for k, (members, c) in enumerate(clusters):
            members = list(members)
            if np.any(a[members] >= 0):
                raise InstanceError("vertex assigned to two clusters")
            a[members] = k
            colors[k] = c
        if np.any(a < 0):
            raise InstanceError(f"uncovered vertices: {np.flatnonzero(a < 0).tolist()}")
        return cls(a, colors)

    @classmethod
    def singletons(cls, n: int, color: int = 0) -> "Clustering":
        return cls(np.arange(n), {k: color for k in range(n)})

    @property
    def n(self) -> int:
        return len(self.assignment)

    def vertex_colors(self) -> np.ndarray:
        lut = np.zeros(max(self.colors) + 1 if self.colors else 1, dtype=np.int64)
        for k, c in self.colors.items():
            lut[k] = c
        return lut[self.assignment]

    def clusters(self) -> list[tuple[list[int], int]]:
        """Clusters as ``(sorted members, color)``, ordered by smallest member."""
        out = {}
        for v, k in enumerate(self.assignment.tolist()):
            out.setdefault(k, []).append(v)
        return [(members, self.colors[k]) for k, members in sorted(out.items(), key=lambda kv: kv[1][0])]

    def canonical(self) -> "Clustering":
        """Same clustering with ids renumbered by first appearance."""
        return Clustering.from_clusters(self.n, self.clusters())

    def to_dict(self) -> dict:
        return {"clusters": [{"members": m, "color": c} for m, c in self.clusters()]}

    @classmethod
    def from_dict(cls, n: int, data: dict) -> "Clustering":
        return cls.from_clusters(n, [(c["members"], c["color"]) for c in data["clusters"]])

    def __eq__(self, other):
        if not isinstance(other, Clustering):
            return NotImplemented
        return self.clusters() == other.clusters()

    __hash__ = None


def check_clustering(inst: CccInstance, cl: Clustering) -> None:
    if cl.n != inst.n:
        raise InstanceError(f"clustering covers {cl.n} vertices, instance has {inst.n}")
    bad = [c for c in cl.colors.values() if not 0 <= c < inst.L]
    if bad:
        raise InstanceError(f"cluster colors out of range: {bad}")


def cost(inst: CccInstance, cl: Clustering) -> int:
    """Number of disagreeing pairs.

    A labeled pair agrees only when co-clustered under its own color; a GAMMA
    pair disagrees exactly when co-clustered.
    """
    check_clustering(inst, cl)
    a = cl.assignment
    vcol = cl.vertex_colors()
    us, vs, cs = inst.labeled
    same = a[us] == a[vs]
    agree = int(np.count_nonzero(same & (vcol[us] == cs)))
    _, sizes = np.unique(a, return_counts=True)
    together = int((sizes * (sizes - 1) // 2).sum())
    gamma_together = together - int(np.count_nonzero(same))
    return (len(us) - agree) + gamma_together


# -- generators ---------------------------------------------------------------


def _check_prob(name: str, p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise InstanceError(f"{name} must lie in [0, 1], got {p}")


def gen_max_interfering(n: int, L: int, neg_fraction: float = 0.0, seed: int = 0) -> CccInstance:
    """Maximally interfering instance on ``L`` equal groups.

    Pairs inside group ``i`` get color ``i``; a pair across groups gets the
    color of the lower-indexed group, or GAMMA with probability
    ``neg_fraction`` (one Bernoulli draw per cross pair, in pair order).
    """
    if L < 1:
        raise InstanceError(f"L must be positive, got {L}")
    if n < 1 or n % L:
        raise InstanceError(f"L={L} must divide n={n}")
    _check_prob("neg_fraction", neg_fraction)
    group = np.arange(n) // (n // L)
    iu, iv = np.triu_indices(n, 1)
    codes = np.minimum(group[iu], group[iv]).astype(np.int64)
    cross = group[iu] != group[iv]
    rng = np.random.default_rng(seed)
    flip = rng.random(int(cross.sum())) < neg_fraction
    cross_codes = codes[cross]
    cross_codes[flip] = GAMMA
    codes[cross] = cross_codes
    return CccInstance.from_pair_colors(n, L, codes)


def gen_random_multirelational(
    n: int, L: int, p_intra: float = 0.0, p_gamma: float = 0.5, seed: int = 0
) -> CccInstance:
    """Random multi-relational instance.

    Each pair is GAMMA with probability ``p_gamma``, otherwise it takes a
    color. Every vertex carries a planted category; with probability
    ``p_intra`` a non-GAMMA pair takes the category of its lower endpoint,
    else a uniform color. ``p_intra=0`` gives i.i.d. uniform colors.
    """
    if n < 1 or L < 1:
        raise InstanceError("n and L must be positive")
    _check_prob("p_intra", p_intra)
    _check_prob("p_gamma", p_gamma)
    rng = np.random.default_rng(seed)
    m = n_pairs(n)
    planted = rng.integers(L, size=n)
    is_gamma = rng.random(m) < p_gamma
    use_planted = rng.random(m) < p_intra
    uniform = rng.integers(L, size=m)
    iu, _ = np.triu_indices(n, 1)
    codes = np.where(use_planted, planted[iu], uniform).astype(np.int64)
    codes[is_gamma] = GAMMA
    return CccInstance.from_pair_colors(n, L, codes)


def resolve_color_token(token, L: int, color_map: Mapping[str, int] | None = None) -> int:
    """Map a color token to a code: ints, ``"3"``, ``"c3"``, ``"gamma"``, or a
    name from ``color_map``."""
    if color_map is not None and isinstance(token, str) and token in color_map:
        code = int(color_map[token])
    elif isinstance(token, (int, np.integer)) and not isinstance(token, bool):
        code = int(token)
    elif isinstance(token, str):
        t = token.strip().lower()
        if t in ("gamma", "γ"):
            return GAMMA
        if t.startswith("c") and t[1:].isdigit():
            code = int(t[1:])
        elif t.lstrip("-").isdigit():
            code = int(t)
        else:
            raise InstanceError(f"unknown color token {token!r}")
    else:
        raise InstanceError(f"unknown color token {token!r}")
    if code == GAMMA:
        return GAMMA
    if not 0 <= code < L:
        raise InstanceError(f"color {token!r} out of range for L={L}")
    return code


def ingest_edge_list(rows, n: int, L: int, color_map: Mapping[str, int] | None = None) -> CccInstance:
    """Instance from ``(u, v, color-token)`` records; unlisted pairs are GAMMA."""
    triples = [(int(u), int(v), resolve_color_token(tok, L, color_map)) for u, v, tok in rows]
    return CccInstance.from_pairs(n, L, triples)


def cosine_similarities(features) -> np.ndarray:
    x = np.asarray(features, dtype=float)
    if x.ndim != 2 or x.shape[1] < 1:
        raise InstanceError("features must be an n x d matrix with d >= 1")
    norms = np.linalg.norm(x, axis=1)
    if np.any(norms == 0):
        raise InstanceError(f"zero-norm feature rows: {np.flatnonzero(norms == 0).tolist()}")
    x = x / norms[:, None]
    return x @ x.T


def ingest_tabular(features, groups, L: int | None = None) -> CccInstance:
    """Instance from feature vectors and a protected group per vertex.

    Pairs whose cosine similarity is strictly above the median pairwise
    similarity get the group of their lower-indexed endpoint as color; all
    other pairs are GAMMA.
    """
    groups = np.asarray(groups, dtype=np.int64)
    sim = cosine_similarities(features)
    n = sim.shape[0]
    if groups.shape != (n,):
        raise InstanceError("one group id per feature row is required")
    if L is None:
        L = int(groups.max()) + 1 if n else 1
    if groups.size and (groups.min() < 0 or groups.max() >= L):
        raise InstanceError(f"group ids must lie in 0..{L - 1}")
    iu, iv = np.triu_indices(n, 1)
    s = sim[iu, iv]
    codes = np.full(len(s), GAMMA, dtype=np.int64)
    if len(s):
        above = s > np.median(s)
        codes[above] = groups[iu[above]]
    return CccInstance.from_pair_colors(n, L, codes)


def read_tabular(path, group_column: str, delimiter: str = ",", feature_columns: Sequence[str] | None = None):
    """Read a delimiter-separated file with a header; returns ``(features, groups)``.

    Group values that are not integers are coded in order of first appearance.
    """
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh, delimiter=delimiter)
        if reader.fieldnames is None or group_column not in reader.fieldnames:
            raise InstanceError(f"group column {group_column!r} not found in {path}")
        cols = list(feature_columns) if feature_columns else [c for c in reader.fieldnames if c != group_column]
        feats, raw_groups = [], []
        for rec in reader:
            try:
                feats.append([float(rec[c]) for c in cols])
            except (TypeError, ValueError) as exc:
                raise InstanceError(f"non-numeric feature in {path}: {exc}") from None
            raw_groups.append(rec[group_column].strip())
    try:
        groups = [int(g) for g in raw_groups]
    except ValueError:
        codes: dict[str, int] = {}
        groups = [codes.setdefault(g, len(codes)) for g in raw_groups]
    return np.array(feats, dtype=float).reshape(len(feats), len(cols)), np.array(groups, dtype=np.int64)


# -- canonical file format ----------------------------------------------------


def dumps_instance(inst: CccInstance, meta: Mapping | None = None) -> str:
    us, vs, cs = inst.labeled
    head = {"version": FORMAT_VERSION, "n": inst.n, "L": inst.L}
    if meta:
        head["meta"] = dict(meta)
    lines = [json.dumps(head, sort_keys=True)[:-1] + ', "edges": [']
    edges = [f"[{u}, {v}, {c}]" for u, v, c in zip(us.tolist(), vs.tolist(), cs.tolist())]
    lines.append(",\n".join(edges))
    lines.append("]}")
    return "\n".join(lines) + "\n"


def loads_instance(text: str) -> CccInstance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"malformed instance document: {exc}") from None
    if data.get("version") != FORMAT_VERSION:
        raise InstanceError(f"unsupported instance version {data.get('version')!r}")
    n, L = int(data["n"]), int(data["L"])
    triples = []
    for rec in data.get("edges", []):
        u, v, c = rec
        triples.append((u, v, resolve_color_token(c, L)))
    return CccInstance.from_pairs(n, L, triples)


def write_instance(inst: CccInstance, path, meta: Mapping | None = None) -> None:
    Path(path).write_text(dumps_instance(inst, meta))


def read_instance(path) -> CccInstance:
    return loads_instance(Path(path).read_text())
