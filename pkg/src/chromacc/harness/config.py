"""Experiment configuration and seed derivation."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from chromacc.rounding import ALGORITHMS

FAMILIES = ("max_interfering", "multirelational", "blowup", "tabular", "edges")
SOLVERS = ("internal", "highs", "simplex", "external")
N_POLICIES = ("strict", "floor")


class ConfigError(ValueError):
    pass


def derive_seed(seed_base: int, role: str, index: int = 0) -> int:
    """Stable 31-bit sub-seed for ``(seed_base, role, index)``."""
    h = hashlib.blake2b(f"{int(seed_base)}|{role}|{int(index)}".encode(), digest_size=8)
    return int.from_bytes(h.digest(), "big") & 0x7FFFFFFF


@dataclass
class ExperimentConfig:
    name: str = "experiment"
    family: str = "max_interfering"
    params: dict = field(default_factory=dict)
    L: list = field(default_factory=lambda: [1, 2, 3, 4])
    algorithms: list = field(default_factory=lambda: list(ALGORITHMS))
    trials: int = 100
    seed_base: int = 0
    solver: str = "internal"
    eps_feas: float = 1e-7
    profile: dict = field(default_factory=dict)
    output_dir: str = "runs"
    n_policy: str = "strict"
    workers: int = 1

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if self.solver not in SOLVERS:
            raise ConfigError(f"unknown solver {self.solver!r}; choose from {SOLVERS}")
        if self.n_policy not in N_POLICIES:
            raise ConfigError(f"unknown n_policy {self.n_policy!r}; choose from {N_POLICIES}")
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad:
            raise ConfigError(f"unknown algorithms {bad}; choose from {ALGORITHMS}")
        if not self.L or any(int(L) < 1 for L in self.L):
            raise ConfigError("L must be a non-empty list of positive integers")
        self.L = [int(L) for L in self.L]
        if self.trials < 1:
            raise ConfigError("trials must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from None
        return cls.from_dict(data)
