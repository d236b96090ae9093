from chromacc.harness.config import ExperimentConfig, derive_seed
from chromacc.harness.experiment import run_experiment

__all__ = ["ExperimentConfig", "derive_seed", "run_experiment"]
