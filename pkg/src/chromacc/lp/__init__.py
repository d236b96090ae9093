from chromacc.lp.lpio import (
    export_lp_text,
    import_lp_text,
    loads_solution,
    dumps_solution,
    read_solution,
    write_solution,
)
from chromacc.lp.model import LpModel, ModelError, augment_c4, build_ccc_lp
from chromacc.lp.solution import (
    DEFAULT_EPS_FEAS,
    LpSolution,
    SolverStatus,
    ViolationReport,
    integral_encoding,
    lp_objective,
    validate_solution,
)
from chromacc.lp.solve import LpInfeasibleError, SolverError, solve

__all__ = [
    "DEFAULT_EPS_FEAS",
    "LpInfeasibleError",
    "LpModel",
    "LpSolution",
    "ModelError",
    "SolverError",
    "SolverStatus",
    "ViolationReport",
    "augment_c4",
    "build_ccc_lp",
    "dumps_solution",
    "export_lp_text",
    "import_lp_text",
    "integral_encoding",
    "loads_solution",
    "lp_objective",
    "read_solution",
    "solve",
    "validate_solution",
    "write_solution",
]
