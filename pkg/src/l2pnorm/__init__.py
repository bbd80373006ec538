"""Mixed l2,p (0 < p <= 1) pseudo-norm minimisation by iterative reweighting."""

__version__ = "0.1.0"

from .errors import (
    DegenerateRowError,
    DomainError,
    L2pError,
    NonConvergenceError,
    SingularSystemError,
)
from .norms import (
    DegeneratePolicy,
    WeightDiagonal,
    build_weights,
    l2p_power,
    phi,
    row_l2_norms,
)
from .regression import (
    RegressionProblem,
    RegressionSolution,
    build_constrained,
    objective,
    solve_regression,
    split_solution,
)
from .selection import FeatureRanking, rank_features, select_top_k, support_recovery_rate
from .solver import (
    ConstrainedProblem,
    Solution,
    SolverConfig,
    SolverTrace,
    iterate_step,
    kkt_residual,
    relative_reduction,
    solve,
)
