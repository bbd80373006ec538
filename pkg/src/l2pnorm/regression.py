"""Joint-sparse robust regression with l2,p loss and l2,p regulariser.

The problem

    min_X  ||A^T X - B||_{2,p}^p + gamma^p ||X||_{2,p}^p

with samples as the columns of ``A`` (d x n) and targets as the rows of
``B`` (n x c) is rewritten with ``E = (A^T X - B) / gamma`` as

    min_Y ||Y||_{2,p}^p   s.t.  [A^T  -gamma I] Y = B,   Y = [X; E],

and handed to :func:`l2pnorm.solver.solve`.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, replace

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DomainError
from .norms import as_matrix, check_exponent, l2p_power
from .solver import ConstrainedProblem, Solution, SolverConfig, solve


def augment_bias(A: ArrayLike) -> NDArray[np.float64]:
    """Append a constant-one feature row to ``A`` (features x samples)."""
    A = as_matrix(A, "A")
    return np.vstack([A, np.ones((1, A.shape[1]))])


@dataclass(frozen=True)
class RegressionProblem:
    """``A`` is d x n with one sample per column, ``B`` is n x c.

    With ``include_bias`` the last row of ``A`` must already be the
    constant-one row (see :func:`augment_bias`); it is regularised like
    every other row of ``X``.
    """

    A: NDArray[np.float64]
    B: NDArray[np.float64]
    gamma: float
    p: float
    include_bias: bool = False

    def __post_init__(self):
        A = as_matrix(self.A, "A")
        B = as_matrix(self.B, "B")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "p", check_exponent(self.p))
        if A.shape[1] != B.shape[0]:
            raise DomainError(f"A has {A.shape[1]} samples but B has {B.shape[0]} rows")
        if not (self.gamma > 0 and np.isfinite(self.gamma)):
            raise DomainError(f"gamma must be positive, got {self.gamma}")
        if self.include_bias and not np.all(A[-1] == 1.0):
            raise DomainError("include_bias is set but the last row of A is not all ones")

    @property
    def d(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def alpha(self) -> float:
        """Regularisation weight ``gamma ** p``."""
        return self.gamma**self.p

    @property
    def bias_row(self) -> int | None:
        return self.d - 1 if self.include_bias else None


@dataclass
class RegressionSolution:
    X: NDArray[np.float64]
    E: NDArray[np.float64]
    objective: float
    solver_solution: Solution


def build_constrained(rp: RegressionProblem) -> ConstrainedProblem:
    n = rp.n
    M = np.hstack([rp.A.T, -rp.gamma * np.eye(n)])
    # the -gamma*I block makes M full row rank
    return ConstrainedProblem(M, rp.B, rp.p, check_rank=False)


def split_solution(sol: Solution | ArrayLike, d: int, n: int):
    """Split the stacked ``Y = [X; E]`` into its two blocks."""
    Y = sol.Y if isinstance(sol, Solution) else as_matrix(sol, "Y")
    if Y.shape[0] != d + n:
        raise DomainError(f"Y has {Y.shape[0]} rows, expected d + n = {d + n}")
    return Y[:d], Y[d:]


def objective(rp: RegressionProblem, X: ArrayLike) -> float:
    """``||A^T X - B||_{2,p}^p + gamma^p ||X||_{2,p}^p``."""
    X = as_matrix(X, "X")
    if X.shape != (rp.d, rp.B.shape[1]):
        raise DomainError(f"X must have shape {(rp.d, rp.B.shape[1])}, got {X.shape}")
    return l2p_power(rp.A.T @ X - rp.B, rp.p) + rp.alpha * l2p_power(X, rp.p)


def solve_regression(
    rp: RegressionProblem,
    config: SolverConfig | None = None,
    keep_iterates: bool = False,
) -> RegressionSolution:
    sol = solve(build_constrained(rp), config, keep_iterates=keep_iterates)
    X, E = split_solution(sol, rp.d, rp.n)
    return RegressionSolution(X=X, E=E, objective=objective(rp, X), solver_solution=sol)


def select_gamma(
    rp: RegressionProblem,
    grid: Sequence[float],
    config: SolverConfig | None = None,
    holdout: float = 0.3,
    seed: int = 0,
) -> tuple[float, list[float]]:
    """Pick ``gamma`` from ``grid`` by held-out loss.

    The samples are split once (seeded); for each ``gamma`` the model is
    fitted on the training part and scored by ``||A_v^T X - B_v||_{2,p}^p``
    on the validation part.  Ties go to the larger ``gamma`` (sparser X).

    Returns the chosen value and the validation losses in grid order.
    """
    if not grid:
        raise DomainError("gamma grid is empty")
    if not 0 < holdout < 1:
        raise DomainError("holdout must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(rp.n)
    n_val = max(1, int(round(holdout * rp.n)))
    if n_val >= rp.n:
        raise DomainError("not enough samples to hold out a validation set")
    val, train = np.sort(perm[:n_val]), np.sort(perm[n_val:])
    losses = []
    for g in grid:
        sub = replace(rp, A=rp.A[:, train], B=rp.B[train], gamma=float(g))
        fit = solve_regression(sub, config)
        losses.append(l2p_power(rp.A[:, val].T @ fit.X - rp.B[val], rp.p))
    losses_arr = np.asarray(losses)
    best = np.flatnonzero(losses_arr <= losses_arr.min() * (1 + 1e-12))
    chosen = max(float(grid[i]) for i in best)
    return chosen, losses
