"""Iteratively reweighted solver for ``min ||Y||_{2,p}^p  s.t.  M Y = B``.

Each step minimises the quadratic surrogate ``Tr(Y^T D Y)`` over the
affine set ``{Y : M Y = B}``, which has the closed form

    Y = D^-1 M^T (M D^-1 M^T)^-1 B,

and then rebuilds ``D`` from the new iterate.  Starting from ``D = I`` the
first iterate is the minimum Frobenius-norm feasible point.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray

from .errors import DomainError, SingularSystemError
from .norms import (
    DEFAULT_EPSILON,
    DegeneratePolicy,
    WeightDiagonal,
    as_matrix,
    build_weights,
    check_exponent,
    l2p_power,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConstrainedProblem:
    """The pair ``(M, B)`` with exponent ``p``.

    ``M`` must be ``n x m`` with ``m >= n`` and full row rank.  Pass
    ``check_rank=False`` when rank is guaranteed by construction.
    """

    M: NDArray[np.float64]
    B: NDArray[np.float64]
    p: float
    check_rank: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        M = as_matrix(self.M, "M")
        B = as_matrix(self.B, "B")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "p", check_exponent(self.p))
        n, m = M.shape
        if m < n:
            raise DomainError(f"M must have at least as many columns as rows, got {M.shape}")
        if B.shape[0] != n:
            raise DomainError(f"B has {B.shape[0]} rows but M has {n}")
        if self.check_rank:
            rank = np.linalg.matrix_rank(M)
            if rank < n:
                raise DomainError(f"M must have full row rank {n}, numerical rank is {rank}")

    @property
    def n(self) -> int:
        return self.M.shape[0]

    @property
    def m(self) -> int:
        return self.M.shape[1]

    @property
    def c(self) -> int:
        return self.B.shape[1]

    def residual(self, Y: ArrayLike) -> float:
        """Frobenius norm of ``M Y - B``."""
        return float(np.linalg.norm(self.M @ Y - self.B))


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 100
    tol_rho: float = 1e-8
    epsilon: float = DEFAULT_EPSILON
    degenerate_policy: DegeneratePolicy = DegeneratePolicy.SMOOTHED
    record_trace: bool = True

    def __post_init__(self):
        if int(self.max_iters) < 1:
            raise DomainError("max_iters must be >= 1")
        if not self.tol_rho > 0:
            raise DomainError("tol_rho must be > 0")
        if not (self.epsilon >= 0 and math.isfinite(self.epsilon)):
            raise DomainError("epsilon must be finite and >= 0")
        object.__setattr__(self, "degenerate_policy", DegeneratePolicy(self.degenerate_policy))


@dataclass(frozen=True)
class TraceRecord:
    k: int
    objective: float
    rho: float
    kkt_residual: float
    zero_row_count: int


@dataclass
class SolverTrace:
    records: list[TraceRecord] = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def objectives(self) -> NDArray[np.float64]:
        return np.array([r.objective for r in self.records])

    @property
    def rhos(self) -> NDArray[np.float64]:
        return np.array([r.rho for r in self.records])

    @property
    def kkt_residuals(self) -> NDArray[np.float64]:
        return np.array([r.kkt_residual for r in self.records])


@dataclass
class Solution:
    Y: NDArray[np.float64]
    lam: NDArray[np.float64]
    converged: bool
    iterations: int
    objective: float
    trace: SolverTrace | None = None
    # iterates are kept only on request; used by the convergence-theory tests
    iterates: list[NDArray[np.float64]] | None = None


def iterate_step(
    problem: ConstrainedProblem, weights: WeightDiagonal
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """One reweighted step.

    Returns ``Y = D^-1 M^T (M D^-1 M^T)^-1 B`` and the multiplier
    ``Lambda = 2 (M D^-1 M^T)^-1 B``, so that ``2 D Y = M^T Lambda`` on the
    non-pinned rows.

    Raises
    ------
    SingularSystemError
        If ``M D^-1 M^T`` is not numerically positive definite.
    """
    if weights.size != problem.m:
        raise DomainError(f"weights have length {weights.size}, expected {problem.m}")
    M, B = problem.M, problem.B
    dinv = weights.inverse
    S = (M * dinv) @ M.T
    try:
        factor = scipy.linalg.cho_factor(S, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(
            "M D^-1 M^T is not positive definite; M may be rank deficient "
            "or too many rows are pinned"
        ) from exc
    lam = 2.0 * scipy.linalg.cho_solve(factor, B, check_finite=False)
    if not np.all(np.isfinite(lam)):
        raise SingularSystemError("linear solve produced non-finite values")
    Y = dinv[:, None] * (M.T @ lam) / 2.0
    return Y, lam


def kkt_residual(
    problem: ConstrainedProblem,
    Y: ArrayLike,
    lam: ArrayLike,
    epsilon: float = DEFAULT_EPSILON,
    policy: DegeneratePolicy | str = DegeneratePolicy.SMOOTHED,
) -> float:
    """Frobenius norm of ``2 D(Y) Y - M^T Lambda``.

    ``D(Y)`` is built from ``Y`` itself with the given smoothing.  Rows
    pinned by the invert-zero policy are excluded (their multiplier
    condition is not an equation).
    """
    Y = as_matrix(Y, "Y")
    lam = as_matrix(lam, "Lambda")
    weights = build_weights(Y, problem.p, epsilon, policy)
    return _kkt_from_weights(problem, Y, lam, weights)


def _kkt_from_weights(problem, Y, lam, weights):
    free = ~weights.pinned_mask
    G = problem.M.T @ lam
    R = 2.0 * weights.entries[free, None] * Y[free] - G[free]
    return float(np.linalg.norm(R))


def relative_reduction(obj_prev: float, obj_next: float) -> float:
    """``(obj_prev - obj_next) / obj_prev``."""
    if not obj_prev > 0:
        raise DomainError(f"previous objective must be positive, got {obj_prev}")
    return (obj_prev - obj_next) / obj_prev


def solve(
    problem: ConstrainedProblem,
    config: SolverConfig | None = None,
    keep_iterates: bool = False,
) -> Solution:
    """Run the reweighted iteration from ``D_0 = I``.

    Stops when ``|rho_k| <= config.tol_rho`` or after ``config.max_iters``
    steps.  ``rho_k`` is the relative reduction of ``||Y||_{2,p}^p`` from
    the previous iterate; it is not defined for the first iterate and is
    recorded as NaN there.
    """
    config = config or SolverConfig()
    p = problem.p
    weights = WeightDiagonal.identity(problem.m)
    trace = SolverTrace() if config.record_trace else None
    iterates = [] if keep_iterates else None

    prev_obj = None
    converged = False
    Y = lam = None
    k = 0
    for k in range(1, int(config.max_iters) + 1):
        Y, lam = iterate_step(problem, weights)
        obj = l2p_power(Y, p)
        weights = build_weights(Y, p, config.epsilon, config.degenerate_policy)

        if prev_obj is None:
            rho = math.nan
        elif prev_obj == 0.0:
            rho = 0.0
        else:
            rho = relative_reduction(prev_obj, obj)

        if keep_iterates:
            iterates.append(Y)
        if trace is not None:
            sq = np.einsum("ij,ij->i", Y, Y)
            trace.records.append(
                TraceRecord(
                    k=k,
                    objective=obj,
                    rho=rho,
                    kkt_residual=_kkt_from_weights(problem, Y, lam, weights),
                    zero_row_count=int(np.count_nonzero(sq <= config.epsilon)),
                )
            )
        logger.debug("k=%d objective=%.12g rho=%.3g", k, obj, rho)

        if prev_obj is not None and abs(rho) <= config.tol_rho:
            converged = True
            break
        prev_obj = obj

    if not converged:
        logger.info("no convergence after %d iterations", k)
    return Solution(
        Y=Y,
        lam=lam,
        converged=converged,
        iterations=k,
        objective=obj,
        trace=trace,
        iterates=iterates,
    )
