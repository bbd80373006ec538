"""Slow, independent verifiers for solver output.

Nothing here is used on the production solve path.  ``convex_reference``
minimises the convex ``p = 1`` problem by projected subgradient descent;
``local_descent_check`` samples feasible perturbations around a point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DomainError, NonConvergenceError
from .norms import as_matrix, l2p_power, smoothed_l2p_power
from .solver import ConstrainedProblem


@dataclass(frozen=True)
class OracleConfig:
    """Step schedule for the subgradient oracle and sampling settings.

    The step at iteration ``j`` is ``step0 * scale * decay**j`` where
    ``scale`` is the Frobenius norm of the starting point.
    """

    step0: float = 0.05
    decay: float = 0.9995
    max_evals: int = 50_000
    stall_window: int = 5_000
    stall_tol: float = 1e-8
    epsilon: float = 1e-12
    seed: int = 0

    def __post_init__(self):
        if not (self.step0 > 0 and 0 < self.decay < 1):
            raise DomainError("step0 must be positive and decay in (0, 1)")
        if self.max_evals < 1 or self.stall_window < 1:
            raise DomainError("max_evals and stall_window must be positive")


def _min_norm_point(M, B):
    return M.T @ scipy.linalg.solve(M @ M.T, B, assume_a="pos")


def convex_reference(problem: ConstrainedProblem, cfg: OracleConfig | None = None):
    """Minimise ``||Y||_{2,1}`` over ``M Y = B`` by projected subgradient.

    Starts at the minimum-norm feasible point and projects every
    subgradient onto the null space of ``M``, so iterates stay feasible.
    Steps decay geometrically; the best iterate is returned.

    Returns
    -------
    (Y, objective)

    Raises
    ------
    NonConvergenceError
        If the best objective still moved by more than ``stall_tol``
        (relative) over the last ``stall_window`` evaluations.
    """
    if problem.p != 1.0:
        raise DomainError("convex_reference requires p = 1")
    cfg = cfg or OracleConfig()
    M, B = problem.M, problem.B
    Y = _min_norm_point(M, B)
    N = scipy.linalg.null_space(M)
    if N.shape[1] == 0:
        return Y, l2p_power(Y, 1.0)
    scale = max(np.linalg.norm(Y), 1e-300)

    P = N @ N.T
    best_Y, best = Y.copy(), np.inf
    history = []
    step = cfg.step0 * scale
    for _ in range(cfg.max_evals):
        r = np.sqrt(np.einsum("ij,ij->i", Y, Y))
        f = r.sum()
        if f < best:
            best, best_Y = f, Y.copy()
        history.append(best)
        G = np.divide(Y, r[:, None], out=np.zeros_like(Y), where=r[:, None] > 0)
        G = P @ G
        gnorm = np.linalg.norm(G)
        if gnorm == 0.0:
            break
        Y = Y - (step / gnorm) * G
        step *= cfg.decay
    else:
        if len(history) > cfg.stall_window:
            old = history[-cfg.stall_window - 1]
            if (old - best) > cfg.stall_tol * max(best, 1.0):
                raise NonConvergenceError(
                    f"objective still decreasing after {cfg.max_evals} evaluations"
                )
    return best_Y, best


def local_descent_check(
    problem: ConstrainedProblem,
    Y,
    radius: float = 1e-3,
    samples: int = 500,
    epsilon: float = 1e-12,
    rtol: float = 1e-9,
    seed: int = 0,
) -> bool:
    """True if no sampled feasible perturbation lowers the smoothed objective.

    Perturbations ``Y + N`` with ``N`` in the null space of ``M`` and
    ``||N||_F <= radius`` are drawn with a seeded generator; half of them
    lie on the sphere of the full radius, half at a uniformly random
    smaller radius.  A decrease larger than ``rtol * (1 + f(Y))`` fails
    the check.
    """
    Y = as_matrix(Y, "Y")
    if problem.residual(Y) > 1e-6 * (1.0 + np.linalg.norm(problem.B)):
        raise DomainError("Y is not feasible")
    basis = scipy.linalg.null_space(problem.M)
    if basis.shape[1] == 0:
        return True
    rng = np.random.default_rng(seed)
    p = problem.p
    f0 = smoothed_l2p_power(Y, p, epsilon)
    slack = rtol * (1.0 + f0)
    for j in range(samples):
        Z = rng.standard_normal((basis.shape[1], Y.shape[1]))
        N = basis @ Z
        N *= radius / np.linalg.norm(N)
        if j % 2:
            N *= rng.uniform()
        if smoothed_l2p_power(Y + N, p, epsilon) < f0 - slack:
            return False
    return True
