"""Row norms, the mixed l2,p pseudo-norm and the diagonal reweighting.

For a matrix ``Y`` with rows ``y^i`` the quantity used everywhere is

    ||Y||_{2,p}^p = sum_i ||y^i||_2^p,   0 < p <= 1,

which is a norm only for ``p = 1``.  Matrices are plain 2-D float
``numpy`` arrays; :func:`as_matrix` is the single validation gate.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DegenerateRowError, DomainError

DEFAULT_EPSILON = 1e-12


class DegeneratePolicy(str, enum.Enum):
    """How :func:`build_weights` treats rows whose norm is exactly zero.

    STRICT
        raise :class:`DegenerateRowError` when ``epsilon == 0``.
    SMOOTHED
        use ``(||y||^2 + epsilon)`` in place of ``||y||^2``.
    INVERT_ZERO
        set the inverse weight of a zero row to zero, which pins that
        row at zero in every later iterate.
    """

    STRICT = "strict"
    SMOOTHED = "smoothed"
    INVERT_ZERO = "invert-zero"


def as_matrix(a: ArrayLike, name: str = "matrix") -> NDArray[np.float64]:
    """Return ``a`` as a finite 2-D float64 array with positive shape.

    1-D input is treated as a column.
    """
    arr = np.array(a, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise DomainError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DomainError(f"{name} must have positive shape, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains NaN or Inf")
    return arr


def check_exponent(p: float) -> float:
    p = float(p)
    if not (0.0 < p <= 1.0):
        raise DomainError(f"exponent p must lie in (0, 1], got {p}")
    return p


def row_l2_norms(Y: ArrayLike) -> NDArray[np.float64]:
    Y = as_matrix(Y, "Y")
    return np.sqrt(np.einsum("ij,ij->i", Y, Y))


def l2p_power(Y: ArrayLike, p: float) -> float:
    """Return ``sum_i ||y^i||_2^p``.

    Zero rows contribute zero for every admissible ``p``.
    """
    p = check_exponent(p)
    r = row_l2_norms(Y)
    if p == 1.0:
        return float(r.sum())
    return float(np.power(r, p).sum())


def smoothed_l2p_power(Y: ArrayLike, p: float, epsilon: float) -> float:
    """Return ``sum_i (||y^i||^2 + epsilon)^(p/2)``, the objective that the
    smoothed reweighting decreases monotonically."""
    p = check_exponent(p)
    Y = as_matrix(Y, "Y")
    sq = np.einsum("ij,ij->i", Y, Y)
    return float(np.power(sq + epsilon, p / 2.0).sum())


@dataclass(frozen=True)
class WeightDiagonal:
    """Diagonal of the reweighting matrix ``D``.

    ``entries[i] = p / (2 (||y^i||^2 + epsilon)^((2-p)/2))``.  Rows pinned
    by the invert-zero policy carry ``inf`` in ``entries`` and zero in
    ``inverse``; every other entry is finite and positive.
    """

    entries: NDArray[np.float64]
    inverse: NDArray[np.float64]
    epsilon: float = 0.0
    pinned: NDArray[np.bool_] | None = None

    def __post_init__(self):
        free = ~self.pinned_mask
        if not np.all(np.isfinite(self.entries[free])) or np.any(self.entries[free] <= 0):
            raise DomainError("weight entries must be finite and positive")

    @property
    def size(self) -> int:
        return len(self.entries)

    @property
    def pinned_mask(self) -> NDArray[np.bool_]:
        if self.pinned is None:
            return np.zeros(len(self.entries), dtype=bool)
        return self.pinned

    @classmethod
    def identity(cls, m: int) -> "WeightDiagonal":
        return cls(entries=np.ones(m), inverse=np.ones(m))

    def quadratic_form(self, Y: ArrayLike) -> float:
        """``Tr(Y^T D Y)``; pinned rows must be zero in ``Y``."""
        Y = as_matrix(Y, "Y")
        sq = np.einsum("ij,ij->i", Y, Y)
        free = ~self.pinned_mask
        return float(np.dot(self.entries[free], sq[free]))


def build_weights(
    Y: ArrayLike,
    p: float,
    epsilon: float = DEFAULT_EPSILON,
    policy: DegeneratePolicy | str = DegeneratePolicy.SMOOTHED,
) -> WeightDiagonal:
    """Build the reweighting diagonal from the current iterate ``Y``.

    Parameters
    ----------
    Y : array_like, shape (m, c)
    p : float
        Exponent in (0, 1].
    epsilon : float
        Non-negative smoothing added to every squared row norm.  With
        ``epsilon = 0`` and no zero rows the entries are exactly
        ``p / (2 ||y^i||^(2-p))``.
    policy : DegeneratePolicy
        Treatment of exactly-zero rows, see :class:`DegeneratePolicy`.
    """
    p = check_exponent(p)
    policy = DegeneratePolicy(policy)
    epsilon = float(epsilon)
    if epsilon < 0 or not np.isfinite(epsilon):
        raise DomainError(f"epsilon must be finite and >= 0, got {epsilon}")
    Y = as_matrix(Y, "Y")
    sq = np.einsum("ij,ij->i", Y, Y)
    zero = sq == 0.0
    half_power = (2.0 - p) / 2.0

    if policy is DegeneratePolicy.INVERT_ZERO:
        base = sq + epsilon
        pinned = zero if epsilon == 0.0 else np.zeros_like(zero)
        inverse = np.zeros_like(sq)
        free = ~pinned
        inverse[free] = 2.0 * np.power(base[free], half_power) / p
        entries = np.full_like(sq, np.inf)
        entries[free] = p / (2.0 * np.power(base[free], half_power))
        return WeightDiagonal(entries, inverse, epsilon, pinned)

    if epsilon == 0.0 and np.any(zero):
        # SMOOTHED with epsilon=0 has nothing to smooth with either
        raise DegenerateRowError(np.flatnonzero(zero))
    base = sq + epsilon
    powered = np.power(base, half_power)
    return WeightDiagonal(p / (2.0 * powered), 2.0 * powered / p, epsilon)


def phi(t: float, p: float) -> float:
    """``2/(2-p) t - p/(2-p) t^(2/p) - 1``; non-positive for every ``t > 0``
    with its only zero at ``t = 1``."""
    p = check_exponent(p)
    if not t > 0:
        raise DomainError(f"phi is defined for t > 0, got {t}")
    with np.errstate(over="ignore"):
        big = np.float64(t) ** (2.0 / p)
    return float(2.0 / (2.0 - p) * t - p / (2.0 - p) * big - 1.0)
