"""Phase-space and vector-field primitives shared by the whole package.

A state vector is a 1-D float64 numpy array with N >= 3 finite entries;
`as_state` is the single validation chokepoint.  Quadratic vector fields
store one full coefficient per monomial y_j*y_k with j <= k, so the stored
tensor round-trips with equations as written on paper.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
import numpy as np

from . import kernels
from .errors import DimensionError, DomainError

#: Alias used in signatures; states are validated ndarrays, not a wrapper type.
StateVector = np.ndarray


def as_state(coords, dim: int | None = None) -> np.ndarray:
    """Validate and return a state vector as a fresh float64 array.

    Raises DimensionError if fewer than 3 coordinates (or not matching `dim`)
    and DomainError on non-finite entries.
    """
    y = np.asarray(coords, dtype=float)
    if y.ndim != 1:
        raise DimensionError(f"state must be 1-D, got shape {y.shape}")
    if y.shape[0] < 3:
        raise DimensionError(f"state needs at least 3 coordinates, got {y.shape[0]}")
    if dim is not None and y.shape[0] != dim:
        raise DimensionError(f"expected dimension {dim}, got {y.shape[0]}")
    if not np.all(np.isfinite(y)):
        raise DomainError("state coordinates must be finite")
    return y.copy()


class MapStepScale(Enum):
    """Effective continuous time advanced by one map application at parameter
    eps.  Bilinearized (Hirota-Kimura type) maps double every quadratic term
    on the diagonal and therefore advance 2*eps; the half-step maps advance
    eps.  Convergence and conjugacy tests must scale time accordingly."""

    EPS = 1
    TWO_EPS = 2

    @property
    def factor(self) -> float:
        return 1.0 if self is MapStepScale.EPS else 2.0


class MapInverse(Enum):
    NEGATE_EPS = "negate-eps"
    NONE = "none"


@dataclass(frozen=True)
class QuadraticField:
    """Purely quadratic vector field dy_i/dt = sum_{j<=k} a[i,j,k] y_j y_k.

    `coeffs` has shape (dim, dim, dim) and must be strictly upper-triangular
    in its last two indices (entries with j > k are zero); the stored value is
    the full coefficient of the monomial y_j*y_k.
    """

    dim: int
    coeffs: np.ndarray

    def __post_init__(self):
        if self.dim < 3:
            raise DimensionError("quadratic fields need dim >= 3")
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (self.dim,) * 3:
            raise DimensionError(
                f"coefficient tensor must be shape {(self.dim,)*3}, got {c.shape}")
        lower = np.tril_indices(self.dim, k=-1)
        if np.any(c[:, lower[0], lower[1]] != 0.0):
            raise ValueError("coefficients must use the j <= k convention")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_terms(cls, dim: int, terms: dict[tuple[int, int, int], float]) -> "QuadraticField":
        """Build from {(i, j, k): coefficient} with 0-based indices; (j, k) is
        sorted automatically."""
        c = np.zeros((dim, dim, dim))
        for (i, j, k), v in terms.items():
            lo, hi = (j, k) if j <= k else (k, j)
            c[i, lo, hi] += v
        return cls(dim, c)

    def __call__(self, y: np.ndarray) -> np.ndarray:
        return evaluate_field(self, y)


def evaluate_field(field_: QuadraticField, y) -> np.ndarray:
    """Evaluate the quadratic field at a state."""
    y = as_state(y, field_.dim)
    return np.asarray(kernels._rhs_quadratic_field(field_.coeffs, y))


def painleve_condition(a, rtol: float = 1e-12) -> bool:
    """Test the coefficient condition a12*a23*a31 == a13*a32*a21 for the 3x3
    matrix of a system dy_i/dt = y_i * sum_j a_ij y_j, up to relative
    tolerance rtol."""
    a = np.asarray(a, dtype=float)
    if a.shape != (3, 3):
        raise DimensionError("painleve_condition expects a 3x3 matrix")
    left = a[0, 1] * a[1, 2] * a[2, 0]
    right = a[0, 2] * a[2, 1] * a[1, 0]
    return abs(left - right) <= rtol * (abs(left) + abs(right))


def elementary_symmetric(y, k: int) -> float:
    """e_k(y), the degree-k elementary symmetric polynomial; e_0 = 1."""
    y = np.asarray(y, dtype=float)
    if y.ndim != 1:
        raise DimensionError("elementary_symmetric expects a 1-D array")
    n = y.shape[0]
    if not 0 <= k <= n:
        raise IndexError(f"k must be in [0, {n}], got {k}")
    return float(kernels.esp_all(y)[k])


def all_elementary_symmetric(Y: np.ndarray) -> np.ndarray:
    """e_0..e_N for a batch of states, shape (..., N) -> (..., N+1)."""
    Y = np.asarray(Y, dtype=float)
    n = Y.shape[-1]
    e = np.zeros(Y.shape[:-1] + (n + 1,))
    e[..., 0] = 1.0
    for i in range(n):
        top = min(i + 1, n)
        for j in range(top, 0, -1):
            e[..., j] += Y[..., i] * e[..., j - 1]
    return e


def fmt17(x: float) -> str:
    """17 significant digits: round-trip exact for IEEE doubles."""
    return format(float(x), ".17g")


@dataclass
class TrajectoryRecord:
    """Sampled trajectory of a flow or map with optional invariant columns."""

    system: str
    times: np.ndarray                   # shape (T+1,)
    states: np.ndarray                  # shape (T+1, N)
    invariant_names: list[str] = field(default_factory=list)
    invariants: np.ndarray | None = None  # shape (T+1, M)
    status: str = "ok"                  # ok | blowup | singular

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @property
    def steps(self) -> int:
        return self.states.shape[0] - 1

    def to_csv(self) -> str:
        n = self.dim
        header = ["step", "t"] + [f"y_{i+1}" for i in range(n)] + list(self.invariant_names)
        lines = [",".join(header)]
        for k in range(self.states.shape[0]):
            row = [str(k), fmt17(self.times[k])]
            row += [fmt17(v) for v in self.states[k]]
            if self.invariants is not None:
                row += [fmt17(v) for v in self.invariants[k]]
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        rows = []
        for k in range(self.states.shape[0]):
            row = {"step": k, "t": self.times[k], "y": [float(v) for v in self.states[k]]}
            if self.invariants is not None:
                row["invariants"] = {
                    name: float(v)
                    for name, v in zip(self.invariant_names, self.invariants[k])
                }
            rows.append(row)
        return json.dumps({"system": self.system, "status": self.status, "rows": rows})
