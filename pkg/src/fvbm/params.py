"""Parameter and spin-data containers.

A fully-visible Boltzmann machine over ``d`` spin variables (each valued in
{-1, +1}) is parametrized by a bias vector ``b`` of length ``d`` and a
symmetric interaction matrix ``M`` with zeros on the diagonal.  Everything
in this package shares one canonical flat layout for the parameter vector:

    theta = (b_1, ..., b_d,  m_12, m_13, ..., m_1d, m_23, ..., m_{d-1,d})

i.e. biases first, then the upper triangle of ``M`` in row-major
(lexicographic) order, for a total of ``d + d*(d-1)/2`` entries.  All
coordinate indices in the public API are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError


def flat_length(d: int) -> int:
    """Number of free parameters for dimension ``d``."""
    if d < 1:
        raise ValueError(f"dimension must be positive, got {d}")
    return d + d * (d - 1) // 2


def pair_indices(d: int) -> list[tuple[int, int]]:
    """Upper-triangle index pairs (j, k), j < k, in lexicographic order.

    The position of a pair in this list plus ``d`` gives its slot in the
    flat parameter layout.
    """
    return [(j, k) for j in range(d) for k in range(j + 1, d)]


def flat_labels(names: list[str]) -> list[str]:
    """Human-readable labels for every flat-layout coordinate.

    Bias coordinates keep the variable name; interaction coordinates are
    rendered as ``"A:B"``.
    """
    pairs = pair_indices(len(names))
    return list(names) + [f"{names[j]}:{names[k]}" for j, k in pairs]


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class FvbmParams:
    """Model parameters: bias vector and symmetric zero-diagonal interactions.

    Attributes:
        bias: Length-d float vector.
        interaction: d-by-d symmetric float matrix with zero diagonal.

    Instances are immutable; the underlying arrays are marked read-only.
    """

    bias: np.ndarray
    interaction: np.ndarray

    def __post_init__(self) -> None:
        b = _readonly(np.atleast_1d(self.bias))
        m = _readonly(np.atleast_2d(self.interaction))
        if b.ndim != 1 or b.size == 0:
            raise ValueError("bias must be a nonempty 1-D vector")
        d = b.size
        if m.shape != (d, d):
            raise ValueError(f"interaction must be {d}x{d}, got {m.shape}")
        if not (np.all(np.isfinite(b)) and np.all(np.isfinite(m))):
            raise ValueError("parameters must be finite")
        if not np.array_equal(m, m.T):
            raise ValueError("interaction matrix must be symmetric")
        if np.any(np.diag(m) != 0.0):
            raise ValueError("interaction matrix must have a zero diagonal")
        object.__setattr__(self, "bias", b)
        object.__setattr__(self, "interaction", m)

    @property
    def d(self) -> int:
        return self.bias.size

    @property
    def n_params(self) -> int:
        return flat_length(self.d)

    @classmethod
    def zeros(cls, d: int) -> "FvbmParams":
        return cls(bias=np.zeros(d), interaction=np.zeros((d, d)))

    @classmethod
    def from_flat(cls, d: int, theta: np.ndarray) -> "FvbmParams":
        """Rebuild parameters from the canonical flat vector."""
        theta = np.asarray(theta, dtype=np.float64)
        if theta.shape != (flat_length(d),):
            raise ValueError(
                f"flat vector for d={d} must have length {flat_length(d)}, "
                f"got shape {theta.shape}"
            )
        bias = theta[:d]
        m = np.zeros((d, d))
        for slot, (j, k) in enumerate(pair_indices(d)):
            m[j, k] = m[k, j] = theta[d + slot]
        return cls(bias=bias, interaction=m)

    def to_flat(self) -> np.ndarray:
        """Canonical flat vector: biases, then upper-triangle interactions."""
        pairs = pair_indices(self.d)
        upper = np.array([self.interaction[j, k] for j, k in pairs])
        return np.concatenate([self.bias, upper])

    def upper_triangle(self) -> np.ndarray:
        return self.to_flat()[self.d:]

    def to_json_dict(self) -> dict:
        return {
            "d": self.d,
            "bias": [float(v) for v in self.bias],
            "interaction_upper": [float(v) for v in self.upper_triangle()],
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "FvbmParams":
        try:
            d = int(obj["d"])
            bias = np.asarray(obj["bias"], dtype=np.float64)
            upper = np.asarray(obj["interaction_upper"], dtype=np.float64)
        except (KeyError, TypeError) as exc:
            raise DataError(f"malformed parameter record: {exc}") from exc
        if bias.shape != (d,) or upper.shape != (d * (d - 1) // 2,):
            raise DataError(
                f"parameter record inconsistent with d={d}: "
                f"bias has {bias.size} entries, upper triangle {upper.size}"
            )
        return cls.from_flat(d, np.concatenate([bias, upper]))


def as_spin_matrix(values, *, allow_empty: bool = False) -> np.ndarray:
    """Validate and convert observations to an n-by-d float array of +/-1.

    Args:
        values: Anything array-like with two dimensions.
        allow_empty: Permit n == 0 (used by simulation with n=0).

    Raises:
        DataError: On wrong shape or entries other than -1/+1.
    """
    x = np.asarray(values, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(1, -1)
    if x.ndim != 2 or x.shape[1] == 0:
        raise DataError(f"spin data must be a 2-D matrix, got shape {x.shape}")
    if x.shape[0] == 0:
        if allow_empty:
            return x
        raise DataError("spin data must contain at least one row")
    if not np.all(np.abs(x) == 1.0):
        bad = np.argwhere(np.abs(x) != 1.0)[0]
        raise DataError(
            f"spin data must contain only -1/+1; offending cell "
            f"(row {bad[0]}, column {bad[1]})"
        )
    return x


def as_spin_vector(values) -> np.ndarray:
    """Validate a single +/-1 observation; returns a length-d float vector."""
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise DataError(f"spin vector must be 1-D and nonempty, got shape {x.shape}")
    if not np.all(np.abs(x) == 1.0):
        raise DataError("spin vector must contain only -1/+1")
    return x
