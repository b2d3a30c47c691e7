"""Exact model evaluation by full-state enumeration.

The probability of a +/-1 configuration ``x`` is

    P(x) = exp(0.5 * x'Mx + x'b) / z,    z = sum over all 2^d states,

so anything exact (the normalization constant, the full PMF table,
marginals, pairwise joints, exact sampling) costs 2^d work.  Operations
that enumerate refuse dimensions above ``ENUMERATION_CAP`` (default 20)
rather than silently blowing up.

State indexing convention, fixed so PMF tables are portable: state index
``i`` encodes coordinate ``j`` (0-based) in bit ``j`` of ``i``, with a set
bit meaning +1.  Index 0 is the all-minus-one state and index 2^d - 1 the
all-plus-one state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .params import FvbmParams, as_spin_vector

ENUMERATION_CAP = 20

_BLOCK = 1 << 16


def _check_cap(d: int, cap: int) -> None:
    if d > cap:
        raise DataError(
            f"enumeration over 2^{d} states exceeds the cap of d<={cap}; "
            f"raise the cap explicitly if you really want this"
        )


def index_state(i: int, d: int) -> np.ndarray:
    """Spin configuration for a state index under the canonical convention."""
    if not 0 <= i < (1 << d):
        raise ValueError(f"state index {i} out of range for d={d}")
    bits = (i >> np.arange(d)) & 1
    return bits.astype(np.float64) * 2.0 - 1.0


def state_index(x) -> int:
    """Inverse of :func:`index_state`."""
    x = as_spin_vector(x)
    return int(sum(1 << j for j in range(x.size) if x[j] > 0))


def _states_block(start: int, stop: int, d: int) -> np.ndarray:
    idx = np.arange(start, stop, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(d)[None, :]) & 1
    return bits.astype(np.float64) * 2.0 - 1.0


def _block_log_weights(params: FvbmParams, states: np.ndarray) -> np.ndarray:
    quad = 0.5 * np.einsum("ij,ij->i", states @ params.interaction, states)
    return quad + states @ params.bias


def log_unnormalized(params: FvbmParams, x) -> float:
    """Exponent 0.5 * x'Mx + x'b of the unnormalized probability weight."""
    x = as_spin_vector(x)
    if x.size != params.d:
        raise DataError(f"observation has {x.size} coordinates, model has {params.d}")
    return float(0.5 * x @ params.interaction @ x + x @ params.bias)


def log_normalization(params: FvbmParams, cap: int = ENUMERATION_CAP) -> float:
    """log z via a streaming log-sum-exp over all 2^d states.

    Streaming keeps memory flat for large d and the log-sum-exp keeps the
    accumulation overflow-free for large parameter magnitudes.
    """
    _check_cap(params.d, cap)
    total = 1 << params.d
    running_max = -np.inf
    running_sum = 0.0
    for start in range(0, total, _BLOCK):
        stop = min(start + _BLOCK, total)
        logw = _block_log_weights(params, _states_block(start, stop, params.d))
        bmax = float(logw.max())
        if bmax > running_max:
            running_sum = running_sum * np.exp(running_max - bmax) + float(
                np.exp(logw - bmax).sum()
            )
            running_max = bmax
        else:
            running_sum += float(np.exp(logw - running_max).sum())
    return running_max + float(np.log(running_sum))


def normalization_constant(params: FvbmParams, cap: int = ENUMERATION_CAP) -> float:
    """The plain normalization constant z.  May overflow to inf for extreme
    parameters; use :func:`log_normalization` in that regime."""
    return float(np.exp(log_normalization(params, cap=cap)))


def pmf(params: FvbmParams, x, cap: int = ENUMERATION_CAP) -> float:
    """Exact probability of one configuration."""
    return float(np.exp(log_unnormalized(params, x) - log_normalization(params, cap=cap)))


@dataclass(frozen=True)
class PmfTable:
    """Full PMF over all 2^d states in the canonical index order."""

    d: int
    probabilities: np.ndarray

    def __post_init__(self) -> None:
        p = np.array(self.probabilities, dtype=np.float64, copy=True)
        if p.shape != (1 << self.d,):
            raise ValueError(
                f"expected {1 << self.d} probabilities for d={self.d}, got {p.shape}"
            )
        if np.any(p < -1e-15) or np.any(p > 1.0 + 1e-12):
            raise ValueError("probabilities must lie in [0, 1]")
        if abs(float(p.sum()) - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {p.sum():.17g}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)

    def to_json_dict(self) -> dict:
        return {"d": self.d, "probabilities": [float(v) for v in self.probabilities]}

    @classmethod
    def from_json_dict(cls, obj: dict) -> "PmfTable":
        try:
            return cls(d=int(obj["d"]), probabilities=np.asarray(obj["probabilities"]))
        except (KeyError, TypeError) as exc:
            raise DataError(f"malformed PMF record: {exc}") from exc


def enumerate_pmf(params: FvbmParams, cap: int = ENUMERATION_CAP) -> PmfTable:
    """Probabilities of all 2^d states; sums to one within 1e-12."""
    _check_cap(params.d, cap)
    total = 1 << params.d
    logw = np.empty(total)
    for start in range(0, total, _BLOCK):
        stop = min(start + _BLOCK, total)
        logw[start:stop] = _block_log_weights(
            params, _states_block(start, stop, params.d)
        )
    m = logw.max()
    logz = m + np.log(np.exp(logw - m).sum())
    return PmfTable(d=params.d, probabilities=np.exp(logw - logz))


def _coordinate_signs(table: PmfTable, j: int) -> np.ndarray:
    if not 0 <= j < table.d:
        raise ValueError(f"coordinate {j} out of range for d={table.d}")
    idx = np.arange(1 << table.d)
    return ((idx >> j) & 1).astype(bool)


def marginal_probability(table: PmfTable, j: int) -> float:
    """P(X_j = +1) under the table (0-based coordinate)."""
    plus = _coordinate_signs(table, j)
    return float(table.probabilities[plus].sum())


def pairwise_joint(table: PmfTable, j: int, k: int) -> np.ndarray:
    """2x2 joint of (X_j, X_k): rows index X_j in (+1, -1), columns X_k.

    Entry [0, 0] is P(X_j=+1, X_k=+1), entry [1, 1] is P(X_j=-1, X_k=-1).
    """
    if j == k:
        raise ValueError("pairwise joint needs two distinct coordinates")
    pj = _coordinate_signs(table, j)
    pk = _coordinate_signs(table, k)
    p = table.probabilities
    return np.array(
        [
            [float(p[pj & pk].sum()), float(p[pj & ~pk].sum())],
            [float(p[~pj & pk].sum()), float(p[~pj & ~pk].sum())],
        ]
    )


def concordance(table: PmfTable, j: int, k: int) -> float:
    """P(X_j == X_k): the sum of the two agreement cells of the joint."""
    joint = pairwise_joint(table, j, k)
    return float(joint[0, 0] + joint[1, 1])


def sample(
    params: FvbmParams, n: int, seed: int, cap: int = ENUMERATION_CAP
) -> np.ndarray:
    """Exact i.i.d. draws by inverse CDF over the enumerated PMF.

    Deterministic for a fixed seed.  Returns an n-by-d matrix of +/-1;
    n = 0 yields an empty matrix.
    """
    if n < 0:
        raise ValueError(f"sample size must be nonnegative, got {n}")
    d = params.d
    if n == 0:
        return np.empty((0, d))
    table = enumerate_pmf(params, cap=cap)
    cdf = np.cumsum(table.probabilities)
    cdf[-1] = 1.0
    rng = np.random.default_rng(seed)
    idx = np.searchsorted(cdf, rng.random(n), side="right")
    idx = np.minimum(idx, (1 << d) - 1)
    bits = (idx[:, None] >> np.arange(d)[None, :]) & 1
    return bits.astype(np.float64) * 2.0 - 1.0
