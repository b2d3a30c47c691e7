"""Conditional PMFs, the log-pseudolikelihood, and its derivatives.

The conditional probability of coordinate j given the rest depends only on
the activation a_j = m_j'x + b_j (m_j is column j of the interaction
matrix, whose zero diagonal removes the self term):

    f(x_j | x_(j)) = exp(x_j a_j) / (exp(a_j) + exp(-a_j))
                   = sigmoid(2 x_j a_j).

Summing log f over coordinates and observations gives the
log-pseudolikelihood, which never touches the normalization constant.
Score and Hessian follow from the activations being linear in the
parameters: with t_j = tanh(a_j) and s_j = sech^2(a_j),

    per-observation score    = sum_j (x_j - t_j) * grad(a_j)
    per-observation Hessian  = -sum_j s_j * grad(a_j) grad(a_j)'

where grad(a_j) is 1 at b_j and x_k at m_jk (pair slots touching j).
All derivatives are over the canonical flat layout of ``params``.
"""

from __future__ import annotations

import numpy as np

from .errors import DataError
from .params import FvbmParams, as_spin_matrix, as_spin_vector, pair_indices


def _activations(params: FvbmParams, x: np.ndarray) -> np.ndarray:
    """a_ij = m_j'x_i + b_j for every observation and coordinate."""
    return x @ params.interaction + params.bias


def _check_dims(params: FvbmParams, x: np.ndarray) -> None:
    if x.shape[1] != params.d:
        raise DataError(
            f"data has {x.shape[1]} columns, model has {params.d} coordinates"
        )


def _sigmoid(t: float) -> float:
    if t >= 0:
        return 1.0 / (1.0 + np.exp(-t))
    e = np.exp(t)
    return e / (1.0 + e)


def _sech2(a: np.ndarray) -> np.ndarray:
    # 4 e^{-2|a|} / (1 + e^{-2|a|})^2: exact at 0, underflows cleanly to 0.
    e = np.exp(-2.0 * np.abs(a))
    return 4.0 * e / (1.0 + e) ** 2


def conditional_pmf(params: FvbmParams, x, j: int) -> float:
    """f(x_j | x_(j)) for a single observation.

    The probability of the complementary value is computed as the exact
    complement, so the two conditionals always sum to one.
    """
    x = as_spin_vector(x)
    if x.size != params.d:
        raise DataError(f"observation has {x.size} coordinates, model has {params.d}")
    if not 0 <= j < params.d:
        raise ValueError(f"coordinate {j} out of range for d={params.d}")
    a = float(params.interaction[j] @ x + params.bias[j])
    q = _sigmoid(2.0 * a)
    return q if x[j] > 0 else 1.0 - q


def log_pseudolikelihood(params: FvbmParams, data) -> float:
    """Sum of log conditional PMFs over all coordinates and observations."""
    x = as_spin_matrix(data)
    _check_dims(params, x)
    t = 2.0 * x * _activations(params, x)
    return float(-np.logaddexp(0.0, -t).sum())


def pseudo_score(params: FvbmParams, data) -> np.ndarray:
    """Analytic gradient of the log-pseudolikelihood over the flat layout.

    Each interaction coordinate m_jk collects contributions from both the
    j-th and the k-th conditional term.
    """
    x = as_spin_matrix(data)
    _check_dims(params, x)
    d = params.d
    resid = x - np.tanh(_activations(params, x))
    g = np.empty(params.n_params)
    g[:d] = resid.sum(axis=0)
    cross = resid.T @ x
    for slot, (j, k) in enumerate(pair_indices(d)):
        g[d + slot] = cross[j, k] + cross[k, j]
    return g


def per_observation_scores(params: FvbmParams, data) -> np.ndarray:
    """n-by-p matrix whose rows are each observation's total score vector.

    Rows sum to :func:`pseudo_score`.
    """
    x = as_spin_matrix(data)
    _check_dims(params, x)
    d = params.d
    resid = x - np.tanh(_activations(params, x))
    scores = np.empty((x.shape[0], params.n_params))
    scores[:, :d] = resid
    for slot, (j, k) in enumerate(pair_indices(d)):
        scores[:, d + slot] = resid[:, j] * x[:, k] + resid[:, k] * x[:, j]
    return scores


def _activation_design(x: np.ndarray, l: int, pairs: list[tuple[int, int]]) -> np.ndarray:
    """Rows are grad(a_l) per observation over the flat layout."""
    n, d = x.shape
    w = np.zeros((n, d + len(pairs)))
    w[:, l] = 1.0
    for slot, (j, k) in enumerate(pairs):
        if j == l:
            w[:, d + slot] = x[:, k]
        elif k == l:
            w[:, d + slot] = x[:, j]
    return w


def pseudo_hessian(params: FvbmParams, data) -> np.ndarray:
    """Analytic Hessian of the log-pseudolikelihood (symmetric, p-by-p)."""
    x = as_spin_matrix(data)
    _check_dims(params, x)
    d = params.d
    pairs = pair_indices(d)
    s = _sech2(_activations(params, x))
    h = np.zeros((params.n_params, params.n_params))
    for l in range(d):
        w = _activation_design(x, l, pairs)
        h -= (w * s[:, l : l + 1]).T @ w
    return (h + h.T) / 2.0
