"""Sandwich covariance, Wald z-tests, and false-discovery-rate adjustment.

The pseudolikelihood is not the true likelihood, so valid standard errors
need the sandwich form: with

    I1 = -(1/n) sum_i H_i      (negative mean per-observation Hessian)
    I2 =  (1/n) sum_i s_i s_i' (Gram matrix of per-observation scores)

evaluated at the fitted parameters, the estimator covariance is

    Cov = (1/n) * inv(I1) I2 inv(I1)

and per-coordinate standard errors are the square roots of its diagonal.
Wald z-scores divide (estimate - null) by those standard errors; two-sided
p-values come from the standard normal tail via erfc.

``fdr_adjust`` implements the step-up adjusted p-values

    adj_(i) = min(1, min_{j >= i} c(m) * m * p_(j) / j)

over the ascending order, with c(m) = 1 for Benjamini-Hochberg and
c(m) = sum_{k<=m} 1/k for Benjamini-Yekutieli (valid under arbitrary
dependence between the tests).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError, NumericalError
from .fit import FitResult
from .params import FvbmParams, as_spin_matrix, flat_length, pair_indices
from .pseudolikelihood import per_observation_scores, pseudo_hessian

CONDITION_LIMIT = 1e12


def empirical_info_1(params: FvbmParams, data) -> np.ndarray:
    """Negative mean Hessian of the log-pseudolikelihood (the "bread")."""
    x = as_spin_matrix(data)
    return -pseudo_hessian(params, x) / x.shape[0]


def empirical_info_2(params: FvbmParams, data) -> np.ndarray:
    """Mean outer product of per-observation scores (the "meat").

    A Gram matrix, hence symmetric positive semi-definite by construction.
    """
    scores = per_observation_scores(params, data)
    g = scores.T @ scores / scores.shape[0]
    return (g + g.T) / 2.0


def _symmetric_inverse(a: np.ndarray, coordinate_names: list[str] | None) -> np.ndarray:
    eigvals, eigvecs = np.linalg.eigh(a)
    absvals = np.abs(eigvals)
    worst = int(np.argmin(absvals))
    cond = np.inf if absvals[worst] == 0.0 else float(absvals.max() / absvals[worst])
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        v = np.abs(eigvecs[:, worst])
        offenders = [int(i) for i in np.flatnonzero(v >= 0.5 * v.max())]
        shown = (
            ", ".join(coordinate_names[i] for i in offenders)
            if coordinate_names
            else ", ".join(str(i) for i in offenders)
        )
        raise NumericalError(
            f"information matrix is singular or ill-conditioned "
            f"(condition number {cond:.3g}); near-null direction is carried "
            f"by coordinate(s) {shown}"
        )
    return (eigvecs / eigvals) @ eigvecs.T


def sandwich_covariance(
    params: FvbmParams, data, coordinate_names: list[str] | None = None
) -> np.ndarray:
    """Estimator covariance (1/n) * inv(I1) I2 inv(I1) at ``params``.

    Raises:
        NumericalError: If I1 has condition number above 1e12; the message
            names the coordinates carrying the near-null direction.
    """
    x = as_spin_matrix(data)
    i1_inv = _symmetric_inverse(empirical_info_1(params, x), coordinate_names)
    i2 = empirical_info_2(params, x)
    cov = i1_inv @ i2 @ i1_inv / x.shape[0]
    return (cov + cov.T) / 2.0


def standard_errors(covariance: np.ndarray) -> np.ndarray:
    diag = np.diag(covariance)
    if np.any(diag <= 0):
        bad = [int(i) for i in np.flatnonzero(diag <= 0)]
        raise NumericalError(f"nonpositive variance for coordinate(s) {bad}")
    return np.sqrt(diag)


def normal_cdf(x: float) -> float:
    """Standard normal CDF via the complementary error function."""
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def two_sided_p_value(z: float) -> float:
    """2 * (1 - Phi(|z|)), computed as erfc(|z|/sqrt(2)) for full accuracy."""
    return math.erfc(abs(z) / math.sqrt(2.0))


def wald_test(estimates, standard_errors, null_values=None):
    """Per-coordinate z-scores and two-sided normal p-values.

    Args:
        estimates: Flat vector of fitted values.
        standard_errors: Matching vector of positive standard errors.
        null_values: Hypothesized values; defaults to all zeros.

    Returns:
        (z_scores, p_values) as float arrays.
    """
    est = np.asarray(estimates, dtype=np.float64)
    se = np.asarray(standard_errors, dtype=np.float64)
    null = np.zeros_like(est) if null_values is None else np.asarray(null_values)
    if est.shape != se.shape or est.shape != null.shape:
        raise ValueError("estimates, standard errors, and nulls must align")
    if np.any(se <= 0):
        raise ValueError("standard errors must be strictly positive")
    z = (est - null) / se
    p = np.array([two_sided_p_value(v) for v in z])
    return z, p


def fdr_adjust(p_values, method: str = "by") -> np.ndarray:
    """Step-up FDR-adjusted p-values (Benjamini-Hochberg or -Yekutieli)."""
    method = method.lower()
    if method not in ("bh", "by"):
        raise ValueError(f"method must be 'bh' or 'by', got {method!r}")
    p = np.asarray(p_values, dtype=np.float64)
    if p.ndim != 1:
        raise ValueError("p-values must form a 1-D vector")
    if p.size == 0:
        return p.copy()
    if np.any(p < 0) or np.any(p > 1):
        raise ValueError("p-values must lie in [0, 1]")
    m = p.size
    c = 1.0 if method == "bh" else float(np.sum(1.0 / np.arange(1, m + 1)))
    order = np.argsort(p, kind="stable")
    scaled = p[order] * (c * m / np.arange(1, m + 1))
    adjusted = np.minimum(1.0, np.minimum.accumulate(scaled[::-1])[::-1])
    out = np.empty(m)
    out[order] = adjusted
    return out


@dataclass(frozen=True)
class InferenceReport:
    """Estimates, standard errors, Wald tests, and FDR-adjusted p-values.

    All vectors share the flat parameter layout.  ``adjustment_groups``
    maps a family name to the coordinate indices adjusted together; the
    default treats the bias block and the interaction block as separate
    families.
    """

    estimates: np.ndarray
    standard_errors: np.ndarray
    z_scores: np.ndarray
    p_values: np.ndarray
    adjusted_p_values: np.ndarray
    adjustment_groups: dict[str, list[int]]
    method: str = "by"

    def __post_init__(self) -> None:
        fields = (
            "estimates",
            "standard_errors",
            "z_scores",
            "p_values",
            "adjusted_p_values",
        )
        vectors = []
        for name in fields:
            v = np.array(getattr(self, name), dtype=np.float64, copy=True)
            v.setflags(write=False)
            object.__setattr__(self, name, v)
            vectors.append(v)
        length = vectors[0].size
        if any(v.shape != (length,) for v in vectors):
            raise ValueError("all report vectors must share one length")
        covered = sorted(i for idx in self.adjustment_groups.values() for i in idx)
        if covered != list(range(length)):
            raise ValueError("adjustment groups must partition the flat layout")
        if np.any(self.adjusted_p_values + 1e-15 < self.p_values):
            raise ValueError("adjusted p-values cannot fall below raw p-values")

    @property
    def n_params(self) -> int:
        return self.estimates.size

    def to_json_dict(self, labels: list[str] | None = None) -> dict:
        out = {
            "schema_version": 1,
            "estimates": [float(v) for v in self.estimates],
            "standard_errors": [float(v) for v in self.standard_errors],
            "z_scores": [float(v) for v in self.z_scores],
            "p_values": [float(v) for v in self.p_values],
            "adjusted_p_values": [float(v) for v in self.adjusted_p_values],
            "adjustment_groups": {
                name: list(map(int, idx))
                for name, idx in self.adjustment_groups.items()
            },
            "method": self.method,
        }
        if labels is not None:
            out["labels"] = list(labels)
        return out

    @classmethod
    def from_json_dict(cls, obj: dict) -> "InferenceReport":
        try:
            return cls(
                estimates=np.asarray(obj["estimates"], dtype=np.float64),
                standard_errors=np.asarray(obj["standard_errors"], dtype=np.float64),
                z_scores=np.asarray(obj["z_scores"], dtype=np.float64),
                p_values=np.asarray(obj["p_values"], dtype=np.float64),
                adjusted_p_values=np.asarray(
                    obj["adjusted_p_values"], dtype=np.float64
                ),
                adjustment_groups={
                    str(k): [int(i) for i in v]
                    for k, v in obj["adjustment_groups"].items()
                },
                method=str(obj.get("method", "by")),
            )
        except (KeyError, TypeError) as exc:
            raise DataError(f"malformed report record: {exc}") from exc


def default_groups(d: int) -> dict[str, list[int]]:
    """Bias and interaction blocks adjusted as separate families."""
    p = flat_length(d)
    return {"bias": list(range(d)), "interaction": list(range(d, p))}


def grouped_fdr_adjust(
    p_values: np.ndarray, groups: dict[str, list[int]], method: str = "by"
) -> np.ndarray:
    """FDR adjustment applied independently within each index group."""
    adjusted = np.empty_like(np.asarray(p_values, dtype=np.float64))
    for idx in groups.values():
        idx = np.asarray(idx, dtype=int)
        adjusted[idx] = fdr_adjust(np.asarray(p_values)[idx], method=method)
    return adjusted


def build_report(
    fit_result: FitResult,
    data,
    groups: dict[str, list[int]] | None = None,
    method: str = "by",
    null_values=None,
    coordinate_names: list[str] | None = None,
) -> InferenceReport:
    """Assemble the full inference report for a fitted model."""
    params = fit_result.params
    theta = params.to_flat()
    cov = sandwich_covariance(params, data, coordinate_names=coordinate_names)
    se = standard_errors(cov)
    z, p = wald_test(theta, se, null_values)
    if groups is None:
        groups = default_groups(params.d)
    adjusted = grouped_fdr_adjust(p, groups, method=method)
    return InferenceReport(
        estimates=theta,
        standard_errors=se,
        z_scores=z,
        p_values=p,
        adjusted_p_values=adjusted,
        adjustment_groups=groups,
        method=method,
    )


def _fmt_val(v: float) -> str:
    return f"{v:.3f}"


def _fmt_p(v: float) -> str:
    return f"{v:.2E}"


def format_report_tables(report: InferenceReport, labels: list[str]) -> str:
    """Aligned plain-text tables: one bias row block, lower-triangle blocks
    for the interactions, per reported quantity."""
    d = len(labels)
    if flat_length(d) != report.n_params:
        raise ValueError(
            f"{d} labels imply {flat_length(d)} coordinates, "
            f"report has {report.n_params}"
        )
    quantities = [
        ("Estimate", report.estimates, _fmt_val),
        ("Std. err.", report.standard_errors, _fmt_val),
        ("z-score", report.z_scores, _fmt_val),
        ("p-value", report.p_values, _fmt_p),
        ("adj. p", report.adjusted_p_values, _fmt_p),
    ]
    # widest realistic cell is a 3-digit-exponent p-value ("1.86E-154")
    width = max(11, max(len(s) for s in labels) + 2)
    head = "".join(f"{s:>{width}}" for s in labels)
    lines = ["A: biases", f"{'':12s}{head}"]
    for name, vec, fmt in quantities:
        row = "".join(f"{fmt(vec[i]):>{width}}" for i in range(d))
        lines.append(f"{name:12s}{row}")
    lines.append("")
    lines.append("B: interactions")
    slot = {pair: d + q for q, pair in enumerate(pair_indices(d))}
    for name, vec, fmt in quantities:
        lines.append(name)
        lines.append(f"{'':{width}}" + "".join(f"{s:>{width}}" for s in labels[:-1]))
        for r in range(1, d):
            cells = "".join(
                f"{fmt(vec[slot[(c, r)]]):>{width}}" for c in range(r)
            )
            lines.append(f"{labels[r]:>{width}}" + cells)
        lines.append("")
    return "\n".join(lines)
