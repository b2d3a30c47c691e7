"""Information matrices, sandwich covariance, Wald tests, FDR adjustment."""

import math

import numpy as np
import pytest

import fvbm
from fvbm import jsonio
from fvbm.inference import two_sided_p_value

import reference_values as ref
from oracles import fd_gradient, fd_jacobian, random_params, random_spins


# ---------------------------------------------------------------------------
# information matrices
# ---------------------------------------------------------------------------


def test_info1_zero_params_bias_block():
    data = random_spins(np.random.default_rng(50), 12, 3)
    i1 = fvbm.empirical_info_1(fvbm.FvbmParams.zeros(3), data)
    np.testing.assert_allclose(np.diag(i1)[:3], 1.0, atol=1e-14)


def test_info1_psd_at_fit():
    rng = np.random.default_rng(51)
    data = random_spins(rng, 60, 3)
    result = fvbm.fit(data, fvbm.FitConfig(objective_tolerance=1e-12, max_iterations=3000))
    eigvals = np.linalg.eigvalsh(fvbm.empirical_info_1(result.params, data))
    assert eigvals.min() >= -1e-8


def test_info1_matches_finite_differences():
    rng = np.random.default_rng(52)
    params = random_params(rng, 3)
    data = random_spins(rng, 15, 3)
    fd = fd_jacobian(
        lambda th: fvbm.pseudo_score(fvbm.FvbmParams.from_flat(3, th), data),
        params.to_flat(),
    )
    np.testing.assert_allclose(
        fvbm.empirical_info_1(params, data), -fd / 15.0, rtol=0, atol=1e-5
    )


def test_info1_shares_hessian_code_path():
    rng = np.random.default_rng(53)
    params = random_params(rng, 4)
    data = random_spins(rng, 20, 4)
    np.testing.assert_array_equal(
        fvbm.empirical_info_1(params, data),
        -fvbm.pseudo_hessian(params, data) / 20.0,
    )


def test_info2_gram_psd():
    rng = np.random.default_rng(54)
    params = random_params(rng, 3, scale=2.0)
    data = random_spins(rng, 25, 3)
    i2 = fvbm.empirical_info_2(params, data)
    np.testing.assert_allclose(i2, i2.T, atol=1e-14)
    assert np.linalg.eigvalsh(i2).min() >= -1e-10


def test_info2_matches_outer_product_of_fd_scores():
    # brute force: per-row score by finite differences of the one-row objective
    rng = np.random.default_rng(55)
    params = random_params(rng, 2)
    data = random_spins(rng, 6, 2)
    outer = np.zeros((3, 3))
    for row in data:
        s = fd_gradient(
            lambda th: fvbm.log_pseudolikelihood(
                fvbm.FvbmParams.from_flat(2, th), row.reshape(1, -1)
            ),
            params.to_flat(),
        )
        outer += np.outer(s, s)
    np.testing.assert_allclose(
        fvbm.empirical_info_2(params, data), outer / 6.0, atol=1e-8
    )


def test_aggregate_score_vanishes_at_d1_mple():
    # data (+1, -1) has mean zero, so b = 0 is the exact maximizer and the
    # per-row scores (+1 and -1) cancel in aggregate
    params = fvbm.FvbmParams.zeros(1)
    data = np.array([[1.0], [-1.0]])
    scores = fvbm.per_observation_scores(params, data)
    np.testing.assert_allclose(scores, [[1.0], [-1.0]], atol=1e-15)
    assert scores.sum() == 0.0
    np.testing.assert_allclose(fvbm.empirical_info_2(params, data), [[1.0]], atol=1e-15)


# ---------------------------------------------------------------------------
# sandwich covariance
# ---------------------------------------------------------------------------


def test_sandwich_matches_bernoulli_closed_form():
    rng = np.random.default_rng(56)
    data = np.concatenate([np.ones((30, 1)), -np.ones((10, 1))])
    result = fvbm.fit(data, fvbm.FitConfig(objective_tolerance=1e-14, max_iterations=5000))
    cov = fvbm.sandwich_covariance(result.params, data)
    b_hat = result.params.bias[0]
    expected = 1.0 / (40.0 * (1.0 - math.tanh(b_hat) ** 2))
    assert cov[0, 0] == pytest.approx(expected, rel=1e-6)


def test_sandwich_symmetric_and_positive():
    rng = np.random.default_rng(57)
    data = random_spins(rng, 80, 3)
    result = fvbm.fit(data, fvbm.FitConfig(max_iterations=500))
    cov = fvbm.sandwich_covariance(result.params, data)
    np.testing.assert_array_equal(cov, cov.T)
    assert np.all(np.diag(cov) > 0)
    assert np.all(fvbm.standard_errors(cov) > 0)


def test_sandwich_singular_information_raises():
    # identical rows leave the three d=2 coordinates rank-deficient
    data = np.ones((10, 2))
    params = fvbm.FvbmParams.zeros(2)
    with pytest.raises(fvbm.NumericalError) as excinfo:
        fvbm.sandwich_covariance(params, data, coordinate_names=["b0", "b1", "m01"])
    assert "b0" in str(excinfo.value) or "m01" in str(excinfo.value)


# ---------------------------------------------------------------------------
# normal CDF and Wald tests
# ---------------------------------------------------------------------------


def test_normal_cdf_properties():
    assert fvbm.normal_cdf(0.0) == 0.5
    for x in (0.3, 1.0, 2.5, 6.0):
        assert fvbm.normal_cdf(-x) == pytest.approx(1.0 - fvbm.normal_cdf(x), abs=1e-15)
    assert fvbm.normal_cdf(1.959964) == pytest.approx(0.975, abs=1e-6)


def test_wald_zero_difference():
    z, p = fvbm.wald_test([0.4], [0.1], [0.4])
    assert z[0] == 0.0
    assert p[0] == 1.0


def test_wald_reference_bias_rows():
    z, p = fvbm.wald_test([-0.321], [0.165])
    assert z[0] == pytest.approx(-1.94545, abs=1e-4)
    assert abs(p[0] - 5.20e-02) <= 0.002
    z, p = fvbm.wald_test([-1.037], [0.207])
    assert z[0] == pytest.approx(-5.00966, abs=1e-4)
    # printed value is 5.71E-07; recomputation from 3-decimal inputs can
    # land anywhere in the rounding interval
    lo = two_sided_p_value((1.037 + 0.0005) / (0.207 - 0.0005))
    hi = two_sided_p_value((1.037 - 0.0005) / (0.207 + 0.0005))
    assert lo <= 5.71e-07 <= hi
    assert p[0] == pytest.approx(5.45e-07, rel=1e-2)


def test_wald_rejects_bad_se():
    with pytest.raises(ValueError):
        fvbm.wald_test([1.0], [0.0])
    with pytest.raises(ValueError):
        fvbm.wald_test([1.0], [-0.2])


# ---------------------------------------------------------------------------
# FDR adjustment
# ---------------------------------------------------------------------------


def test_fdr_single_value_unchanged():
    np.testing.assert_allclose(fvbm.fdr_adjust([0.031], "by"), [0.031])
    np.testing.assert_allclose(fvbm.fdr_adjust([0.031], "bh"), [0.031])


def test_fdr_reference_bias_anchors():
    adjusted = fvbm.fdr_adjust(ref.BIAS_P, "by")
    harmonic8 = sum(1.0 / k for k in range(1, 9))
    assert harmonic8 == pytest.approx(2.717857142857143, rel=1e-12)
    assert adjusted[1] == pytest.approx(1.24e-05, rel=2e-2)   # from 5.71E-07
    assert adjusted[3] == pytest.approx(6.41e-03, rel=2e-2)   # from 5.89E-04
    # hand computation: rank-1 entry scales by c(8) * 8
    assert adjusted[1] == pytest.approx(harmonic8 * 8 * 5.71e-07, rel=1e-12)


def test_fdr_reference_interaction_anchor():
    adjusted = fvbm.fdr_adjust(ref.INTERACTION_P, "by")
    pairs = fvbm.pair_indices(8)
    slot = pairs.index((2, 6))  # NXT:DHJP, raw 7.24E-07
    # step-up minimum comes from rank 2: c(28) * 28 * 7.58E-07 / 2
    c28 = sum(1.0 / k for k in range(1, 29))
    assert adjusted[slot] == pytest.approx(c28 * 14 * 7.58e-07, rel=1e-12)
    assert adjusted[slot] == pytest.approx(4.17e-05, rel=2e-2)


def test_fdr_permutation_equivariance():
    rng = np.random.default_rng(58)
    p = rng.uniform(size=17)
    perm = rng.permutation(17)
    for method in ("bh", "by"):
        direct = fvbm.fdr_adjust(p, method)[perm]
        permuted = fvbm.fdr_adjust(p[perm], method)
        np.testing.assert_allclose(direct, permuted, atol=0)


def test_fdr_by_dominates_bh():
    rng = np.random.default_rng(59)
    p = rng.uniform(size=12)
    assert np.all(fvbm.fdr_adjust(p, "by") >= fvbm.fdr_adjust(p, "bh") - 1e-15)


def test_fdr_monotone_and_bounded():
    rng = np.random.default_rng(60)
    p = rng.uniform(size=25)
    for method in ("bh", "by"):
        adjusted = fvbm.fdr_adjust(p, method)
        assert np.all(adjusted >= p - 1e-15)
        assert np.all(adjusted <= 1.0)
        order = np.argsort(p, kind="stable")
        assert np.all(np.diff(adjusted[order]) >= -1e-15)


def test_fdr_validates_inputs():
    with pytest.raises(ValueError):
        fvbm.fdr_adjust([0.5, 1.2])
    with pytest.raises(ValueError):
        fvbm.fdr_adjust([0.5], method="holm")


def test_fdr_matches_scipy_oracle():
    scipy_stats = pytest.importorskip("scipy.stats")
    if not hasattr(scipy_stats, "false_discovery_control"):
        pytest.skip("scipy too old for false_discovery_control")
    rng = np.random.default_rng(63)
    for method in ("bh", "by"):
        for _ in range(50):
            m = int(rng.integers(1, 60))
            p = rng.uniform(size=m)
            if rng.random() < 0.3:
                p[int(rng.integers(0, m))] = p[int(rng.integers(0, m))]
            np.testing.assert_allclose(
                fvbm.fdr_adjust(p, method),
                scipy_stats.false_discovery_control(p, method=method),
                rtol=0,
                atol=1e-15,
            )


# ---------------------------------------------------------------------------
# report assembly
# ---------------------------------------------------------------------------


def _small_fit(seed=61, n=300, d=3):
    rng = np.random.default_rng(seed)
    params0 = random_params(rng, d, scale=0.5)
    data = fvbm.sample(params0, n, seed=seed)
    return fvbm.fit(data), data


def test_build_report_shapes_and_groups():
    result, data = _small_fit()
    report = fvbm.build_report(result, data)
    p = result.params.n_params
    assert report.n_params == p
    assert report.adjustment_groups == {"bias": [0, 1, 2], "interaction": [3, 4, 5]}
    assert np.all(report.adjusted_p_values >= report.p_values - 1e-15)
    assert np.all((report.p_values >= 0) & (report.p_values <= 1))


def test_grouped_adjustment_differs_from_single_group():
    result, data = _small_fit()
    grouped = fvbm.build_report(result, data)
    single = fvbm.build_report(
        result, data, groups={"all": list(range(result.params.n_params))}
    )
    assert not np.allclose(grouped.adjusted_p_values, single.adjusted_p_values)


def test_report_reproduces_reference_adjustment():
    # the reference raw p-values are printed to 3 significant digits, so the
    # reproduction check brackets each adjusted value between the step-up
    # adjustments of the half-ulp-down and half-ulp-up input vectors (the
    # step-up map is monotone in its inputs)
    for raw, printed in (
        (ref.BIAS_P, ref.BIAS_P_ADJUSTED),
        (ref.INTERACTION_P, ref.INTERACTION_P_ADJUSTED),
    ):
        half = np.array([0.5 * ref.last_digit_unit(v) for v in raw])
        lo = fvbm.fdr_adjust(np.clip(raw - half, 0.0, 1.0), "by")
        hi = fvbm.fdr_adjust(np.clip(raw + half, 0.0, 1.0), "by")
        for value_lo, value_hi, target in zip(lo, hi, printed):
            unit = ref.last_digit_unit(target)
            assert value_lo - 2.0 * unit <= target <= value_hi + 2.0 * unit


def test_null_calibration():
    # under a zero-parameter truth, raw p-values are approximately uniform
    rng = np.random.default_rng(62)
    d, n, reps = 2, 2000, 150
    hits = 0
    total = 0
    for r in range(reps):
        data = fvbm.sample(fvbm.FvbmParams.zeros(d), n, seed=10_000 + r)
        result = fvbm.fit(data)
        report = fvbm.build_report(result, data)
        hits += int((report.p_values < 0.05).sum())
        total += report.n_params
    fraction = hits / total
    assert abs(fraction - 0.05) < 0.03


def test_report_json_round_trip():
    result, data = _small_fit()
    report = fvbm.build_report(result, data)
    rebuilt = fvbm.InferenceReport.from_json_dict(
        jsonio.loads(jsonio.dumps(report.to_json_dict(labels=["x", "y", "z"])))
    )
    np.testing.assert_array_equal(rebuilt.estimates, report.estimates)
    np.testing.assert_array_equal(rebuilt.adjusted_p_values, report.adjusted_p_values)
    assert rebuilt.adjustment_groups == report.adjustment_groups


def test_format_report_tables():
    result, data = _small_fit()
    report = fvbm.build_report(result, data)
    text = fvbm.format_report_tables(report, ["AA", "BB", "CC"])
    assert "A: biases" in text
    assert "B: interactions" in text
    # the interaction block prints the lower triangle: row BB under column AA
    assert text.count("Estimate") == 2
    for label in ("AA", "BB", "CC"):
        assert label in text
    with pytest.raises(ValueError):
        fvbm.format_report_tables(report, ["AA", "BB"])
