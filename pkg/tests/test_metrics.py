import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from windwoa.metrics import (METRIC_COLUMNS, PredictionPair, UndefinedMetricError,
                             kge, metric_report, nse, r_squared, relative_error,
                             report_csv_header, report_csv_row, report_json_dict, rmse,
                             scatter_index, willmott_index)

import oracles


def pair(observed, predicted):
    return PredictionPair(np.asarray(observed, float), np.asarray(predicted, float))


class TestRmse:
    def test_perfect(self):
        assert rmse(pair([1, 2, 3], [1, 2, 3])) == 0.0

    def test_known_value(self):
        assert rmse(pair([0, 0], [3, 4])) == pytest.approx(math.sqrt(25 / 2), rel=1e-12)

    def test_translation_invariant(self):
        base = rmse(pair([1, 2, 3], [2, 2, 2]))
        shifted = rmse(pair([11, 12, 13], [12, 12, 12]))
        assert shifted == pytest.approx(base, rel=1e-12)


class TestRSquared:
    def test_perfect(self):
        assert r_squared(pair([1, 2, 3, 4], [1, 2, 3, 4])) == pytest.approx(1.0, abs=1e-12)

    def test_perfect_linear_relation(self):
        assert r_squared(pair([1, 2, 3, 4], [3, 5, 7, 9])) == pytest.approx(1.0, abs=1e-12)

    def test_oracle_value(self):
        # computed with the naive Pearson oracle: r = 0.6 -> 0.36
        observed, predicted = [1, 2, 3, 4], [2, 1, 4, 3]
        assert oracles.naive_r_squared(observed, predicted) == pytest.approx(0.36, abs=1e-12)
        assert r_squared(pair(observed, predicted)) == pytest.approx(0.36, abs=1e-12)

    def test_oracle_value_swapped_tail(self):
        # r = 0.8 -> 0.64
        observed, predicted = [1, 2, 3, 4], [2, 1, 3, 4]
        assert oracles.naive_r_squared(observed, predicted) == pytest.approx(0.64, abs=1e-12)
        assert r_squared(pair(observed, predicted)) == pytest.approx(0.64, abs=1e-12)

    def test_zero_variance_undefined(self):
        with pytest.raises(UndefinedMetricError):
            r_squared(pair([1, 1, 1], [1, 2, 3]))
        with pytest.raises(UndefinedMetricError):
            r_squared(pair([1, 2, 3], [2, 2, 2]))


class TestWillmott:
    def test_perfect(self):
        assert willmott_index(pair([1, 2, 3], [1, 2, 3])) == pytest.approx(1.0, abs=1e-12)

    def test_zero_agreement(self):
        assert willmott_index(pair([1, 3], [3, 1])) == pytest.approx(0.0, abs=1e-12)

    def test_degenerate_undefined(self):
        with pytest.raises(UndefinedMetricError):
            willmott_index(pair([2, 2], [2, 2]))


class TestScatterIndex:
    def test_perfect(self):
        assert scatter_index(pair([2, 3], [2, 3])) == 0.0

    def test_known_value(self):
        assert scatter_index(pair([2, 2], [3, 1])) == pytest.approx(0.5, rel=1e-12)

    def test_scale_invariant(self):
        base = scatter_index(pair([2, 4], [3, 3]))
        scaled = scatter_index(pair([20, 40], [30, 30]))
        assert scaled == pytest.approx(base, rel=1e-12)

    def test_zero_mean_undefined(self):
        with pytest.raises(UndefinedMetricError):
            scatter_index(pair([-1, 1], [0, 0]))


class TestNse:
    def test_perfect(self):
        assert nse(pair([1, 2, 3], [1, 2, 3])) == pytest.approx(1.0, abs=1e-12)

    def test_mean_predictor_is_zero(self):
        assert nse(pair([1, 2, 3], [2, 2, 2])) == pytest.approx(0.0, abs=1e-12)

    def test_anticorrelated(self):
        assert nse(pair([1, 2, 3], [3, 2, 1])) == pytest.approx(-3.0, abs=1e-12)

    def test_constant_observed_undefined(self):
        with pytest.raises(UndefinedMetricError):
            nse(pair([2, 2, 2], [1, 2, 3]))


class TestKge:
    def test_perfect(self):
        value, r, beta, gamma = kge(pair([1, 2, 3], [1, 2, 3]))
        assert (value, r, beta, gamma) == pytest.approx((1.0, 1.0, 1.0, 1.0), abs=1e-12)

    def test_doubled_predictions(self):
        value, r, beta, gamma = kge(pair([1, 2, 3], [2, 4, 6]))
        assert r == pytest.approx(1.0, abs=1e-12)
        assert beta == pytest.approx(2.0, rel=1e-12)
        assert gamma == pytest.approx(1.0, rel=1e-12)
        assert value == pytest.approx(0.0, abs=1e-12)

    def test_oracle_components(self):
        observed, predicted = [1, 2, 3, 4], [2, 1, 4, 3]
        expected = oracles.naive_kge(observed, predicted)
        assert expected[1] == pytest.approx(0.6, abs=1e-12)
        assert expected[0] == pytest.approx(0.6, abs=1e-12)  # beta = gamma = 1
        got = kge(pair(observed, predicted))
        assert got == pytest.approx(expected, rel=1e-12)

    def test_component_named_in_error(self):
        with pytest.raises(UndefinedMetricError, match="kge.gamma"):
            kge(pair([1.0, 3.0], [-1.0, 1.0]))


class TestRelativeError:
    def test_perfect(self):
        result = relative_error(pair([1, 2], [1, 2]))
        assert result.mean_abs == 0.0
        assert result.n_excluded == 0

    def test_single_sample(self):
        result = relative_error(pair([2], [3]))
        assert result.per_sample[0] == pytest.approx(50.0, rel=1e-12)

    def test_known_values(self):
        result = relative_error(pair([4, 5], [3, 6]))
        assert result.per_sample == pytest.approx([-25.0, 20.0], rel=1e-12)
        assert result.mean_abs == pytest.approx(22.5, rel=1e-12)

    def test_zero_observations_excluded(self):
        result = relative_error(pair([0, 4], [1, 5]))
        assert math.isnan(result.per_sample[0])
        assert result.n_excluded == 1
        assert result.mean_abs == pytest.approx(25.0, rel=1e-12)

    def test_all_zero_undefined(self):
        with pytest.raises(UndefinedMetricError):
            relative_error(pair([0, 0], [1, 2]))


class TestPairValidation:
    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            pair([1, 2], [1, 2, 3])

    def test_empty(self):
        with pytest.raises(ValueError):
            pair([], [])

    def test_non_finite(self):
        with pytest.raises(ValueError):
            pair([1, np.nan], [1, 2])


class TestMetricReport:
    def test_perfect_prediction(self):
        report = metric_report(pair([1, 2, 3], [1, 2, 3]))
        assert report.rmse == 0.0
        assert report.si == 0.0
        assert report.wi == pytest.approx(1.0, abs=1e-12)
        assert report.nse == pytest.approx(1.0, abs=1e-12)
        assert report.kge == pytest.approx(1.0, abs=1e-12)
        assert report.r_squared == pytest.approx(1.0, abs=1e-12)
        assert report.mean_abs_re == 0.0

    def test_constant_observed_marks_undefined(self):
        report = metric_report(pair([2, 2, 2], [1, 2, 3]))
        assert report.nse is None
        assert report.r_squared is None
        assert report.rmse is not None

    def test_csv_serialization_order_and_markers(self):
        assert report_csv_header() == ["RMSE", "SI", "WI", "NSE", "KGE", "R2", "RE"]
        report = metric_report(pair([2, 2, 2], [1, 2, 3]))
        row = report_csv_row(report)
        assert len(row) == len(METRIC_COLUMNS)
        assert row[3] == "undefined"  # NSE
        assert row[0] == repr(report.rmse)

    def test_json_serialization(self):
        payload = report_json_dict(metric_report(pair([1, 2, 3], [1, 2, 3])))
        assert list(payload)[:7] == list(METRIC_COLUMNS)
        assert payload["RMSE"] == 0.0
        assert payload["RE_excluded"] == 0


def _random_pair(rng, n):
    observed = rng.uniform(0.5, 10.0, n)
    predicted = observed + rng.normal(0.0, 1.0, n)
    return pair(observed, predicted)


class TestOracleAgreement:
    def test_against_naive_loops(self):
        rng = np.random.default_rng(1234)
        for _ in range(60):
            n = int(rng.integers(5, 200))
            p = _random_pair(rng, n)
            o_list, p_list = p.observed.tolist(), p.predicted.tolist()
            assert rmse(p) == pytest.approx(oracles.naive_rmse(o_list, p_list), rel=1e-12)
            assert r_squared(p) == pytest.approx(oracles.naive_r_squared(o_list, p_list), rel=1e-10)
            assert willmott_index(p) == pytest.approx(oracles.naive_willmott(o_list, p_list), rel=1e-10)
            assert scatter_index(p) == pytest.approx(oracles.naive_scatter_index(o_list, p_list), rel=1e-12)
            assert nse(p) == pytest.approx(oracles.naive_nse(o_list, p_list), rel=1e-10)
            assert kge(p) == pytest.approx(oracles.naive_kge(o_list, p_list), rel=1e-10)
            got_re = relative_error(p)
            assert got_re.mean_abs == pytest.approx(
                oracles.naive_mean_abs_relative_error(o_list, p_list), rel=1e-10)


series = st.lists(st.floats(min_value=-50.0, max_value=50.0,
                            allow_nan=False, allow_infinity=False),
                  min_size=3, max_size=40)


def _usable(observed, predicted):
    o = np.asarray(observed)
    p = np.asarray(predicted)
    return (o.std() > 1e-6 and p.std() > 1e-6
            and abs(o.mean()) > 1e-6 and abs(p.mean()) > 1e-6)


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_cross_identities(data):
    observed = data.draw(series)
    predicted = data.draw(st.lists(st.floats(min_value=-50.0, max_value=50.0,
                                             allow_nan=False, allow_infinity=False),
                                   min_size=len(observed), max_size=len(observed)))
    if not _usable(observed, predicted):
        return
    p = pair(observed, predicted)
    # SI * mean(O) recovers the RMSE
    assert scatter_index(p) * p.observed.mean() == pytest.approx(rmse(p), abs=1e-12, rel=1e-12)
    # NSE restated through the RMSE
    denom = float(np.sum((p.observed - p.observed.mean()) ** 2))
    assert nse(p) == pytest.approx(1.0 - rmse(p) ** 2 * p.n / denom, abs=1e-12, rel=1e-12)
    # R2 is the square of the KGE correlation component
    _, r, _, _ = kge(p)
    assert r_squared(p) == pytest.approx(r ** 2, abs=1e-12, rel=1e-12)


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_bounds_and_permutation_invariance(data):
    observed = data.draw(series)
    predicted = data.draw(st.lists(st.floats(min_value=-50.0, max_value=50.0,
                                             allow_nan=False, allow_infinity=False),
                                   min_size=len(observed), max_size=len(observed)))
    if not _usable(observed, predicted):
        return
    p = pair(observed, predicted)
    assert 0.0 <= willmott_index(p) <= 1.0
    assert nse(p) <= 1.0
    assert kge(p)[0] <= 1.0
    assert -1.0 <= kge(p)[1] <= 1.0

    order = np.random.default_rng(int(abs(sum(observed)) * 1000) % (2 ** 32)).permutation(p.n)
    shuffled = pair(p.observed[order], p.predicted[order])
    assert rmse(shuffled) == pytest.approx(rmse(p), rel=1e-12, abs=1e-12)
    assert nse(shuffled) == pytest.approx(nse(p), rel=1e-9, abs=1e-9)
    assert willmott_index(shuffled) == pytest.approx(willmott_index(p), rel=1e-9, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_affine_invariance(data):
    observed = data.draw(series)
    predicted = data.draw(st.lists(st.floats(min_value=-50.0, max_value=50.0,
                                             allow_nan=False, allow_infinity=False),
                                   min_size=len(observed), max_size=len(observed)))
    shift = data.draw(st.floats(min_value=-20.0, max_value=20.0,
                                allow_nan=False, allow_infinity=False))
    scale = data.draw(st.floats(min_value=0.1, max_value=5.0,
                                allow_nan=False, allow_infinity=False))
    if not _usable(observed, predicted):
        return
    p = pair(observed, predicted)
    shifted = pair(p.observed + shift, p.predicted + shift)
    assert rmse(shifted) == pytest.approx(rmse(p), rel=1e-9, abs=1e-9)
    mapped = pair(scale * p.observed + shift, scale * p.predicted + shift)
    assert nse(mapped) == pytest.approx(nse(p), rel=1e-7, abs=1e-7)
    assert r_squared(mapped) == pytest.approx(r_squared(p), rel=1e-7, abs=1e-7)
