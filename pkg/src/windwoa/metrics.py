"""Agreement metrics between observed and predicted series.

All statistics use the population (divide-by-n) convention. A metric
whose precondition fails raises UndefinedMetricError instead of
returning a sentinel number; metric_report converts that into an
explicit None so reports can print a marker rather than a silent zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

METRIC_COLUMNS = ("RMSE", "SI", "WI", "NSE", "KGE", "R2", "RE")
UNDEFINED = "undefined"


class UndefinedMetricError(ValueError):
    def __init__(self, metric: str, reason: str):
        super().__init__(f"{metric} undefined: {reason}")
        self.metric = metric
        self.reason = reason


@dataclass(frozen=True)
class PredictionPair:
    """Aligned observed/predicted vectors (same units, same length)."""

    observed: np.ndarray
    predicted: np.ndarray

    def __post_init__(self):
        observed = np.asarray(self.observed, dtype=float)
        predicted = np.asarray(self.predicted, dtype=float)
        object.__setattr__(self, "observed", observed)
        object.__setattr__(self, "predicted", predicted)
        if observed.ndim != 1 or predicted.ndim != 1:
            raise ValueError("observed and predicted must be vectors")
        if observed.shape != predicted.shape:
            raise ValueError("observed and predicted must have equal length")
        if observed.size == 0:
            raise ValueError("need at least one sample")
        if not (np.all(np.isfinite(observed)) and np.all(np.isfinite(predicted))):
            raise ValueError("observed and predicted must be finite")

    @property
    def n(self) -> int:
        return self.observed.size


def rmse(pair: PredictionPair) -> float:
    """Root mean square error."""
    diff = pair.predicted - pair.observed
    return float(np.sqrt(np.mean(diff * diff)))


def _pearson(pair: PredictionPair) -> float:
    dev_o = pair.observed - pair.observed.mean()
    dev_p = pair.predicted - pair.predicted.mean()
    ss_o = float(np.sum(dev_o * dev_o))
    ss_p = float(np.sum(dev_p * dev_p))
    if ss_o == 0.0:
        raise UndefinedMetricError("r", "observed series has zero variance")
    if ss_p == 0.0:
        raise UndefinedMetricError("r", "predicted series has zero variance")
    value = float(np.sum(dev_o * dev_p)) / math.sqrt(ss_o * ss_p)
    # rounding can push a perfect (anti)correlation an ulp past +-1
    return min(1.0, max(-1.0, value))


def r_squared(pair: PredictionPair) -> float:
    """Squared Pearson correlation, in [0, 1]."""
    return _pearson(pair) ** 2


def willmott_index(pair: PredictionPair) -> float:
    """Willmott agreement index, in [0, 1]; 1 is perfect."""
    mean_o = pair.observed.mean()
    denom = float(np.sum((np.abs(pair.predicted - mean_o) + np.abs(pair.observed - mean_o)) ** 2))
    if denom == 0.0:
        raise UndefinedMetricError("wi", "both series are constant at the observed mean")
    num = float(np.sum((pair.observed - pair.predicted) ** 2))
    return 1.0 - num / denom


def scatter_index(pair: PredictionPair) -> float:
    """RMSE normalized by the observed mean."""
    mean_o = float(pair.observed.mean())
    if mean_o == 0.0:
        raise UndefinedMetricError("si", "observed mean is zero")
    return rmse(pair) / mean_o


def nse(pair: PredictionPair) -> float:
    """Nash-Sutcliffe efficiency: 1 is perfect, 0 matches the mean predictor."""
    denom = float(np.sum((pair.observed - pair.observed.mean()) ** 2))
    if denom == 0.0:
        raise UndefinedMetricError("nse", "observed series has zero variance")
    num = float(np.sum((pair.predicted - pair.observed) ** 2))
    return 1.0 - num / denom


def kge(pair: PredictionPair) -> tuple[float, float, float, float]:
    """Kling-Gupta efficiency with its components: (kge, r, beta, gamma).

    beta is the mean ratio, gamma the ratio of coefficients of
    variation (population standard deviation over mean).
    """
    mean_o = float(np.mean(pair.observed))
    mean_p = float(np.mean(pair.predicted))
    if mean_o == 0.0:
        raise UndefinedMetricError("kge.beta", "observed mean is zero")
    if mean_p == 0.0:
        raise UndefinedMetricError("kge.gamma", "predicted mean is zero")
    r = _pearson(pair)
    beta = mean_p / mean_o
    cv_o = float(np.std(pair.observed)) / mean_o
    cv_p = float(np.std(pair.predicted)) / mean_p
    gamma = cv_p / cv_o
    value = 1.0 - math.sqrt((r - 1.0) ** 2 + (beta - 1.0) ** 2 + (gamma - 1.0) ** 2)
    return value, r, beta, gamma


@dataclass(frozen=True)
class RelativeError:
    per_sample: np.ndarray  # percent; NaN where the observation is zero
    mean_abs: float
    n_excluded: int


def relative_error(pair: PredictionPair) -> RelativeError:
    """Signed percent error per sample and the mean-absolute summary.

    Samples with a zero observation have no defined relative error;
    they are NaN in per_sample, excluded from the summary, and counted.
    """
    defined = pair.observed != 0.0
    n_excluded = int(np.sum(~defined))
    if n_excluded == pair.n:
        raise UndefinedMetricError("re", "every observation is zero")
    per_sample = np.full(pair.n, np.nan)
    per_sample[defined] = 100.0 * (pair.predicted[defined] - pair.observed[defined]) / pair.observed[defined]
    mean_abs = float(np.mean(np.abs(per_sample[defined])))
    return RelativeError(per_sample, mean_abs, n_excluded)


@dataclass(frozen=True)
class MetricReport:
    """One row of the comparison table; None marks an undefined metric."""

    rmse: Optional[float]
    si: Optional[float]
    wi: Optional[float]
    nse: Optional[float]
    kge: Optional[float]
    r_squared: Optional[float]
    mean_abs_re: Optional[float]
    kge_r: Optional[float] = None
    kge_beta: Optional[float] = None
    kge_gamma: Optional[float] = None
    re_excluded: int = 0

    def column_values(self) -> tuple:
        """Values in METRIC_COLUMNS order."""
        return (self.rmse, self.si, self.wi, self.nse, self.kge,
                self.r_squared, self.mean_abs_re)


def metric_report(pair: PredictionPair) -> MetricReport:
    """Compute every metric; undefined ones come back as None."""
    def guarded(fn):
        try:
            return fn(pair)
        except UndefinedMetricError:
            return None

    kge_parts = guarded(kge)
    re_parts = guarded(relative_error)
    return MetricReport(
        rmse=guarded(rmse),
        si=guarded(scatter_index),
        wi=guarded(willmott_index),
        nse=guarded(nse),
        kge=kge_parts[0] if kge_parts is not None else None,
        r_squared=guarded(r_squared),
        mean_abs_re=re_parts.mean_abs if re_parts is not None else None,
        kge_r=kge_parts[1] if kge_parts is not None else None,
        kge_beta=kge_parts[2] if kge_parts is not None else None,
        kge_gamma=kge_parts[3] if kge_parts is not None else None,
        re_excluded=re_parts.n_excluded if re_parts is not None else 0,
    )


def report_csv_header() -> list[str]:
    return list(METRIC_COLUMNS)


def report_csv_row(report: MetricReport) -> list[str]:
    """Cells in METRIC_COLUMNS order; undefined metrics print a marker."""
    return [UNDEFINED if value is None else repr(value) for value in report.column_values()]


def report_json_dict(report: MetricReport) -> dict:
    """JSON-ready mapping, main columns first, KGE components appended."""
    return {
        "RMSE": report.rmse,
        "SI": report.si,
        "WI": report.wi,
        "NSE": report.nse,
        "KGE": report.kge,
        "R2": report.r_squared,
        "RE": report.mean_abs_re,
        "KGE_r": report.kge_r,
        "KGE_beta": report.kge_beta,
        "KGE_gamma": report.kge_gamma,
        "RE_excluded": report.re_excluded,
    }
