"""Discrimination, calibration and accuracy of carrier predictions."""

import logging
from typing import Callable, Dict, Iterable, List, NamedTuple, Optional, Tuple

import numpy as np
from scipy.stats import rankdata

from panelmendel.engine.errors import InputError
from panelmendel.engine.model import DiagnosticLog

logger = logging.getLogger(__name__)

Metric = Callable[[np.ndarray, np.ndarray], Optional[float]]


class LabeledPrediction(NamedTuple):
    family_id: str
    label: str
    predicted: float
    observed: bool


class MetricValue(NamedTuple):
    point: Optional[float]
    ci_low: Optional[float]
    ci_high: Optional[float]
    skipped: int = 0


class LabelMetrics(NamedTuple):
    label: str
    n: int
    n_cases: int
    auc: MetricValue
    e_over_o: MetricValue
    mse: MetricValue


class CohortMetrics(NamedTuple):
    labels: Dict[str, LabelMetrics]
    replicates: int
    diagnostics: List[str]


def auc(predicted: np.ndarray, observed: np.ndarray) -> Optional[float]:
    """Mann-Whitney statistic with midranks; None without both cases and non-cases."""
    observed = np.asarray(observed, dtype=bool)
    cases = int(observed.sum())
    controls = observed.size - cases
    if cases == 0 or controls == 0:
        return None
    ranks = rankdata(predicted)
    statistic = ranks[observed].sum() - cases * (cases + 1) / 2.0
    return float(statistic / (cases * controls))


def expected_over_observed(predicted: np.ndarray, observed: np.ndarray) -> Optional[float]:
    events = float(np.asarray(observed, dtype=float).sum())
    if events == 0:
        return None
    return float(np.sum(predicted) / events)


def mse(predicted: np.ndarray, observed: np.ndarray) -> Optional[float]:
    if len(predicted) == 0:
        return None
    return float(np.mean((np.asarray(predicted, dtype=float) - np.asarray(observed, dtype=float)) ** 2))


METRICS: Dict[str, Metric] = {"auc": auc, "eOverO": expected_over_observed, "mse": mse}


def bootstrap_ci(predicted: np.ndarray, observed: np.ndarray, metric: Metric, replicates: int = 1000,
                 seed: int = 0) -> Tuple[Optional[float], Optional[float], int]:
    """Percentile interval (2.5, 97.5) over resampled cohorts.

    Replicate r resamples with the r-th stream spawned from `seed`; replicates with
    an undefined metric are skipped and counted.
    """
    if replicates < 2:
        raise InputError("Bootstrap needs at least 2 replicates")
    predicted = np.asarray(predicted, dtype=float)
    observed = np.asarray(observed, dtype=bool)
    size = predicted.size
    values = []
    skipped = 0
    for stream in np.random.SeedSequence(seed).spawn(replicates):
        sample = np.random.default_rng(stream).integers(0, size, size)
        value = metric(predicted[sample], observed[sample]) if size else None
        if value is None:
            skipped += 1
        else:
            values.append(value)
    if not values:
        return None, None, skipped
    low, high = np.percentile(values, (2.5, 97.5))
    return float(low), float(high), skipped


def _metric_value(predicted: np.ndarray, observed: np.ndarray, metric: Metric, replicates: int,
                  seed: int) -> MetricValue:
    point = metric(predicted, observed)
    if point is None:
        return MetricValue(None, None, None)
    low, high, skipped = bootstrap_ci(predicted, observed, metric, replicates, seed)
    # raw percentiles, which may exclude the point estimate on small cohorts
    return MetricValue(point, low, high, skipped)


def score_label(label: str, predicted: Iterable[float], observed: Iterable[bool], replicates: int = 1000,
                seed: int = 0) -> LabelMetrics:
    predicted = np.asarray(list(predicted), dtype=float)
    observed = np.asarray(list(observed), dtype=bool)
    if not np.isfinite(predicted).all() or (predicted < 0).any() or (predicted > 1).any():
        raise InputError(f"Predictions for {label} must be finite probabilities")
    values = {name: _metric_value(predicted, observed, metric, replicates, seed) for name, metric in METRICS.items()}
    return LabelMetrics(label, int(predicted.size), int(observed.sum()), values["auc"], values["eOverO"],
                        values["mse"])


def score_cohort(predictions: Iterable[LabeledPrediction], replicates: int = 1000, seed: int = 0,
                 warnings: Optional[DiagnosticLog] = None) -> CohortMetrics:
    """Metrics per label; undefined metrics are reported as None with a warning."""
    warnings = warnings if warnings is not None else DiagnosticLog(logger)
    grouped: Dict[str, List[LabeledPrediction]] = {}
    for prediction in predictions:
        grouped.setdefault(prediction.label, []).append(prediction)
    labels = {}
    for label, rows in grouped.items():
        metrics = score_label(label, [row.predicted for row in rows], [row.observed for row in rows],
                              replicates, seed)
        for name, value in zip(("auc", "eOverO", "mse"), (metrics.auc, metrics.e_over_o, metrics.mse)):
            if value.point is None:
                warnings.warn(f"{name} undefined for {label} ({metrics.n_cases} cases of {metrics.n})")
            elif value.skipped:
                warnings.warn(f"{value.skipped} bootstrap replicates skipped for {name} of {label}")
        labels[label] = metrics
    return CohortMetrics(labels, replicates, warnings)
