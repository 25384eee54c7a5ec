import numpy as np
import pytest

from panelmendel.engine.errors import InputError
from panelmendel.engine.metrics import (LabeledPrediction, auc, bootstrap_ci, expected_over_observed, mse,
                                        score_cohort, score_label)
from panelmendel.engine.model import DiagnosticLog


def test_auc() -> None:
    assert auc(np.array([0.1, 0.4, 0.35, 0.8]), np.array([0, 0, 1, 1])) == pytest.approx(0.75)
    assert auc(np.array([0.5, 0.5]), np.array([1, 0])) == pytest.approx(0.5)
    assert auc(np.array([0.9, 0.1]), np.array([1, 0])) == 1.0
    assert auc(np.array([0.1, 0.2]), np.array([0, 0])) is None


def test_expected_over_observed() -> None:
    assert expected_over_observed(np.array([0.2, 0.3, 0.5]), np.array([1, 0, 0])) == pytest.approx(1.0)
    assert expected_over_observed(np.array([0.2, 0.3]), np.array([1, 1])) == pytest.approx(0.25)
    assert expected_over_observed(np.array([0.2]), np.array([0])) is None


def test_mse() -> None:
    assert mse(np.array([0.2, 0.8]), np.array([0, 1])) == pytest.approx(0.04)
    assert mse(np.array([]), np.array([])) is None


@pytest.mark.parametrize("transform", [np.sqrt, np.exp, lambda p: 3 * p ** 2 + 1, lambda p: np.log1p(p) / 2])
def test_auc_invariant_to_monotone_transforms(transform) -> None:
    rng = np.random.default_rng(4)
    predicted = rng.random(200)
    observed = rng.random(200) < predicted
    assert auc(transform(predicted), observed) == pytest.approx(auc(predicted, observed), abs=1e-12)


def test_auc_invariant_to_permutation() -> None:
    rng = np.random.default_rng(5)
    predicted = np.round(rng.random(150), 1)
    observed = rng.random(150) < predicted
    order = rng.permutation(150)
    assert auc(predicted[order], observed[order]) == pytest.approx(auc(predicted, observed), abs=1e-12)
    assert auc(1 - predicted, observed) == pytest.approx(1 - auc(predicted, observed), abs=1e-12)


@pytest.mark.parametrize("scale", [0.5, 2.0, 0.1])
def test_expected_over_observed_scales_with_predictions(scale) -> None:
    predicted = np.array([0.1, 0.3, 0.2, 0.4])
    observed = np.array([True, False, True, False])
    assert expected_over_observed(scale * predicted, observed) == \
        pytest.approx(scale * expected_over_observed(predicted, observed), rel=1e-12)


def test_percentile_interval_not_widened() -> None:
    """
    Reported bounds are the bootstrap percentiles as computed, even when they exclude the point
    """
    predicted = np.array([0.9, 0.1, 0.2, 0.3, 0.1, 0.8])
    observed = np.array([True, False, False, False, False, False])
    metrics = score_label("G1", predicted, observed, replicates=40, seed=2)
    low, high, skipped = bootstrap_ci(predicted, observed, expected_over_observed, replicates=40, seed=2)
    assert (metrics.e_over_o.ci_low, metrics.e_over_o.ci_high, metrics.e_over_o.skipped) == (low, high, skipped)


def test_bootstrap_matches_independent_resampling() -> None:
    """
    Replicate r resamples with the r-th spawned stream
    """
    rng = np.random.default_rng(0)
    predicted = rng.random(50)
    observed = rng.random(50) < predicted
    low, high, skipped = bootstrap_ci(predicted, observed, mse, replicates=200, seed=17)

    values = []
    for stream in np.random.SeedSequence(17).spawn(200):
        sample = np.random.default_rng(stream).integers(0, 50, 50)
        values.append(np.mean((predicted[sample] - observed[sample]) ** 2))
    assert skipped == 0
    assert low == pytest.approx(np.percentile(values, 2.5), rel=1e-12)
    assert high == pytest.approx(np.percentile(values, 97.5), rel=1e-12)


def test_bootstrap_constant_metric() -> None:
    low, high, skipped = bootstrap_ci(np.full(10, 0.3), np.zeros(10, dtype=bool), lambda p, o: 0.5, replicates=20)
    assert (low, high, skipped) == (0.5, 0.5, 0)


def test_bootstrap_reproducible() -> None:
    predicted, observed = np.linspace(0, 1, 30), np.arange(30) % 3 == 0
    first = bootstrap_ci(predicted, observed, auc, replicates=100, seed=5)
    assert bootstrap_ci(predicted, observed, auc, replicates=100, seed=5) == first
    assert bootstrap_ci(predicted, observed, auc, replicates=100, seed=6) != first


def test_bootstrap_skips_undefined() -> None:
    predicted = np.array([0.9, 0.1, 0.2, 0.3, 0.1])
    observed = np.array([True, False, False, False, False])
    low, high, skipped = bootstrap_ci(predicted, observed, auc, replicates=200, seed=1)
    assert 0 < skipped < 200
    assert low <= high


def test_bootstrap_needs_two_replicates() -> None:
    with pytest.raises(InputError):
        bootstrap_ci(np.ones(3), np.ones(3, dtype=bool), mse, replicates=1)


def test_score_label() -> None:
    metrics = score_label("BRCA1", [0.1, 0.4, 0.35, 0.8], [False, False, True, True], replicates=50)
    assert metrics.n == 4 and metrics.n_cases == 2
    assert metrics.auc.point == pytest.approx(0.75)
    assert metrics.auc.ci_low <= metrics.auc.ci_high
    assert metrics.e_over_o.point == pytest.approx(0.825)
    with pytest.raises(InputError):
        score_label("BRCA1", [1.5], [True])


def test_score_cohort() -> None:
    predictions = [LabeledPrediction(f"fam{i}", label, p, o)
                   for i, (p, o) in enumerate([(0.1, False), (0.7, True), (0.3, False)])
                   for label in ("G1", "G2")]
    predictions.append(LabeledPrediction("fam9", "G3", 0.2, False))
    warnings = DiagnosticLog()
    metrics = score_cohort(predictions, replicates=20, seed=3, warnings=warnings)
    assert set(metrics.labels) == {"G1", "G2", "G3"}
    assert metrics.labels["G1"] == metrics.labels["G2"]._replace(label="G1")
    assert metrics.labels["G3"].auc.point is None
    assert metrics.labels["G3"].e_over_o.point is None
    assert metrics.labels["G3"].mse.point == pytest.approx(0.04)
    assert any("auc undefined for G3" in message for message in warnings)
    assert metrics.replicates == 20
