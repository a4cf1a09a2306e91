import math

import numpy as np
import pytest

from factorplan.catalog import default_catalog
from factorplan.dataset import Dataset
from factorplan.errors import ValidationError
from factorplan.models import (
    AggregatedScorer,
    TrainParams,
    aggregate_probability,
    evaluate,
    load_scorer,
    save_scorer,
    scorer_from_json,
    scorer_to_json,
    train_scorer,
)
from support import flat_lr, neutral_nb, random_scorer

CAT = default_catalog()


def test_aggregate_is_exact_mean_of_components():
    # NB posterior pinned at 0.6 via priors; LR pinned at 0.8 via intercept
    scorer = AggregatedScorer(
        nb=neutral_nb(prior_pos=0.6),
        lr=flat_lr(intercept=math.log(0.8 / 0.2)),
    )
    p_nb, p_lr, p_agg = scorer.score_components([5] * 19)
    assert p_nb == pytest.approx(0.6, abs=1e-12)
    assert p_lr == pytest.approx(0.8, abs=1e-12)
    assert p_agg == pytest.approx(0.7, abs=1e-12)
    assert aggregate_probability(scorer, [5] * 19) == p_agg


def test_aggregate_idempotent_when_components_agree():
    scorer = AggregatedScorer(nb=neutral_nb(prior_pos=0.5), lr=flat_lr())
    assert aggregate_probability(scorer, [3] * 19) == pytest.approx(0.5, abs=1e-12)


def test_aggregate_exact_halving_property():
    rng = np.random.default_rng(5)
    scorer = random_scorer(rng)
    X = rng.integers(1, 10, size=(200, 19)).astype(float)
    agg = scorer.probability(X)
    halved = 0.5 * (scorer.nb_probability(X) + scorer.lr_probability(X))
    assert np.array_equal(agg, halved)


def test_all_probabilities_within_clamp():
    rng = np.random.default_rng(6)
    scorer = random_scorer(rng)
    X = rng.integers(1, 10, size=(500, 19)).astype(float)
    for p in (scorer.nb_probability(X), scorer.lr_probability(X), scorer.probability(X)):
        assert p.min() >= scorer.eps_p
        assert p.max() <= 1 - scorer.eps_p


def test_eps_p_validation():
    with pytest.raises(ValidationError):
        AggregatedScorer(nb=neutral_nb(), lr=flat_lr(), eps_p=0.7)


def test_feature_count_must_agree():
    with pytest.raises(ValidationError, match="feature count"):
        AggregatedScorer(nb=neutral_nb(d=5), lr=flat_lr(d=19))


def test_save_load_round_trip(tmp_path, scorer):
    path = tmp_path / "scorer.json"
    save_scorer(scorer, path, TrainParams(seed=11))
    loaded = load_scorer(path)
    assert np.array_equal(loaded.nb.means, scorer.nb.means)
    assert np.array_equal(loaded.nb.variances, scorer.nb.variances)
    assert np.array_equal(loaded.lr.coef, scorer.lr.coef)
    assert loaded.lr.intercept == scorer.lr.intercept
    assert loaded.feature_ids == scorer.feature_ids
    X = np.random.default_rng(0).integers(1, 10, size=(50, 19)).astype(float)
    assert np.array_equal(loaded.probability(X), scorer.probability(X))
    # re-serialization is byte-identical
    assert scorer_to_json(loaded, TrainParams(seed=11)) == path.read_text(encoding="utf-8")


def test_save_load_categorical(split_sets):
    train_set, _ = split_sets
    scorer = train_scorer(train_set, TrainParams(seed=3), nb_variant="categorical")
    loaded = scorer_from_json(scorer_to_json(scorer))
    X = np.random.default_rng(1).integers(1, 10, size=(20, 19)).astype(float)
    assert np.array_equal(loaded.probability(X), scorer.probability(X))


def test_load_rejects_unknown_version():
    with pytest.raises(ValidationError, match="format version"):
        scorer_from_json('{"format_version": 99}')


def make_test_set(n_pos=18, n_neg=7):
    rng = np.random.default_rng(2)
    X = rng.integers(1, 10, size=(n_pos + n_neg, CAT.d))
    y = np.array([1] * n_pos + [0] * n_neg)
    return Dataset(catalog=CAT, X=X, y=y, provenance="loaded")


def test_evaluate_all_positive_predictor():
    # every component predicts positive: accuracy = majority share = 18/25
    scorer = AggregatedScorer(nb=neutral_nb(prior_pos=0.72), lr=flat_lr(intercept=1.0))
    metrics = evaluate(scorer, make_test_set())
    for m in metrics.values():
        assert m.accuracy == pytest.approx(0.72, abs=1e-12)
        assert m.majority_baseline == pytest.approx(0.72, abs=1e-12)
        assert (m.tp, m.fp, m.tn, m.fn) == (18, 7, 0, 0)
        assert m.n == 25


def test_evaluate_perfect_scorer():
    X = np.full((24, CAT.d), 5)
    X[:12, 0] = 9
    X[12:, 0] = 1
    y = np.array([1] * 12 + [0] * 12)
    ds = Dataset(catalog=CAT, X=X, y=y, provenance="loaded")
    coef = np.zeros(CAT.d)
    coef[0] = 5.0
    scorer = AggregatedScorer(
        nb=neutral_nb(), lr=flat_lr(intercept=-25.0, coef=coef)
    )
    metrics = evaluate(scorer, ds)
    assert metrics["lr"].accuracy == 1.0
    assert metrics["agg"].accuracy == 1.0


def test_evaluate_counts_sum(scorer, split_sets):
    _, test_set = split_sets
    metrics = evaluate(scorer, test_set)
    for m in metrics.values():
        assert m.n == test_set.n
        assert 0.0 <= m.accuracy <= 1.0


def test_evaluate_rejects_empty():
    ds = Dataset(
        catalog=CAT,
        X=np.empty((0, CAT.d), dtype=int),
        y=np.empty(0, dtype=int),
        provenance="loaded",
    )
    scorer = AggregatedScorer(nb=neutral_nb(), lr=flat_lr())
    with pytest.raises(ValidationError):
        evaluate(scorer, ds)
