import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from factorplan.catalog import default_catalog
from factorplan.dataset import (
    DEFAULT_FACTOR_TARGETS,
    Dataset,
    SynthesisSpec,
    default_synthesis_spec,
    descriptive_stats,
    stratified_split,
    synthesize_dataset,
)
from factorplan.errors import SynthesisError, ValidationError

CAT = default_catalog()


def dataset_from_column(values, extra_level=5):
    """Dataset whose first column is `values`, all other columns constant."""
    n = len(values)
    X = np.full((n, CAT.d), extra_level, dtype=np.int64)
    X[:, 0] = values
    y = np.array([i % 2 for i in range(n)])
    return Dataset(catalog=CAT, X=X, y=y, provenance="loaded")


def test_dataset_invariants():
    ds = dataset_from_column([1, 9, 5])
    assert ds.X.min() >= 1 and ds.X.max() <= 9
    assert set(np.unique(ds.y)) <= {0, 1}
    with pytest.raises(ValueError):
        ds.X[0, 0] = 3  # frozen after construction


def test_dataset_rejects_bad_levels():
    X = np.full((2, CAT.d), 5)
    X[0, 0] = 0
    with pytest.raises(ValidationError):
        Dataset(catalog=CAT, X=X, y=np.array([0, 1]), provenance="loaded")


def test_descriptives_two_point_column():
    rows = descriptive_stats(dataset_from_column([1, 9]))
    # mean (1+9)/2 = 5; sample sd = sqrt(((1-5)^2 + (9-5)^2) / 1) = sqrt(32)
    assert rows[0].mean == 5.0
    assert rows[0].sd == pytest.approx(math.sqrt(32.0), abs=1e-12)
    pop = descriptive_stats(dataset_from_column([1, 9]), sample_sd=False)
    assert pop[0].sd == pytest.approx(4.0, abs=1e-12)


def test_descriptives_constant_column():
    rows = descriptive_stats(dataset_from_column([5, 5, 5]))
    assert rows[0].mean == 5.0 and rows[0].sd == 0.0
    assert all(r.n == 3 for r in rows)


def test_descriptives_order_and_bounds():
    rows = descriptive_stats(dataset_from_column([2, 4, 6, 8]))
    assert [r.factor_id for r in rows] == list(CAT.factor_ids)
    assert all(1 <= r.mean <= 9 and r.sd >= 0 for r in rows)


def test_descriptives_need_two_rows():
    with pytest.raises(ValidationError):
        descriptive_stats(dataset_from_column([5]))


def test_synthesis_deterministic():
    spec = default_synthesis_spec(seed=77)
    a = synthesize_dataset(CAT, spec)
    b = synthesize_dataset(CAT, spec)
    assert np.array_equal(a.X, b.X) and np.array_equal(a.y, b.y)
    assert a.provenance == "synthetic"


def test_synthesis_class_counts_exact():
    ds = synthesize_dataset(CAT, default_synthesis_spec(seed=5, n_pos=90, n_neg=36))
    assert int(ds.y.sum()) == 90
    assert ds.n == 126


def test_synthesis_constant_when_sd_zero():
    targets = {fid: (5.0, 0.0) for fid in CAT.factor_ids}
    ds = synthesize_dataset(CAT, SynthesisSpec(targets=targets, n_pos=3, n_neg=2, seed=1))
    assert (ds.X == 5).all()


def test_synthesis_infeasible_targets():
    bad_mean = dict(DEFAULT_FACTOR_TARGETS, prog_assist=(9.5, 1.0))
    with pytest.raises(SynthesisError, match="outside"):
        SynthesisSpec(targets=bad_mean, n_pos=5, n_neg=5, seed=0)
    pinned = dict(DEFAULT_FACTOR_TARGETS, prog_assist=(9.0, 1.0))
    with pytest.raises(SynthesisError, match="pinned"):
        SynthesisSpec(targets=pinned, n_pos=5, n_neg=5, seed=0)


def test_synthesis_missing_target():
    targets = dict(DEFAULT_FACTOR_TARGETS)
    del targets["ethics"]
    with pytest.raises(SynthesisError, match="missing"):
        synthesize_dataset(CAT, SynthesisSpec(targets=targets, n_pos=5, n_neg=5, seed=0))


def test_synthesis_hits_targets_at_large_n():
    ds = synthesize_dataset(CAT, default_synthesis_spec(seed=3, n_pos=3571, n_neg=1429))
    means = ds.X.mean(axis=0)
    for j, fid in enumerate(CAT.factor_ids):
        assert abs(means[j] - DEFAULT_FACTOR_TARGETS[fid][0]) < 0.05, fid


def test_split_reference_counts():
    ds = synthesize_dataset(CAT, default_synthesis_spec(seed=9))
    train, test = stratified_split(ds, 0.8, seed=4)
    # floor(90*.8)=72, floor(36*.8)=28, round(126*.8)=101 -> extra row to the
    # class with remainder 0.8 (the negatives)
    assert train.class_counts == (29, 72)
    assert test.class_counts == (7, 18)


def test_split_symmetric_counts():
    X = np.full((20, CAT.d), 5)
    X[:, 1] = np.arange(20) % 9 + 1
    y = np.array([0] * 10 + [1] * 10)
    ds = Dataset(catalog=CAT, X=X, y=y, provenance="loaded")
    train, test = stratified_split(ds, 0.5, seed=0)
    assert train.class_counts == (5, 5) and test.class_counts == (5, 5)


def test_split_deterministic_and_partition():
    ds = synthesize_dataset(CAT, default_synthesis_spec(seed=10))
    a_train, a_test = stratified_split(ds, 0.8, seed=21)
    b_train, b_test = stratified_split(ds, 0.8, seed=21)
    assert np.array_equal(a_train.X, b_train.X)
    assert np.array_equal(a_test.y, b_test.y)
    # union is the original multiset of rows
    combined = np.vstack([np.column_stack([a_train.X, a_train.y]),
                          np.column_stack([a_test.X, a_test.y])])
    original = np.column_stack([ds.X, ds.y])
    order = lambda m: m[np.lexsort(m.T[::-1])]
    assert np.array_equal(order(combined), order(original))


def test_split_different_seed_differs():
    ds = synthesize_dataset(CAT, default_synthesis_spec(seed=10))
    a_train, _ = stratified_split(ds, 0.8, seed=1)
    b_train, _ = stratified_split(ds, 0.8, seed=2)
    assert not np.array_equal(a_train.X, b_train.X)


def test_split_rejects_tiny_class():
    X = np.full((5, CAT.d), 5)
    X[:, 2] = [1, 2, 3, 4, 5]
    ds = Dataset(catalog=CAT, X=X, y=np.array([1, 1, 1, 1, 0]), provenance="loaded")
    with pytest.raises(ValidationError, match="at least 2"):
        stratified_split(ds, 0.8, seed=0)


def test_split_rejects_bad_ratio():
    ds = synthesize_dataset(CAT, default_synthesis_spec(seed=10))
    with pytest.raises(ValidationError):
        stratified_split(ds, 1.0, seed=0)


@given(
    n_pos=st.integers(min_value=4, max_value=60),
    n_neg=st.integers(min_value=4, max_value=60),
    ratio=st.floats(min_value=0.15, max_value=0.85),
    seed=st.integers(min_value=0, max_value=999),
)
def test_split_preserves_class_ratio(n_pos, n_neg, ratio, seed):
    ds = synthesize_dataset(
        CAT, default_synthesis_spec(seed=seed % 7, n_pos=n_pos, n_neg=n_neg)
    )
    train, test = stratified_split(ds, ratio, seed=seed)
    neg_train, pos_train = train.class_counts
    assert abs(pos_train - n_pos * ratio) < 1.0 + 1e-9
    assert abs(neg_train - n_neg * ratio) < 1.0 + 1e-9
    assert train.n + test.n == ds.n
