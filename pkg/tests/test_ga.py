import numpy as np
import pytest

from factorplan.catalog import default_catalog
from factorplan.errors import ScopeError, ValidationError
from factorplan.models import AggregatedScorer
from factorplan.optimize import (
    GAParams,
    Scope,
    baseline_allocation,
    exhaustive_optimum,
    fitness,
    global_scope,
    optimize_global,
    optimize_per_category,
    run_ga,
)
from support import ConstantScorer, ShiftedScorer, flat_lr, neutral_nb, random_scorer

CAT = default_catalog()


def small_scope(rng, size):
    ids = list(CAT.factor_ids)
    rng.shuffle(ids)
    chosen = sorted(ids[:size], key=CAT.index_of)
    context = {fid: int(rng.integers(1, 10)) for fid in ids[size:]}
    return Scope(catalog=CAT, optimized=tuple(chosen), context=context)


def test_exhaustive_single_factor_cost_pressure():
    # negative coefficient on the lone scope factor: probability and cost
    # both favour the minimum level
    coef = np.zeros(CAT.d)
    coef[0] = -0.5
    scorer = AggregatedScorer(nb=neutral_nb(), lr=flat_lr(coef=coef))
    scope = Scope(
        catalog=CAT,
        optimized=("prog_assist",),
        context={fid: 5 for fid in CAT.factor_ids if fid != "prog_assist"},
    )
    best, report = exhaustive_optimum(scorer, scope)
    assert best == {"prog_assist": 1}
    assert report.cost == 1


def test_exhaustive_matches_hand_enumeration_two_factors():
    rng = np.random.default_rng(3)
    scorer = random_scorer(rng)
    scope = small_scope(rng, 2)
    best, report = exhaustive_optimum(scorer, scope)

    # independent 81-case sweep through the public fitness operation
    table = {}
    for a in range(1, 10):
        for b in range(1, 10):
            allocation = dict(zip(scope.optimized, (a, b)))
            table[(a, b)] = fitness(scorer, allocation, scope).fitness
    expected_key = max(sorted(table), key=lambda k: table[k])
    assert tuple(best.values()) == expected_key
    assert report.fitness == pytest.approx(table[expected_key], abs=1e-12)


def test_exhaustive_scope_guard():
    rng = np.random.default_rng(4)
    scorer = random_scorer(rng)
    with pytest.raises(ScopeError, match="too large"):
        exhaustive_optimum(scorer, small_scope(rng, 7))


def test_exhaustive_tie_break_lexicographic():
    scorer = ConstantScorer(0.5)  # every same-cost allocation ties
    rng = np.random.default_rng(5)
    scope = small_scope(rng, 3)
    best, _ = exhaustive_optimum(scorer, scope)
    assert list(best.values()) == [1, 1, 1]


def test_shifting_probability_preserves_argmax():
    rng = np.random.default_rng(6)
    base = random_scorer(rng)
    scope = small_scope(rng, 3)
    best_base, _ = exhaustive_optimum(base, scope)
    best_shifted, _ = exhaustive_optimum(ShiftedScorer(base, 0.17), scope)
    assert best_base == best_shifted


def test_ga_deterministic_under_seed():
    rng = np.random.default_rng(7)
    scorer = random_scorer(rng)
    scope = small_scope(rng, 4)
    params = GAParams(seed=123)
    a = run_ga(scorer, scope, params)
    b = run_ga(scorer, scope, params)
    assert a.best == b.best
    assert a.trajectory == b.trajectory
    assert a.best_report == b.best_report


def test_ga_trajectory_monotone_with_elitism():
    rng = np.random.default_rng(8)
    for seed in range(5):
        scorer = random_scorer(rng)
        scope = small_scope(rng, 5)
        result = run_ga(scorer, scope, GAParams(seed=seed))
        assert len(result.trajectory) == 40
        assert all(
            b >= a for a, b in zip(result.trajectory, result.trajectory[1:])
        )


def test_ga_trajectory_length_matches_generations():
    rng = np.random.default_rng(9)
    scorer = random_scorer(rng)
    scope = small_scope(rng, 2)
    result = run_ga(scorer, scope, GAParams(seed=0, generations=13))
    assert len(result.trajectory) == 13


def test_ga_reaches_exhaustive_optimum_smoke():
    rng = np.random.default_rng(10)
    hits = 0
    for case in range(3):
        scorer = random_scorer(rng)
        scope = small_scope(rng, case + 2)
        _, oracle = exhaustive_optimum(scorer, scope)
        for seed in range(10):
            result = run_ga(scorer, scope, GAParams(seed=seed))
            if abs(result.best_report.fitness - oracle.fitness) <= 1e-9:
                hits += 1
    assert hits >= 28  # 30 runs; full sweep lives in the acceptance suite


def test_ga_baseline_injection_guarantees_no_regression():
    rng = np.random.default_rng(11)
    scorer = random_scorer(rng)
    scope = small_scope(rng, 4)
    baseline = {fid: 9 for fid in scope.optimized}  # deliberately poor
    result = run_ga(scorer, scope, GAParams(seed=1, generations=1, population=4), baseline=baseline)
    assert result.baseline_report is not None
    assert result.best_report.fitness >= result.baseline_report.fitness
    assert result.delta_fitness >= 0.0


def test_ga_on_generation_callback():
    rng = np.random.default_rng(12)
    scorer = random_scorer(rng)
    scope = small_scope(rng, 2)
    seen = []
    result = run_ga(
        scorer, scope, GAParams(seed=2, generations=7),
        on_generation=lambda gen, best: seen.append((gen, best)),
    )
    assert [g for g, _ in seen] == list(range(7))
    assert [b for _, b in seen] == list(result.trajectory)


def test_ga_params_validation():
    with pytest.raises(ValidationError):
        GAParams(population=1)
    with pytest.raises(ValidationError):
        GAParams(generations=0)
    with pytest.raises(ValidationError):
        GAParams(crossover=1.5)
    with pytest.raises(ValidationError):
        GAParams(elites=100, population=100)
    assert GAParams().mutation_rate(4) == 0.25
    assert GAParams(mutation=0.1).mutation_rate(4) == 0.1


def test_constant_scorer_global_optimum_all_ones():
    result = run_ga(
        ConstantScorer(0.5), global_scope(CAT), GAParams(seed=3, generations=150)
    )
    assert all(level == 1 for level in result.best.values())
    assert result.best_report.fitness == pytest.approx(0.5, abs=1e-12)


def test_optimize_global_never_below_baseline(scorer, synth_dataset):
    for seed in range(3):
        result = optimize_global(scorer, synth_dataset, GAParams(seed=seed))
        assert result.best_report.fitness >= result.baseline_report.fitness
        assert result.baseline == baseline_allocation(synth_dataset)


def test_optimize_per_category_structure(scorer, synth_dataset):
    rows, results = optimize_per_category(scorer, synth_dataset, GAParams(seed=5))
    assert len(rows) == 8
    assert sum(r.num_factors for r in rows) == 19
    deltas = [r.delta_fitness for r in rows]
    assert deltas == sorted(deltas, reverse=True)
    for row in rows:
        assert row.delta_fitness >= 0.0
        assert row.ga_fitness == pytest.approx(
            row.ga_p_agg - row.ga_norm_cost, abs=1e-9
        )
    base = baseline_allocation(synth_dataset)
    for category in CAT.categories:
        result = results[category.id]
        members = {f.id for f in CAT.category_factors(category.id)}
        assert set(result.best) == members
        assert result.baseline == {fid: base[fid] for fid in result.best}


def test_optimize_per_category_deterministic(scorer, synth_dataset):
    a_rows, _ = optimize_per_category(scorer, synth_dataset, GAParams(seed=5))
    b_rows, _ = optimize_per_category(scorer, synth_dataset, GAParams(seed=5))
    assert a_rows == b_rows
