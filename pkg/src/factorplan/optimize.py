"""Cost model, scalarized fitness, baseline construction, exhaustive search,
and the genetic algorithm over integer-level allocations.

An allocation assigns each in-scope factor an intensity level 1..9; the level
doubles as that factor's implementation cost. Fitness is the aggregated
success probability minus the cost normalized between the scope's all-ones
and all-nines extremes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .catalog import FactorCatalog
from .dataset import Dataset, LEVEL_MAX, LEVEL_MIN
from .errors import ScopeError, ValidationError

Allocation = dict[str, int]  # factor_id -> level, ordered by scope

EXHAUSTIVE_MAX_FACTORS = 6  # 9**6 = 531_441 evaluations


def _check_level(fid: str, level) -> int:
    lv = int(level)
    if lv != level or not (LEVEL_MIN <= lv <= LEVEL_MAX):
        raise ValidationError(f"{fid}: level {level!r} out of range 1..9")
    return lv


@dataclass(frozen=True)
class Scope:
    """The factor subset being optimized plus fixed levels for the rest.

    Together the optimized ids and the context keys cover the catalog exactly
    once, so any scope-local allocation expands to a full scoring vector.
    """

    catalog: FactorCatalog
    optimized: tuple[str, ...]
    context: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        all_ids = set(self.catalog.factor_ids)
        opt = set(self.optimized)
        ctx = set(self.context)
        if not self.optimized:
            raise ScopeError("scope optimizes no factors")
        if len(opt) != len(self.optimized):
            raise ScopeError("scope lists a factor twice")
        if opt & ctx:
            raise ScopeError(f"factors both optimized and fixed: {sorted(opt & ctx)}")
        if opt | ctx != all_ids:
            missing = sorted(all_ids - opt - ctx)
            extra = sorted((opt | ctx) - all_ids)
            raise ScopeError(
                f"scope must cover the catalog exactly (missing {missing}, unknown {extra})"
            )
        for fid, level in self.context.items():
            _check_level(fid, level)

    @property
    def d_s(self) -> int:
        return len(self.optimized)

    @property
    def cost_min(self) -> int:
        return self.d_s

    @property
    def cost_max(self) -> int:
        return 9 * self.d_s

    def _indices(self) -> np.ndarray:
        return np.array([self.catalog.index_of(fid) for fid in self.optimized])

    def base_vector(self) -> np.ndarray:
        """Full-length vector with context levels filled, scope slots at 1."""
        base = np.ones(self.catalog.d, dtype=np.int64)
        for fid, level in self.context.items():
            base[self.catalog.index_of(fid)] = level
        return base

    def expand(self, levels: np.ndarray) -> np.ndarray:
        """Expand an (n, d_s) batch of scope levels to full (n, d) vectors."""
        levels = np.atleast_2d(levels)
        full = np.tile(self.base_vector(), (levels.shape[0], 1))
        full[:, self._indices()] = levels
        return full


def global_scope(catalog: FactorCatalog) -> Scope:
    return Scope(catalog=catalog, optimized=catalog.factor_ids, context={})


def category_scope(
    catalog: FactorCatalog, category_id: str, context_levels: Allocation
) -> Scope:
    members = tuple(f.id for f in catalog.category_factors(category_id))
    context = {
        fid: context_levels[fid] for fid in catalog.factor_ids if fid not in members
    }
    return Scope(catalog=catalog, optimized=members, context=context)


@dataclass(frozen=True)
class FitnessReport:
    probability: float  # aggregated success probability on the full vector
    cost: int  # sum of levels over the scope's factors
    norm_cost: float
    fitness: float  # probability - norm_cost


def total_cost(allocation: Allocation) -> int:
    """Sum of levels; each factor's cost equals its assigned level."""
    return sum(_check_level(fid, level) for fid, level in allocation.items())


def normalized_cost(cost: float, scope: Scope) -> float:
    """Rescale a scope cost into [0, 1] between the all-ones and all-nines extremes."""
    if not (scope.cost_min <= cost <= scope.cost_max):
        raise ValidationError(
            f"cost {cost} outside [{scope.cost_min}, {scope.cost_max}] for {scope.d_s} factors"
        )
    return (cost - scope.cost_min) / (scope.cost_max - scope.cost_min)


def _allocation_vector(allocation: Allocation, scope: Scope) -> np.ndarray:
    if set(allocation) != set(scope.optimized):
        raise ScopeError(
            f"allocation keys {sorted(allocation)} do not match scope factors {sorted(scope.optimized)}"
        )
    return np.array([_check_level(fid, allocation[fid]) for fid in scope.optimized])


def fitness(scorer, allocation: Allocation, scope: Scope) -> FitnessReport:
    """Score one allocation: probability on the expanded full vector, cost
    and normalization over the scope factors only."""
    levels = _allocation_vector(allocation, scope)
    full = scope.expand(levels[None, :]).astype(np.float64)
    probability = float(scorer.probability(full)[0])
    cost = int(levels.sum())
    norm = normalized_cost(cost, scope)
    return FitnessReport(
        probability=probability, cost=cost, norm_cost=norm, fitness=probability - norm
    )


def baseline_allocation(dataset: Dataset, scope: Scope | None = None) -> Allocation:
    """Mean level per factor, rounded half-up and clipped into 1..9."""
    if dataset.n == 0:
        raise ValidationError("baseline needs a non-empty dataset")
    means = dataset.X.mean(axis=0)
    ids = scope.optimized if scope is not None else dataset.catalog.factor_ids
    out: Allocation = {}
    for fid in ids:
        level = int(math.floor(means[dataset.catalog.index_of(fid)] + 0.5))
        out[fid] = min(max(level, LEVEL_MIN), LEVEL_MAX)
    return out


def _batch_fitness(scorer, scope: Scope, pop: np.ndarray) -> np.ndarray:
    full = scope.expand(pop).astype(np.float64)
    p = scorer.probability(full)
    cost = pop.sum(axis=1)
    norm = (cost - scope.cost_min) / (scope.cost_max - scope.cost_min)
    return p - norm


def _ranking(fit: np.ndarray, pop: np.ndarray) -> np.ndarray:
    """Indices sorted best-first: fitness descending, levels lexicographic."""
    keys = tuple(pop[:, j] for j in range(pop.shape[1] - 1, -1, -1)) + (-fit,)
    return np.lexsort(keys)


def exhaustive_optimum(scorer, scope: Scope) -> tuple[Allocation, FitnessReport]:
    """Enumerate every allocation of the scope; ties go to the
    lexicographically smallest level vector."""
    if scope.d_s > EXHAUSTIVE_MAX_FACTORS:
        raise ScopeError(
            f"scope too large for exhaustive search: {scope.d_s} > {EXHAUSTIVE_MAX_FACTORS}"
        )
    axes = [np.arange(LEVEL_MIN, LEVEL_MAX + 1)] * scope.d_s
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, scope.d_s)
    best_fit = -np.inf
    best_row: np.ndarray | None = None
    chunk = 65536
    for start in range(0, grid.shape[0], chunk):
        rows = grid[start : start + chunk]
        fits = _batch_fitness(scorer, scope, rows)
        idx = int(fits.argmax())  # first max = lex smallest within the chunk
        if fits[idx] > best_fit:
            best_fit = float(fits[idx])
            best_row = rows[idx]
    allocation = {fid: int(best_row[j]) for j, fid in enumerate(scope.optimized)}
    return allocation, fitness(scorer, allocation, scope)


@dataclass(frozen=True)
class GAParams:
    population: int = 100
    generations: int = 40
    crossover: float = 0.7  # per-pair uniform crossover probability
    mutation: float | None = None  # per-gene resample probability; None -> 1/d_s
    tournament: int = 3
    elites: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.population < 2:
            raise ValidationError("population must be at least 2")
        if self.generations < 1:
            raise ValidationError("generations must be at least 1")
        for name in ("crossover", "mutation"):
            value = getattr(self, name)
            if value is not None and not (0.0 <= value <= 1.0):
                raise ValidationError(f"{name} probability must lie in [0, 1]")
        if self.tournament < 1:
            raise ValidationError("tournament size must be at least 1")
        if not (0 <= self.elites < self.population):
            raise ValidationError("elite count must be in [0, population)")

    def mutation_rate(self, d_s: int) -> float:
        return self.mutation if self.mutation is not None else 1.0 / d_s


@dataclass(frozen=True)
class GAResult:
    best: Allocation
    best_report: FitnessReport
    trajectory: tuple[float, ...]  # per-generation best fitness
    params: GAParams
    baseline: Allocation | None = None
    baseline_report: FitnessReport | None = None

    @property
    def delta_fitness(self) -> float | None:
        if self.baseline_report is None:
            return None
        return self.best_report.fitness - self.baseline_report.fitness


def run_ga(
    scorer,
    scope: Scope,
    params: GAParams,
    baseline: Allocation | None = None,
    on_generation=None,
) -> GAResult:
    """Evolve integer chromosomes over the scope for exactly
    ``params.generations`` generations.

    Uniform initialization over 1..9, tournament selection, per-pair uniform
    crossover, per-gene resampling mutation, top-k elitism. When a baseline
    allocation is supplied it is injected into the initial population, so the
    best fitness can never fall below the baseline's. Fully deterministic
    under ``params.seed``.
    """
    d_s = scope.d_s
    rng = np.random.default_rng(params.seed)
    mut_rate = params.mutation_rate(d_s)

    pop = rng.integers(LEVEL_MIN, LEVEL_MAX + 1, size=(params.population, d_s))
    baseline_report = None
    if baseline is not None:
        pop[0] = _allocation_vector(baseline, scope)
        baseline_report = fitness(scorer, baseline, scope)

    fit = _batch_fitness(scorer, scope, pop)
    order = _ranking(fit, pop)
    best_fit = float(fit[order[0]])
    best_row = pop[order[0]].copy()

    trajectory: list[float] = []
    n_children = params.population - params.elites
    n_pairs = (n_children + 1) // 2
    for gen in range(params.generations):
        elite = pop[order[: params.elites]]

        picks = rng.integers(0, params.population, size=(2 * n_pairs, params.tournament))
        winners = picks[np.arange(2 * n_pairs), fit[picks].argmax(axis=1)]
        pa = pop[winners[0::2]]
        pb = pop[winners[1::2]]

        swap = rng.random((n_pairs, d_s)) < 0.5
        swap &= (rng.random(n_pairs) < params.crossover)[:, None]
        children = np.empty((2 * n_pairs, d_s), dtype=pop.dtype)
        children[0::2] = np.where(swap, pb, pa)
        children[1::2] = np.where(swap, pa, pb)
        children = children[:n_children]

        mutate = rng.random((n_children, d_s)) < mut_rate
        resampled = rng.integers(LEVEL_MIN, LEVEL_MAX + 1, size=(n_children, d_s))
        children = np.where(mutate, resampled, children)

        pop = np.vstack([elite, children]) if params.elites else children
        fit = _batch_fitness(scorer, scope, pop)
        order = _ranking(fit, pop)
        gen_best = pop[order[0]]
        gen_fit = float(fit[order[0]])
        if gen_fit > best_fit or (
            gen_fit == best_fit and tuple(gen_best) < tuple(best_row)
        ):
            best_fit = gen_fit
            best_row = gen_best.copy()
        trajectory.append(gen_fit)
        if on_generation is not None:
            on_generation(gen, gen_fit)

    best = {fid: int(best_row[j]) for j, fid in enumerate(scope.optimized)}
    return GAResult(
        best=best,
        best_report=fitness(scorer, best, scope),
        trajectory=tuple(trajectory),
        params=params,
        baseline=dict(baseline) if baseline is not None else None,
        baseline_report=baseline_report,
    )


@dataclass(frozen=True)
class ThemeSummaryRow:
    category_id: str
    num_factors: int
    ga_p_agg: float
    ga_norm_cost: float
    ga_fitness: float
    delta_fitness: float

    def __post_init__(self):
        if abs(self.ga_fitness - (self.ga_p_agg - self.ga_norm_cost)) > 1e-9:
            raise ValidationError("fitness must equal probability minus normalized cost")


def optimize_global_from_baseline(
    scorer, catalog: FactorCatalog, baseline: Allocation, params: GAParams
) -> GAResult:
    return run_ga(scorer, global_scope(catalog), params, baseline=baseline)


def optimize_categories_from_baseline(
    scorer, catalog: FactorCatalog, baseline: Allocation, params: GAParams
) -> tuple[list[ThemeSummaryRow], dict[str, GAResult]]:
    """One scoped GA run per category, out-of-scope factors pinned at the
    supplied baseline levels. Rows come back sorted by delta fitness.

    Per-category runs use seeds ``params.seed + 1 + index`` (catalog order)
    so the whole sweep stays reproducible from one seed.
    """
    rows: list[ThemeSummaryRow] = []
    results: dict[str, GAResult] = {}
    for idx, category in enumerate(catalog.categories):
        scope = category_scope(catalog, category.id, baseline)
        cat_baseline = {fid: baseline[fid] for fid in scope.optimized}
        cat_params = replace(params, seed=params.seed + 1 + idx)
        result = run_ga(scorer, scope, cat_params, baseline=cat_baseline)
        results[category.id] = result
        rows.append(
            ThemeSummaryRow(
                category_id=category.id,
                num_factors=scope.d_s,
                ga_p_agg=result.best_report.probability,
                ga_norm_cost=result.best_report.norm_cost,
                ga_fitness=result.best_report.fitness,
                delta_fitness=result.delta_fitness,
            )
        )
    rows.sort(key=lambda r: -r.delta_fitness)
    return rows, results


def optimize_global(scorer, dataset: Dataset, params: GAParams) -> GAResult:
    """GA over all catalog factors against the mean-rounded baseline."""
    return optimize_global_from_baseline(
        scorer, dataset.catalog, baseline_allocation(dataset), params
    )


def optimize_per_category(
    scorer, dataset: Dataset, params: GAParams
) -> tuple[list[ThemeSummaryRow], dict[str, GAResult]]:
    """Category-wise GA sweep against the dataset's mean-rounded baseline."""
    return optimize_categories_from_baseline(
        scorer, dataset.catalog, baseline_allocation(dataset), params
    )
