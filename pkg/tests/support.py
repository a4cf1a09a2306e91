"""Scorer stubs and builders shared across test modules."""

import numpy as np

from factorplan.models import AggregatedScorer, LogisticModel, NaiveBayesModel


class ConstantScorer:
    """Fixed probability regardless of the allocation."""

    def __init__(self, value=0.5):
        self.value = value

    def probability(self, X):
        return np.full(np.atleast_2d(X).shape[0], self.value)


class ShiftedScorer:
    """Wraps a scorer and adds a constant to every probability."""

    def __init__(self, base, delta):
        self.base = base
        self.delta = delta

    def probability(self, X):
        return self.base.probability(X) + self.delta


def random_scorer(rng, d=19):
    """Random but valid NB + LR pair over d features."""
    p1 = rng.uniform(0.2, 0.8)
    nb = NaiveBayesModel(
        priors=np.array([1.0 - p1, p1]),
        means=rng.uniform(3.0, 7.0, size=(2, d)),
        variances=rng.uniform(0.5, 4.0, size=(2, d)),
        eps_var=1e-9,
    )
    lr = LogisticModel(
        intercept=float(rng.normal()),
        coef=rng.normal(0.0, 0.15, size=d),
        l2_strength=1.0,
        converged=True,
        iterations=0,
    )
    return AggregatedScorer(nb=nb, lr=lr)


def neutral_nb(d=19, prior_pos=0.5):
    """NB whose class conditionals are identical, so posterior == prior."""
    return NaiveBayesModel(
        priors=np.array([1.0 - prior_pos, prior_pos]),
        means=np.full((2, d), 5.0),
        variances=np.full((2, d), 2.0),
        eps_var=1e-9,
    )


def flat_lr(d=19, intercept=0.0, coef=None):
    return LogisticModel(
        intercept=intercept,
        coef=np.zeros(d) if coef is None else np.asarray(coef, dtype=float),
        l2_strength=1.0,
        converged=True,
        iterations=0,
    )
