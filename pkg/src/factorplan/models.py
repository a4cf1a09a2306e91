"""Probabilistic scorers: Gaussian/categorical Naive Bayes, L2 logistic
regression, and their aggregated probability estimate.

Both models consume raw 1..9 levels in catalog column order, unstandardized.
Every probability leaving this module is clamped into [eps_p, 1 - eps_p] so
downstream fitness arithmetic never sees exact 0 or 1.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .dataset import Dataset, LEVEL_MAX, LEVEL_MIN
from .errors import TrainingError, ValidationError

DEFAULT_EPS_P = 1e-6

FORMAT_VERSION = 1


def _stable_sigmoid(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _as_matrix(s, d: int) -> tuple[np.ndarray, bool]:
    """Coerce a single allocation or a batch into an (n, d) float matrix."""
    arr = np.asarray(s, dtype=np.float64)
    single = arr.ndim == 1
    if single:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] != d:
        raise ValidationError(
            f"allocation must have {d} levels, got shape {np.asarray(s).shape}"
        )
    return arr, single


def _check_levels(X: np.ndarray) -> None:
    if X.size and (X.min() < LEVEL_MIN or X.max() > LEVEL_MAX):
        raise ValidationError("allocation levels must lie in 1..9")


class _PosteriorFromJoint:
    """Shared posterior arithmetic for models exposing log_joint()."""

    def posterior_pair(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(P(Y=0|x), P(Y=1|x)) with no clamping; evaluated in log space."""
        joint = self.log_joint(X)
        diff = joint[:, 1] - joint[:, 0]
        return _stable_sigmoid(-diff), _stable_sigmoid(diff)

    def posterior(self, X: np.ndarray) -> np.ndarray:
        return self.posterior_pair(X)[1]


@dataclass(frozen=True)
class NaiveBayesModel(_PosteriorFromJoint):
    """Gaussian conditional model per feature per class, with class priors."""

    priors: np.ndarray  # (2,) P(Y=0), P(Y=1)
    means: np.ndarray  # (2, d)
    variances: np.ndarray  # (2, d), floored at eps_var
    eps_var: float

    def __post_init__(self):
        for name in ("priors", "means", "variances"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if self.priors.shape != (2,) or self.priors.min() <= 0:
            raise ValidationError("priors must be two positive numbers")
        if abs(float(self.priors.sum()) - 1.0) > 1e-9:
            raise ValidationError("priors must sum to 1")
        if self.eps_var <= 0 or (self.variances < self.eps_var - 1e-15).any():
            raise ValidationError("variances must respect the positive floor")

    @property
    def d(self) -> int:
        return self.means.shape[1]

    def log_joint(self, X: np.ndarray) -> np.ndarray:
        """log P(Y=y) + log P(x | Y=y) for both classes; shape (n, 2)."""
        out = np.empty((X.shape[0], 2))
        for c in (0, 1):
            var = self.variances[c]
            norm = -0.5 * float(np.log(2.0 * np.pi * var).sum())
            quad = 0.5 * ((X - self.means[c]) ** 2 / var).sum(axis=1)
            out[:, c] = math.log(float(self.priors[c])) + norm - quad
        return out


@dataclass(frozen=True)
class CategoricalNaiveBayesModel(_PosteriorFromJoint):
    """Level-frequency conditional model with Laplace smoothing (variant)."""

    priors: np.ndarray  # (2,)
    level_log_probs: np.ndarray  # (2, d, 9)
    alpha: float = 1.0

    def __post_init__(self):
        for name in ("priors", "level_log_probs"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def d(self) -> int:
        return self.level_log_probs.shape[1]

    def log_joint(self, X: np.ndarray) -> np.ndarray:
        levels = np.rint(X).astype(np.int64) - 1
        if levels.size and (levels.min() < 0 or levels.max() > 8):
            raise ValidationError("allocation levels must lie in 1..9")
        cols = np.arange(self.d)
        out = np.empty((X.shape[0], 2))
        for c in (0, 1):
            out[:, c] = math.log(float(self.priors[c])) + self.level_log_probs[c][
                cols, levels
            ].sum(axis=1)
        return out


def default_variance_floor(X: np.ndarray) -> float:
    """Positive floor scaled by the pooled spread of the whole matrix."""
    return 1e-9 * (float(np.asarray(X, dtype=np.float64).var()) + 1.0)


def fit_naive_bayes(
    train: Dataset, eps_var: float | None = None, variant: str = "gaussian"
):
    """Empirical priors plus per-class conditionals from the training rows."""
    y = train.y
    n_pos = int(y.sum())
    if n_pos == 0 or n_pos == train.n:
        raise TrainingError("training data contains a single outcome class")
    X = train.X.astype(np.float64)
    priors = np.array([(train.n - n_pos) / train.n, n_pos / train.n])

    if variant == "gaussian":
        floor = default_variance_floor(X) if eps_var is None else float(eps_var)
        if floor <= 0:
            raise ValidationError("variance floor must be positive")
        means = np.stack([X[y == c].mean(axis=0) for c in (0, 1)])
        variances = np.stack([X[y == c].var(axis=0) for c in (0, 1)])
        variances = np.maximum(variances, floor)
        return NaiveBayesModel(priors=priors, means=means, variances=variances, eps_var=floor)
    if variant == "categorical":
        alpha = 1.0
        counts = np.zeros((2, train.d, 9))
        for c in (0, 1):
            rows = train.X[y == c]
            for j in range(train.d):
                counts[c, j] = np.bincount(rows[:, j] - 1, minlength=9)
        totals = counts.sum(axis=2, keepdims=True)
        log_probs = np.log((counts + alpha) / (totals + 9 * alpha))
        return CategoricalNaiveBayesModel(priors=priors, level_log_probs=log_probs, alpha=alpha)
    raise ValidationError(f"unknown Naive Bayes variant {variant!r}")


def nb_posterior(model, s, eps_p: float = DEFAULT_EPS_P):
    """P(Y=1 | s) under the Naive Bayes model, clamped away from 0 and 1.

    Accepts one allocation (returns a float) or an (n, d) batch (returns an
    array).
    """
    X, single = _as_matrix(s, model.d)
    _check_levels(X)
    p = np.clip(model.posterior(X), eps_p, 1.0 - eps_p)
    return float(p[0]) if single else p


@dataclass(frozen=True)
class LogisticModel:
    intercept: float
    coef: np.ndarray  # (d,)
    l2_strength: float
    converged: bool
    iterations: int

    def __post_init__(self):
        arr = np.asarray(self.coef, dtype=np.float64)
        arr.flags.writeable = False
        object.__setattr__(self, "coef", arr)
        if not np.isfinite(arr).all() or not math.isfinite(self.intercept):
            raise ValidationError("logistic coefficients must be finite")

    @property
    def d(self) -> int:
        return self.coef.shape[0]

    def logits(self, X: np.ndarray) -> np.ndarray:
        return self.intercept + X @ self.coef

    def probability(self, X: np.ndarray) -> np.ndarray:
        return _stable_sigmoid(self.logits(X))


@dataclass(frozen=True)
class TrainParams:
    """Hyperparameters for the logistic fit (the survey source leaves these open)."""

    l2_strength: float = 1.0
    max_iterations: int = 10_000
    tolerance: float = 1e-8  # on the gradient norm
    schedule: str = "backtracking"  # or "constant:<rate>"
    seed: int = 0

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValidationError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValidationError("max iterations must be >= 1")
        if self.l2_strength < 0:
            raise ValidationError("l2 strength must be non-negative")


def _loss_and_grad(
    w: np.ndarray, X: np.ndarray, y: np.ndarray, l2: float
) -> tuple[float, np.ndarray]:
    """Mean NLL + (l2/2)*||coef||^2 (intercept unpenalized) and its gradient."""
    n = X.shape[0]
    # divergence shows up as a non-finite loss, checked by the caller
    with np.errstate(over="ignore", invalid="ignore"):
        z = w[0] + X @ w[1:]
        # log(1 + e^z) - y*z, evaluated stably
        nll = float((np.logaddexp(0.0, z) - y * z).mean())
        loss = nll + 0.5 * l2 * float(w[1:] @ w[1:])
        p = _stable_sigmoid(z)
        resid = (p - y) / n
        grad = np.empty_like(w)
        grad[0] = resid.sum()
        grad[1:] = X.T @ resid + l2 * w[1:]
    return loss, grad


def logistic_loss_and_gradient(
    model: LogisticModel, data: Dataset, l2_strength: float | None = None
) -> tuple[float, np.ndarray]:
    """Regularized mean NLL and its exact gradient in (intercept, coef)."""
    if data.n == 0:
        raise ValidationError("loss needs at least one row")
    l2 = model.l2_strength if l2_strength is None else l2_strength
    w = np.concatenate([[model.intercept], model.coef])
    if not np.isfinite(w).all():
        raise ValidationError("model parameters must be finite")
    return _loss_and_grad(w, data.X.astype(np.float64), data.y.astype(np.float64), l2)


def fit_logistic(train: Dataset, params: TrainParams = TrainParams()) -> LogisticModel:
    """First-order descent on the regularized mean NLL until the gradient
    norm drops below tolerance or the iteration budget runs out.

    Internally the features are mean-centered, which is an exact
    reparametrization (the penalty touches only the coefficients, which it
    leaves untouched) but conditions the problem well enough for the default
    tolerance to be reachable. Convergence is still judged on the gradient of
    the original raw-level objective.
    """
    if train.n == 0:
        raise ValidationError("cannot fit on an empty dataset")
    X = train.X.astype(np.float64)
    y = train.y.astype(np.float64)
    center = X.mean(axis=0)
    Xc = X - center

    constant_rate = None
    if params.schedule.startswith("constant:"):
        constant_rate = float(params.schedule.split(":", 1)[1])
        if constant_rate <= 0:
            raise ValidationError("constant learning rate must be positive")
    elif params.schedule != "backtracking":
        raise ValidationError(f"unknown schedule {params.schedule!r}")

    def raw_grad_norm(grad_centered: np.ndarray) -> float:
        # Chain rule back to the uncentered parametrization.
        g0 = grad_centered[0]
        g = grad_centered[1:] + center * g0
        return math.sqrt(float(g0 * g0 + g @ g))

    # Accelerated descent (Nesterov momentum with adaptive restart) plus Armijo
    # backtracking; plain descent under a fixed rate via "constant:<rate>".
    # Near the optimum the certifiable loss decrease sinks below float
    # resolution, so the line search hands over to fixed-step polishing that
    # tracks only the gradient norm.
    l2 = params.l2_strength
    w = np.zeros(train.d + 1)
    loss, grad = _loss_and_grad(w, Xc, y, l2)
    lookahead = w.copy()
    momentum = 1.0
    step = 1.0
    polish_rate = None
    min_gnorm = math.inf
    converged = False
    iterations = 0
    for iterations in range(1, params.max_iterations + 1):
        if not math.isfinite(loss):
            raise TrainingError("logistic training diverged: non-finite loss")
        gnorm = raw_grad_norm(grad)
        if gnorm < params.tolerance:
            converged = True
            iterations -= 1
            break
        if constant_rate is not None:
            w = w - constant_rate * grad
            loss, grad = _loss_and_grad(w, Xc, y, l2)
            continue
        if polish_rate is not None:
            if gnorm > 4.0 * min_gnorm:  # step too long for this curvature
                polish_rate *= 0.5
                min_gnorm = gnorm
            min_gnorm = min(min_gnorm, gnorm)
            w = w - polish_rate * grad
            loss, grad = _loss_and_grad(w, Xc, y, l2)
            continue
        la_loss, la_grad = _loss_and_grad(lookahead, Xc, y, l2)
        gnorm2 = float(la_grad @ la_grad)
        step = min(step * 2.0, 1e6)
        accepted = False
        while step >= 1e-20:
            if 1e-4 * step * gnorm2 <= 1e-14 * (1.0 + abs(la_loss)):
                break  # decrease no longer certifiable in float
            trial = lookahead - step * la_grad
            trial_loss, trial_grad = _loss_and_grad(trial, Xc, y, l2)
            if math.isfinite(trial_loss) and trial_loss <= la_loss - 1e-4 * step * gnorm2:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            polish_rate = step * 0.5
            min_gnorm = gnorm
            continue
        if trial_loss > loss:  # momentum overshot; restart from the best iterate
            lookahead = w.copy()
            momentum = 1.0
            continue
        next_momentum = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * momentum * momentum))
        lookahead = trial + ((momentum - 1.0) / next_momentum) * (trial - w)
        momentum = next_momentum
        w, loss, grad = trial, trial_loss, trial_grad
    return LogisticModel(
        intercept=float(w[0] - w[1:] @ center),
        coef=w[1:],
        l2_strength=params.l2_strength,
        converged=converged,
        iterations=iterations,
    )


def lr_probability(model: LogisticModel, s, eps_p: float = DEFAULT_EPS_P):
    """sigmoid(intercept + coef . s), clamped away from 0 and 1.

    Accepts one allocation (returns a float) or an (n, d) batch (returns an
    array).
    """
    X, single = _as_matrix(s, model.d)
    p = np.clip(model.probability(X), eps_p, 1.0 - eps_p)
    return float(p[0]) if single else p


@dataclass(frozen=True)
class AggregatedScorer:
    """Mean of the two model probabilities over any allocation."""

    nb: NaiveBayesModel | CategoricalNaiveBayesModel
    lr: LogisticModel
    eps_p: float = DEFAULT_EPS_P
    feature_ids: tuple[str, ...] = ()

    def __post_init__(self):
        if not (0.0 < self.eps_p < 0.5):
            raise ValidationError("probability clamp must lie in (0, 0.5)")
        if self.nb.d != self.lr.d:
            raise ValidationError("models disagree on feature count")
        if self.feature_ids and len(self.feature_ids) != self.lr.d:
            raise ValidationError("feature id list does not match feature count")

    @property
    def d(self) -> int:
        return self.lr.d

    def nb_probability(self, X: np.ndarray) -> np.ndarray:
        return np.clip(self.nb.posterior(X), self.eps_p, 1.0 - self.eps_p)

    def lr_probability(self, X: np.ndarray) -> np.ndarray:
        return np.clip(self.lr.probability(X), self.eps_p, 1.0 - self.eps_p)

    def probability(self, X: np.ndarray) -> np.ndarray:
        """Aggregated estimate for an (n, d) batch (no input validation)."""
        return 0.5 * (self.nb_probability(X) + self.lr_probability(X))

    def score_components(self, s) -> tuple[float, float, float]:
        """(p_nb, p_lr, p_agg) for one validated allocation."""
        X, _ = _as_matrix(s, self.d)
        _check_levels(X)
        p_nb = float(self.nb_probability(X)[0])
        p_lr = float(self.lr_probability(X)[0])
        return p_nb, p_lr, (p_nb + p_lr) / 2.0


def aggregate_probability(scorer: AggregatedScorer, s) -> float:
    """Arithmetic mean of the Naive Bayes and logistic estimates."""
    return scorer.score_components(s)[2]


def train_scorer(
    train: Dataset,
    params: TrainParams = TrainParams(),
    eps_var: float | None = None,
    nb_variant: str = "gaussian",
    eps_p: float = DEFAULT_EPS_P,
) -> AggregatedScorer:
    nb = fit_naive_bayes(train, eps_var=eps_var, variant=nb_variant)
    lr = fit_logistic(train, params)
    return AggregatedScorer(
        nb=nb, lr=lr, eps_p=eps_p, feature_ids=train.catalog.factor_ids
    )


@dataclass(frozen=True)
class EvalMetrics:
    accuracy: float
    tp: int
    fp: int
    tn: int
    fn: int
    majority_baseline: float

    def __post_init__(self):
        if not (0.0 <= self.accuracy <= 1.0):
            raise ValidationError("accuracy must lie in [0, 1]")

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def _metrics(p: np.ndarray, y: np.ndarray, threshold: float) -> EvalMetrics:
    pred = (p >= threshold).astype(np.int64)
    tp = int(((pred == 1) & (y == 1)).sum())
    fp = int(((pred == 1) & (y == 0)).sum())
    tn = int(((pred == 0) & (y == 0)).sum())
    fn = int(((pred == 0) & (y == 1)).sum())
    n = y.shape[0]
    pos = int(y.sum())
    return EvalMetrics(
        accuracy=(tp + tn) / n,
        tp=tp,
        fp=fp,
        tn=tn,
        fn=fn,
        majority_baseline=max(pos, n - pos) / n,
    )


def evaluate(
    scorer: AggregatedScorer, test: Dataset, threshold: float = 0.5
) -> dict[str, EvalMetrics]:
    """Accuracy and confusion counts for NB, LR, and the aggregate."""
    if test.n == 0:
        raise ValidationError("evaluation needs a non-empty test set")
    X = test.X.astype(np.float64)
    y = test.y
    return {
        "nb": _metrics(scorer.nb_probability(X), y, threshold),
        "lr": _metrics(scorer.lr_probability(X), y, threshold),
        "agg": _metrics(scorer.probability(X), y, threshold),
    }


def scorer_to_json(scorer: AggregatedScorer, train_params: TrainParams | None = None) -> str:
    """Serialize a trained scorer so optimization runs never need a refit."""
    if isinstance(scorer.nb, NaiveBayesModel):
        nb_doc = {
            "variant": "gaussian",
            "priors": scorer.nb.priors.tolist(),
            "means": scorer.nb.means.tolist(),
            "variances": scorer.nb.variances.tolist(),
            "eps_var": scorer.nb.eps_var,
        }
    else:
        nb_doc = {
            "variant": "categorical",
            "priors": scorer.nb.priors.tolist(),
            "level_log_probs": scorer.nb.level_log_probs.tolist(),
            "alpha": scorer.nb.alpha,
        }
    doc = {
        "format_version": FORMAT_VERSION,
        "eps_p": scorer.eps_p,
        "feature_ids": list(scorer.feature_ids),
        "nb": nb_doc,
        "lr": {
            "intercept": scorer.lr.intercept,
            "coef": scorer.lr.coef.tolist(),
            "l2_strength": scorer.lr.l2_strength,
            "converged": scorer.lr.converged,
            "iterations": scorer.lr.iterations,
        },
        "train_params": asdict(train_params) if train_params else None,
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def scorer_from_json(text: str) -> AggregatedScorer:
    doc = json.loads(text)
    if doc.get("format_version") != FORMAT_VERSION:
        raise ValidationError(
            f"unsupported scorer format version {doc.get('format_version')!r}"
        )
    nb_doc = doc["nb"]
    if nb_doc["variant"] == "gaussian":
        nb = NaiveBayesModel(
            priors=np.array(nb_doc["priors"]),
            means=np.array(nb_doc["means"]),
            variances=np.array(nb_doc["variances"]),
            eps_var=nb_doc["eps_var"],
        )
    elif nb_doc["variant"] == "categorical":
        nb = CategoricalNaiveBayesModel(
            priors=np.array(nb_doc["priors"]),
            level_log_probs=np.array(nb_doc["level_log_probs"]),
            alpha=nb_doc["alpha"],
        )
    else:
        raise ValidationError(f"unknown Naive Bayes variant {nb_doc['variant']!r}")
    lr_doc = doc["lr"]
    lr = LogisticModel(
        intercept=lr_doc["intercept"],
        coef=np.array(lr_doc["coef"]),
        l2_strength=lr_doc["l2_strength"],
        converged=lr_doc["converged"],
        iterations=lr_doc["iterations"],
    )
    return AggregatedScorer(
        nb=nb, lr=lr, eps_p=doc["eps_p"], feature_ids=tuple(doc["feature_ids"])
    )


def save_scorer(scorer: AggregatedScorer, path: str | Path, train_params: TrainParams | None = None) -> None:
    Path(path).write_text(scorer_to_json(scorer, train_params), encoding="utf-8")


def load_scorer(path: str | Path) -> AggregatedScorer:
    return scorer_from_json(Path(path).read_text(encoding="utf-8"))
