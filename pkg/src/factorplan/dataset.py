"""Survey ingestion, cleaning, outcome encoding, statistics, synthesis, splits.

Ratings live on an ordinal 1..9 scale. A dataset is an N x d integer matrix
in catalog column order plus a binary outcome vector derived from the
self-reported familiarity rating.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .catalog import FactorCatalog
from .errors import SurveyFormatError, SynthesisError, ValidationError

LEVEL_MIN = 1
LEVEL_MAX = 9

RULE_NO_CONSENT = "no-consent"
RULE_STRAIGHT_LINING = "straight-lining"

_CONSENT_VALUES = {"yes": True, "1": True, "no": False, "0": False}


@dataclass(frozen=True)
class OutcomePolicy:
    """Binary outcome rule: positive when familiarity >= threshold."""

    threshold: int = 7

    def __post_init__(self):
        if not (2 <= self.threshold <= 9):
            raise ValidationError(
                f"outcome threshold must be in 2..9, got {self.threshold}"
            )

    def label(self, familiarity: int) -> int:
        return 1 if familiarity >= self.threshold else 0


@dataclass(frozen=True)
class SurveyRecord:
    respondent_id: str
    consent: bool
    ratings: dict[str, int]  # factor_id -> level
    familiarity: int
    effort_ratings: dict[str, int] | None = None  # experimental alternate cost basis


@dataclass
class RowIssue:
    row: int  # 1-based data-row number
    field: str
    reason: str


@dataclass
class ParseReport:
    rows_read: int = 0
    dropped: list[RowIssue] = field(default_factory=list)

    @property
    def rows_kept(self) -> int:
        return self.rows_read - len({issue.row for issue in self.dropped})


@dataclass
class Exclusion:
    respondent_id: str
    rule: str


@dataclass
class ExclusionReport:
    excluded: list[Exclusion] = field(default_factory=list)

    def count(self, rule: str) -> int:
        return sum(1 for e in self.excluded if e.rule == rule)


@dataclass(frozen=True)
class Dataset:
    """Immutable rating matrix + outcome vector, columns in catalog order."""

    catalog: FactorCatalog
    X: np.ndarray  # (N, d) int levels in 1..9
    y: np.ndarray  # (N,) in {0, 1}
    provenance: str  # "loaded" | "synthetic"

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.int64)
        y = np.asarray(self.y, dtype=np.int64)
        if X.ndim != 2 or X.shape[1] != self.catalog.d:
            raise ValidationError(
                f"rating matrix must be N x {self.catalog.d}, got shape {X.shape}"
            )
        if y.shape != (X.shape[0],):
            raise ValidationError("outcome vector length must match matrix rows")
        if X.size and (X.min() < LEVEL_MIN or X.max() > LEVEL_MAX):
            raise ValidationError("rating levels must lie in 1..9")
        if y.size and not np.isin(y, (0, 1)).all():
            raise ValidationError("outcomes must be 0 or 1")
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def class_counts(self) -> tuple[int, int]:
        """(negatives, positives)."""
        pos = int(self.y.sum())
        return self.n - pos, pos


@dataclass(frozen=True)
class DescriptiveRow:
    factor_id: str
    mean: float
    sd: float
    n: int


def _required_columns(catalog: FactorCatalog) -> list[str]:
    return ["respondent_id", "consent", *catalog.factor_ids, "familiarity"]


def _parse_level(raw: str) -> int:
    value = int(raw.strip())
    if not (LEVEL_MIN <= value <= LEVEL_MAX):
        raise ValueError(f"level {value} out of range 1..9")
    return value


def load_survey(
    stream: str, catalog: FactorCatalog
) -> tuple[list[SurveyRecord], ParseReport]:
    """Parse survey CSV text into records, dropping malformed rows.

    The header must contain ``respondent_id``, ``consent``, one column per
    catalog factor id, and ``familiarity``. Optional ``effort_<factor_id>``
    columns are parsed as the experimental effort-rating set; they must be
    present for all factors or none.
    """
    try:
        reader = csv.DictReader(io.StringIO(stream))
        header = reader.fieldnames
    except csv.Error as exc:
        raise SurveyFormatError(f"unparseable CSV stream: {exc}") from exc
    if header is None:
        raise SurveyFormatError("survey CSV has no header row")
    missing = [c for c in _required_columns(catalog) if c not in header]
    if missing:
        raise SurveyFormatError(f"survey CSV missing mandatory columns: {missing}")

    effort_cols = {f"effort_{fid}" for fid in catalog.factor_ids}
    present_effort = effort_cols & set(header)
    if present_effort and present_effort != effort_cols:
        raise SurveyFormatError(
            "effort columns must cover every factor or be absent entirely"
        )
    has_effort = bool(present_effort)

    records: list[SurveyRecord] = []
    report = ParseReport()
    for row_no, row in enumerate(reader, start=1):
        report.rows_read += 1
        issues: list[RowIssue] = []

        respondent = (row.get("respondent_id") or "").strip()
        if not respondent:
            issues.append(RowIssue(row_no, "respondent_id", "empty respondent id"))

        consent_raw = (row.get("consent") or "").strip().lower()
        consent = _CONSENT_VALUES.get(consent_raw)
        if consent is None:
            issues.append(
                RowIssue(row_no, "consent", f"consent must be yes/no or 1/0, got {consent_raw!r}")
            )

        ratings: dict[str, int] = {}
        for fid in catalog.factor_ids:
            try:
                ratings[fid] = _parse_level(row.get(fid) or "")
            except ValueError as exc:
                issues.append(RowIssue(row_no, fid, str(exc) or "not an integer"))

        effort: dict[str, int] | None = None
        if has_effort:
            effort = {}
            for fid in catalog.factor_ids:
                try:
                    effort[fid] = _parse_level(row.get(f"effort_{fid}") or "")
                except ValueError as exc:
                    issues.append(
                        RowIssue(row_no, f"effort_{fid}", str(exc) or "not an integer")
                    )

        try:
            familiarity = _parse_level(row.get("familiarity") or "")
        except ValueError as exc:
            familiarity = 0
            issues.append(RowIssue(row_no, "familiarity", str(exc) or "not an integer"))

        if issues:
            report.dropped.extend(issues)
            continue
        records.append(
            SurveyRecord(
                respondent_id=respondent,
                consent=bool(consent),
                ratings=ratings,
                familiarity=familiarity,
                effort_ratings=effort,
            )
        )
    return records, report


def records_to_csv(records: list[SurveyRecord], catalog: FactorCatalog) -> str:
    """Emit records in the survey CSV format (round-trips through load_survey)."""
    buf = io.StringIO()
    has_effort = any(r.effort_ratings for r in records)
    if has_effort and not all(r.effort_ratings for r in records):
        raise ValidationError("effort ratings must be present on all records or none")
    columns = _required_columns(catalog)
    if has_effort:
        columns += [f"effort_{fid}" for fid in catalog.factor_ids]
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in records:
        row = [r.respondent_id, "yes" if r.consent else "no"]
        row += [r.ratings[fid] for fid in catalog.factor_ids]
        row.append(r.familiarity)
        if has_effort:
            row += [r.effort_ratings[fid] for fid in catalog.factor_ids]
        writer.writerow(row)
    return buf.getvalue()


def clean(
    records: list[SurveyRecord], catalog: FactorCatalog
) -> tuple[list[SurveyRecord], ExclusionReport]:
    """Drop non-consenting respondents and straight-lined response patterns.

    Straight-lining means the identical level on every factor; the rule is
    only meaningful for catalogs with at least two factors.
    """
    retained: list[SurveyRecord] = []
    report = ExclusionReport()
    for record in records:
        if not record.consent:
            report.excluded.append(Exclusion(record.respondent_id, RULE_NO_CONSENT))
            continue
        levels = {record.ratings[fid] for fid in catalog.factor_ids}
        if catalog.d >= 2 and len(levels) == 1:
            report.excluded.append(
                Exclusion(record.respondent_id, RULE_STRAIGHT_LINING)
            )
            continue
        retained.append(record)
    return retained, report


def build_dataset(
    records: list[SurveyRecord],
    catalog: FactorCatalog,
    policy: OutcomePolicy = OutcomePolicy(),
    source: str = "impact",
) -> Dataset:
    """Assemble the rating matrix and binary outcome vector.

    ``source="effort"`` substitutes the experimental effort ratings for the
    impact ratings; every record must then carry a full effort set.
    """
    if source not in ("impact", "effort"):
        raise ValidationError(f"unknown rating source {source!r}")
    rows = []
    labels = []
    for record in records:
        basis = record.ratings if source == "impact" else record.effort_ratings
        if basis is None:
            raise ValidationError(
                f"respondent {record.respondent_id!r} has no effort ratings"
            )
        try:
            rows.append([basis[fid] for fid in catalog.factor_ids])
        except KeyError as exc:
            raise ValidationError(
                f"respondent {record.respondent_id!r} missing rating for factor {exc}"
            ) from exc
        labels.append(policy.label(record.familiarity))
    X = np.asarray(rows, dtype=np.int64).reshape(len(rows), catalog.d)
    y = np.asarray(labels, dtype=np.int64)
    return Dataset(catalog=catalog, X=X, y=y, provenance="loaded")


def descriptive_stats(dataset: Dataset, sample_sd: bool = True) -> list[DescriptiveRow]:
    """Per-factor mean and standard deviation in catalog order.

    Uses the sample convention (n-1 denominator) by default; pass
    ``sample_sd=False`` for the population convention.
    """
    if dataset.n < 2:
        raise ValidationError("descriptive statistics need at least 2 rows")
    ddof = 1 if sample_sd else 0
    means = dataset.X.mean(axis=0)
    sds = dataset.X.std(axis=0, ddof=ddof)
    return [
        DescriptiveRow(factor_id=fid, mean=float(means[j]), sd=float(sds[j]), n=dataset.n)
        for j, fid in enumerate(dataset.catalog.factor_ids)
    ]


# Per-factor (mean, sd) targets mirroring the reference survey excerpt; used
# as defaults when synthesizing a stand-in dataset.
DEFAULT_FACTOR_TARGETS: dict[str, tuple[float, float]] = {
    "prog_assist": (5.261, 1.272),
    "adaptive_learning": (5.047, 1.349),
    "ai_partner": (5.023, 1.411),
    "se_process": (5.007, 1.353),
    "conceptual": (4.888, 1.415),
    "engagement": (4.881, 1.542),
    "formative_feedback": (4.746, 1.528),
    "auto_assessment": (4.738, 1.529),
    "project_learning": (4.563, 1.597),
    "plagiarism": (5.373, 1.312),
    "over_reliance": (5.265, 1.197),
    "critical_thinking": (5.163, 1.442),
    "ethics": (5.079, 1.371),
    "outcome_eval": (5.071, 1.415),
    "security_privacy": (5.063, 1.372),
    "bias_hallucination": (5.017, 1.439),
    "context_limits": (4.984, 1.379),
    "resource_costs": (4.825, 1.497),
    "course_redesign": (4.603, 1.580),
}

DEFAULT_CLASS_SPLIT = (90, 36)  # (positives, negatives) of the reference sample


@dataclass(frozen=True)
class SynthesisSpec:
    """Targets for a synthetic stand-in dataset."""

    targets: dict[str, tuple[float, float]]  # factor_id -> (mean, sd)
    n_pos: int
    n_neg: int
    seed: int

    def __post_init__(self):
        if self.n_pos < 0 or self.n_neg < 0 or self.n_pos + self.n_neg == 0:
            raise ValidationError("class counts must be non-negative and sum > 0")
        for fid, (mean, sd) in self.targets.items():
            if not (LEVEL_MIN <= mean <= LEVEL_MAX):
                raise SynthesisError(f"{fid}: target mean {mean} outside [1, 9]")
            if sd < 0:
                raise SynthesisError(f"{fid}: target sd {sd} negative")
            if sd > 0 and (mean == LEVEL_MIN or mean == LEVEL_MAX):
                raise SynthesisError(
                    f"{fid}: positive sd unattainable with mean pinned at {mean}"
                )

    @property
    def n(self) -> int:
        return self.n_pos + self.n_neg


def default_synthesis_spec(
    seed: int,
    n_pos: int = DEFAULT_CLASS_SPLIT[0],
    n_neg: int = DEFAULT_CLASS_SPLIT[1],
) -> SynthesisSpec:
    return SynthesisSpec(
        targets=dict(DEFAULT_FACTOR_TARGETS), n_pos=n_pos, n_neg=n_neg, seed=seed
    )


def _sample_column(rng: np.random.Generator, mean: float, sd: float, n: int) -> np.ndarray:
    """Discretized truncated normal on 1..9 targeting (mean, sd)."""
    if sd == 0.0:
        level = int(math.floor(mean + 0.5))
        return np.full(n, min(max(level, LEVEL_MIN), LEVEL_MAX), dtype=np.int64)
    # Rounding to integers adds ~1/12 to the variance; pre-shrink when possible.
    adj_sd = math.sqrt(sd * sd - 1.0 / 12.0) if sd * sd > 1.0 / 12.0 else sd
    out = np.empty(0, dtype=np.float64)
    while out.size < n:
        draw = rng.normal(mean, adj_sd, size=max(2 * (n - out.size), 16))
        kept = draw[(draw >= LEVEL_MIN - 0.5) & (draw < LEVEL_MAX + 0.5)]
        out = np.concatenate([out, kept])
    return np.rint(out[:n]).astype(np.int64)


def synthesize_dataset(catalog: FactorCatalog, spec: SynthesisSpec) -> Dataset:
    """Deterministically generate a dataset matching the spec's targets.

    Columns are drawn independently per factor; the outcome vector contains
    exactly (n_pos, n_neg) labels in a seed-determined shuffle.
    """
    missing = [fid for fid in catalog.factor_ids if fid not in spec.targets]
    if missing:
        raise SynthesisError(f"synthesis targets missing for factors: {missing}")
    rng = np.random.default_rng(spec.seed)
    columns = []
    for fid in catalog.factor_ids:
        mean, sd = spec.targets[fid]
        columns.append(_sample_column(rng, mean, sd, spec.n))
    X = np.stack(columns, axis=1)
    y = np.concatenate(
        [np.ones(spec.n_pos, dtype=np.int64), np.zeros(spec.n_neg, dtype=np.int64)]
    )
    rng.shuffle(y)
    return Dataset(catalog=catalog, X=X, y=y, provenance="synthetic")


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def stratified_split(
    dataset: Dataset, ratio: float, seed: int
) -> tuple[Dataset, Dataset]:
    """Class-stratified train/test partition.

    Each class contributes floor(class_n * ratio) training rows; remaining
    slots up to round(N * ratio) go to classes by largest fractional
    remainder, ties favouring the larger class. Deterministic under seed.
    """
    if not (0.0 < ratio < 1.0):
        raise ValidationError(f"split ratio must be in (0, 1), got {ratio}")
    y = dataset.y
    classes = [0, 1]
    counts = {c: int((y == c).sum()) for c in classes}
    for c in classes:
        if counts[c] < 2:
            raise ValidationError(
                f"class {c} has {counts[c]} member(s); need at least 2 per class"
            )

    target = _round_half_up(dataset.n * ratio)
    take = {c: int(math.floor(counts[c] * ratio)) for c in classes}
    remainders = {c: counts[c] * ratio - take[c] for c in classes}
    # Largest remainder first; ties to the larger class.
    order = sorted(classes, key=lambda c: (-remainders[c], -counts[c]))
    i = 0
    while sum(take.values()) < target:
        c = order[i % len(order)]
        if take[c] < counts[c]:
            take[c] += 1
        i += 1

    rng = np.random.default_rng(seed)
    train_idx: list[int] = []
    test_idx: list[int] = []
    for c in classes:
        members = np.flatnonzero(y == c)
        perm = rng.permutation(members)
        train_idx.extend(perm[: take[c]].tolist())
        test_idx.extend(perm[take[c] :].tolist())
    train_idx.sort()
    test_idx.sort()

    def subset(idx: list[int]) -> Dataset:
        return Dataset(
            catalog=dataset.catalog,
            X=dataset.X[idx],
            y=dataset.y[idx],
            provenance=dataset.provenance,
        )

    return subset(train_idx), subset(test_idx)
