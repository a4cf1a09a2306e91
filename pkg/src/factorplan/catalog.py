"""Factor taxonomy: factor definitions, category groupings, catalog loading.

The catalog fixes the factor order, which in turn fixes the column order of
every rating matrix and every CSV emitted by this package.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import CatalogError

MOTIVATOR = "motivator"
DEMOTIVATOR = "demotivator"
SIDES = (MOTIVATOR, DEMOTIVATOR)


@dataclass(frozen=True)
class FactorDef:
    """One adoption factor: a short stable id, display name, side, and category."""

    id: str
    name: str
    kind: str  # "motivator" | "demotivator"
    category_id: str


@dataclass(frozen=True)
class Category:
    id: str
    name: str
    side: str  # "motivator" | "demotivator"


@dataclass(frozen=True)
class FactorCatalog:
    """Ordered factors plus their category groupings.

    Factor order is fixed at construction and defines matrix column order
    everywhere downstream.
    """

    factors: tuple[FactorDef, ...]
    categories: tuple[Category, ...]

    def __post_init__(self):
        if not self.factors:
            raise CatalogError("catalog declares no factors")
        if not self.categories:
            raise CatalogError("catalog declares no categories")
        seen = set()
        for f in self.factors:
            if not f.id or not f.kind or not f.category_id:
                raise CatalogError(f"factor {f!r} has empty id/kind/category")
            if f.kind not in SIDES:
                raise CatalogError(f"factor {f.id!r}: unknown kind {f.kind!r}")
            if f.id in seen:
                raise CatalogError(f"duplicate factor id {f.id!r}")
            seen.add(f.id)
        cat_ids = set()
        for c in self.categories:
            if c.id in cat_ids:
                raise CatalogError(f"duplicate category id {c.id!r}")
            if c.side not in SIDES:
                raise CatalogError(f"category {c.id!r}: unknown side {c.side!r}")
            cat_ids.add(c.id)
        for f in self.factors:
            if f.category_id not in cat_ids:
                raise CatalogError(
                    f"factor {f.id!r} references unknown category {f.category_id!r}"
                )

    @property
    def d(self) -> int:
        return len(self.factors)

    @property
    def factor_ids(self) -> tuple[str, ...]:
        return tuple(f.id for f in self.factors)

    def factor(self, factor_id: str) -> FactorDef:
        for f in self.factors:
            if f.id == factor_id:
                return f
        raise CatalogError(f"unknown factor id {factor_id!r}")

    def index_of(self, factor_id: str) -> int:
        for i, f in enumerate(self.factors):
            if f.id == factor_id:
                return i
        raise CatalogError(f"unknown factor id {factor_id!r}")

    def category(self, category_id: str) -> Category:
        for c in self.categories:
            if c.id == category_id:
                return c
        raise CatalogError(f"unknown category id {category_id!r}")

    def category_factors(self, category_id: str) -> tuple[FactorDef, ...]:
        self.category(category_id)
        return tuple(f for f in self.factors if f.category_id == category_id)


# Default taxonomy: 9 motivators in 4 categories, 10 demotivators in 4.
# Order here is the canonical column order (motivators first).
_DEFAULT_CATEGORIES = (
    ("MC1", "Skill Development in Software Engineering Education", MOTIVATOR),
    ("MC2", "Enhancing Learning Experiences", MOTIVATOR),
    ("MC3", "Assessment and Feedback in Education", MOTIVATOR),
    ("MC4", "Collaboration and Peer Learning", MOTIVATOR),
    ("DC1", "Assessment and Academic Integrity", DEMOTIVATOR),
    ("DC2", "Learning and Educational Challenges", DEMOTIVATOR),
    ("DC3", "Student Skill Development and Cognitive Load", DEMOTIVATOR),
    ("DC4", "Integration and Practical Implementation", DEMOTIVATOR),
)

_DEFAULT_FACTORS = (
    ("prog_assist", "Programming Assistance and Debugging Support", MOTIVATOR, "MC1"),
    ("adaptive_learning", "Personalized and Adaptive Learning", MOTIVATOR, "MC2"),
    ("ai_partner", "AI as a Learning Partner", MOTIVATOR, "MC4"),
    ("se_process", "Software Engineering Process Understanding", MOTIVATOR, "MC1"),
    ("conceptual", "Conceptual Understanding and Problem Solving", MOTIVATOR, "MC2"),
    ("engagement", "Engagement and Motivation", MOTIVATOR, "MC2"),
    ("formative_feedback", "Formative Feedback and Learning Support", MOTIVATOR, "MC3"),
    ("auto_assessment", "Automated Assessment and Grading", MOTIVATOR, "MC3"),
    ("project_learning", "Project-Based and Inquiry-Based Learning", MOTIVATOR, "MC4"),
    ("plagiarism", "Plagiarism and Intellectual Property Concerns", DEMOTIVATOR, "DC1"),
    ("over_reliance", "Over-Reliance on AI in Learning", DEMOTIVATOR, "DC2"),
    ("critical_thinking", "Reduced Critical Thinking and Problem-Solving", DEMOTIVATOR, "DC3"),
    ("ethics", "Ethical Concerns in AI-Assisted Learning", DEMOTIVATOR, "DC1"),
    ("outcome_eval", "Challenges in Evaluating Learning Outcomes", DEMOTIVATOR, "DC3"),
    ("security_privacy", "Security, Privacy, and Data Integrity Issues", DEMOTIVATOR, "DC4"),
    ("bias_hallucination", "Bias and Hallucination in LLM Outputs", DEMOTIVATOR, "DC2"),
    ("context_limits", "Limitations in Understanding and Context", DEMOTIVATOR, "DC2"),
    ("resource_costs", "Computational and Resource Costs", DEMOTIVATOR, "DC4"),
    ("course_redesign", "Difficulty in Course Redesign and Curriculum Integration", DEMOTIVATOR, "DC4"),
)


def default_catalog() -> FactorCatalog:
    """The built-in taxonomy: 19 factors grouped into 8 categories."""
    return FactorCatalog(
        factors=tuple(FactorDef(*row) for row in _DEFAULT_FACTORS),
        categories=tuple(Category(*row) for row in _DEFAULT_CATEGORIES),
    )


def load_catalog(source: str | None = None) -> FactorCatalog:
    """Build a catalog from JSON config text, or the default when absent.

    Expected shape::

        {"categories": [{"id": ..., "name": ..., "side": ...}, ...],
         "factors": [{"id": ..., "name": ..., "kind": ..., "category": ...}, ...]}
    """
    if source is None or not source.strip():
        return default_catalog()
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise CatalogError(f"catalog config is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise CatalogError("catalog config must be a JSON object")
    try:
        categories = tuple(
            Category(id=c["id"], name=c.get("name", c["id"]), side=c["side"])
            for c in doc.get("categories", [])
        )
        factors = tuple(
            FactorDef(
                id=f["id"],
                name=f.get("name", f["id"]),
                kind=f["kind"],
                category_id=f["category"],
            )
            for f in doc.get("factors", [])
        )
    except (KeyError, TypeError) as exc:
        raise CatalogError(f"catalog config missing required key: {exc}") from exc
    return FactorCatalog(factors=factors, categories=categories)


def catalog_to_config(catalog: FactorCatalog) -> str:
    """Serialize a catalog back to the JSON config format (stable key order)."""
    doc = {
        "categories": [
            {"id": c.id, "name": c.name, "side": c.side} for c in catalog.categories
        ],
        "factors": [
            {"id": f.id, "name": f.name, "kind": f.kind, "category": f.category_id}
            for f in catalog.factors
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True)
