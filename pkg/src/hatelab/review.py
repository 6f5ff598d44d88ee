"""Context-experts-as-validators loop: run a trained model over fresh
posts, pick a sample for expert review, and categorize model errors.

The two headline error categories are operationalized with the lexicon-hit
predicate: a false positive that contains lexicon terms is a
lexicon_false_positive; a false negative with no lexicon term at all is a
non_archetypal_false_negative. Everything else that disagrees is
other_error; agreement is correct.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from enum import Enum
from typing import Sequence

from .corpus import CleanPost
from .errors import MissingExpertLabels, SampleTooLarge
from .models import HATE, ModelArtifact, predict


class ErrorCategory(str, Enum):
    LEXICON_FALSE_POSITIVE = "lexicon_false_positive"
    NON_ARCHETYPAL_FALSE_NEGATIVE = "non_archetypal_false_negative"
    OTHER_ERROR = "other_error"
    CORRECT = "correct"


@dataclass(frozen=True)
class ReviewItem:
    post_id: str
    model_label: str
    model_score: float
    lexicon_hit_count: int
    expert_label: str | None = None
    error_category: ErrorCategory | None = None

    def with_expert(self, label: str) -> "ReviewItem":
        item = replace(self, expert_label=label)
        return replace(item, error_category=_categorize(item))

    def to_dict(self) -> dict:
        return {
            "post_id": self.post_id,
            "model_label": self.model_label,
            "model_score": self.model_score,
            "lexicon_hit_count": self.lexicon_hit_count,
            "expert_label": self.expert_label,
            "error_category": self.error_category.value if self.error_category else None,
        }


def infer_batch(model: ModelArtifact, posts: Sequence[CleanPost]) -> list[ReviewItem]:
    """One item per cleaned post: model label, score, and the post's
    lexicon hit count."""
    items = []
    for post in posts:
        label, score = predict(model, post)
        items.append(ReviewItem(
            post_id=post.post_id,
            model_label=label,
            model_score=score,
            lexicon_hit_count=len(post.lexicon_hits),
        ))
    return items


def sample_for_review(items: Sequence[ReviewItem], strategy: str, n: int,
                      seed: int = 0) -> list[ReviewItem]:
    """uncertainty = closest to the decision boundary first (ties by
    post_id); random = seeded; top_positive = highest score first."""
    if n > len(items):
        raise SampleTooLarge(f"asked for {n} of {len(items)} items")
    if strategy == "uncertainty":
        ranked = sorted(items, key=lambda it: (abs(it.model_score - 0.5), it.post_id))
        return ranked[:n]
    if strategy == "random":
        pool = list(items)
        random.Random(seed).shuffle(pool)
        return pool[:n]
    if strategy == "top_positive":
        ranked = sorted(items, key=lambda it: (-it.model_score, it.post_id))
        return ranked[:n]
    raise ValueError(f"unknown strategy {strategy!r}")


def _categorize(item: ReviewItem) -> ErrorCategory:
    model_yes = item.model_label == HATE
    expert_yes = item.expert_label == HATE
    if model_yes == expert_yes:
        return ErrorCategory.CORRECT
    if model_yes and not expert_yes and item.lexicon_hit_count > 0:
        return ErrorCategory.LEXICON_FALSE_POSITIVE
    if not model_yes and expert_yes and item.lexicon_hit_count == 0:
        return ErrorCategory.NON_ARCHETYPAL_FALSE_NEGATIVE
    return ErrorCategory.OTHER_ERROR


@dataclass
class ErrorAnalysis:
    counts: dict[str, int]
    items: dict[str, list[ReviewItem]]

    def to_dict(self) -> dict:
        return {
            "counts": self.counts,
            "items": {cat: [it.to_dict() for it in its] for cat, its in self.items.items()},
        }


def disagreement_report(items: Sequence[ReviewItem]) -> ErrorAnalysis:
    """Categorize every reviewed item; categories partition the items and
    the counts sum to the item count."""
    missing = [it.post_id for it in items if it.expert_label is None]
    if missing:
        raise MissingExpertLabels(f"no expert label for {missing[:5]}")
    buckets: dict[str, list[ReviewItem]] = {cat.value: [] for cat in ErrorCategory}
    for item in items:
        category = item.error_category or _categorize(item)
        item = replace(item, error_category=category)
        buckets[category.value].append(item)
    counts = {cat: len(its) for cat, its in buckets.items()}
    return ErrorAnalysis(counts, buckets)
