import random

import pytest

from hatelab.errors import MissingExpertLabels, SampleTooLarge
from hatelab.features import FeatureConfig
from hatelab.lexicon import HateTerm, TermHit
from hatelab.models import HATE, NOT_HATE, Dataset, Example, train_svm
from hatelab.review import (
    ErrorCategory,
    ReviewItem,
    disagreement_report,
    infer_batch,
    sample_for_review,
)

from conftest import make_post


def item(pid, model, score, hits, expert=None):
    it = ReviewItem(pid, model, score, hits)
    return it.with_expert(expert) if expert else it


class TestInferBatch:
    def _model(self):
        ds = Dataset([
            Example(make_post(f"h{i}", ["bad", "w"]), HATE) for i in range(5)
        ] + [
            Example(make_post(f"n{i}", ["fine", "w"]), NOT_HATE) for i in range(5)
        ])
        return train_svm(ds, FeatureConfig("word", 1, 1), lambda_=0.01, epochs=20, seed=0)

    def test_empty_batch(self):
        assert infer_batch(self._model(), []) == []

    def test_scores_in_unit_interval(self):
        posts = [make_post("p1", ["bad"]), make_post("p2", ["fine"]),
                 make_post("p3", ["zzz"])]
        items = infer_batch(self._model(), posts)
        assert len(items) == 3
        for it in items:
            assert 0.0 <= it.model_score <= 1.0

    def test_lexicon_hit_count_passthrough(self):
        post = make_post("p1", ["bad"])
        post.lexicon_hits = [TermHit(HateTerm("bad", "t"), 0, 3, "p1")] * 2
        items = infer_batch(self._model(), [post])
        assert items[0].lexicon_hit_count == 2


class TestSampleForReview:
    ITEMS = [item("a", HATE, 0.9, 0), item("b", HATE, 0.55, 0), item("c", NOT_HATE, 0.1, 0)]

    def test_uncertainty_picks_closest_to_half(self):
        picked = sample_for_review(self.ITEMS, "uncertainty", 1, seed=0)
        assert picked[0].post_id == "b"

    def test_n_equals_all(self):
        picked = sample_for_review(self.ITEMS, "uncertainty", 3, seed=0)
        assert {it.post_id for it in picked} == {"a", "b", "c"}

    def test_top_positive(self):
        picked = sample_for_review(self.ITEMS, "top_positive", 1, seed=0)
        assert picked[0].post_id == "a"

    def test_sample_too_large(self):
        with pytest.raises(SampleTooLarge):
            sample_for_review(self.ITEMS, "random", 4, seed=0)

    def test_random_deterministic_under_seed(self):
        a = sample_for_review(self.ITEMS, "random", 2, seed=42)
        b = sample_for_review(self.ITEMS, "random", 2, seed=42)
        assert [it.post_id for it in a] == [it.post_id for it in b]

    def test_uncertainty_tie_breaks_by_post_id(self):
        items = [item("z", HATE, 0.6, 0), item("a", NOT_HATE, 0.4, 0)]
        picked = sample_for_review(items, "uncertainty", 2, seed=0)
        assert [it.post_id for it in picked] == ["a", "z"]

    def test_unknown_strategy(self):
        with pytest.raises(ValueError):
            sample_for_review(self.ITEMS, "alphabetical", 1, seed=0)


class TestDisagreementReport:
    def test_lexicon_false_positive(self):
        report = disagreement_report([item("p", HATE, 0.9, 2, expert=NOT_HATE)])
        assert report.counts[ErrorCategory.LEXICON_FALSE_POSITIVE.value] == 1

    def test_non_archetypal_false_negative(self):
        report = disagreement_report([item("p", NOT_HATE, 0.2, 0, expert=HATE)])
        assert report.counts[ErrorCategory.NON_ARCHETYPAL_FALSE_NEGATIVE.value] == 1

    def test_agreement_is_correct_even_without_hits(self):
        report = disagreement_report([item("p", HATE, 0.8, 0, expert=HATE)])
        assert report.counts[ErrorCategory.CORRECT.value] == 1

    def test_other_error_buckets(self):
        # false positive without lexicon hits; false negative with hits
        items = [item("p1", HATE, 0.9, 0, expert=NOT_HATE),
                 item("p2", NOT_HATE, 0.1, 3, expert=HATE)]
        report = disagreement_report(items)
        assert report.counts[ErrorCategory.OTHER_ERROR.value] == 2

    def test_partition_property(self):
        rng = random.Random(7)
        items = []
        for i in range(200):
            model = rng.choice([HATE, NOT_HATE])
            expert = rng.choice([HATE, NOT_HATE])
            items.append(item(f"p{i}", model, rng.random(), rng.randrange(3), expert=expert))
        report = disagreement_report(items)
        assert sum(report.counts.values()) == len(items)
        listed = sum(len(v) for v in report.items.values())
        assert listed == len(items)

    def test_missing_expert_labels(self):
        with pytest.raises(MissingExpertLabels):
            disagreement_report([item("p", HATE, 0.9, 1)])
