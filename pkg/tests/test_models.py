import random

import pytest

from hatelab.errors import (
    FeatureConfigMismatch,
    IdMismatch,
    SingleClass,
    TooFewMinority,
)
from hatelab.features import FeatureConfig
from hatelab.models import (
    HATE,
    NOT_HATE,
    Dataset,
    Example,
    ModelArtifact,
    ModelSpec,
    cross_validate,
    evaluate,
    grid_search,
    predict,
    random_oversample,
    stratified_folds,
    train_brf,
    train_fasttext,
    train_model,
    train_svm,
)

from conftest import make_post
from synthetic import make_synthetic_dataset

WORD1 = FeatureConfig("word", 1, 1)


def tiny_dataset(n_hate=10, n_not=90, seed=3):
    """Separable-ish corpus: hate posts carry 'bad' tokens."""
    rng = random.Random(seed)
    examples = []
    for i in range(n_hate):
        tokens = ["bad", f"w{rng.randrange(20)}", f"w{rng.randrange(20)}"]
        examples.append(Example(make_post(f"h{i}", tokens), HATE))
    for i in range(n_not):
        tokens = [f"w{rng.randrange(20)}", f"w{rng.randrange(20)}", "fine"]
        examples.append(Example(make_post(f"n{i}", tokens), NOT_HATE))
    return Dataset(examples)


class TestRandomOversample:
    def test_equalizes_counts(self):
        ds = tiny_dataset(10, 90)
        out = random_oversample(ds, seed=1)
        assert out.class_counts() == {HATE: 90, NOT_HATE: 90}
        assert len(out) == 180

    def test_originals_all_retained(self):
        ds = tiny_dataset(5, 20)
        out = random_oversample(ds, seed=2)
        original_ids = [e.post_id for e in ds.examples]
        assert [e.post_id for e in out.examples[:len(ds)]] == original_ids

    def test_balanced_input_unchanged(self):
        ds = tiny_dataset(10, 10)
        out = random_oversample(ds, seed=3)
        assert [e.post_id for e in out.examples] == [e.post_id for e in ds.examples]

    def test_same_seed_same_multiset(self):
        ds = tiny_dataset(10, 90)
        a = random_oversample(ds, seed=7)
        b = random_oversample(ds, seed=7)
        assert [e.post_id for e in a.examples] == [e.post_id for e in b.examples]

    def test_single_class_rejected(self):
        ds = Dataset([Example(make_post("p", ["a"]), NOT_HATE)])
        with pytest.raises(SingleClass):
            random_oversample(ds, seed=0)


class TestTrainSvm:
    def test_separable_prediction(self):
        ds = Dataset([
            Example(make_post("p1", ["neg"]), NOT_HATE),
            Example(make_post("p2", ["pos"]), HATE),
        ])
        artifact = train_svm(ds, WORD1, lambda_=0.01, epochs=40, seed=0)
        label, score = predict(artifact, make_post("q", ["pos", "pos"]))
        assert label == HATE
        assert score > 0.5

    def test_objective_non_increasing_on_fixture(self):
        ds = tiny_dataset(20, 60, seed=5)
        lambda_ = 0.01
        artifact = train_svm(ds, WORD1, lambda_=lambda_, epochs=8, seed=1)
        log = artifact.training_log["objective_per_epoch"]
        assert len(log) == 8
        assert all(b <= a + 1e-9 for a, b in zip(log, log[1:]))

        # oracle: recompute the final objective from the stored weights
        from hatelab.features import Vocab, tfidf_vectorize
        vocab = Vocab.from_dict(artifact.feature_config["vocab"])
        w = artifact.params["weights"]
        b = artifact.params["bias"]
        hinge = 0.0
        for e in ds.examples:
            vec = tfidf_vectorize(e.post, vocab)
            y = 1.0 if e.label == HATE else -1.0
            margin = y * (sum(w[int(i)] * float(x) for i, x in zip(vec.indices, vec.weights)) + b)
            hinge += max(0.0, 1.0 - margin)
        recomputed = 0.5 * lambda_ * sum(x * x for x in w) + hinge / len(ds)
        assert recomputed == pytest.approx(log[-1], rel=1e-9)

    def test_same_seed_identical_weights(self):
        ds = tiny_dataset()
        a = train_svm(ds, WORD1, epochs=3, seed=11)
        b = train_svm(ds, WORD1, epochs=3, seed=11)
        assert a.params == b.params

    def test_single_class_rejected(self):
        ds = Dataset([Example(make_post("p", ["a"]), HATE)])
        with pytest.raises(SingleClass):
            train_svm(ds, WORD1)

    def test_margin_zero_scores_half(self):
        artifact = ModelArtifact(
            model_type="svm", hyperparameters={},
            feature_config={"kind": "tfidf_vocab",
                            "vocab": {"config": WORD1.to_dict(), "ngrams": ["x"],
                                      "df": [1], "n_docs": 1}},
            params={"weights": [0.0], "bias": 0.0}, seed=0)
        label, score = predict(artifact, make_post("p", ["x"]))
        assert score == 0.5
        assert label == NOT_HATE  # margin 0 is not a positive sign


class TestTrainBrf:
    def test_balanced_bootstrap_per_tree(self):
        ds = tiny_dataset(10, 90)
        label_of = {e.post_id: e.label for e in ds.examples}
        artifact = train_brf(ds, WORD1, n_trees=7, max_depth=3, seed=0)
        for sample_ids in artifact.params["tree_sample_ids"]:
            counts = {HATE: 0, NOT_HATE: 0}
            for pid in sample_ids:
                counts[label_of[pid]] += 1
            assert counts == {HATE: 10, NOT_HATE: 10}

    def test_single_predictive_feature_depth_one(self):
        examples = (
            [Example(make_post(f"h{i}", ["bad"]), HATE) for i in range(10)]
            + [Example(make_post(f"n{i}", ["ok"]), NOT_HATE) for i in range(10)]
        )
        ds = Dataset(examples)
        artifact = train_brf(ds, WORD1, n_trees=5, max_depth=1, seed=1)
        correct = sum(1 for e in ds.examples if predict(artifact, e.post)[0] == e.label)
        assert correct == len(ds)

    def test_same_seed_identical_ensemble(self):
        ds = tiny_dataset(8, 30)
        a = train_brf(ds, WORD1, n_trees=4, max_depth=3, seed=9)
        b = train_brf(ds, WORD1, n_trees=4, max_depth=3, seed=9)
        assert a.params == b.params

    def test_vote_fraction_score(self):
        trees = []
        for vote_hate in [True] * 7 + [False] * 3:
            trees.append({"leaf": [1, 0] if vote_hate else [0, 1]})
        artifact = ModelArtifact(
            model_type="brf", hyperparameters={},
            feature_config={"kind": "tfidf_vocab",
                            "vocab": {"config": WORD1.to_dict(), "ngrams": ["x"],
                                      "df": [1], "n_docs": 1}},
            params={"trees": trees, "n_features": 1, "tree_sample_ids": []}, seed=0)
        label, score = predict(artifact, make_post("p", ["x"]))
        assert score == pytest.approx(0.7)
        assert label == HATE


class TestTrainFasttext:
    def _disjoint_dataset(self):
        examples = []
        for i in range(50):
            examples.append(Example(make_post(f"h{i}", [f"p{i % 5}", f"p{(i + 1) % 5}"]), HATE))
            examples.append(Example(make_post(f"n{i}", [f"q{i % 5}", f"q{(i + 1) % 5}"]), NOT_HATE))
        return Dataset(examples)

    def test_disjoint_vocabulary_training_accuracy(self):
        ds = self._disjoint_dataset()
        artifact = train_fasttext(ds, dim=8, lr=0.3, epochs=6, word_ngrams=1,
                                  char_ngrams=None, buckets=1 << 12, seed=0)
        correct = sum(1 for e in ds.examples if predict(artifact, e.post)[0] == e.label)
        assert correct == len(ds)

    def test_loss_strictly_decreases_first_epochs(self):
        ds = self._disjoint_dataset()
        artifact = train_fasttext(ds, dim=8, lr=0.3, epochs=5, word_ngrams=1,
                                  char_ngrams=None, buckets=1 << 12, seed=0)
        log = artifact.training_log["loss_per_epoch"]
        assert all(b < a for a, b in zip(log[:5], log[1:5]))

    def test_dim_one_smoke(self):
        ds = self._disjoint_dataset()
        artifact = train_fasttext(ds, dim=1, lr=0.1, epochs=1, word_ngrams=1,
                                  char_ngrams=None, buckets=64, seed=0)
        label, score = predict(artifact, ds.examples[0].post)
        assert label in (HATE, NOT_HATE)
        assert 0.0 <= score <= 1.0

    def test_empty_text_predicts_from_priors(self):
        ds = self._disjoint_dataset()
        artifact = train_fasttext(ds, dim=4, lr=0.2, epochs=2, word_ngrams=1,
                                  char_ngrams=None, buckets=256, seed=0)
        label, score = predict(artifact, make_post("empty", []))
        assert label in (HATE, NOT_HATE)
        assert 0.0 <= score <= 1.0

    def test_deterministic_under_seed(self):
        ds = self._disjoint_dataset()
        a = train_fasttext(ds, dim=4, lr=0.2, epochs=2, word_ngrams=1,
                           char_ngrams=None, buckets=256, seed=5)
        b = train_fasttext(ds, dim=4, lr=0.2, epochs=2, word_ngrams=1,
                           char_ngrams=None, buckets=256, seed=5)
        assert a.params == b.params


class TestPredictErrors:
    def test_unknown_model_type(self):
        artifact = ModelArtifact("nonsense", {}, {"kind": "tfidf_vocab"}, {}, 0)
        with pytest.raises(FeatureConfigMismatch):
            predict(artifact, make_post("p", ["a"]))

    def test_unknown_feature_kind(self):
        artifact = ModelArtifact("svm", {}, {"kind": "mystery"}, {}, 0)
        with pytest.raises(FeatureConfigMismatch):
            predict(artifact, make_post("p", ["a"]))


class TestEvaluate:
    def test_hand_computed_confusion(self):
        gold = {"1": HATE, "2": HATE, "3": NOT_HATE, "4": NOT_HATE}
        pred = {"1": HATE, "2": NOT_HATE, "3": NOT_HATE, "4": NOT_HATE}
        report = evaluate(pred, gold)
        hate = report.per_class[HATE]
        not_hate = report.per_class[NOT_HATE]
        assert hate.precision == pytest.approx(1.0)
        assert hate.recall == pytest.approx(0.5)
        assert hate.f1 == pytest.approx(2 / 3)
        assert not_hate.precision == pytest.approx(2 / 3)
        assert not_hate.recall == pytest.approx(1.0)
        assert not_hate.f1 == pytest.approx(0.8)
        assert report.macro_f1 == pytest.approx((2 / 3 + 0.8) / 2, abs=1e-9)

    def test_perfect_predictions(self):
        gold = {"1": HATE, "2": NOT_HATE}
        report = evaluate(dict(gold), gold)
        assert report.macro_f1 == 1.0
        assert report.macro_precision == 1.0
        assert report.macro_recall == 1.0

    def test_absent_class_conventions(self):
        gold = {"1": NOT_HATE, "2": NOT_HATE}
        report = evaluate(dict(gold), gold)
        assert report.per_class[HATE].precision == 0.0
        assert report.per_class[HATE].recall == 0.0
        assert report.per_class[HATE].f1 == 0.0
        assert report.macro_f1 == pytest.approx(0.5)

    def test_confusion_sums_to_count(self):
        gold = {str(i): HATE if i % 3 == 0 else NOT_HATE for i in range(10)}
        pred = {str(i): HATE if i % 2 == 0 else NOT_HATE for i in range(10)}
        report = evaluate(pred, gold)
        total = sum(sum(row.values()) for row in report.confusion.values())
        assert total == 10

    def test_id_mismatch(self):
        with pytest.raises(IdMismatch):
            evaluate({"1": HATE}, {"2": HATE})

    def test_matches_brute_force_on_random_sets(self):
        rng = random.Random(123)
        for _ in range(100):
            n = rng.randrange(1, 30)
            gold = {str(i): rng.choice([HATE, NOT_HATE]) for i in range(n)}
            pred = {str(i): rng.choice([HATE, NOT_HATE]) for i in range(n)}
            report = evaluate(pred, gold)
            for cls in (HATE, NOT_HATE):
                tp = sum(1 for i in gold if gold[i] == cls and pred[i] == cls)
                fp = sum(1 for i in gold if gold[i] != cls and pred[i] == cls)
                fn = sum(1 for i in gold if gold[i] == cls and pred[i] != cls)
                p = tp / (tp + fp) if tp + fp else 0.0
                r = tp / (tp + fn) if tp + fn else 0.0
                f = 2 * p * r / (p + r) if p + r else 0.0
                assert report.per_class[cls].precision == pytest.approx(p, abs=1e-12)
                assert report.per_class[cls].recall == pytest.approx(r, abs=1e-12)
                assert report.per_class[cls].f1 == pytest.approx(f, abs=1e-12)


class TestSerializationRoundTrip:
    def _assert_round_trip(self, artifact, posts, tmp_path):
        path = tmp_path / "model.json"
        artifact.save(path)
        clone = ModelArtifact.load(path)
        assert clone.to_dict() == artifact.to_dict()
        for post in posts:
            assert predict(clone, post) == predict(artifact, post)

    def test_all_three_model_types(self, tmp_path):
        ds = tiny_dataset(12, 48)
        posts = [e.post for e in ds.examples] + [make_post("fresh", ["bad", "w1"])]
        svm = train_svm(ds, WORD1, epochs=3, seed=0)
        brf = train_brf(ds, WORD1, n_trees=4, max_depth=3, seed=0)
        ft = train_fasttext(ds, dim=4, lr=0.2, epochs=2, word_ngrams=1,
                            char_ngrams=None, buckets=512, seed=0)
        for artifact in (svm, brf, ft):
            self._assert_round_trip(artifact, posts, tmp_path)


class TestCrossValidate:
    def test_folds_partition_examples(self):
        ds = tiny_dataset(5, 5)
        folds = stratified_folds(ds, k=5, seed=0)
        seen = []
        for _, test_idx in folds:
            assert len(test_idx) == 2
            seen.extend(test_idx)
        assert sorted(seen) == list(range(10))

    def test_stratification_proportions(self):
        ds = tiny_dataset(10, 40)
        folds = stratified_folds(ds, k=5, seed=1)
        for _, test_idx in folds:
            labels = [ds.examples[i].label for i in test_idx]
            assert labels.count(HATE) == 2
            assert labels.count(NOT_HATE) == 8

    def test_too_few_minority(self):
        ds = tiny_dataset(3, 40)
        with pytest.raises(TooFewMinority):
            stratified_folds(ds, k=5, seed=0)

    def test_pooled_report_covers_everything(self):
        ds = tiny_dataset(10, 40)
        spec = ModelSpec("svm", WORD1, {"epochs": 3})
        report = cross_validate(ds, spec, k=5, seed=0)
        total = sum(sum(row.values()) for row in report.confusion.values())
        assert total == len(ds)
        assert len(report.per_fold) == 5

    def test_sentinel_tokens_never_leak_into_training_vocab(self):
        # every example carries a fold-unique sentinel; the training vocab
        # of each fold must not contain the test fold's sentinels
        ds = tiny_dataset(10, 40)
        k, seed = 5, 13
        folds = stratified_folds(ds, k, seed)
        fold_of = {}
        for fold_no, (_, test_idx) in enumerate(folds):
            for i in test_idx:
                fold_of[i] = fold_no
        sentinel_examples = []
        for i, e in enumerate(ds.examples):
            tokens = e.post.tokens + [f"sentinel_fold{fold_of[i]}_{i}"]
            sentinel_examples.append(Example(make_post(e.post_id, tokens), e.label))
        sentinel_ds = Dataset(sentinel_examples)

        from hatelab.features import build_vocab
        for fold_no, (train_idx, test_idx) in enumerate(stratified_folds(sentinel_ds, k, seed)):
            vocab = build_vocab((sentinel_ds.examples[i].post for i in train_idx), WORD1)
            test_only = {t for i in test_idx for t in sentinel_ds.examples[i].post.tokens
                         if t.startswith("sentinel_")}
            assert not test_only & set(vocab.index)

    def test_oversample_leaves_test_folds_untouched(self):
        ds = tiny_dataset(10, 40)
        spec = ModelSpec("svm", WORD1, {"epochs": 2})
        plain = cross_validate(ds, spec, k=5, seed=3, oversample=False)
        boosted = cross_validate(ds, spec, k=5, seed=3, oversample=True)
        total_plain = sum(sum(r.values()) for r in plain.confusion.values())
        total_boosted = sum(sum(r.values()) for r in boosted.confusion.values())
        assert total_plain == total_boosted == len(ds)


class TestGridSearch:
    def test_grid_of_one(self):
        ds = tiny_dataset(10, 40)
        spec = ModelSpec("svm", WORD1, {"epochs": 2})
        best, table = grid_search(ds, [spec], k=5, seed=0)
        assert best is spec
        assert len(table) == 1

    def test_dominant_config_wins(self):
        ds = tiny_dataset(10, 40)
        weak = ModelSpec("svm", WORD1, {"epochs": 0})   # never learns
        strong = ModelSpec("svm", WORD1, {"epochs": 8, "lambda_": 0.01})
        best, table = grid_search(ds, [weak, strong], k=5, seed=0)
        assert best is strong
        assert table[1]["macro_f1"] > table[0]["macro_f1"]

    def test_tie_breaks_to_earliest(self):
        ds = tiny_dataset(10, 40)
        a = ModelSpec("svm", WORD1, {"epochs": 2})
        b = ModelSpec("svm", WORD1, {"epochs": 2})
        best, _ = grid_search(ds, [a, b], k=5, seed=0)
        assert best is a

    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError):
            grid_search(tiny_dataset(10, 40), [], k=5, seed=0)


class TestOversamplingDirection:
    def test_direction_on_small_synthetic(self):
        # desk-size miniature of the acceptance direction check
        ds = make_synthetic_dataset(n=1200, positive_rate=0.05, seed=1)
        train_idx, test_idx = stratified_folds(ds, k=3, seed=1)[0]
        train = Dataset([ds.examples[i] for i in train_idx])
        test = [ds.examples[i] for i in test_idx]
        spec = ModelSpec("svm", FeatureConfig("word", 1, 1, min_count=2), {"epochs": 5})

        def minority_recall(with_oversample):
            tr = random_oversample(train, 99) if with_oversample else train
            artifact = train_model(tr, spec, seed=2)
            pred = {e.post_id: predict(artifact, e.post)[0] for e in test}
            gold = {e.post_id: e.label for e in test}
            return evaluate(pred, gold).per_class[HATE].recall

        assert minority_recall(True) >= minority_recall(False)
