"""Balanced random forest: every tree fits a bootstrap in which the
majority class is downsampled to the minority count, so each tree sees a
balanced sample no matter how skewed the data. Splits minimize Gini
impurity over a random feature subset (default ceil(sqrt(V)))."""

from __future__ import annotations

import math

import numpy as np

from ..errors import SingleClass
from ..features import FeatureConfig, build_vocab, tfidf_vectorize
from .base import HATE, Dataset, ModelArtifact


def _best_split(x: np.ndarray, is_hate: np.ndarray):
    """Best threshold on one column by Gini; None when the column is
    constant. Returns (gini, threshold)."""
    order = np.argsort(x, kind="stable")
    xs = x[order]
    hs = is_hate[order].astype(np.float64)
    n = len(xs)
    cum_h = np.cumsum(hs)
    total_h = cum_h[-1]
    # split after position i (left = [0..i]), valid where value changes
    boundary = np.nonzero(xs[:-1] < xs[1:])[0]
    if len(boundary) == 0:
        return None
    n_left = boundary + 1.0
    n_right = n - n_left
    h_left = cum_h[boundary]
    h_right = total_h - h_left
    p_l = h_left / n_left
    p_r = h_right / n_right
    gini = (n_left * (2 * p_l * (1 - p_l)) + n_right * (2 * p_r * (1 - p_r))) / n
    best = int(np.argmin(gini))
    threshold = (xs[boundary[best]] + xs[boundary[best] + 1]) / 2.0
    return float(gini[best]), float(threshold)


def _grow_tree(X: np.ndarray, is_hate: np.ndarray, rows: np.ndarray,
               col_of_global: dict[int, int], n_global: int,
               features_per_split: int, depth: int, max_depth: int,
               rng: np.random.Generator) -> dict:
    n_h = int(is_hate[rows].sum())
    n_n = len(rows) - n_h
    leaf = {"leaf": [n_h, n_n]}
    if depth >= max_depth or n_h == 0 or n_n == 0 or len(rows) < 2:
        return leaf

    candidates = rng.choice(n_global, size=min(features_per_split, n_global), replace=False)
    best = None
    for feat in candidates:
        local = col_of_global.get(int(feat))
        if local is None:
            continue
        split = _best_split(X[rows, local], is_hate[rows])
        if split is None:
            continue
        gini, threshold = split
        if best is None or gini < best[0]:
            best = (gini, int(feat), local, threshold)
    if best is None:
        return leaf

    _, feat, local, threshold = best
    mask = X[rows, local] <= threshold
    left_rows, right_rows = rows[mask], rows[~mask]
    if len(left_rows) == 0 or len(right_rows) == 0:
        return leaf
    return {
        "feature": feat,
        "threshold": threshold,
        "left": _grow_tree(X, is_hate, left_rows, col_of_global, n_global,
                           features_per_split, depth + 1, max_depth, rng),
        "right": _grow_tree(X, is_hate, right_rows, col_of_global, n_global,
                            features_per_split, depth + 1, max_depth, rng),
    }


def train_brf(train: Dataset, features: FeatureConfig | None = None,
              n_trees: int = 50, max_depth: int = 8,
              features_per_split: int | None = None, seed: int = 0) -> ModelArtifact:
    counts = train.class_counts()
    if min(counts.values()) == 0:
        raise SingleClass(f"both classes required, got {counts}")
    features = features or FeatureConfig()

    vocab = build_vocab((e.post for e in train.examples), features)
    vectors = [tfidf_vectorize(e.post, vocab) for e in train.examples]
    labels_hate = np.array([e.label == HATE for e in train.examples])
    n_global = len(vocab)
    fps = features_per_split or math.ceil(math.sqrt(n_global))

    hate_idx = np.nonzero(labels_hate)[0]
    not_idx = np.nonzero(~labels_hate)[0]
    n_min = min(len(hate_idx), len(not_idx))

    trees = []
    tree_sample_ids = []
    for tree_no in range(n_trees):
        rng = np.random.default_rng([seed, tree_no])
        boot = np.concatenate([
            hate_idx[rng.integers(0, len(hate_idx), size=n_min)],
            not_idx[rng.integers(0, len(not_idx), size=n_min)],
        ])
        tree_sample_ids.append([train.examples[i].post_id for i in boot])

        # densify only the features present in this bootstrap
        local_features = sorted({int(j) for i in boot for j in vectors[i].indices})
        col_of_global = {g: c for c, g in enumerate(local_features)}
        X = np.zeros((len(boot), len(local_features)))
        for row, i in enumerate(boot):
            vec = vectors[i]
            for j, w in zip(vec.indices, vec.weights):
                X[row, col_of_global[int(j)]] = w
        is_hate = labels_hate[boot]

        tree = _grow_tree(X, is_hate, np.arange(len(boot)), col_of_global,
                          n_global, fps, 0, max_depth, rng)
        trees.append(tree)

    return ModelArtifact(
        model_type="brf",
        hyperparameters={"n_trees": n_trees, "max_depth": max_depth,
                         "features_per_split": fps},
        feature_config={"kind": "tfidf_vocab", "vocab": vocab.to_dict()},
        params={"trees": trees, "n_features": n_global,
                "tree_sample_ids": tree_sample_ids},
        seed=seed,
    )
