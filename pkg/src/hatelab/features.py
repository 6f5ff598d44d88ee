"""Sparse feature extraction: word/char/syllable n-grams, smoothed TF-IDF
weighting, and a stable hashing variant for the fastText-style model.

The hash is FNV-1a over UTF-8 bytes, so feature indices are identical
across runs and platforms.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable

import numpy as np

from . import segment
from .errors import EmptyVocab

if TYPE_CHECKING:
    from .corpus import CleanPost

# joins n-gram parts; the unit separator cannot appear in tokens
_SEP = "\x1f"

UNITS = ("word", "char", "syllable")


@dataclass(frozen=True)
class FeatureConfig:
    unit: str = "word"
    n_lo: int = 1
    n_hi: int = 1
    min_count: int = 1

    def __post_init__(self):
        if self.unit not in UNITS:
            raise ValueError(f"unit must be one of {UNITS}, got {self.unit!r}")
        if not 1 <= self.n_lo <= self.n_hi:
            raise ValueError(f"need 1 <= n_lo <= n_hi, got {self.n_lo}..{self.n_hi}")

    def to_dict(self) -> dict:
        return {"unit": self.unit, "n_lo": self.n_lo, "n_hi": self.n_hi,
                "min_count": self.min_count}

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureConfig":
        return cls(d["unit"], d["n_lo"], d["n_hi"], d["min_count"])


class SparseVector:
    """Ordered (index, weight) pairs; indices strictly ascending."""

    __slots__ = ("indices", "weights")

    def __init__(self, indices, weights):
        self.indices = np.asarray(indices, dtype=np.int64)
        self.weights = np.asarray(weights, dtype=np.float64)

    @classmethod
    def from_counts(cls, counts: dict[int, float]) -> "SparseVector":
        if not counts:
            return cls([], [])
        idx = sorted(counts)
        return cls(idx, [counts[i] for i in idx])

    @property
    def nnz(self) -> int:
        return len(self.indices)

    def norm(self) -> float:
        return float(np.sqrt(np.dot(self.weights, self.weights)))

    def l2_normalized(self) -> "SparseVector":
        n = self.norm()
        if n == 0.0:
            return self
        return SparseVector(self.indices, self.weights / n)

    def to_pairs(self) -> list[list[float]]:
        return [[int(i), float(w)] for i, w in zip(self.indices, self.weights)]

    def __eq__(self, other) -> bool:
        return (isinstance(other, SparseVector)
                and np.array_equal(self.indices, other.indices)
                and np.array_equal(self.weights, other.weights))

    def __repr__(self) -> str:
        return f"SparseVector({list(self.indices)!r}, {list(self.weights)!r})"


def _units_of(post: "CleanPost", unit: str) -> list[str]:
    if unit == "word":
        return list(post.tokens)
    if unit == "syllable":
        return [s.text for s in segment.segment_syllables(post.text)]
    raise ValueError(unit)


def extract_ngrams(post: "CleanPost", unit: str, n_range: tuple[int, int]) -> Counter:
    """Multiset of contiguous n-grams, n from lo to hi inclusive.

    unit="word" runs over tokens, unit="syllable" over syllables of the
    text, unit="char" over codepoints within each token (never across
    token boundaries).
    """
    lo, hi = n_range
    if not 1 <= lo <= hi:
        raise ValueError(f"need 1 <= lo <= hi, got {n_range}")
    grams: Counter = Counter()
    if unit == "char":
        for token in post.tokens:
            for n in range(lo, hi + 1):
                for i in range(len(token) - n + 1):
                    grams[token[i:i + n]] += 1
        return grams
    parts = _units_of(post, unit)
    for n in range(lo, hi + 1):
        for i in range(len(parts) - n + 1):
            grams[_SEP.join(parts[i:i + n])] += 1
    return grams


@dataclass
class Vocab:
    """n-gram to dense column index, with document frequencies."""

    config: FeatureConfig
    index: dict[str, int]
    df: dict[str, int]
    n_docs: int
    idf: dict[str, float] = field(init=False)

    def __post_init__(self):
        self.idf = {g: math.log((1 + self.n_docs) / (1 + self.df[g])) + 1.0
                    for g in self.index}

    def __len__(self) -> int:
        return len(self.index)

    def to_dict(self) -> dict:
        ngrams = sorted(self.index, key=self.index.get)
        return {
            "config": self.config.to_dict(),
            "ngrams": ngrams,
            "df": [self.df[g] for g in ngrams],
            "n_docs": self.n_docs,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Vocab":
        index = {g: i for i, g in enumerate(d["ngrams"])}
        df = {g: n for g, n in zip(d["ngrams"], d["df"])}
        return cls(FeatureConfig.from_dict(d["config"]), index, df, d["n_docs"])


def build_vocab(corpus: Iterable["CleanPost"], config: FeatureConfig) -> Vocab:
    """Document-frequency counted vocabulary; df counts documents, not
    occurrences, and n-grams below min_count are dropped."""
    df: Counter = Counter()
    n_docs = 0
    for post in corpus:
        n_docs += 1
        grams = extract_ngrams(post, config.unit, (config.n_lo, config.n_hi))
        df.update(set(grams))
    kept = sorted(g for g, count in df.items() if count >= config.min_count)
    if not kept:
        raise EmptyVocab(f"no n-gram met min_count={config.min_count} over {n_docs} docs")
    index = {g: i for i, g in enumerate(kept)}
    return Vocab(config, index, {g: df[g] for g in kept}, n_docs)


def tfidf_vectorize(post: "CleanPost", vocab: Vocab) -> SparseVector:
    """weight = tf_raw * (ln((1+N)/(1+df)) + 1), then L2-normalized.

    Out-of-vocabulary n-grams are ignored; a document with no known
    n-grams becomes the zero vector.
    """
    grams = extract_ngrams(post, vocab.config.unit, (vocab.config.n_lo, vocab.config.n_hi))
    counts: dict[int, float] = {}
    for gram, tf in grams.items():
        col = vocab.index.get(gram)
        if col is not None:
            counts[col] = tf * vocab.idf[gram]
    return SparseVector.from_counts(counts).l2_normalized()


_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def stable_hash64(s: str) -> int:
    """FNV-1a over UTF-8; stable across runs and platforms."""
    h = _FNV_OFFSET
    for byte in s.encode("utf-8"):
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def hash_features(ngrams: Counter | Iterable[str], buckets: int) -> SparseVector:
    """index = stable 64-bit hash mod buckets; collisions sum."""
    if buckets < 1:
        raise ValueError(f"buckets must be >= 1, got {buckets}")
    counts: dict[int, float] = {}
    items = ngrams.items() if isinstance(ngrams, Counter) else ((g, 1) for g in ngrams)
    for gram, count in items:
        idx = stable_hash64(gram) % buckets
        counts[idx] = counts.get(idx, 0.0) + count
    return SparseVector.from_counts(counts)


def hashed_ngram_ids(post: "CleanPost", word_ngrams: int,
                     char_ngrams: tuple[int, int] | None,
                     buckets: int) -> list[int]:
    """Bucket ids with multiplicity for the fastText-style embedding bag.

    Word n-grams and char n-grams live in one bucket space, namespaced so
    a word unigram and an identical char sequence cannot alias.
    """
    ids: list[int] = []
    tokens = list(post.tokens)
    for n in range(1, word_ngrams + 1):
        for i in range(len(tokens) - n + 1):
            ids.append(stable_hash64("w:" + _SEP.join(tokens[i:i + n])) % buckets)
    if char_ngrams is not None:
        lo, hi = char_ngrams
        for token in tokens:
            for n in range(lo, hi + 1):
                for i in range(len(token) - n + 1):
                    ids.append(stable_hash64("c:" + token[i:i + n]) % buckets)
    return ids
