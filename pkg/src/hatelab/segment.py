"""Burmese syllable and word segmentation, plus small text filters.

Burmese has no reliable word spacing, so the syllable is the stable
sub-word unit. The boundary rule: a new Myanmar syllable begins at each
base consonant (U+1000-U+102A) unless the consonant is preceded by the
virama U+1039 (stacked) or followed by the asat U+103A (it then closes
the previous syllable). Dependent signs attach to the current syllable;
maximal runs of non-Myanmar codepoints form one Other syllable each.

Word segmentation is greedy longest-match against a plain word list;
out-of-dictionary positions fall back to single syllables, which is also
what justifies syllable/character n-gram features downstream.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from . import encoding
from .errors import NotNormalized


class SyllableKind(str, Enum):
    MYANMAR = "myanmar"
    OTHER = "other"


@dataclass(frozen=True)
class Syllable:
    text: str
    start: int  # codepoint offset into the source, inclusive
    end: int    # exclusive
    kind: SyllableKind


@dataclass(frozen=True)
class Token:
    text: str
    syllable_span: tuple[int, int]  # (first, last) syllable indices, inclusive
    in_dictionary: bool


_VIRAMA = 0x1039
_ASAT = 0x103A

# Dependent signs attach to the syllable in progress. Everything else in
# the Myanmar block (digits, punctuation, rare letters) starts a syllable.
_DEPENDENT = set(range(0x102B, 0x1036)) | {0x1036, 0x1037, 0x1038, 0x1039, 0x103A} \
    | set(range(0x103B, 0x103F)) | set(range(0x1056, 0x105A)) | {0x1064}


def _is_base_consonant(cp: int) -> bool:
    return 0x1000 <= cp <= 0x102A


def segment_syllables(text: str) -> list[Syllable]:
    """Split normalized text into syllables; reconstruction-exact.

    Raises NotNormalized when a Zawgyi marker pattern is present, since the
    boundary rule is only meaningful on logical-order Unicode.
    """
    z, _ = encoding.default_markers().count(text)
    if z > 0:
        raise NotNormalized("text carries Zawgyi marker patterns; normalize first")

    syllables: list[Syllable] = []
    cur_start: int | None = None
    cur_kind: SyllableKind | None = None

    def flush(end: int) -> None:
        nonlocal cur_start, cur_kind
        if cur_start is not None:
            syllables.append(Syllable(text[cur_start:end], cur_start, end, cur_kind))
            cur_start = None
            cur_kind = None

    n = len(text)
    for i, ch in enumerate(text):
        cp = ord(ch)
        if not encoding.is_myanmar(cp):
            if cur_kind is not SyllableKind.OTHER:
                flush(i)
                cur_start, cur_kind = i, SyllableKind.OTHER
            continue
        in_myanmar = cur_kind is SyllableKind.MYANMAR
        if _is_base_consonant(cp):
            stacked = i > 0 and ord(text[i - 1]) == _VIRAMA and in_myanmar
            closes_previous = (i + 1 < n and ord(text[i + 1]) == _ASAT) and in_myanmar
            if stacked or closes_previous:
                continue  # attaches to the syllable in progress
            flush(i)
            cur_start, cur_kind = i, SyllableKind.MYANMAR
        elif cp in _DEPENDENT:
            if not in_myanmar:  # orphan sign: opens its own Myanmar syllable
                flush(i)
                cur_start, cur_kind = i, SyllableKind.MYANMAR
        else:
            # digits, section marks, rare letters: one syllable each
            flush(i)
            cur_start, cur_kind = i, SyllableKind.MYANMAR
    flush(n)
    return syllables


class SegmentDictionary:
    """Word list indexed by its syllable decomposition for longest match."""

    def __init__(self, words: Iterable[str]):
        self.entries: set[tuple[str, ...]] = set()
        for word in words:
            sylls = tuple(s.text for s in segment_syllables(word))
            if sylls:
                self.entries.add(sylls)
        self.max_syllables = max((len(e) for e in self.entries), default=0)

    @classmethod
    def load(cls, path: str | Path) -> "SegmentDictionary":
        words = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            word = line.strip()
            if not word or word.startswith("#"):
                continue
            normalized, _ = encoding.normalize(word)
            words.append(normalized)
        return cls(words)

    def __len__(self) -> int:
        return len(self.entries)


def segment_words(syllables: Sequence[Syllable],
                  dictionary: SegmentDictionary) -> list[Token]:
    """Greedy longest-match over Myanmar syllables; OOV falls back to one
    syllable; Other syllables become single tokens."""
    tokens: list[Token] = []
    i, n = 0, len(syllables)
    while i < n:
        syl = syllables[i]
        if syl.kind is SyllableKind.OTHER:
            tokens.append(Token(syl.text, (i, i), False))
            i += 1
            continue
        matched = False
        limit = min(dictionary.max_syllables, n - i)
        for length in range(limit, 1, -1):
            window = syllables[i:i + length]
            if any(s.kind is not SyllableKind.MYANMAR for s in window):
                continue
            candidate = tuple(s.text for s in window)
            if candidate in dictionary.entries:
                tokens.append(Token("".join(candidate), (i, i + length - 1), True))
                i += length
                matched = True
                break
        if not matched:
            in_dict = (syl.text,) in dictionary.entries
            tokens.append(Token(syl.text, (i, i), in_dict))
            i += 1
    return tokens


def remove_stopwords(tokens: Sequence[Token], stoplist: set[str]) -> list[Token]:
    """Order-preserving filter on exact token text."""
    return [t for t in tokens if t.text not in stoplist]


def load_stopwords(path: str | Path) -> set[str]:
    stops = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        word = line.strip()
        if not word or word.startswith("#"):
            continue
        normalized, _ = encoding.normalize(word)
        stops.add(normalized)
    return stops


def burmese_ratio(text: str) -> float:
    """Myanmar-block codepoints over non-whitespace codepoints; 0.0 when
    there is nothing to count."""
    non_ws = [c for c in text if not c.isspace()]
    if not non_ws:
        return 0.0
    myanmar = sum(1 for c in non_ws if encoding.is_myanmar(ord(c)))
    return myanmar / len(non_ws)


class EmojiRanges:
    """Codepoint intervals stripped from post text, maintained as data."""

    def __init__(self, intervals: list[tuple[int, int]]):
        self.intervals = sorted(intervals)
        self._starts = [lo for lo, _ in self.intervals]

    @classmethod
    def load(cls, path: str | Path) -> "EmojiRanges":
        intervals = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            lo, hi = line.split("\t")
            intervals.append((int(lo, 16), int(hi, 16)))
        return cls(intervals)

    def __contains__(self, cp: int) -> bool:
        idx = bisect.bisect_right(self._starts, cp) - 1
        if idx < 0:
            return False
        lo, hi = self.intervals[idx]
        return lo <= cp <= hi


@lru_cache(maxsize=1)
def default_emoji_ranges() -> EmojiRanges:
    return EmojiRanges.load(Path(resources.files("hatelab").joinpath("data", "emoji_ranges.tsv")))


def strip_emoji(text: str, ranges: EmojiRanges | None = None) -> str:
    ranges = ranges or default_emoji_ranges()
    return "".join(c for c in text if ord(c) not in ranges)
