"""Hate-term lexicons: loading, merging with duplicate/containment reports,
and multi-pattern occurrence search.

Matching is raw-substring on normalized text, not token-boundary-restricted:
Burmese lacks reliable word boundaries, so boundary-restricted matching
would miss hits. The matcher is an Aho-Corasick automaton over codepoints,
so one pass over the text reports all occurrences of all terms, including
overlapping ones.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

from . import encoding
from .errors import EmptyLexicon, FileUnreadable


@dataclass(frozen=True)
class HateTerm:
    term: str  # normalized text
    source: str
    note: str = ""


@dataclass
class Lexicon:
    terms: list[HateTerm]
    duplicate_warnings: int = 0

    def __len__(self) -> int:
        return len(self.terms)

    def term_texts(self) -> list[str]:
        return [t.term for t in self.terms]


@dataclass
class MergeReport:
    exact_duplicates: int
    exact_pairs: list[str]                      # duplicated term texts
    containments: int
    containment_pairs: list[tuple[str, str]]    # (shorter, longer)
    total_terms: int

    def to_dict(self) -> dict:
        return {
            "exact_duplicates": self.exact_duplicates,
            "exact_pairs": self.exact_pairs,
            "containments": self.containments,
            "containment_pairs": [list(p) for p in self.containment_pairs],
            "total_terms": self.total_terms,
        }


@dataclass(frozen=True)
class TermHit:
    term: HateTerm
    start: int
    end: int
    post_id: str


def load_lexicon(path: str | Path, source_tag: str) -> Lexicon:
    """Load a `term<TAB>source<TAB>note` TSV (later columns optional).

    Every term is normalized (Zawgyi conversion plus canonical sign order);
    duplicate lines within one file collapse with a warning count.
    """
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise FileUnreadable(f"cannot read lexicon {path}: {exc}") from exc

    seen: dict[str, HateTerm] = {}
    duplicates = 0
    for line in raw.splitlines():
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.rstrip("\n").split("\t")
        term_raw = fields[0].strip()
        if not term_raw:
            continue
        source = fields[1].strip() if len(fields) > 1 and fields[1].strip() else source_tag
        note = fields[2].strip() if len(fields) > 2 else ""
        term, _ = encoding.normalize(term_raw)
        if term in seen:
            duplicates += 1
            continue
        seen[term] = HateTerm(term, source, note)
    if not seen:
        raise EmptyLexicon(f"no terms in {path} after normalization")
    return Lexicon(list(seen.values()), duplicate_warnings=duplicates)


def merge_lexicons(a: Lexicon, b: Lexicon) -> tuple[Lexicon, MergeReport]:
    """Union with exact duplicates removed (a's metadata wins).

    Containments (one term a strict substring of another) are reported but
    both terms stay: only exact matches get removed.
    """
    merged: dict[str, HateTerm] = {t.term: t for t in a.terms}
    exact_pairs = []
    for t in b.terms:
        if t.term in merged:
            exact_pairs.append(t.term)
        else:
            merged[t.term] = t
    terms = list(merged.values())

    containment_pairs = []
    texts = [t.term for t in terms]
    matcher = build_matcher(Lexicon(terms))
    for longer in texts:
        for hit in match_terms(matcher, longer, post_id=""):
            if hit.term.term != longer:
                containment_pairs.append((hit.term.term, longer))
    containment_pairs = sorted(set(containment_pairs))

    report = MergeReport(
        exact_duplicates=len(exact_pairs),
        exact_pairs=sorted(exact_pairs),
        containments=len(containment_pairs),
        containment_pairs=containment_pairs,
        total_terms=len(terms),
    )
    return Lexicon(terms), report


@dataclass
class _Node:
    children: dict[str, "_Node"] = field(default_factory=dict)
    fail: "_Node | None" = None
    output: list[int] = field(default_factory=list)  # term indices ending here


class Matcher:
    """Aho-Corasick automaton; immutable after build, safe to share."""

    def __init__(self, terms: list[HateTerm]):
        self.terms = terms
        self._root = _Node()
        for idx, term in enumerate(terms):
            node = self._root
            for ch in term.term:
                node = node.children.setdefault(ch, _Node())
            node.output.append(idx)
        self._build_failure_links()

    def _build_failure_links(self) -> None:
        root = self._root
        root.fail = root
        queue: deque[_Node] = deque()
        for child in root.children.values():
            child.fail = root
            queue.append(child)
        while queue:
            current = queue.popleft()
            for ch, child in current.children.items():
                fallback = current.fail
                while fallback is not root and ch not in fallback.children:
                    fallback = fallback.fail
                target = fallback.children.get(ch, root)
                child.fail = target if target is not child else root
                child.output = child.output + child.fail.output
                queue.append(child)

    def scan(self, text: str) -> list[tuple[int, int]]:
        """Yield (term_index, end_offset_exclusive) for every occurrence."""
        hits = []
        node = self._root
        root = self._root
        for pos, ch in enumerate(text):
            while node is not root and ch not in node.children:
                node = node.fail
            node = node.children.get(ch, root)
            for idx in node.output:
                hits.append((idx, pos + 1))
        return hits


def build_matcher(lexicon: Lexicon) -> Matcher:
    return Matcher(lexicon.terms)


def match_terms(matcher: Matcher, text: str, post_id: str) -> list[TermHit]:
    """All occurrences of all terms, ascending start offset, ties longest
    first. Overlaps are reported."""
    hits = []
    for idx, end in matcher.scan(text):
        term = matcher.terms[idx]
        start = end - len(term.term)
        hits.append(TermHit(term, start, end, post_id))
    hits.sort(key=lambda h: (h.start, -(h.end - h.start)))
    return hits
