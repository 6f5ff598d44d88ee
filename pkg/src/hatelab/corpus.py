"""Post ingestion and the cleaning pipeline, with per-step count reporting.

Ingestion is file-based: a CSV export with a fixed header stands in for
the platform API (a pluggable fetcher seam exists, but only the file
implementation ships). The pipeline applies, in order: drop non-text,
deduplicate to the latest fetch, normalize script, strip emoji, filter by
Burmese ratio, filter by syllable count, constrained shuffle, then
tokenization plus stopword removal plus lexicon matching.
"""

from __future__ import annotations

import csv
import json
import random
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Protocol, Sequence

from . import encoding, segment
from .errors import FileUnreadable, HeaderMismatch
from .lexicon import HateTerm, Lexicon, TermHit, build_matcher, match_terms
from .segment import SegmentDictionary, SyllableKind

REQUIRED_COLUMNS = ["post_id", "source_id", "source_name", "created_at",
                    "fetched_at", "text", "url", "interactions"]


@dataclass(frozen=True)
class RawPost:
    post_id: str
    source_id: str
    source_name: str
    created_at: datetime | None
    fetched_at: datetime | None
    text: str
    url: str | None
    interactions: int


@dataclass
class CleanPost:
    post_id: str
    source_id: str
    text: str
    was_zawgyi: bool
    syllable_count: int
    tokens: list[str]
    lexicon_hits: list[TermHit]
    url: str | None = None  # link-out to the original post, when known

    def to_dict(self) -> dict:
        return {
            "post_id": self.post_id,
            "source_id": self.source_id,
            "text": self.text,
            "was_zawgyi": self.was_zawgyi,
            "syllable_count": self.syllable_count,
            "tokens": self.tokens,
            "lexicon_hits": [
                {"term": h.term.term, "source": h.term.source,
                 "start": h.start, "end": h.end}
                for h in self.lexicon_hits
            ],
            "url": self.url,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CleanPost":
        hits = [TermHit(HateTerm(h["term"], h["source"]), h["start"], h["end"], d["post_id"])
                for h in d["lexicon_hits"]]
        return cls(d["post_id"], d["source_id"], d["text"], d["was_zawgyi"],
                   d["syllable_count"], list(d["tokens"]), hits, d.get("url"))


@dataclass
class IngestReport:
    total_rows: int
    ingested: int
    skipped: list[tuple[int, str]]  # (row number, reason)

    def to_dict(self) -> dict:
        return {"total_rows": self.total_rows, "ingested": self.ingested,
                "skipped": [{"row": r, "reason": why} for r, why in self.skipped]}


@dataclass
class PipelineStep:
    name: str
    input_count: int
    output_count: int

    @property
    def removed_count(self) -> int:
        return self.input_count - self.output_count


@dataclass
class PipelineReport:
    steps: list[PipelineStep] = field(default_factory=list)
    seed: int = 0
    shuffle_adjacency_warnings: int = 0

    def add(self, name: str, input_count: int, output_count: int) -> None:
        self.steps.append(PipelineStep(name, input_count, output_count))

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "shuffle_adjacency_warnings": self.shuffle_adjacency_warnings,
            "steps": [
                {"name": s.name, "input_count": s.input_count,
                 "output_count": s.output_count, "removed_count": s.removed_count}
                for s in self.steps
            ],
        }


class PostFetcher(Protocol):
    """Seam for a live-platform fetcher; only the file-based one ships."""

    def fetch(self) -> tuple[list[RawPost], IngestReport]: ...


class FileFetcher:
    def __init__(self, path: str | Path):
        self.path = path

    def fetch(self) -> tuple[list[RawPost], IngestReport]:
        return ingest(self.path)


def _parse_ts(value: str) -> datetime | None:
    value = value.strip()
    if not value:
        return None
    ts = datetime.fromisoformat(value.replace("Z", "+00:00"))
    if ts.tzinfo is None:  # bare timestamps are taken as UTC
        ts = ts.replace(tzinfo=timezone.utc)
    return ts


_EPOCH = datetime.min.replace(tzinfo=timezone.utc)


def ingest(path: str | Path) -> tuple[list[RawPost], IngestReport]:
    """Read a CSV export; malformed rows are skipped and reported with their
    row numbers (header is row 1)."""
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise FileUnreadable(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise HeaderMismatch(missing)
        posts: list[RawPost] = []
        skipped: list[tuple[int, str]] = []
        total = 0
        for rownum, row in enumerate(reader, start=2):
            total += 1
            post_id = (row.get("post_id") or "").strip()
            if not post_id:
                skipped.append((rownum, "missing post_id"))
                continue
            try:
                created = _parse_ts(row.get("created_at") or "")
                fetched = _parse_ts(row.get("fetched_at") or "")
            except ValueError:
                skipped.append((rownum, "bad timestamp"))
                continue
            if created and fetched and fetched < created:
                skipped.append((rownum, "fetched_at before created_at"))
                continue
            raw_inter = (row.get("interactions") or "").strip()
            try:
                interactions = int(raw_inter) if raw_inter else 0
            except ValueError:
                skipped.append((rownum, "bad interactions"))
                continue
            if interactions < 0:
                skipped.append((rownum, "negative interactions"))
                continue
            posts.append(RawPost(
                post_id=post_id,
                source_id=(row.get("source_id") or "").strip(),
                source_name=(row.get("source_name") or "").strip(),
                created_at=created,
                fetched_at=fetched,
                text=row.get("text") or "",
                url=(row.get("url") or "").strip() or None,
                interactions=interactions,
            ))
    return posts, IngestReport(total, len(posts), skipped)


def _is_url_token(token: str) -> bool:
    if token.lower().startswith("www.") and len(token) > 4:
        return True
    scheme, sep, rest = token.partition("://")
    return bool(sep) and bool(rest) and scheme.isalnum()


def drop_non_text(posts: Sequence[RawPost]) -> list[RawPost]:
    """Remove posts whose text is empty, whitespace-only, or URLs only."""
    kept = []
    for post in posts:
        tokens = post.text.split()
        if tokens and not all(_is_url_token(t) for t in tokens):
            kept.append(post)
    return kept


def dedup_latest(posts: Sequence[RawPost]) -> list[RawPost]:
    """One post per post_id: maximum fetched_at, ties to the later file
    position. Output keeps first-appearance order of ids."""
    best: dict[str, tuple[int, RawPost]] = {}
    order: list[str] = []
    for pos, post in enumerate(posts):
        if post.post_id not in best:
            best[post.post_id] = (pos, post)
            order.append(post.post_id)
            continue
        old_pos, old = best[post.post_id]
        old_key = (old.fetched_at or _EPOCH, old_pos)
        new_key = (post.fetched_at or _EPOCH, pos)
        if new_key >= old_key:
            best[post.post_id] = (pos, post)
    return [best[pid][1] for pid in order]


def constrained_shuffle(posts: Sequence[RawPost], seed: int) -> tuple[list[RawPost], int]:
    """Seeded uniform shuffle plus a repair pass so no two consecutive posts
    share source_id; returns (posts, remaining_adjacency_count).

    The repair is a greedy forward-swap scan; if adjacencies survive it
    (they can in principle even when a valid arrangement exists), a
    deterministic round-robin rebuild by source frequency runs as a
    fallback. Remaining adjacencies are only possible when one source holds
    more than ceil(n/2) posts.
    """
    arranged = list(posts)
    random.Random(seed).shuffle(arranged)
    n = len(arranged)

    def adjacencies(seq: Sequence[RawPost]) -> int:
        return sum(1 for i in range(1, len(seq)) if seq[i].source_id == seq[i - 1].source_id)

    for i in range(1, n):
        if arranged[i].source_id != arranged[i - 1].source_id:
            continue
        for j in range(i + 1, n):
            cand = arranged[j]
            if cand.source_id == arranged[i - 1].source_id:
                continue
            # placing arranged[i] at j must not create a new adjacency there
            left = arranged[j - 1].source_id if j - 1 != i else cand.source_id
            right = arranged[j + 1].source_id if j + 1 < n else None
            if arranged[i].source_id in (left, right):
                continue
            arranged[i], arranged[j] = arranged[j], arranged[i]
            break

    if adjacencies(arranged) > 0:
        # round-robin rebuild: most frequent source first, even slots then odd
        groups: dict[str, list[RawPost]] = {}
        group_order: list[str] = []
        for post in arranged:
            if post.source_id not in groups:
                groups[post.source_id] = []
                group_order.append(post.source_id)
            groups[post.source_id].append(post)
        group_order.sort(key=lambda s: (-len(groups[s]), s))
        flat = [p for s in group_order for p in groups[s]]
        slots: list[RawPost | None] = [None] * n
        even = list(range(0, n, 2)) + list(range(1, n, 2))
        for slot, post in zip(even, flat):
            slots[slot] = post
        arranged = [p for p in slots if p is not None]

    return arranged, adjacencies(arranged)


@dataclass
class PipelineConfig:
    lexicon: Lexicon
    dictionary: SegmentDictionary
    stopwords: set[str]
    min_syllables: int = 3
    ratio_threshold: float = 0.5
    seed: int = 0


def clean_pipeline(posts: Sequence[RawPost],
                   config: PipelineConfig) -> tuple[list[CleanPost], PipelineReport]:
    """Run the full cleaning pipeline; every step reports its counts."""
    report = PipelineReport(seed=config.seed)
    matcher = build_matcher(config.lexicon)

    stage = list(posts)
    n = len(stage)
    stage = drop_non_text(stage)
    report.add("drop_non_text", n, len(stage))

    n = len(stage)
    stage = dedup_latest(stage)
    report.add("dedup_latest", n, len(stage))

    n = len(stage)
    normalized: list[tuple[RawPost, str, bool]] = []
    markers = encoding.default_markers()
    for post in stage:
        text, was_zg = encoding.normalize(post.text)
        z, _ = markers.count(text)
        if z > 0:  # unconvertible fragment; segmentation would refuse it
            continue
        normalized.append((post, text, was_zg))
    report.add("normalize", n, len(normalized))

    n = len(normalized)
    normalized = [(p, segment.strip_emoji(t), z) for p, t, z in normalized]
    report.add("strip_emoji", n, len(normalized))

    n = len(normalized)
    normalized = [(p, t, z) for p, t, z in normalized
                  if segment.burmese_ratio(t) >= config.ratio_threshold]
    report.add("language_filter", n, len(normalized))

    n = len(normalized)
    with_syllables = []
    for p, t, z in normalized:
        sylls = segment.segment_syllables(t)
        count = sum(1 for s in sylls if s.kind is SyllableKind.MYANMAR)
        if count >= config.min_syllables:
            with_syllables.append((p, t, z, sylls, count))
    report.add("syllable_filter", n, len(with_syllables))

    n = len(with_syllables)
    by_id = {p.post_id: (p, t, z, sylls, c) for p, t, z, sylls, c in with_syllables}
    shuffled_raw, warnings = constrained_shuffle([p for p, *_ in with_syllables], config.seed)
    report.shuffle_adjacency_warnings = warnings
    ordered = [by_id[p.post_id] for p in shuffled_raw]
    report.add("constrained_shuffle", n, len(ordered))

    n = len(ordered)
    cleaned: list[CleanPost] = []
    for post, text, was_zg, sylls, count in ordered:
        tokens = segment.segment_words(sylls, config.dictionary)
        tokens = segment.remove_stopwords(tokens, config.stopwords)
        hits = match_terms(matcher, text, post.post_id)
        cleaned.append(CleanPost(
            post_id=post.post_id,
            source_id=post.source_id,
            text=text,
            was_zawgyi=was_zg,
            syllable_count=count,
            tokens=[t.text for t in tokens],
            lexicon_hits=hits,
            url=post.url,
        ))
    report.add("tokenize", n, len(cleaned))
    return cleaned, report


def write_corpus(posts: Iterable[CleanPost], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for post in posts:
            fh.write(json.dumps(post.to_dict(), ensure_ascii=False) + "\n")


def read_corpus(path: str | Path) -> list[CleanPost]:
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise FileUnreadable(f"cannot read corpus {path}: {exc}") from exc
    return [CleanPost.from_dict(json.loads(line))
            for line in raw.splitlines() if line.strip()]
