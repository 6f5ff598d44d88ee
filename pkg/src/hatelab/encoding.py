"""Burmese script encoding: Zawgyi detection and conversion to standard Unicode.

Zawgyi is a de-facto font encoding that reuses Myanmar-block codepoints
(U+1000-U+109F) in visual order with private substitutions, so the same
codepoint means different things in the two encodings. Detection is a
marker-count heuristic over a curated pattern table; conversion is an
ordered rewrite-rule table. Both tables ship as data files so coverage can
grow without code changes.

Conversion pipeline:

    1. Apply every rewrite rule in ascending priority, each as a single
       left-to-right non-overlapping pass (no rule re-entry).
    2. Reorder dependent signs within each syllable cluster into a fixed
       canonical order so equal-rendering strings compare equal.

The rule-table grammar is a restricted regex: literals, character classes,
and capture groups; replacements are literal text with $1..$9 capture
references. A rule whose pattern can match the empty string is rejected,
which guarantees termination.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable

from .errors import RuleTableInvalid

MYANMAR_BLOCK_START = 0x1000
MYANMAR_BLOCK_END = 0x109F

_KINZI = "င်္"

# Canonical within-cluster order: stacked consonant, medials (ya ra wa ha),
# e-vowel, upper vowels, lower vowels, a-vowels, anusvara, asat, dot below,
# visarga. Ties keep their original relative order (stable sort).
_STACK_RANK = 5
_SIGN_RANK = {
    0x103B: 10, 0x103C: 11, 0x103D: 12, 0x103E: 13,
    0x1031: 20,
    0x102D: 21, 0x102E: 21, 0x1032: 21, 0x1035: 21,
    0x102F: 22, 0x1030: 22, 0x1033: 22, 0x1034: 22,
    0x102B: 23, 0x102C: 23,
    0x1056: 24, 0x1057: 24, 0x1058: 24, 0x1059: 24,
    0x1036: 25,
    0x103A: 26,
    0x1037: 27,
    0x1038: 28,
}


def _is_base(cp: int) -> bool:
    """Consonants and independent vowels that can anchor a sign cluster."""
    return 0x1000 <= cp <= 0x102A or cp == 0x103F or cp == 0x104E


def is_myanmar(cp: int) -> bool:
    return MYANMAR_BLOCK_START <= cp <= MYANMAR_BLOCK_END


class EncodingLabel(str, Enum):
    ZAWGYI = "zawgyi"
    UNICODE = "unicode"
    NEUTRAL = "neutral"


@dataclass(frozen=True)
class EncodingVerdict:
    label: EncodingLabel
    score: float  # fraction of Zawgyi-indicative evidence, 0.0 when no evidence
    zawgyi_marker_count: int
    unicode_marker_count: int


@dataclass(frozen=True)
class MarkerPattern:
    kind: str  # "zawgyi" | "unicode"
    name: str
    regex: re.Pattern


class MarkerTable:
    """Curated codepoint patterns indicating one encoding or the other."""

    def __init__(self, patterns: Iterable[MarkerPattern]):
        self.patterns = list(patterns)
        self._zawgyi = [p for p in self.patterns if p.kind == "zawgyi"]
        self._unicode = [p for p in self.patterns if p.kind == "unicode"]

    @classmethod
    def load(cls, path: str | Path) -> "MarkerTable":
        patterns = []
        for lineno, line in enumerate(_read_data_lines(path), 1):
            fields = line.split("\t")
            if len(fields) != 3:
                raise RuleTableInvalid(f"{path}:{lineno}: expected kind<TAB>name<TAB>pattern")
            kind, name, pattern = fields
            if kind not in ("zawgyi", "unicode"):
                raise RuleTableInvalid(f"{path}:{lineno}: unknown kind {kind!r}")
            try:
                regex = re.compile(pattern)
            except re.error as exc:
                raise RuleTableInvalid(f"{path}:{lineno}: bad pattern: {exc}") from exc
            patterns.append(MarkerPattern(kind, name, regex))
        return cls(patterns)

    def count(self, text: str) -> tuple[int, int]:
        z = sum(len(p.regex.findall(text)) for p in self._zawgyi)
        u = sum(len(p.regex.findall(text)) for p in self._unicode)
        return z, u


_GROUP_REF = re.compile(r"\$([1-9])")


def _compile_replacement(template: str, group_count: int, where: str) -> Callable:
    """Turn a `literal $1 literal` template into an re.sub callable.

    Literal chunks may use \\uXXXX escapes; $1..$9 refer to captures.
    """
    parts: list[object] = []
    pos = 0
    for m in _GROUP_REF.finditer(template):
        if m.start() > pos:
            parts.append(_unescape(template[pos:m.start()], where))
        ref = int(m.group(1))
        if ref > group_count:
            raise RuleTableInvalid(f"{where}: replacement references group {ref}, "
                                   f"pattern has {group_count}")
        parts.append(ref)
        pos = m.end()
    if pos < len(template):
        parts.append(_unescape(template[pos:], where))

    def expand(match: re.Match) -> str:
        return "".join(p if isinstance(p, str) else (match.group(p) or "") for p in parts)

    return expand


_UNICODE_ESCAPE = re.compile(r"\\u([0-9a-fA-F]{4})")


def _unescape(chunk: str, where: str) -> str:
    if "\\" not in chunk:
        return chunk
    expanded = _UNICODE_ESCAPE.sub(lambda m: chr(int(m.group(1), 16)), chunk)
    if "\\" in expanded:
        raise RuleTableInvalid(f"{where}: unsupported escape in replacement {chunk!r}")
    return expanded


@dataclass(frozen=True)
class RewriteRule:
    priority: int
    pattern: str
    replacement: str
    regex: re.Pattern
    expander: Callable


class RuleTable:
    """Ordered Zawgyi-to-Unicode rewrite rules loaded from a TSV file."""

    def __init__(self, rules: list[RewriteRule]):
        self.rules = sorted(rules, key=lambda r: r.priority)

    @classmethod
    def load(cls, path: str | Path) -> "RuleTable":
        rules: list[RewriteRule] = []
        seen: dict[int, int] = {}
        for lineno, line in enumerate(_read_data_lines(path), 1):
            fields = line.split("\t")
            if len(fields) != 3:
                raise RuleTableInvalid(f"{path}:{lineno}: expected priority<TAB>pattern<TAB>replacement")
            where = f"{path}:{lineno}"
            try:
                priority = int(fields[0])
            except ValueError as exc:
                raise RuleTableInvalid(f"{where}: bad priority {fields[0]!r}") from exc
            if priority in seen:
                raise RuleTableInvalid(f"{where}: duplicate priority {priority} "
                                       f"(first at line {seen[priority]})")
            seen[priority] = lineno
            pattern, replacement = fields[1], fields[2]
            try:
                regex = re.compile(pattern)
            except re.error as exc:
                raise RuleTableInvalid(f"{where}: bad pattern: {exc}") from exc
            if regex.match(""):
                raise RuleTableInvalid(f"{where}: pattern can match the empty string")
            expander = _compile_replacement(replacement, regex.groups, where)
            rules.append(RewriteRule(priority, pattern, replacement, regex, expander))
        return cls(rules)

    def apply(self, text: str) -> str:
        for rule in self.rules:
            text = rule.regex.sub(rule.expander, text)
        return text


def _read_data_lines(path: str | Path) -> Iterable[str]:
    raw = Path(path).read_text(encoding="utf-8")
    for line in raw.splitlines():
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        yield line


def _data_path(name: str) -> Path:
    return Path(resources.files("hatelab").joinpath("data", name))


@lru_cache(maxsize=1)
def default_markers() -> MarkerTable:
    return MarkerTable.load(_data_path("zawgyi_markers.tsv"))


@lru_cache(maxsize=1)
def default_rules() -> RuleTable:
    return RuleTable.load(_data_path("zawgyi_rules.tsv"))


def detect_encoding(text: str, markers: MarkerTable | None = None,
                    threshold: float = 0.5) -> EncodingVerdict:
    """Classify a string as Zawgyi, Unicode, or Neutral by marker counts.

    Total function: any string gets exactly one label. Ties resolve to
    Unicode because converting true Unicode corrupts text, the costlier
    error; no evidence at all gives Neutral.
    """
    markers = markers or default_markers()
    z, u = markers.count(text)
    if z + u == 0:
        return EncodingVerdict(EncodingLabel.NEUTRAL, 0.0, 0, 0)
    score = z / (z + u)
    label = EncodingLabel.ZAWGYI if score > threshold else EncodingLabel.UNICODE
    return EncodingVerdict(label, score, z, u)


def canonical_sign_order(text: str) -> str:
    """Reorder dependent signs within each cluster into canonical order.

    A cluster is a base consonant (optionally preceded by kinzi) plus its
    trailing signs and stacked consonants. The sort is stable, so the
    function is idempotent; codepoints outside the Myanmar block are never
    touched.
    """
    out: list[str] = []
    i, n = 0, len(text)
    while i < n:
        kinzi = ""
        if text.startswith(_KINZI, i) and i + 3 < n and _is_base(ord(text[i + 3])):
            kinzi = _KINZI
            i += 3
        ch = text[i]
        if not _is_base(ord(ch)):
            out.append(kinzi)
            out.append(ch)
            i += 1
            continue
        j = i + 1
        units: list[tuple[int, str]] = []
        while j < n:
            cp = ord(text[j])
            if cp == 0x1039:
                if j + 1 < n and _is_base(ord(text[j + 1])):
                    units.append((_STACK_RANK, text[j:j + 2]))
                    j += 2
                else:
                    units.append((_STACK_RANK, text[j]))
                    j += 1
                continue
            rank = _SIGN_RANK.get(cp)
            if rank is None:
                break
            units.append((rank, text[j]))
            j += 1
        units.sort(key=lambda unit: unit[0])
        out.append(kinzi)
        out.append(ch)
        out.extend(u for _, u in units)
        i = j
    return "".join(out)


def zawgyi_to_unicode(text: str, rules: RuleTable | None = None) -> str:
    """Convert Zawgyi-encoded text to canonically ordered Unicode.

    The caller has already decided the text is Zawgyi; this does not
    re-detect. Non-Myanmar codepoints pass through unchanged.
    """
    rules = rules or default_rules()
    return canonical_sign_order(rules.apply(text))


def normalize(text: str, threshold: float = 0.5,
              rules: RuleTable | None = None,
              markers: MarkerTable | None = None) -> tuple[str, bool]:
    """Detect, convert if Zawgyi, and canonicalize sign order.

    Returns (normalized_text, was_zawgyi). Runs to a fixpoint so the whole
    function is idempotent even on degenerate fragments whose conversion
    output still trips a marker (for ordinary text one conversion pass and
    one reorder pass reach the fixpoint).
    """
    if not 0 < threshold < 1:
        raise ValueError(f"threshold must be in (0, 1), got {threshold}")
    was_zawgyi = False
    current = text
    for _ in range(16):
        verdict = detect_encoding(current, markers=markers, threshold=threshold)
        if verdict.label is EncodingLabel.ZAWGYI:
            step = zawgyi_to_unicode(current, rules=rules)
            was_zawgyi = True
        else:
            step = canonical_sign_order(current)
        if step == current:
            break
        current = step
    return current, was_zawgyi
