"""The labelling plan: paired batches and rounds, label recording with an
audit trail, agreement metrics, adjudication, and characteristics reporting.

Annotators work in pairs; both members of a pair label identical batches
independently, round by round, then meet to discuss disagreements. After
the paired rounds, the remaining posts are divided equally for solo
labeling. Percent agreement is the improvement measure; Cohen's and
Fleiss' kappas are reported alongside (both degenerate under extreme class
imbalance, which is exactly why percent agreement leads).
"""

from __future__ import annotations

import csv
import json
import os
import random
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .errors import (
    BatchMismatch,
    FileUnreadable,
    InsufficientPosts,
    InvalidLabel,
    MissingLabel,
    OddAnnotatorCount,
    RaggedMatrix,
)


class Decision(str, Enum):
    YES = "Yes"
    NO = "No"


@lru_cache(maxsize=1)
def default_characteristics() -> tuple[str, ...]:
    path = Path(resources.files("hatelab").joinpath("data", "protected_characteristics.txt"))
    values = []
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            values.append(line)
    return tuple(values)


@dataclass(frozen=True)
class LabelRecord:
    post_id: str
    annotator_id: str
    round: int  # >= 1 during the paired phase, 0 in the solo phase
    decision: Decision
    characteristics: tuple[str, ...]
    timestamp: str

    def validate(self, allowed: Sequence[str]) -> None:
        if self.decision is Decision.YES and not self.characteristics:
            raise InvalidLabel("Yes decisions need at least one characteristic")
        if self.decision is Decision.NO and self.characteristics:
            raise InvalidLabel("No decisions must not carry characteristics")
        unknown = [c for c in self.characteristics if c not in allowed]
        if unknown:
            raise InvalidLabel(f"unknown characteristics: {unknown}")


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass
class AssignmentPlan:
    pairs: list[tuple[str, str]]
    # rounds[pair_index][round_index] -> post ids; both pair members get it
    rounds: list[list[list[str]]]
    solo: dict[str, list[str]]
    batch_size: int
    seed: int

    def pair_of(self, annotator_id: str) -> tuple[int, tuple[str, str]] | None:
        for idx, pair in enumerate(self.pairs):
            if annotator_id in pair:
                return idx, pair
        return None

    def partner_of(self, annotator_id: str) -> str | None:
        found = self.pair_of(annotator_id)
        if not found:
            return None
        a, b = found[1]
        return b if annotator_id == a else a

    def batch_for(self, annotator_id: str, round_no: int) -> list[str]:
        """Round 0 is the solo list; rounds 1..N are the paired batches."""
        if round_no == 0:
            return list(self.solo.get(annotator_id, []))
        found = self.pair_of(annotator_id)
        if not found:
            return []
        pair_idx = found[0]
        batches = self.rounds[pair_idx]
        if not 1 <= round_no <= len(batches):
            return []
        return list(batches[round_no - 1])

    @property
    def paired_rounds(self) -> int:
        return len(self.rounds[0]) if self.rounds else 0

    def annotators(self) -> list[str]:
        return [a for pair in self.pairs for a in pair]

    def to_dict(self) -> dict:
        return {
            "pairs": [list(p) for p in self.pairs],
            "rounds": self.rounds,
            "solo": self.solo,
            "batch_size": self.batch_size,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AssignmentPlan":
        return cls(
            pairs=[tuple(p) for p in d["pairs"]],
            rounds=d["rounds"],
            solo={k: list(v) for k, v in d["solo"].items()},
            batch_size=d["batch_size"],
            seed=d["seed"],
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), ensure_ascii=False, indent=2),
                              encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "AssignmentPlan":
        try:
            return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
        except (OSError, json.JSONDecodeError) as exc:
            raise FileUnreadable(f"cannot read plan {path}: {exc}") from exc


def make_assignments(annotators: Sequence[str], posts: Sequence[str],
                     batch_size: int = 100, paired_rounds: int = 4,
                     seed: int = 0) -> AssignmentPlan:
    """Pair annotators in seeded random order and deal out batches.

    The paired phase consumes pairs * rounds * batch_size unique posts, each
    labeled by exactly two annotators; the remainder is split round-robin
    so solo list sizes differ by at most one.
    """
    if len(annotators) < 2 or len(annotators) % 2 != 0:
        raise OddAnnotatorCount(f"need an even number of annotators >= 2, got {len(annotators)}")
    order = list(annotators)
    random.Random(seed).shuffle(order)
    pairs = [(order[i], order[i + 1]) for i in range(0, len(order), 2)]

    required = len(pairs) * paired_rounds * batch_size
    if len(posts) < required:
        raise InsufficientPosts(required, len(posts))

    cursor = 0
    rounds: list[list[list[str]]] = [[] for _ in pairs]
    for _ in range(paired_rounds):
        for pair_idx in range(len(pairs)):
            batch = list(posts[cursor:cursor + batch_size])
            rounds[pair_idx].append(batch)
            cursor += batch_size

    solo: dict[str, list[str]] = {a: [] for a in order}
    for offset, post_id in enumerate(posts[cursor:]):
        solo[order[offset % len(order)]].append(post_id)

    return AssignmentPlan(pairs=pairs, rounds=rounds, solo=solo,
                          batch_size=batch_size, seed=seed)


def _aligned_decisions(labels_a: Sequence[LabelRecord],
                       labels_b: Sequence[LabelRecord]) -> list[tuple[Decision, Decision]]:
    by_a = {l.post_id: l.decision for l in labels_a}
    by_b = {l.post_id: l.decision for l in labels_b}
    if set(by_a) != set(by_b):
        only_a = sorted(set(by_a) - set(by_b))[:5]
        only_b = sorted(set(by_b) - set(by_a))[:5]
        raise BatchMismatch(f"different post sets (a-only {only_a}, b-only {only_b})")
    if not by_a:
        raise BatchMismatch("empty batches")
    return [(by_a[pid], by_b[pid]) for pid in by_a]


def percent_agreement(labels_a: Sequence[LabelRecord],
                      labels_b: Sequence[LabelRecord]) -> float:
    """Fraction of shared posts with equal decisions (characteristics are
    excluded on purpose)."""
    pairs = _aligned_decisions(labels_a, labels_b)
    return sum(1 for a, b in pairs if a == b) / len(pairs)


def cohen_kappa(labels_a: Sequence[LabelRecord],
                labels_b: Sequence[LabelRecord]) -> float:
    """Chance-corrected two-annotator agreement over {Yes, No}.

    Degenerate marginals (p_e = 1) return 1.0 on perfect agreement and 0.0
    otherwise, which makes the extreme-imbalance pathology exact.
    """
    pairs = _aligned_decisions(labels_a, labels_b)
    n = len(pairs)
    p_o = sum(1 for a, b in pairs if a == b) / n
    a_yes = sum(1 for a, _ in pairs if a is Decision.YES) / n
    b_yes = sum(1 for _, b in pairs if b is Decision.YES) / n
    p_e = a_yes * b_yes + (1 - a_yes) * (1 - b_yes)
    if p_e == 1.0:
        return 1.0 if p_o == 1.0 else 0.0
    return (p_o - p_e) / (1 - p_e)


def fleiss_kappa(matrix: Sequence[Sequence[Decision]]) -> float:
    """Fleiss' kappa over {Yes, No} for a uniform items-by-annotators matrix.

    A single class everywhere gives p_e = 1; the stated convention returns
    0.0 for that degenerate case.
    """
    if not matrix:
        raise RaggedMatrix("empty matrix")
    width = len(matrix[0])
    if width < 2:
        raise RaggedMatrix("need at least 2 annotators per item")
    if any(len(row) != width for row in matrix):
        raise RaggedMatrix("rows have different annotator counts")

    n_items = len(matrix)
    p_i_sum = 0.0
    yes_total = 0
    for row in matrix:
        yes = sum(1 for d in row if d is Decision.YES)
        no = width - yes
        yes_total += yes
        p_i_sum += (yes * yes + no * no - width) / (width * (width - 1))
    p_bar = p_i_sum / n_items
    p_yes = yes_total / (n_items * width)
    p_e = p_yes * p_yes + (1 - p_yes) * (1 - p_yes)
    if p_e == 1.0:
        return 0.0
    return (p_bar - p_e) / (1 - p_e)


class FinalStatus(str, Enum):
    AGREED = "agreed"
    NEEDS_FACILITATOR = "needs_facilitator"
    FACILITATED = "facilitated"


@dataclass(frozen=True)
class FinalLabel:
    post_id: str
    status: FinalStatus
    decision: Decision | None
    characteristics: tuple[str, ...]
    audit: tuple[str, ...] = ()


def adjudicate(post_id: str, label_a: LabelRecord | None, label_b: LabelRecord | None,
               facilitator_decision: Decision | None = None,
               facilitator_characteristics: Sequence[str] = ()) -> FinalLabel:
    """Pair agreement becomes final; disagreement waits for the facilitator,
    whose call is recorded with an audit trail."""
    if label_a is None or label_b is None:
        raise MissingLabel(f"both labels required for {post_id}")
    if label_a.decision == label_b.decision:
        chars = tuple(sorted(set(label_a.characteristics) | set(label_b.characteristics)))
        return FinalLabel(post_id, FinalStatus.AGREED, label_a.decision, chars)
    if facilitator_decision is None:
        return FinalLabel(post_id, FinalStatus.NEEDS_FACILITATOR, None, ())
    audit = (
        f"{label_a.annotator_id}={label_a.decision.value}",
        f"{label_b.annotator_id}={label_b.decision.value}",
        f"facilitator={facilitator_decision.value}",
    )
    chars = tuple(sorted(facilitator_characteristics))
    if facilitator_decision is Decision.YES and not chars:
        # inherit from whichever annotator voted Yes
        yes_label = label_a if label_a.decision is Decision.YES else label_b
        chars = tuple(sorted(yes_label.characteristics))
    return FinalLabel(post_id, FinalStatus.FACILITATED, facilitator_decision, chars, audit)


def characteristics_distribution(final_labels: Iterable[FinalLabel]) -> list[tuple[str, int]]:
    """Histogram over Yes-labeled posts; a post with k characteristics lands
    in k bins. Sorted by descending count, ties alphabetical."""
    counts: dict[str, int] = {}
    for label in final_labels:
        if label.decision is Decision.YES:
            for c in label.characteristics:
                counts[c] = counts.get(c, 0) + 1
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))


@dataclass
class TimelineCell:
    pair_index: int
    round: int
    agreement: float | None  # None until both members finished the round


@dataclass
class AgreementTimeline:
    cells: list[TimelineCell]
    round_averages: dict[int, float | None]
    # marginals[round][annotator_id] -> {"Yes": n, "No": n}
    marginals: dict[int, dict[str, dict[str, int]]]

    def to_dict(self) -> dict:
        return {
            "cells": [{"pair": c.pair_index, "round": c.round, "agreement": c.agreement}
                      for c in self.cells],
            "round_averages": {str(r): v for r, v in self.round_averages.items()},
            "marginals": {str(r): m for r, m in self.marginals.items()},
        }


def agreement_timeline(labels: Sequence[LabelRecord],
                       plan: AssignmentPlan) -> AgreementTimeline:
    """Pairs-by-rounds agreement table plus per-round averages and per
    annotator Yes/No marginal counts."""
    by_annotator_round: dict[tuple[str, int], dict[str, LabelRecord]] = {}
    for label in labels:
        by_annotator_round.setdefault((label.annotator_id, label.round), {})[label.post_id] = label

    cells: list[TimelineCell] = []
    round_values: dict[int, list[float]] = {}
    marginals: dict[int, dict[str, dict[str, int]]] = {}
    for round_no in range(1, plan.paired_rounds + 1):
        marginals[round_no] = {}
        for pair_idx, (a, b) in enumerate(plan.pairs):
            batch = set(plan.rounds[pair_idx][round_no - 1])
            labels_a = [l for l in by_annotator_round.get((a, round_no), {}).values()
                        if l.post_id in batch]
            labels_b = [l for l in by_annotator_round.get((b, round_no), {}).values()
                        if l.post_id in batch]
            for annot, annot_labels in ((a, labels_a), (b, labels_b)):
                marginals[round_no][annot] = {
                    "Yes": sum(1 for l in annot_labels if l.decision is Decision.YES),
                    "No": sum(1 for l in annot_labels if l.decision is Decision.NO),
                }
            if len(labels_a) == len(batch) and len(labels_b) == len(batch) and batch:
                value = percent_agreement(labels_a, labels_b)
                round_values.setdefault(round_no, []).append(value)
                cells.append(TimelineCell(pair_idx, round_no, value))
            else:
                cells.append(TimelineCell(pair_idx, round_no, None))
    averages = {
        r: (sum(vals) / len(vals) if (vals := round_values.get(r)) else None)
        for r in range(1, plan.paired_rounds + 1)
    }
    return AgreementTimeline(cells, averages, marginals)


class LabelStore:
    """CSV-backed label store: one row per (post_id, annotator_id).

    Writes are serialized and write through to disk with an atomic replace,
    so the CSV always equals the in-memory state. Resubmissions overwrite
    and append an audit entry.
    """

    COLUMNS = ["post_id", "annotator_id", "round", "decision",
               "characteristics", "timestamp"]

    def __init__(self, path: str | Path,
                 characteristics: Sequence[str] | None = None):
        self.path = Path(path)
        self.allowed = tuple(characteristics) if characteristics else default_characteristics()
        self._lock = threading.Lock()
        self._records: dict[tuple[str, str], LabelRecord] = {}
        self.audit: list[dict] = []
        if self.path.exists():
            self._load()

    def _load(self) -> None:
        try:
            with open(self.path, newline="", encoding="utf-8") as fh:
                for row in csv.DictReader(fh):
                    record = LabelRecord(
                        post_id=row["post_id"],
                        annotator_id=row["annotator_id"],
                        round=int(row["round"]),
                        decision=Decision(row["decision"]),
                        characteristics=tuple(c for c in row["characteristics"].split(";") if c),
                        timestamp=row["timestamp"],
                    )
                    self._records[(record.post_id, record.annotator_id)] = record
        except (OSError, KeyError, ValueError) as exc:
            raise FileUnreadable(f"cannot read labels {self.path}: {exc}") from exc

    def _flush(self) -> None:
        tmp = self.path.with_suffix(self.path.suffix + ".tmp")
        with open(tmp, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.COLUMNS)
            for record in self._records.values():
                writer.writerow([
                    record.post_id, record.annotator_id, record.round,
                    record.decision.value, ";".join(record.characteristics),
                    record.timestamp,
                ])
        os.replace(tmp, self.path)

    def record(self, post_id: str, annotator_id: str, round_no: int,
               decision: Decision | str, characteristics: Sequence[str] = (),
               timestamp: str | None = None) -> LabelRecord:
        decision = Decision(decision)
        label = LabelRecord(
            post_id=post_id,
            annotator_id=annotator_id,
            round=round_no,
            decision=decision,
            characteristics=tuple(characteristics),
            timestamp=timestamp or _utcnow(),
        )
        label.validate(self.allowed)
        with self._lock:
            key = (post_id, annotator_id)
            previous = self._records.get(key)
            if previous is not None:
                self.audit.append({
                    "event": "overwrite",
                    "post_id": post_id,
                    "annotator_id": annotator_id,
                    "old": previous.decision.value,
                    "new": label.decision.value,
                    "at": label.timestamp,
                })
            self._records[key] = label
            self._flush()
        return label

    def labels_of(self, annotator_id: str, round_no: int | None = None) -> list[LabelRecord]:
        with self._lock:
            return [r for r in self._records.values()
                    if r.annotator_id == annotator_id
                    and (round_no is None or r.round == round_no)]

    def label_for(self, post_id: str, annotator_id: str) -> LabelRecord | None:
        with self._lock:
            return self._records.get((post_id, annotator_id))

    def all_labels(self) -> list[LabelRecord]:
        with self._lock:
            return list(self._records.values())

    def labeled_post_ids(self, annotator_id: str) -> set[str]:
        with self._lock:
            return {pid for (pid, aid) in self._records if aid == annotator_id}
