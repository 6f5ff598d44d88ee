"""HTTP API over the annotation module for the browser labeling UI.

Design rules: every write goes through the serialized label store and hits
the CSV on disk before the response returns; the agreement endpoint stays
blind until BOTH pair members finish the round, so annotators cannot see a
partner's labels while still labeling (independence is the point of the
pairing design). Auth is static per-person passcodes, adequate for a small
deployment behind a fronting proxy.
"""

from __future__ import annotations

import csv
import os
import secrets
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Sequence

from fastapi import Depends, FastAPI, Header, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .annotation import (
    AssignmentPlan,
    Decision,
    FinalStatus,
    LabelStore,
    adjudicate,
    characteristics_distribution,
    percent_agreement,
)
from .corpus import CleanPost
from .errors import InvalidLabel

TOKEN_TTL = timedelta(hours=12)


@dataclass
class Session:
    principal: str
    role: str  # "annotator" | "facilitator"
    expires_at: datetime


class LoginRequest(BaseModel):
    annotator_id: str
    passcode: str


class LabelRequest(BaseModel):
    post_id: str
    decision: str
    characteristics: list[str] = []


class AdjudicationRequest(BaseModel):
    post_id: str
    decision: str
    characteristics: list[str] = []


class Adjudications:
    """Facilitator decisions, write-through CSV like the label store."""

    def __init__(self, path: Path):
        self.path = path
        self.decisions: dict[str, tuple[Decision, tuple[str, ...], str]] = {}
        if path.exists():
            with open(path, newline="", encoding="utf-8") as fh:
                for row in csv.DictReader(fh):
                    chars = tuple(c for c in row["characteristics"].split(";") if c)
                    self.decisions[row["post_id"]] = (
                        Decision(row["decision"]), chars, row["facilitator_id"])

    def record(self, post_id: str, decision: Decision,
               characteristics: Sequence[str], facilitator_id: str) -> None:
        self.decisions[post_id] = (decision, tuple(characteristics), facilitator_id)
        tmp = self.path.with_suffix(self.path.suffix + ".tmp")
        with open(tmp, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["post_id", "decision", "characteristics", "facilitator_id"])
            for pid, (dec, chars, fac) in self.decisions.items():
                writer.writerow([pid, dec.value, ";".join(chars), fac])
        os.replace(tmp, self.path)


def create_app(plan: AssignmentPlan, store: LabelStore, posts: Sequence[CleanPost],
               annotator_passcodes: dict[str, str],
               facilitator_passcodes: dict[str, str]) -> FastAPI:
    app = FastAPI(title="hatelab annotation server")
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])

    posts_by_id = {p.post_id: p for p in posts}
    sessions: dict[str, Session] = {}
    adjudications = Adjudications(store.path.with_name(store.path.stem + ".adjudications.csv"))

    def _round_of(annotator_id: str, post_id: str) -> int | None:
        for round_no in range(1, plan.paired_rounds + 1):
            if post_id in plan.batch_for(annotator_id, round_no):
                return round_no
        if post_id in plan.solo.get(annotator_id, ()):
            return 0
        return None

    def current_session(authorization: str = Header(default="")) -> Session:
        token = authorization.removeprefix("Bearer ").strip()
        session = sessions.get(token)
        if session is None or session.expires_at <= datetime.now(timezone.utc):
            raise HTTPException(status_code=401, detail="invalid or expired token")
        return session

    @app.post("/api/login")
    def login(body: LoginRequest) -> dict:
        role = None
        if annotator_passcodes.get(body.annotator_id) == body.passcode:
            role = "annotator"
        elif facilitator_passcodes.get(body.annotator_id) == body.passcode:
            role = "facilitator"
        if role is None:
            raise HTTPException(status_code=401, detail="bad annotator_id or passcode")
        token = secrets.token_urlsafe(24)
        expires = datetime.now(timezone.utc) + TOKEN_TTL
        sessions[token] = Session(body.annotator_id, role, expires)
        return {"token": token, "annotator_id": body.annotator_id, "role": role,
                "expires_at": expires.isoformat()}

    @app.get("/api/me/batch")
    def my_batch(round: int, session: Session = Depends(current_session)) -> dict:
        batch = plan.batch_for(session.principal, round)
        done = store.labeled_post_ids(session.principal)
        pending = [pid for pid in batch if pid not in done]
        return {
            "round": round,
            "total": len(batch),
            "labeled": len(batch) - len(pending),
            "posts": [
                {"post_id": pid,
                 "text": posts_by_id[pid].text if pid in posts_by_id else "",
                 "url": posts_by_id[pid].url if pid in posts_by_id else None}
                for pid in pending
            ],
        }

    @app.post("/api/labels", status_code=201)
    def post_label(body: LabelRequest, session: Session = Depends(current_session)) -> dict:
        if body.decision not in (Decision.YES.value, Decision.NO.value):
            raise HTTPException(status_code=422, detail="decision must be Yes or No")
        if body.post_id not in posts_by_id:
            raise HTTPException(status_code=404, detail="unknown post")
        round_no = _round_of(session.principal, body.post_id)
        if round_no is None:
            raise HTTPException(status_code=404, detail="post not in your assignment")
        try:
            record = store.record(body.post_id, session.principal, round_no,
                                  body.decision, body.characteristics)
        except InvalidLabel as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return {"post_id": record.post_id, "annotator_id": record.annotator_id,
                "round": record.round, "decision": record.decision.value,
                "characteristics": list(record.characteristics),
                "timestamp": record.timestamp}

    @app.get("/api/pairs/me/agreement")
    def pair_agreement(round: int, session: Session = Depends(current_session)) -> dict:
        found = plan.pair_of(session.principal)
        if found is None:
            raise HTTPException(status_code=404, detail="not in a pair")
        pair_idx, (a, b) = found
        if not 1 <= round <= plan.paired_rounds:
            raise HTTPException(status_code=404, detail="unknown round")
        batch = plan.rounds[pair_idx][round - 1]
        labels_a = {pid: store.label_for(pid, a) for pid in batch}
        labels_b = {pid: store.label_for(pid, b) for pid in batch}
        if any(v is None for v in labels_a.values()) or any(v is None for v in labels_b.values()):
            raise HTTPException(status_code=409, detail="round not complete for both members")
        agreement = percent_agreement(list(labels_a.values()), list(labels_b.values()))
        mine, partner = (labels_a, labels_b) if session.principal == a else (labels_b, labels_a)
        disagreements = [
            {"post_id": pid,
             "mine": mine[pid].decision.value,
             "partner": partner[pid].decision.value}
            for pid in batch if mine[pid].decision != partner[pid].decision
        ]
        return {"round": round, "percent_agreement": agreement,
                "disagreements": disagreements}

    @app.post("/api/adjudications", status_code=201)
    def post_adjudication(body: AdjudicationRequest,
                          session: Session = Depends(current_session)) -> dict:
        if session.role != "facilitator":
            raise HTTPException(status_code=403, detail="facilitator role required")
        if body.decision not in (Decision.YES.value, Decision.NO.value):
            raise HTTPException(status_code=422, detail="decision must be Yes or No")
        if body.post_id not in posts_by_id:
            raise HTTPException(status_code=404, detail="unknown post")
        adjudications.record(body.post_id, Decision(body.decision),
                             body.characteristics, session.principal)
        return {"post_id": body.post_id, "decision": body.decision,
                "facilitator_id": session.principal}

    @app.get("/api/stats/characteristics")
    def stats_characteristics(session: Session = Depends(current_session)) -> dict:
        finals = []
        for pair_idx, (a, b) in enumerate(plan.pairs):
            for batch in plan.rounds[pair_idx]:
                for pid in batch:
                    la, lb = store.label_for(pid, a), store.label_for(pid, b)
                    if la is None or lb is None:
                        continue
                    fac = adjudications.decisions.get(pid)
                    final = adjudicate(pid, la, lb,
                                       facilitator_decision=fac[0] if fac else None,
                                       facilitator_characteristics=fac[1] if fac else ())
                    if final.status is not FinalStatus.NEEDS_FACILITATOR:
                        finals.append(final)
        for annotator, solo in plan.solo.items():
            for pid in solo:
                label = store.label_for(pid, annotator)
                if label is not None:
                    finals.append(adjudicate(pid, label, label))
        histogram = characteristics_distribution(finals)
        return {"histogram": [{"characteristic": c, "count": n} for c, n in histogram]}

    return app
