"""Stateful HTTP service for clinician-in-the-loop assessment sessions.

The loaded network is shared and read-only; every session keeps its own
evidence, do-isolations, and an append-only action history. Mutations within
a session are serialized by a per-session lock, and replaying a session's
history against a fresh session reproduces its state exactly.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import model
from .graph import BayesNet, GraphError, load_network
from .inference import (
    InconsistentEvidenceError,
    apply_do,
    eliminate_variables,
    query_conditions,
    symptom_contributions,
)
from .pipeline import BaggedCalibrator, load_calibrators


class EvidenceUpdate(BaseModel):
    set: dict[str, int] = Field(default_factory=dict)
    clear: list[str] = Field(default_factory=list)


class InterventionUpdate(BaseModel):
    add: list[str] = Field(default_factory=list)
    remove: list[str] = Field(default_factory=list)


class SessionCreated(BaseModel):
    session_id: str


class ConditionProbabilities(BaseModel):
    raw: float
    calibrated: float | None = None


class SymptomPosterior(BaseModel):
    distribution: list[float]
    expected_severity: float
    isolated: bool
    contribution: dict[str, float]


class PosteriorsResponse(BaseModel):
    session_id: str
    evidence: dict[str, int]
    interventions: list[str]
    symptoms: dict[str, SymptomPosterior]
    severity_totals: dict[str, float]
    conditions: dict[str, ConditionProbabilities]


class SessionState(BaseModel):
    session_id: str
    evidence: dict[str, int]
    interventions: list[str]
    history: list[dict[str, Any]]


@dataclass
class Session:
    session_id: str
    evidence: dict[str, int] = field(default_factory=dict)
    interventions: set[str] = field(default_factory=set)
    history: list[dict[str, Any]] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)
    mutilated: BayesNet | None = None  # cache, rebuilt when interventions change


def _bad_request(detail: str):
    raise HTTPException(status_code=400, detail=detail)


def create_app(
    network_path: str | None = None,
    calibrator_path: str | None = None,
    net: BayesNet | None = None,
    calibrators: dict[str, BaggedCalibrator] | None = None,
) -> FastAPI:
    if net is None:
        if network_path is None:
            raise ValueError("need a network path or object")
        net = load_network(network_path)
    if calibrators is None and calibrator_path:
        calibrators = load_calibrators(calibrator_path)

    app = FastAPI(title="symptomnet", version="0.1.0")
    sessions: dict[str, Session] = {}
    counter = itertools.count(1)
    registry_lock = threading.Lock()

    def get_session(session_id: str) -> Session:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return session

    def working_net(session: Session) -> BayesNet:
        if session.mutilated is None:
            session.mutilated = (
                apply_do(net, session.interventions) if session.interventions else net
            )
        return session.mutilated

    def condition_state(session: Session) -> dict[str, dict[str, float | None]]:
        active = working_net(session)
        raw = query_conditions(active, session.evidence)
        out = {}
        for i, condition in enumerate(model.CONDITIONS):
            calibrated = None
            if calibrators and condition in calibrators:
                calibrated = float(calibrators[condition].predict_one(raw[i]))
            out[condition] = {"raw": float(raw[i]), "calibrated": calibrated}
        return out

    def record(session: Session, action: dict[str, Any]):
        session.history.append(
            {"action": action, "conditions": condition_state(session)}
        )

    @app.get("/health")
    def health():
        return {"status": "ok", "calibrated": bool(calibrators)}

    @app.get("/network")
    def network_structure():
        spec = net.spec
        kind = {}
        for name in spec.node_names():
            if name in model.CONDITIONS:
                kind[name] = "condition"
            elif name in model.SYMPTOMS:
                kind[name] = "symptom"
            else:
                kind[name] = "surrogate"
        return {
            "nodes": [
                {
                    "name": n.name,
                    "states": list(n.state_labels),
                    "kind": kind[n.name],
                    "symptom": model.SURROGATE_SYMPTOM.get(n.name),
                    "condition": model.SYMPTOM_CONDITION.get(n.name),
                }
                for n in spec.nodes
            ],
            "edges": [[p, c] for p, c in spec.edges],
        }

    @app.post("/sessions", response_model=SessionCreated, status_code=201)
    def create_session():
        with registry_lock:
            session_id = f"s{next(counter)}"
            sessions[session_id] = Session(session_id=session_id)
        return SessionCreated(session_id=session_id)

    @app.get("/sessions/{session_id}", response_model=SessionState)
    def session_state(session_id: str):
        session = get_session(session_id)
        return SessionState(
            session_id=session.session_id,
            evidence=dict(session.evidence),
            interventions=sorted(session.interventions),
            history=list(session.history),
        )

    @app.delete("/sessions/{session_id}", status_code=204)
    def delete_session(session_id: str):
        get_session(session_id)
        with registry_lock:
            sessions.pop(session_id, None)

    @app.put("/sessions/{session_id}/evidence", response_model=SessionState)
    def update_evidence(session_id: str, update: EvidenceUpdate):
        session = get_session(session_id)
        with session.lock:
            for node, state in update.set.items():
                try:
                    card = net.cardinality(node)
                except GraphError:
                    _bad_request(f"unknown node {node!r}")
                if node in model.CONDITIONS:
                    _bad_request(f"evidence on condition node {node!r} is not allowed")
                if not 0 <= state < card:
                    _bad_request(f"state {state} out of range for node {node!r}")
            for node in update.clear:
                try:
                    net.cardinality(node)
                except GraphError:
                    _bad_request(f"unknown node {node!r}")
            session.evidence.update({k: int(v) for k, v in update.set.items()})
            for node in update.clear:
                session.evidence.pop(node, None)
            record(session, {"type": "evidence", "set": dict(update.set), "clear": list(update.clear)})
            return session_state(session_id)

    @app.put("/sessions/{session_id}/interventions", response_model=SessionState)
    def update_interventions(session_id: str, update: InterventionUpdate):
        session = get_session(session_id)
        with session.lock:
            for node in update.add + update.remove:
                try:
                    net.cardinality(node)
                except GraphError:
                    _bad_request(f"unknown node {node!r}")
            session.interventions |= set(update.add)
            session.interventions -= set(update.remove)
            session.mutilated = None
            record(
                session,
                {"type": "interventions", "add": list(update.add), "remove": list(update.remove)},
            )
            return session_state(session_id)

    @app.get("/sessions/{session_id}/posteriors", response_model=PosteriorsResponse)
    def posteriors(session_id: str):
        session = get_session(session_id)
        with session.lock:
            active = working_net(session)
            try:
                evidence = {
                    k: v
                    for k, v in session.evidence.items()
                    if k not in active.isolated | active.detached_observables
                }
                query = [s for s in model.SYMPTOMS if s not in evidence]
                report = eliminate_variables(active, query, evidence)
                contributions = symptom_contributions(active, evidence)
                conditions = condition_state(session)
            except InconsistentEvidenceError as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from None

            symptoms = {}
            for s in model.SYMPTOMS:
                if s in evidence:
                    dist = [0.0] * net.cardinality(s)
                    dist[evidence[s]] = 1.0
                else:
                    dist = [float(p) for p in report[s]]
                expected = float(np.dot(np.arange(len(dist)), dist))
                symptoms[s] = SymptomPosterior(
                    distribution=dist,
                    expected_severity=expected,
                    isolated=s in active.isolated,
                    contribution=contributions[s],
                )
            totals = {
                model.DEPRESSION: sum(
                    symptoms[s].expected_severity for s in model.DEPRESSION_SYMPTOMS
                ),
                model.ANXIETY: sum(
                    symptoms[s].expected_severity for s in model.ANXIETY_SYMPTOMS
                ),
            }
            return PosteriorsResponse(
                session_id=session.session_id,
                evidence=dict(session.evidence),
                interventions=sorted(session.interventions),
                symptoms=symptoms,
                severity_totals=totals,
                conditions={
                    c: ConditionProbabilities(**probs) for c, probs in conditions.items()
                },
            )

    return app
