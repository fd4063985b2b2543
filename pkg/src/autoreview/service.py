"""Long-running review service.

Ingests corpora, runs the review pipeline in a background worker, and
exposes the flagged-field queue plus human-correction endpoints. Human
decisions feed the gold-label export that later training rounds consume.
"""
from __future__ import annotations

import json
import os
import sqlite3
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from fastapi import Depends, FastAPI, HTTPException, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel

from .core import FieldRecord, ReviewDecision, Strategy, Verdict
from .corpus import call_from_dict, read_calls, read_records, record_from_dict, record_to_dict, dump_line
from .evaluation import correct_call, score_reviews
from .extraction import FormatViolation, normalize_field_value
from .fields import standard_field_specs
from .pipeline import Models
from .review import review_call
from .store import InvalidTransition, NotFound, ReviewStore, VersionConflict


@dataclass
class ServiceConfig:
    store_path: str = "autoreview.db"
    models_dir: Optional[str] = None
    listen_host: str = "127.0.0.1"
    listen_port: int = 8080
    auth_token: Optional[str] = None
    remote_endpoint: Optional[str] = None
    remote_token: Optional[str] = None
    remote_model: str = "default"
    synchronous_ingest: bool = False

    @classmethod
    def load(cls, path: Optional[str] = None, env: Optional[dict] = None) -> "ServiceConfig":
        """File values first, then environment overrides."""
        env = env if env is not None else dict(os.environ)
        data: dict = {}
        if path:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        config = cls(**data)
        overrides = {
            "AUTOREVIEW_STORE": "store_path",
            "AUTOREVIEW_MODELS": "models_dir",
            "AUTOREVIEW_HOST": "listen_host",
            "AUTOREVIEW_TOKEN": "auth_token",
            "AUTOREVIEW_REMOTE_ENDPOINT": "remote_endpoint",
            "AUTOREVIEW_REMOTE_TOKEN": "remote_token",
            "AUTOREVIEW_REMOTE_MODEL": "remote_model",
        }
        for env_key, attr in overrides.items():
            if env_key in env:
                setattr(config, attr, env[env_key])
        if "AUTOREVIEW_PORT" in env:
            config.listen_port = int(env["AUTOREVIEW_PORT"])
        return config


class IngestRequest(BaseModel):
    calls: Optional[list[dict]] = None
    calls_path: Optional[str] = None
    records: Optional[list[dict]] = None
    records_path: Optional[str] = None
    strategy: str = "Hybrid"
    run_id: Optional[str] = None


class ReviewRequest(BaseModel):
    version: int
    action: str
    corrected_value: Optional[str] = None


def create_app(
    config: ServiceConfig,
    store: Optional[ReviewStore] = None,
    models: Optional[Models] = None,
) -> FastAPI:
    app = FastAPI(title="autoreview service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    specs = standard_field_specs()
    store = store or ReviewStore(config.store_path)
    if models is None and config.models_dir:
        models = Models.load(Path(config.models_dir))
    app.state.store = store
    app.state.models = models
    app.state.config = config

    def require_auth(request: Request) -> None:
        if not config.auth_token:
            return
        header = request.headers.get("Authorization", "")
        if header != f"Bearer {config.auth_token}":
            raise HTTPException(status_code=401, detail="missing or invalid bearer token")

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok"}

    @app.get("/fields", dependencies=[Depends(require_auth)])
    def fields() -> dict:
        return {
            "fields": [
                {
                    "field_id": spec.field_id,
                    "format_pattern": spec.format_pattern,
                    "criticality": spec.criticality.value,
                }
                for spec in specs.values()
            ]
        }

    def _process_run(run_id: str, calls, records, strategy: Strategy) -> None:
        try:
            indexed = {(r.call_id, r.field_id): r for r in records}
            pairs: list[tuple[ReviewDecision, FieldRecord]] = []
            flagged: list[tuple[ReviewDecision, FieldRecord, object]] = []
            for call in calls:
                corrected = correct_call(call, specs, models.channel)
                decisions = review_call(
                    corrected, indexed, specs, models.detector, models.verifier, strategy=strategy
                )
                for decision in decisions:
                    record = indexed[(decision.call_id, decision.field_id)]
                    pairs.append((decision, record))
                    if decision.verdict == Verdict.FLAG_FOR_HUMAN:
                        flagged.append((decision, record, corrected))
            store.finish_run(run_id, pairs)
            for decision, record, corrected in flagged:
                evidence = [
                    {
                        "index": corrected.utterances[i].index,
                        "speaker": corrected.utterances[i].speaker.value,
                        "alternatives": list(corrected.utterances[i].alternatives),
                    }
                    for i in decision.evidence
                ]
                store.add_item(run_id, decision, record, evidence)
        except Exception as err:  # surfaced via run status, never lost silently
            store.finish_run(run_id, [], error=f"{type(err).__name__}: {err}")

    @app.post("/runs", dependencies=[Depends(require_auth)])
    def ingest(request: IngestRequest) -> dict:
        if models is None:
            raise HTTPException(status_code=400, detail="no models configured; train first")
        try:
            if request.calls is not None:
                calls = [call_from_dict(c) for c in request.calls]
            elif request.calls_path:
                calls = read_calls(Path(request.calls_path))
            else:
                raise HTTPException(status_code=422, detail="calls or calls_path required")
            if request.records is not None:
                records = [record_from_dict(r) for r in request.records]
            elif request.records_path:
                records = read_records(Path(request.records_path))
            else:
                raise HTTPException(status_code=422, detail="records or records_path required")
        except (KeyError, ValueError, OSError) as err:
            raise HTTPException(status_code=422, detail=f"bad corpus payload: {err}")
        try:
            strategy = Strategy(request.strategy)
        except ValueError:
            raise HTTPException(status_code=422, detail=f"unknown strategy {request.strategy!r}")
        run_id = request.run_id or uuid.uuid4().hex[:12]
        try:
            store.create_run(run_id, strategy.value)
        except sqlite3.IntegrityError:
            raise HTTPException(status_code=409, detail=f"run {run_id!r} already exists")
        if config.synchronous_ingest:
            _process_run(run_id, calls, records, strategy)
        else:
            worker = threading.Thread(
                target=_process_run, args=(run_id, calls, records, strategy), daemon=True
            )
            worker.start()
        return {"run_id": run_id, "status": store.get_run(run_id)["status"]}

    @app.get("/runs/{run_id}", dependencies=[Depends(require_auth)])
    def run_status(run_id: str) -> dict:
        try:
            info = store.get_run(run_id)
        except NotFound as err:
            raise HTTPException(status_code=404, detail=str(err))
        info["item_counts"] = store.counts(run_id)
        return info

    @app.get("/items", dependencies=[Depends(require_auth)])
    def list_items(
        status: Optional[str] = Query(default=None),
        field: Optional[str] = Query(default=None),
        run: Optional[str] = Query(default=None),
        page: int = Query(default=1, ge=1),
        page_size: int = Query(default=20, ge=1, le=200),
    ) -> dict:
        items, total = store.queue(
            status=status, field_id=field, run_id=run, page=page, page_size=page_size
        )
        return {"items": [i.to_dict() for i in items], "total": total, "page": page}

    @app.get("/items/{item_id}", dependencies=[Depends(require_auth)])
    def get_item(item_id: str) -> dict:
        try:
            return store.get_item(item_id).to_dict()
        except NotFound as err:
            raise HTTPException(status_code=404, detail=str(err))

    @app.post("/items/{item_id}/review", dependencies=[Depends(require_auth)])
    def submit_review(item_id: str, request: ReviewRequest) -> dict:
        corrected_value = request.corrected_value
        if request.action == "correct":
            if not corrected_value:
                raise HTTPException(status_code=422, detail="corrected_value required")
            try:
                item = store.get_item(item_id)
            except NotFound as err:
                raise HTTPException(status_code=404, detail=str(err))
            spec = specs.get(item.field_id)
            if spec is not None:
                try:
                    corrected_value = normalize_field_value(corrected_value, spec)
                except FormatViolation as err:
                    raise HTTPException(status_code=422, detail=str(err))
        try:
            updated = store.submit_review(
                item_id, request.version, request.action, corrected_value
            )
        except NotFound as err:
            raise HTTPException(status_code=404, detail=str(err))
        except (VersionConflict, InvalidTransition) as err:
            raise HTTPException(status_code=409, detail=str(err))
        except ValueError as err:
            raise HTTPException(status_code=422, detail=str(err))
        return updated.to_dict()

    @app.get(
        "/runs/{run_id}/export",
        dependencies=[Depends(require_auth)],
        response_class=PlainTextResponse,
    )
    def export(run_id: str) -> str:
        try:
            records = store.export_gold(run_id)
        except NotFound as err:
            raise HTTPException(status_code=404, detail=str(err))
        return "".join(dump_line(record_to_dict(r)) + "\n" for r in records)

    @app.get("/runs/{run_id}/report", dependencies=[Depends(require_auth)])
    def report(run_id: str) -> dict:
        try:
            store.get_run(run_id)
        except NotFound as err:
            raise HTTPException(status_code=404, detail=str(err))
        rows = store.run_decisions(run_id)
        if not rows or any(r.get("gold_value") in (None, "") for r in rows):
            raise HTTPException(status_code=404, detail="gold values unavailable for this run")
        decisions = [
            ReviewDecision(
                call_id=r["call_id"],
                field_id=r["field_id"],
                verdict=Verdict(r["verdict"]),
                strategy=Strategy(r["strategy"]),
                score=r["score"],
                post_call_value=r.get("post_call_value"),
            )
            for r in rows
        ]
        records = [
            FieldRecord(
                call_id=r["call_id"],
                field_id=r["field_id"],
                live_call_value=r["live_call_value"],
                gold_value=r["gold_value"],
            )
            for r in rows
        ]
        return score_reviews(decisions, records).to_dict()

    return app
