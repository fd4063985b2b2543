"""Embedded store for review runs and the human-review queue.

Single-writer sqlite with write-ahead logging: one binary, durable
writes, many concurrent readers. Item mutations go through an optimistic
version check so two reviewers can never silently overwrite each other.
"""
from __future__ import annotations

import json
import sqlite3
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .core import FieldRecord, NOT_PROVIDED, ReviewDecision, Verdict


class VersionConflict(Exception):
    pass


class NotFound(Exception):
    pass


class InvalidTransition(Exception):
    pass


ITEM_STATUSES = ("Pending", "Approved", "Corrected")


@dataclass(frozen=True)
class ReviewItem:
    item_id: str
    run_id: str
    call_id: str
    field_id: str
    live_call_value: str
    verdict: str
    strategy: str
    score: float
    evidence: list[dict]
    status: str
    corrected_value: Optional[str]
    version: int

    def to_dict(self) -> dict:
        return {
            "item_id": self.item_id,
            "run_id": self.run_id,
            "call_id": self.call_id,
            "field_id": self.field_id,
            "live_call_value": self.live_call_value,
            "verdict": self.verdict,
            "strategy": self.strategy,
            "score": self.score,
            "evidence": self.evidence,
            "status": self.status,
            "corrected_value": self.corrected_value,
            "version": self.version,
        }


_SCHEMA = """
CREATE TABLE IF NOT EXISTS runs (
    run_id TEXT PRIMARY KEY,
    seq INTEGER NOT NULL,
    status TEXT NOT NULL,
    strategy TEXT NOT NULL,
    decision_count INTEGER NOT NULL DEFAULT 0,
    flagged_count INTEGER NOT NULL DEFAULT 0,
    error TEXT
);
CREATE TABLE IF NOT EXISTS decisions (
    run_id TEXT NOT NULL,
    call_id TEXT NOT NULL,
    field_id TEXT NOT NULL,
    payload TEXT NOT NULL,
    PRIMARY KEY (run_id, call_id, field_id)
);
CREATE TABLE IF NOT EXISTS items (
    item_id TEXT PRIMARY KEY,
    run_id TEXT NOT NULL,
    call_id TEXT NOT NULL,
    field_id TEXT NOT NULL,
    live_call_value TEXT NOT NULL,
    verdict TEXT NOT NULL,
    strategy TEXT NOT NULL,
    score REAL NOT NULL,
    evidence TEXT NOT NULL,
    status TEXT NOT NULL,
    corrected_value TEXT,
    version INTEGER NOT NULL
);
CREATE INDEX IF NOT EXISTS idx_items_queue ON items (status, field_id, run_id, score);
"""


class ReviewStore:
    def __init__(self, path: str | Path):
        self.path = str(path)
        self._write_lock = threading.Lock()
        self._conn = sqlite3.connect(self.path, check_same_thread=False)
        self._conn.execute("PRAGMA journal_mode=WAL")
        self._conn.execute("PRAGMA synchronous=NORMAL")
        with self._conn:
            self._conn.executescript(_SCHEMA)

    def close(self) -> None:
        self._conn.close()

    # -- runs ---------------------------------------------------------------

    def create_run(self, run_id: str, strategy: str) -> None:
        with self._write_lock, self._conn:
            seq = self._conn.execute("SELECT COUNT(*) FROM runs").fetchone()[0]
            self._conn.execute(
                "INSERT INTO runs (run_id, seq, status, strategy) VALUES (?, ?, 'pending', ?)",
                (run_id, seq, strategy),
            )

    def finish_run(
        self,
        run_id: str,
        decisions: list[tuple[ReviewDecision, FieldRecord]],
        error: Optional[str] = None,
    ) -> None:
        """Record a completed run: all decisions, flagged ones as queue items."""
        with self._write_lock, self._conn:
            if error is not None:
                self._conn.execute(
                    "UPDATE runs SET status='failed', error=? WHERE run_id=?", (error, run_id)
                )
                return
            flagged = 0
            for decision, record in decisions:
                payload = {
                    "verdict": decision.verdict.value,
                    "strategy": decision.strategy.value,
                    "score": decision.score,
                    "post_call_value": decision.post_call_value,
                    "live_call_value": record.live_call_value,
                    "gold_value": record.gold_value,
                }
                self._conn.execute(
                    "INSERT OR REPLACE INTO decisions (run_id, call_id, field_id, payload)"
                    " VALUES (?, ?, ?, ?)",
                    (run_id, decision.call_id, decision.field_id, json.dumps(payload, sort_keys=True)),
                )
                if decision.verdict == Verdict.FLAG_FOR_HUMAN:
                    flagged += 1
            self._conn.execute(
                "UPDATE runs SET status='complete', decision_count=?, flagged_count=? WHERE run_id=?",
                (len(decisions), flagged, run_id),
            )

    def get_run(self, run_id: str) -> dict:
        row = self._conn.execute(
            "SELECT run_id, status, strategy, decision_count, flagged_count, error"
            " FROM runs WHERE run_id=?",
            (run_id,),
        ).fetchone()
        if row is None:
            raise NotFound(f"run {run_id} not found")
        return {
            "run_id": row[0],
            "status": row[1],
            "strategy": row[2],
            "decision_count": row[3],
            "flagged_count": row[4],
            "error": row[5],
        }

    def run_decisions(self, run_id: str) -> list[dict]:
        rows = self._conn.execute(
            "SELECT call_id, field_id, payload FROM decisions WHERE run_id=?"
            " ORDER BY call_id, field_id",
            (run_id,),
        ).fetchall()
        out = []
        for call_id, field_id, payload in rows:
            data = json.loads(payload)
            data["call_id"] = call_id
            data["field_id"] = field_id
            out.append(data)
        return out

    # -- items --------------------------------------------------------------

    def add_item(
        self,
        run_id: str,
        decision: ReviewDecision,
        record: FieldRecord,
        evidence: list[dict],
    ) -> ReviewItem:
        item_id = f"{run_id}:{decision.call_id}:{decision.field_id}"
        with self._write_lock, self._conn:
            self._conn.execute(
                "INSERT OR REPLACE INTO items (item_id, run_id, call_id, field_id,"
                " live_call_value, verdict, strategy, score, evidence, status,"
                " corrected_value, version)"
                " VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, 'Pending', NULL, 1)",
                (
                    item_id,
                    run_id,
                    decision.call_id,
                    decision.field_id,
                    record.live_call_value,
                    decision.verdict.value,
                    decision.strategy.value,
                    decision.score,
                    json.dumps(evidence, sort_keys=True),
                ),
            )
        return self.get_item(item_id)

    def _row_to_item(self, row) -> ReviewItem:
        return ReviewItem(
            item_id=row[0],
            run_id=row[1],
            call_id=row[2],
            field_id=row[3],
            live_call_value=row[4],
            verdict=row[5],
            strategy=row[6],
            score=row[7],
            evidence=json.loads(row[8]),
            status=row[9],
            corrected_value=row[10],
            version=row[11],
        )

    _ITEM_COLS = (
        "item_id, run_id, call_id, field_id, live_call_value, verdict, strategy,"
        " score, evidence, status, corrected_value, version"
    )

    def get_item(self, item_id: str) -> ReviewItem:
        row = self._conn.execute(
            f"SELECT {self._ITEM_COLS} FROM items WHERE item_id=?", (item_id,)
        ).fetchone()
        if row is None:
            raise NotFound(f"item {item_id} not found")
        return self._row_to_item(row)

    def queue(
        self,
        status: Optional[str] = None,
        field_id: Optional[str] = None,
        run_id: Optional[str] = None,
        page: int = 1,
        page_size: int = 20,
    ) -> tuple[list[ReviewItem], int]:
        """Items sorted least-confident first; stable tie-break by id."""
        clauses = []
        params: list = []
        if status:
            clauses.append("status=?")
            params.append(status)
        if field_id:
            clauses.append("field_id=?")
            params.append(field_id)
        if run_id:
            clauses.append("run_id=?")
            params.append(run_id)
        where = f"WHERE {' AND '.join(clauses)}" if clauses else ""
        total = self._conn.execute(f"SELECT COUNT(*) FROM items {where}", params).fetchone()[0]
        rows = self._conn.execute(
            f"SELECT {self._ITEM_COLS} FROM items {where}"
            " ORDER BY score ASC, item_id ASC LIMIT ? OFFSET ?",
            params + [page_size, (page - 1) * page_size],
        ).fetchall()
        return [self._row_to_item(r) for r in rows], total

    def submit_review(
        self,
        item_id: str,
        version: int,
        action: str,
        corrected_value: Optional[str] = None,
    ) -> ReviewItem:
        """Terminal Pending -> Approved/Corrected transition, version-checked."""
        if action not in ("approve", "correct"):
            raise ValueError(f"unknown action {action!r}")
        if action == "correct" and not corrected_value:
            raise ValueError("correct requires corrected_value")
        new_status = "Approved" if action == "approve" else "Corrected"
        with self._write_lock, self._conn:
            cursor = self._conn.execute(
                "UPDATE items SET status=?, corrected_value=?, version=version+1"
                " WHERE item_id=? AND version=? AND status='Pending'",
                (new_status, corrected_value if action == "correct" else None, item_id, version),
            )
            if cursor.rowcount == 0:
                current = self.get_item(item_id)  # raises NotFound when absent
                if current.status != "Pending":
                    raise InvalidTransition(
                        f"item {item_id} is {current.status}; review is terminal"
                    )
                raise VersionConflict(
                    f"item {item_id} is at version {current.version}, not {version}"
                )
        return self.get_item(item_id)

    def counts(self, run_id: Optional[str] = None) -> dict[str, int]:
        where = "WHERE run_id=?" if run_id else ""
        params = [run_id] if run_id else []
        rows = self._conn.execute(
            f"SELECT status, COUNT(*) FROM items {where} GROUP BY status", params
        ).fetchall()
        counts = {status: 0 for status in ITEM_STATUSES}
        for status, count in rows:
            counts[status] = count
        return counts

    def export_gold(self, run_id: str) -> list[FieldRecord]:
        """Reviewed items as gold labels: corrections beat live values."""
        self.get_run(run_id)
        rows = self._conn.execute(
            f"SELECT {self._ITEM_COLS} FROM items"
            " WHERE run_id=? AND status IN ('Approved', 'Corrected')"
            " ORDER BY call_id, field_id",
            (run_id,),
        ).fetchall()
        records = []
        for row in rows:
            item = self._row_to_item(row)
            gold = item.corrected_value if item.status == "Corrected" else item.live_call_value
            records.append(
                FieldRecord(
                    call_id=item.call_id,
                    field_id=item.field_id,
                    live_call_value=item.live_call_value,
                    gold_value=gold if gold else NOT_PROVIDED,
                )
            )
        return records
