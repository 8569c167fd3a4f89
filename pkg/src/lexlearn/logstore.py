"""Append-only JSONL session logs and crash recovery.

One file per session. The log is the source of truth: beliefs are never
stored, only the events needed to replay them through the inference engine.
Appends are flushed and fsynced before the caller proceeds, so a response
reflecting a state transition is never sent before the transition is
durable.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Mapping, Sequence

from .design import Bundle
from .inference import Feedback
from .session import SessionConfig, SessionTrace, replay_session
from .taxonomy import KnowledgeGraph

__all__ = [
    "SessionLogRecord",
    "SessionLogStore",
    "RecoveryResult",
    "recover",
    "records_for_start",
    "records_for_feedback",
]

STARTED = "started"
BUNDLE_SHOWN = "bundle_shown"
FEEDBACK = "feedback"
CONVERGED = "converged"
EXHAUSTED = "exhausted"

# Within a step, events replay in this order.
_KIND_ORDER = {STARTED: 0, BUNDLE_SHOWN: 1, FEEDBACK: 2, CONVERGED: 3, EXHAUSTED: 3}


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass(frozen=True)
class SessionLogRecord:
    session_id: str
    step: int
    ts: str
    kind: str
    payload: Mapping[str, Any]

    def to_json(self) -> str:
        return json.dumps(
            {
                "session_id": self.session_id,
                "step": self.step,
                "ts": self.ts,
                "kind": self.kind,
                "payload": dict(self.payload),
            },
            sort_keys=True,
        )

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "SessionLogRecord":
        return cls(
            session_id=doc["session_id"],
            step=doc["step"],
            ts=doc["ts"],
            kind=doc["kind"],
            payload=doc["payload"],
        )


def _terminal_records(trace: SessionTrace) -> list[SessionLogRecord]:
    step = max(len(trace.steps) - 1, 0)
    if trace.status == "converged":
        node = trace.converged_node
        return [
            SessionLogRecord(
                trace.session_id,
                step,
                _now(),
                CONVERGED,
                {"node": node, "confidence": trace.belief[node]},
            )
        ]
    if trace.status == "exhausted":
        return [SessionLogRecord(trace.session_id, step, _now(), EXHAUSTED, {})]
    return []


def records_for_start(trace: SessionTrace) -> list[SessionLogRecord]:
    """Log records for a freshly started session."""
    records = [
        SessionLogRecord(
            trace.session_id,
            0,
            _now(),
            STARTED,
            {
                "kg_id": trace.kg_id,
                "query": trace.query,
                "config": trace.config.to_dict(),
            },
        )
    ]
    pending = trace.pending_step
    if pending is not None:
        records.append(
            SessionLogRecord(
                trace.session_id,
                pending.index,
                _now(),
                BUNDLE_SHOWN,
                {"bundle": list(pending.bundle.products)},
            )
        )
    records.extend(_terminal_records(trace))
    return records


def records_for_feedback(trace: SessionTrace, y: Feedback) -> list[SessionLogRecord]:
    """Log records for one feedback transition on the trace it produced."""
    answered = trace.steps[-1] if trace.pending_step is None else trace.steps[-2]
    records = [
        SessionLogRecord(
            trace.session_id, answered.index, _now(), FEEDBACK, {"outcome": y.key}
        )
    ]
    pending = trace.pending_step
    if pending is not None:
        records.append(
            SessionLogRecord(
                trace.session_id,
                pending.index,
                _now(),
                BUNDLE_SHOWN,
                {"bundle": list(pending.bundle.products)},
            )
        )
    records.extend(_terminal_records(trace))
    return records


class SessionLogStore:
    """Durable append-only store, one JSONL file per session."""

    def __init__(self, log_dir: Path | str):
        self.log_dir = Path(log_dir)
        self.log_dir.mkdir(parents=True, exist_ok=True)

    def path_for(self, session_id: str) -> Path:
        return self.log_dir / f"{session_id}.jsonl"

    def append(self, records: Sequence[SessionLogRecord]) -> None:
        if not records:
            return
        session_id = records[0].session_id
        data = "".join(r.to_json() + "\n" for r in records)
        with open(self.path_for(session_id), "a", encoding="utf-8") as f:
            f.write(data)
            f.flush()
            os.fsync(f.fileno())


@dataclass
class RecoveryResult:
    traces: dict[str, SessionTrace] = field(default_factory=dict)
    quarantined: dict[str, str] = field(default_factory=dict)


def _replay_records(
    session_id: str,
    records: list[SessionLogRecord],
    kgs: Mapping[str, KnowledgeGraph],
) -> SessionTrace:
    if not records or records[0].kind != STARTED:
        raise ValueError("log does not begin with a 'started' record")
    head = records[0].payload
    kg_id = head["kg_id"]
    if kg_id not in kgs:
        raise ValueError(f"log references unknown KG {kg_id!r}")
    kg = kgs[kg_id]
    config = SessionConfig.from_dict(head["config"])

    order = [(r.step, _KIND_ORDER.get(r.kind, 9)) for r in records]
    if order != sorted(order):
        raise ValueError("records are out of order")

    shown: list[Bundle] = []
    feedbacks: list[Feedback] = []
    for r in records[1:]:
        if r.kind == BUNDLE_SHOWN:
            if len(shown) != len(feedbacks):
                raise ValueError("two bundles shown without feedback in between")
            shown.append(Bundle.of(r.payload["bundle"]))
        elif r.kind == FEEDBACK:
            if len(shown) != len(feedbacks) + 1:
                raise ValueError("feedback without a shown bundle")
            feedbacks.append(Feedback.from_key(r.payload["outcome"]))
        elif r.kind in (CONVERGED, EXHAUSTED):
            pass  # terminal status is recomputed from the replayed belief
        else:
            raise ValueError(f"unknown record kind {r.kind!r}")

    pending = shown[-1] if len(shown) == len(feedbacks) + 1 else None
    observations = list(zip(shown, feedbacks))
    return replay_session(
        kg, session_id, head["query"], config, observations, pending
    )


def recover(
    log_dir: Path | str, kgs: Mapping[str, KnowledgeGraph]
) -> RecoveryResult:
    """Replay every session log under log_dir.

    A session with a corrupt or inconsistent log is quarantined with a
    diagnostic; its file is left untouched and other sessions are
    unaffected.
    """
    result = RecoveryResult()
    log_dir = Path(log_dir)
    if not log_dir.exists():
        return result
    for path in sorted(log_dir.glob("*.jsonl")):
        session_id = path.stem
        try:
            records = []
            for i, line in enumerate(path.read_text(encoding="utf-8").splitlines()):
                if not line.strip():
                    continue
                try:
                    records.append(SessionLogRecord.from_dict(json.loads(line)))
                except (json.JSONDecodeError, KeyError) as exc:
                    raise ValueError(f"corrupt record at line {i + 1}: {exc}") from exc
            result.traces[session_id] = _replay_records(session_id, records, kgs)
        except (ValueError, KeyError) as exc:
            result.quarantined[session_id] = str(exc)
    return result
