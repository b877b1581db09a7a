"""Persistence of census reports.

A stored run keeps the echoed config, the bucket summary and one entry per
record; `load_report` rebuilds a report that renders to the same text as the
one that was saved, which the stored digest checks.
"""

from __future__ import annotations

import hashlib
import json
import logging
from collections.abc import Iterator
from contextlib import contextmanager

from sqlalchemy import select
from sqlalchemy.orm import Session

from app.core.exceptions import AppException
from app.db.base import Base
from app.db.models.census import CensusEntry, CensusRun
from app.db.session import get_engine, session_factory
from app.schemas.census import BucketSummary, CensusConfig, CensusRecord, CensusReport
from app.services import census_service

logger = logging.getLogger(__name__)


def report_digest(report: CensusReport) -> str:
    return hashlib.sha256(census_service.format_report(report).encode("utf-8")).hexdigest()


def create_tables(url: str | None = None) -> None:
    import app.db.models  # noqa: F401

    Base.metadata.create_all(bind=get_engine(url))


@contextmanager
def open_session(url: str | None = None) -> Iterator[Session]:
    create_tables(url)
    db = session_factory(url)()
    try:
        yield db
    finally:
        db.close()


def save_report(db: Session, report: CensusReport) -> CensusRun:
    run = CensusRun(
        ambient=report.config.ambient,
        config_json=report.config.model_dump_json(),
        buckets_json=json.dumps([bucket.model_dump(mode="json") for bucket in report.buckets]),
        word_count=report.word_count,
        expected_word_count=report.expected_word_count,
        class_count=report.class_count,
        states_explored=report.states_explored,
        complete=report.complete,
        digest=report_digest(report),
    )
    run.entries = [
        CensusEntry(
            position=record.index,
            word=record.word,
            fingerprint_hash=record.fingerprint_hash,
            class_id=record.class_id,
            undistinguished=record.undistinguished,
            record_json=record.model_dump_json(),
        )
        for record in report.records
    ]
    db.add(run)
    db.commit()
    db.refresh(run)
    logger.info("census.store.saved run_id=%s words=%s classes=%s", run.id, run.word_count, run.class_count)
    return run


def get_run(db: Session, run_id: str) -> CensusRun:
    run = db.get(CensusRun, run_id)
    if run is None:
        raise AppException("Census run not found.", status_code=404, code="census.run_not_found", extra={"runId": run_id})
    return run


def list_runs(db: Session, limit: int = 50) -> list[dict]:
    rows = db.scalars(select(CensusRun).order_by(CensusRun.created_at.desc()).limit(limit)).all()
    return [
        {
            "id": run.id,
            "ambient": run.ambient,
            "wordCount": run.word_count,
            "classCount": run.class_count,
            "complete": run.complete,
            "digest": run.digest,
            "createdAt": run.created_at.isoformat() if run.created_at else None,
        }
        for run in rows
    ]


def load_report(db: Session, run_id: str) -> CensusReport:
    run = get_run(db, run_id)
    report = CensusReport(
        config=CensusConfig.model_validate_json(run.config_json),
        records=tuple(CensusRecord.model_validate_json(entry.record_json) for entry in run.entries),
        buckets=tuple(BucketSummary.model_validate(item) for item in json.loads(run.buckets_json or "[]")),
        class_count=run.class_count,
        word_count=run.word_count,
        expected_word_count=run.expected_word_count,
        states_explored=run.states_explored,
        complete=run.complete,
    )
    if report_digest(report) != run.digest:
        logger.error("census.store.digest_mismatch run_id=%s", run_id)
        raise AppException(
            "Stored census run does not reproduce its report.",
            status_code=500,
            code="census.digest_mismatch",
            extra={"runId": run_id},
        )
    return report
