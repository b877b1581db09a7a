from __future__ import annotations

import logging

from fastapi import APIRouter, Depends, Query
from fastapi.responses import PlainTextResponse
from sqlalchemy.orm import Session

from app.db.session import get_db
from app.schemas.api import CensusRunRequest, ReportFormat
from app.services import census_service, census_store_service, closure_service, mixed_braid_service

router = APIRouter()
logger = logging.getLogger(__name__)


@router.post("/run")
def create_run(payload: CensusRunRequest, db: Session = Depends(get_db)):
    config = census_service.census_config_from_mapping(payload.overrides())
    report = census_service.run_census(config)
    run = census_store_service.save_report(db, report)
    logger.info("census.api.run_created run_id=%s", run.id)
    return {
        "data": {
            "id": run.id,
            "config": report.config.model_dump(mode="json"),
            "wordCount": report.word_count,
            "classCount": report.class_count,
            "complete": report.complete,
            "digest": run.digest,
        }
    }


@router.get("/runs")
def list_runs(limit: int = Query(50, ge=1, le=500), db: Session = Depends(get_db)):
    return {"data": census_store_service.list_runs(db, limit=limit)}


@router.get("/runs/{run_id}", response_class=PlainTextResponse)
def get_run_report(run_id: str, format: ReportFormat = "text", db: Session = Depends(get_db)):
    report = census_store_service.load_report(db, run_id)
    return PlainTextResponse(census_service.format_report(report, format))


@router.get("/witnesses")
def witnesses(k: int = Query(..., ge=1, le=50)):
    rows = []
    for word in census_service.essential_witnesses(k):
        link = closure_service.close_mixed(word)
        rows.append(
            {
                "word": mixed_braid_service.format_mixed(word),
                "winding": list(link.winding),
                "essential": closure_service.is_essential(link),
            }
        )
    return {"data": rows}
