from __future__ import annotations

from fastapi import APIRouter, Query

from app.services import mixed_braid_service

router = APIRouter()


@router.get("/verify")
def verify(m: int = Query(..., ge=0, le=4), n: int = Query(..., ge=1, le=5)):
    report = mixed_braid_service.verify_presentation(m, n)
    return {
        "data": {
            "fixedStrands": report.fixed_strands,
            "movingStrands": report.moving_strands,
            "allPassed": report.all_passed,
            "checks": [{"family": check.family, "relator": check.label, "passed": check.passed} for check in report.checks],
        }
    }
