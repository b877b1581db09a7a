from __future__ import annotations

from typing import Optional

from fastapi import APIRouter, Query

from app.services import dynamics_service

router = APIRouter()


@router.get("/verify")
def verify(
    tol: Optional[float] = Query(None, gt=0),
    samples: Optional[int] = Query(None, ge=1, le=100_000),
    seed: Optional[int] = None,
):
    report = dynamics_service.verify_dynamics(tolerance=tol, samples=samples, seed=seed)
    data = report.model_dump(mode="json")
    data["allPassed"] = report.all_passed
    return {"data": data}
