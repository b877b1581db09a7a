from __future__ import annotations

from fastapi import APIRouter

from app.api.routes import braids, census, dynamics, groups, health, mixed, quandles

api_router = APIRouter()
api_router.include_router(health.router, tags=["health"])
api_router.include_router(braids.router, prefix="/braids", tags=["braids"])
api_router.include_router(mixed.router, prefix="/mixed", tags=["mixed"])
api_router.include_router(quandles.router, prefix="/quandles", tags=["quandles"])
api_router.include_router(groups.router, prefix="/groups", tags=["groups"])
api_router.include_router(census.router, prefix="/census", tags=["census"])
api_router.include_router(dynamics.router, prefix="/dynamics", tags=["dynamics"])
