from __future__ import annotations

import logging

from fastapi import FastAPI, Request

from app.api.routes import api_router
from app.core.config import get_settings
from app.core.exceptions import register_exception_handlers
from app.core.logging import resolve_level, setup_logging
from app.middleware.request_context import RequestContextMiddleware
from app.services.census_store_service import create_tables

settings = get_settings()
setup_logging(logging.DEBUG if settings.DEBUG else resolve_level(settings.LOG_LEVEL))

fastapi_app = FastAPI(title=settings.APP_NAME, debug=settings.DEBUG)
fastapi_app.include_router(api_router, prefix=settings.API_V1_PREFIX)
fastapi_app.add_middleware(RequestContextMiddleware)
register_exception_handlers(fastapi_app)


@fastapi_app.middleware("http")
async def structured_error_logging(request: Request, call_next):
    try:
        return await call_next(request)
    except Exception:
        logging.exception(
            "request.unhandled method=%s path=%s query=%s request_id=%s",
            request.method,
            request.url.path,
            dict(request.query_params),
            getattr(request.state, "request_id", ""),
        )
        raise


@fastapi_app.on_event("startup")
async def on_startup():
    create_tables()
    logging.info(
        "startup.ready app=%s environment=%s database=%s",
        settings.APP_NAME,
        settings.ENVIRONMENT,
        settings.database_backend,
    )


app = fastapi_app
