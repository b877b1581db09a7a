from __future__ import annotations

from functools import lru_cache

from sqlalchemy import Engine, create_engine
from sqlalchemy.orm import Session, sessionmaker

from app.core.config import get_settings

settings = get_settings()


def engine_kwargs(url: str) -> dict:
    kwargs: dict = {"pool_pre_ping": True, "future": True}
    if url.strip().lower().startswith("sqlite"):
        kwargs["connect_args"] = {"check_same_thread": False}
    if url.strip().lower() in {"sqlite://", "sqlite:///:memory:"}:
        from sqlalchemy.pool import StaticPool

        kwargs["poolclass"] = StaticPool
    return kwargs


@lru_cache
def get_engine(url: str | None = None) -> Engine:
    url = url or settings.database_url
    return create_engine(url, **engine_kwargs(url))


def session_factory(url: str | None = None) -> sessionmaker[Session]:
    return sessionmaker(bind=get_engine(url), class_=Session, autoflush=False, autocommit=False)


def get_db():
    db = session_factory()()
    try:
        yield db
    finally:
        db.close()
