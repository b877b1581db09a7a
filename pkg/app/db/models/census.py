from __future__ import annotations

from datetime import datetime

from sqlalchemy import Boolean, DateTime, ForeignKey, Integer, String, Text
from sqlalchemy.orm import Mapped, mapped_column, relationship

from app.db.base import Base, UuidKeyMixin, utc_now


class CensusRun(UuidKeyMixin, Base):
    __tablename__ = "census_runs"

    ambient: Mapped[str] = mapped_column(String(20), nullable=False, index=True)
    config_json: Mapped[str] = mapped_column(Text, nullable=False)
    buckets_json: Mapped[str] = mapped_column(Text, default="[]")
    word_count: Mapped[int] = mapped_column(Integer, nullable=False)
    expected_word_count: Mapped[int] = mapped_column(Integer, nullable=False)
    class_count: Mapped[int] = mapped_column(Integer, nullable=False)
    states_explored: Mapped[int] = mapped_column(Integer, default=0)
    complete: Mapped[bool] = mapped_column(Boolean, default=True)
    digest: Mapped[str] = mapped_column(String(64), nullable=False, index=True)
    created_at: Mapped[datetime] = mapped_column(DateTime, default=utc_now, index=True)

    entries: Mapped[list["CensusEntry"]] = relationship(
        back_populates="run",
        cascade="all, delete-orphan",
        order_by="CensusEntry.position",
    )


class CensusEntry(UuidKeyMixin, Base):
    __tablename__ = "census_entries"

    run_id: Mapped[str] = mapped_column(String(36), ForeignKey("census_runs.id"), nullable=False, index=True)
    position: Mapped[int] = mapped_column(Integer, nullable=False)
    word: Mapped[str] = mapped_column(String(255), nullable=False)
    fingerprint_hash: Mapped[str] = mapped_column(String(12), nullable=False, index=True)
    class_id: Mapped[int] = mapped_column(Integer, nullable=False, index=True)
    undistinguished: Mapped[bool] = mapped_column(Boolean, default=False)
    record_json: Mapped[str] = mapped_column(Text, nullable=False)

    run: Mapped[CensusRun] = relationship(back_populates="entries")
