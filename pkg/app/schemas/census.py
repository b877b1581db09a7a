from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.schemas.braid import BraidWord

CensusAmbient = Literal["sphere3", "solid_torus"]
MoveKind = Literal["rotate", "conjugate", "stabilize", "destabilize", "rewrite"]


class CensusConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    ambient: CensusAmbient = "sphere3"
    min_strands: int = 1
    max_strands: int = 3
    max_length: int = 6
    depth: int = 4
    panel: tuple[int, ...] = (3, 4, 5)
    state_budget: int = 2_000_000
    workers: int = Field(default=1, exclude=True)

    @field_validator("panel")
    @classmethod
    def _panel_orders(cls, value: tuple[int, ...]) -> tuple[int, ...]:
        if not value:
            raise ValueError("panel needs at least one quandle")
        if any(order < 1 for order in value):
            raise ValueError("panel quandle orders must be >= 1")
        return value

    @model_validator(mode="after")
    def _bounds(self):
        if self.min_strands < 1 or self.max_strands < self.min_strands:
            raise ValueError("strand bounds must satisfy 1 <= min_strands <= max_strands")
        if self.max_length < 0 or self.depth < 0:
            raise ValueError("max_length and depth must be >= 0")
        if self.state_budget < 1 or self.workers < 1:
            raise ValueError("state_budget and workers must be >= 1")
        return self


class CensusFingerprint(BaseModel):
    """Move-invariant data of a closed braid; ordered through `sort_key`."""

    model_config = ConfigDict(frozen=True)

    ambient: CensusAmbient
    components: int
    winding: tuple[int, ...] = ()
    linking: tuple[int, ...] = ()
    colorings: tuple[int, ...] = ()

    def sort_key(self) -> tuple:
        return (self.ambient, self.components, self.winding, self.linking, self.colorings)


class MoveStep(BaseModel):
    """One move and the word it produced.

    rotate: cyclic permutation by `offset` letters; conjugate: c w c^-1 with
    `conjugator` c; stabilize: sigma_n^sign inserted at `at`; destabilize: remove
    the unique last generator; rewrite: replace by an equal word of B_n.
    """

    model_config = ConfigDict(frozen=True)

    kind: MoveKind
    offset: int = 0
    conjugator: tuple[tuple[int, int], ...] = ()
    sign: int = 0
    at: int = 0
    result: BraidWord


class MoveTrace(BaseModel):
    model_config = ConfigDict(frozen=True)

    source: BraidWord
    target: BraidWord
    steps: tuple[MoveStep, ...] = ()

    def __len__(self) -> int:
        return len(self.steps)


class CensusRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    index: int
    word: str
    fingerprint: CensusFingerprint
    fingerprint_hash: str
    class_id: int
    representative: str
    trace: MoveTrace
    raw_linking: tuple[tuple[int, ...], ...] = ()
    undistinguished: bool = False


class BucketSummary(BaseModel):
    model_config = ConfigDict(frozen=True)

    fingerprint: CensusFingerprint
    fingerprint_hash: str
    classes: int
    words: int

    @property
    def undistinguished(self) -> bool:
        return self.classes > 1


class CensusReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    config: CensusConfig
    records: tuple[CensusRecord, ...]
    buckets: tuple[BucketSummary, ...]
    class_count: int
    word_count: int
    expected_word_count: int
    states_explored: int
    complete: bool = True
