from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class WordRequest(BaseModel):
    word: str
    strands: Optional[int] = Field(default=None, ge=1)


class PairRequest(BaseModel):
    left: str
    right: str
    strands: Optional[int] = Field(default=None, ge=1)


class ConjugacyRequest(PairRequest):
    budget: Optional[int] = Field(default=None, ge=1)


class CloseRequest(WordRequest):
    ambient: str = "sphere3"


class ColorRequest(WordRequest):
    panel: str = "d3,d4,d5"


class GroupRequest(WordRequest):
    degree: int = Field(default=3, ge=2, le=4)


class CensusRunRequest(BaseModel):
    ambient: Optional[str] = None
    minStrands: Optional[int] = None
    maxStrands: Optional[int] = None
    maxLength: Optional[int] = None
    depth: Optional[int] = None
    panel: Optional[str] = None
    stateBudget: Optional[int] = None

    def overrides(self) -> dict[str, object]:
        return {
            "ambient": self.ambient,
            "min_strands": self.minStrands,
            "max_strands": self.maxStrands,
            "max_length": self.maxLength,
            "depth": self.depth,
            "panel": self.panel,
            "state_budget": self.stateBudget,
        }


ReportFormat = Literal["text", "records"]
