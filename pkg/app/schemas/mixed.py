from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, model_validator

from app.schemas.braid import BraidWord


class MixedBraidWord(BaseModel):
    """A word in B_{m,n}: loop generators a_1..a_m and moving sigma_1..sigma_{n-1}.

    Letters are `(tag, index, sign)` with tag "a" (loop around fixed strand index) or
    "s" (moving sigma_index).
    """

    model_config = ConfigDict(frozen=True)

    fixed_strands: int
    moving_strands: int
    letters: tuple[tuple[Literal["a", "s"], int, int], ...] = ()

    @model_validator(mode="after")
    def _bounds(self):
        if self.fixed_strands < 0:
            raise ValueError("fixed_strands must be >= 0")
        if self.moving_strands < 1:
            raise ValueError("moving_strands must be >= 1")
        for tag, index, sign in self.letters:
            bound = self.fixed_strands if tag == "a" else self.moving_strands - 1
            if not 1 <= index <= bound:
                raise ValueError(f"{tag}{index} outside 1..{bound}")
            if sign not in (1, -1):
                raise ValueError(f"sign must be +1 or -1, got {sign}")
        return self

    def __len__(self) -> int:
        return len(self.letters)


class RelatorCheck(BaseModel):
    model_config = ConfigDict(frozen=True)

    family: str
    label: str
    left: MixedBraidWord
    right: MixedBraidWord
    embedded_left: BraidWord
    embedded_right: BraidWord
    passed: bool


class PresentationReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    fixed_strands: int
    moving_strands: int
    checks: tuple[RelatorCheck, ...]

    @property
    def all_passed(self) -> bool:
        return all(check.passed for check in self.checks)
