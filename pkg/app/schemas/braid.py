from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class BraidWord(BaseModel):
    """A word in the Artin generators of B_n.

    Each letter is `(i, sign)` with 1 <= i <= n-1 and sign in {+1, -1}; `(i, +1)` is
    sigma_i, the positive half-twist exchanging positions i and i+1.
    """

    model_config = ConfigDict(frozen=True)

    strands: int
    letters: tuple[tuple[int, int], ...] = ()

    @field_validator("strands")
    @classmethod
    def _positive_strands(cls, value: int) -> int:
        if value < 1:
            raise ValueError("strands must be >= 1")
        return value

    @model_validator(mode="after")
    def _letters_in_range(self):
        for index, sign in self.letters:
            if not 1 <= index <= self.strands - 1:
                raise ValueError(f"generator index {index} outside 1..{self.strands - 1}")
            if sign not in (1, -1):
                raise ValueError(f"sign must be +1 or -1, got {sign}")
        return self

    def __len__(self) -> int:
        return len(self.letters)


class Permutation(BaseModel):
    """A permutation of {1..size}; `images[j-1]` is the image of j."""

    model_config = ConfigDict(frozen=True)

    size: int
    images: tuple[int, ...]

    @model_validator(mode="after")
    def _is_bijection(self):
        if self.size < 1:
            raise ValueError("size must be >= 1")
        if sorted(self.images) != list(range(1, self.size + 1)):
            raise ValueError("images must be a bijection on 1..size")
        return self

    def __call__(self, point: int) -> int:
        return self.images[point - 1]

    @property
    def is_identity(self) -> bool:
        return all(image == point for point, image in enumerate(self.images, start=1))

    def cycles(self) -> tuple[tuple[int, ...], ...]:
        seen: set[int] = set()
        found: list[tuple[int, ...]] = []
        for start in range(1, self.size + 1):
            if start in seen:
                continue
            cycle = [start]
            seen.add(start)
            point = self(start)
            while point != start:
                cycle.append(point)
                seen.add(point)
                point = self(point)
            found.append(tuple(cycle))
        return tuple(found)

    def cycle_notation(self) -> str:
        moved = [cycle for cycle in self.cycles() if len(cycle) > 1]
        if not moved:
            return "()"
        return "".join("(" + " ".join(str(point) for point in cycle) + ")" for cycle in moved)


class NormalForm(BaseModel):
    """Left normal form Delta^infimum * A_1 ... A_k over permutation braids."""

    model_config = ConfigDict(frozen=True)

    strands: int
    infimum: int = 0
    factors: tuple[Permutation, ...] = ()

    @model_validator(mode="after")
    def _proper_factors(self):
        half_twist = tuple(range(self.strands, 0, -1))
        for factor in self.factors:
            if factor.size != self.strands:
                raise ValueError("factor size differs from strand count")
            if factor.is_identity or factor.images == half_twist:
                raise ValueError("identity and Delta factors belong in the infimum")
        return self

    @property
    def supremum(self) -> int:
        return self.infimum + len(self.factors)

    @property
    def canonical_length(self) -> int:
        return len(self.factors)


class ConjugacyResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    verdict: Literal["conjugate", "not_conjugate", "undecided"]
    witness: Optional[BraidWord] = None
    certificate: Optional[str] = None
    details: dict[str, int | str] = Field(default_factory=dict)


class SummitElement(BaseModel):
    model_config = ConfigDict(frozen=True)

    normal_form: NormalForm
    conjugator: BraidWord


class SuperSummitSet(BaseModel):
    model_config = ConfigDict(frozen=True)

    strands: int
    infimum: int
    supremum: int
    elements: tuple[SummitElement, ...]
    complete: bool
    nodes: int
