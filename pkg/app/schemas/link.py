from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, model_validator

Ambient = Literal["sphere3", "solid_torus", "handlebody"]


class LinkData(BaseModel):
    """Closure of a braid: components, winding, linking data."""

    model_config = ConfigDict(frozen=True)

    ambient: Ambient
    components: int
    winding: tuple[int, ...]
    linking_matrix: tuple[tuple[int, ...], ...]
    component_strands: tuple[tuple[int, ...], ...]
    axis_linking: tuple[int, ...] = ()
    fixed_strand_linking: tuple[tuple[int, ...], ...] = ()

    @model_validator(mode="after")
    def _consistent(self):
        k = self.components
        if k < 1:
            raise ValueError("a closure has at least one component")
        if len(self.component_strands) != k or len(self.winding) != k:
            raise ValueError("component data length differs from component count")
        if any(value < 0 for value in self.winding):
            raise ValueError("winding entries are absolute values")
        if list(self.winding) != sorted(self.winding):
            raise ValueError("winding multiset must be sorted")
        if len(self.linking_matrix) != k or any(len(row) != k for row in self.linking_matrix):
            raise ValueError("linking matrix must be k x k")
        for p in range(k):
            if self.linking_matrix[p][p] != 0:
                raise ValueError("linking matrix diagonal must vanish")
            for q in range(p + 1, k):
                if self.linking_matrix[p][q] != self.linking_matrix[q][p]:
                    raise ValueError("linking matrix must be symmetric")
        if self.axis_linking and len(self.axis_linking) != k:
            raise ValueError("axis linking needs one entry per component")
        if self.axis_linking and sorted(abs(value) for value in self.axis_linking) != list(self.winding):
            raise ValueError("winding is the absolute axis linking")
        if self.fixed_strand_linking and len(self.fixed_strand_linking) != k:
            raise ValueError("fixed linking needs one row per component")
        return self
