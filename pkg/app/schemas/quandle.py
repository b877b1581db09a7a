from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, ConfigDict, model_validator


class FiniteQuandle(BaseModel):
    """Operation table on {0..order-1}; `table[i][j]` is i * j.

    Only the shape is validated here; the quandle axioms are checked by
    `quandle_service.check_axioms`, which reports a counterexample.
    """

    model_config = ConfigDict(frozen=True)

    order: int
    table: tuple[tuple[int, ...], ...]
    name: str = ""

    @model_validator(mode="after")
    def _square_table(self):
        q = self.order
        if q < 1:
            raise ValueError("order must be >= 1")
        if len(self.table) != q or any(len(row) != q for row in self.table):
            raise ValueError("table must be order x order")
        if any(not 0 <= entry < q for row in self.table for entry in row):
            raise ValueError("table entries must lie in 0..order-1")
        return self


class AxiomReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    valid: bool
    axiom: Optional[str] = None
    counterexample: Optional[tuple[int, ...]] = None


class QuandlePresentation(BaseModel):
    """Generators x_0..x_{g-1} and relations (k, i, j) meaning x_k = x_i * x_j."""

    model_config = ConfigDict(frozen=True)

    generators: int
    relations: tuple[tuple[int, int, int], ...] = ()

    @model_validator(mode="after")
    def _indices(self):
        if self.generators < 0:
            raise ValueError("generator count must be >= 0")
        for relation in self.relations:
            if any(not 0 <= index < self.generators for index in relation):
                raise ValueError(f"relation {relation} references a missing generator")
        return self


class GroupPresentation(BaseModel):
    """Finitely presented group; relators are free words in signed 1-based generators."""

    model_config = ConfigDict(frozen=True)

    generators: int
    relators: tuple[tuple[int, ...], ...] = ()
