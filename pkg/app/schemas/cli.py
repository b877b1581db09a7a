from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, model_validator

Subcommand = Literal[
    "normalize",
    "equal",
    "conj",
    "close",
    "color",
    "census",
    "witness",
    "dynamics-verify",
    "mixed-verify",
    "group",
    "quandles",
]


class CliConfig(BaseModel):
    """Validated view of one CLI invocation."""

    model_config = ConfigDict(frozen=True)

    subcommand: Subcommand
    ambient: Optional[str] = None
    strands: Optional[int] = None
    min_strands: Optional[int] = None
    max_length: Optional[int] = None
    depth: Optional[int] = None
    panel: Optional[str] = None
    budget: Optional[int] = None
    workers: Optional[int] = None
    tolerance: Optional[float] = None
    output_format: Literal["text", "records"] = "text"
    out: Optional[str] = None
    config_path: Optional[str] = None

    @model_validator(mode="after")
    def _positive_bounds(self):
        for name in ("strands", "min_strands", "budget", "workers"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ValueError(f"--{name.replace('_', '-')} must be >= 1")
        for name in ("max_length", "depth"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ValueError(f"--{name.replace('_', '-')} must be >= 0")
        if self.tolerance is not None and self.tolerance <= 0:
            raise ValueError("--tol must be positive")
        return self
