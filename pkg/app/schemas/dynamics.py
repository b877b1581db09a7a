from __future__ import annotations

import math
from typing import Literal

from pydantic import BaseModel, ConfigDict, field_validator, model_validator

Classification = Literal["saddle", "sink", "source", "non-hyperbolic"]


class Point3(BaseModel):
    model_config = ConfigDict(frozen=True)

    x1: float
    x2: float
    x3: float

    @field_validator("x1", "x2", "x3")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("coordinates must be finite")
        return value

    @property
    def coords(self) -> tuple[float, float, float]:
        return (self.x1, self.x2, self.x3)

    @classmethod
    def of(cls, values) -> "Point3":
        x1, x2, x3 = (float(value) for value in values)
        return cls(x1=x1, x2=x2, x3=x3)


class TorusPoint(BaseModel):
    """A point of S^2 x S^1: (u1, u2) and the sign of u3 locate the unit vector,
    `circle` in [0, 1) is the S^1 coordinate."""

    model_config = ConfigDict(frozen=True)

    u1: float
    u2: float
    u3_sign: int = 1
    circle: float

    @model_validator(mode="after")
    def _ranges(self):
        if self.u1**2 + self.u2**2 > 1 + 1e-12:
            raise ValueError("u1^2 + u2^2 must not exceed 1")
        if not 0.0 <= self.circle < 1.0:
            raise ValueError("circle coordinate must lie in [0, 1)")
        if self.u3_sign not in (-1, 0, 1):
            raise ValueError("u3_sign must be -1, 0 or 1")
        return self


class SpectralReport(BaseModel):
    """Vector-field Jacobian spectrum; eigenvalues as (real, imag) pairs."""

    model_config = ConfigDict(frozen=True)

    point: Point3
    residual: float
    eigenvalues: tuple[tuple[float, float], ...]
    classification: Classification


class MapSpectrum(BaseModel):
    """Spectrum of a map's Jacobian at a fixed point, with eigenvalue moduli."""

    model_config = ConfigDict(frozen=True)

    point: Point3
    eigenvalues: tuple[tuple[float, float], ...]
    moduli: tuple[float, ...]
    classification: Classification


class DynamicsCheck(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    value: float
    threshold: float
    passed: bool
    detail: str = ""


class DynamicsReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    tolerance: float
    samples: int
    seed: int
    fixed_points: tuple[SpectralReport, ...]
    map_spectra: tuple[MapSpectrum, ...]
    checks: tuple[DynamicsCheck, ...]

    @property
    def all_passed(self) -> bool:
        return all(check.passed for check in self.checks)
