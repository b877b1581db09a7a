from __future__ import annotations

import os
from functools import lru_cache
from pathlib import Path

from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

BACKEND_ROOT = Path(__file__).resolve().parents[2]

AMBIENTS = ("sphere3", "solid_torus")


def _resolve_env_files() -> list[str]:
    explicit = (os.getenv("BRAIDCENSUS_ENV_FILE") or "").strip()
    if explicit:
        return [explicit]
    candidates = [BACKEND_ROOT / ".env"]
    return [str(path) for path in candidates if path.exists()]


ENV_FILES = _resolve_env_files()


def _strip_wrapping_quotes(value: str) -> str:
    text = str(value or "").strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in {'"', "'"}:
        return text[1:-1].strip()
    return text


def parse_key_value_text(text: str) -> dict[str, str]:
    """Parse `key=value` lines; `#` starts a comment line, blank lines are skipped."""
    values: dict[str, str] = {}
    for line in str(text or "").splitlines():
        raw = line.strip()
        if not raw or raw.startswith("#"):
            continue
        if "=" not in raw:
            raise ValueError(f"expected key=value, got {raw!r}")
        key, value = raw.split("=", 1)
        values[key.strip().lower().replace("-", "_")] = _strip_wrapping_quotes(value)
    return values


def load_key_value_file(path: str | Path) -> dict[str, str]:
    return parse_key_value_text(Path(path).read_text())


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=ENV_FILES or None,
        env_prefix="BRAIDCENSUS_",
        case_sensitive=False,
        extra="ignore",
    )

    APP_NAME: str = "Braid Census"
    ENVIRONMENT: str = "development"
    DEBUG: bool = False
    LOG_LEVEL: str = "INFO"
    API_V1_PREFIX: str = "/api/v1"
    BACKEND_HOST: str = "0.0.0.0"
    BACKEND_PORT: int = 8000
    APP_WORKERS: int = 2

    DATABASE_URL: str = "sqlite:///./braidcensus.db"

    CENSUS_AMBIENT: str = "sphere3"
    CENSUS_MAX_STRANDS: int = 3
    CENSUS_MAX_LENGTH: int = 6
    CENSUS_DEPTH: int = 4
    CENSUS_PANEL: str = "d3,d4,d5"
    CENSUS_STATE_BUDGET: int = 2_000_000
    CENSUS_WORKERS: int = 1

    CONJUGACY_NODE_BUDGET: int = 5_000
    QUANDLE_MAX_ENUMERATION_ORDER: int = 4

    DYNAMICS_TOLERANCE: float = 1e-6
    DYNAMICS_FD_STEP: float = 1e-5
    DYNAMICS_SAMPLES: int = 1000
    DYNAMICS_SEED: int = 20230901

    @field_validator("DEBUG", mode="before")
    @classmethod
    def _normalize_debug(cls, value):
        if isinstance(value, bool):
            return value
        raw = str(value or "").strip().lower()
        if raw in {"1", "true", "yes", "on", "debug", "development", "dev", "local"}:
            return True
        if raw in {"0", "false", "no", "off", "release", "production", "prod", "staging"}:
            return False
        return value

    @field_validator("CENSUS_AMBIENT", mode="before")
    @classmethod
    def _normalize_ambient(cls, value):
        return normalize_ambient(value)

    @property
    def database_backend(self) -> str:
        value = str(self.database_url or "").strip().lower()
        if value.startswith("postgresql"):
            return "postgresql"
        if value.startswith("sqlite"):
            return "sqlite"
        return "other"

    @property
    def database_url(self) -> str:
        return _strip_wrapping_quotes(self.DATABASE_URL)


def normalize_ambient(value) -> str:
    raw = str(value or "").strip().lower().replace("-", "_")
    if raw in {"s3", "sphere", "sphere3"}:
        return "sphere3"
    if raw in {"solid_torus", "torus", "s2xs1"}:
        return "solid_torus"
    return raw


@lru_cache
def get_settings() -> Settings:
    return Settings()
