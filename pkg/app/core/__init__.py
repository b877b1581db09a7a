from __future__ import annotations

"""Core package."""
