from __future__ import annotations

"""Braid census package."""
