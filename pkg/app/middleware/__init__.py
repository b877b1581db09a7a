from __future__ import annotations

"""Middleware package."""
