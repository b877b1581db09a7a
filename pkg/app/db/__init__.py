from __future__ import annotations

"""Database package."""
