from __future__ import annotations

"""API package."""
