"""HTTP service wrapping the core toolkit (FastAPI + pydantic models)."""

from .app import app, create_app

__all__ = ["app", "create_app"]
