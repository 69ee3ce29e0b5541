"""HTTP service exposing campaign runs, sweeps, and inspection."""

from .app import create_app

__all__ = ["create_app"]
