"""HTTP service exposing the batch pipeline over a confined workspace."""

from .app import create_app

__all__ = ["create_app"]
