"""Command-line front end and file formats."""

from .main import main

__all__ = ["main"]
