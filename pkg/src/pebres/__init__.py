"""Pebbling contradictions, resolution space and pebble games on layered DAGs."""

__version__ = "0.1.0"
