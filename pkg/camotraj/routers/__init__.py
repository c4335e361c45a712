"""Router module exports."""

__all__ = ["health", "scenarios"]
