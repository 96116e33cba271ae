"""Logging setup and exception types."""
