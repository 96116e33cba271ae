"""Pipeline stages orchestrated by the CLI."""
