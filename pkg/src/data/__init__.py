"""Tabular ingestion: schema, columnar tables, CSV loading, cleaning and splitting."""
