"""Histogram gradient-boosted trees with three growth strategies."""
