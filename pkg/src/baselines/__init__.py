"""Logistic regression and single-tree baselines."""
