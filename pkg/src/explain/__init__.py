"""Explainability: TreeSHAP, LIME, partial dependence and permutation importance."""
