"""Out-of-fold stacking of boosted tree models."""
