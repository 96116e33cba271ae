"""Class balancing and cross-validation folds."""
