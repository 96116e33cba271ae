"""Explainable fraud detection with a stacked gradient boosting ensemble.

Boosted trees, SMOTE balancing, out-of-fold stacking, hyperparameter search and
post-hoc explanations (TreeSHAP, LIME, partial dependence, permutation
importance) over tabular transaction data.
"""

__version__ = "1.0.0"
