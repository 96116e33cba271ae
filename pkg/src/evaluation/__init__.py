"""Classification metrics and report artifacts."""
