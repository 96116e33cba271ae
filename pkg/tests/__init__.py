"""Test suite for the fraud detection pipeline."""
