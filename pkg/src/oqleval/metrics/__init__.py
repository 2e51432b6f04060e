"""Similarity and execution metrics."""
