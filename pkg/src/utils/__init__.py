"""Logging, JSON and summary helpers shared by the qid modules."""
