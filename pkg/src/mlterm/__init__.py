"""Termhood from corpus comparison, CRF term tagging and termhood-weighted term alignment."""

__version__ = "0.1.0"
