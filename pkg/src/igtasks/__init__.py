"""Weakly-supervised extraction of industry-group capability triples."""

__version__ = "0.1.0"
