"""Model provider service: /embed and /nli endpoints plus corpus annotation."""

__version__ = "0.1.0"
