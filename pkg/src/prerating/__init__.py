"""Tournament performance ratings and performance rating equilibria."""

__version__ = "0.1.0"
