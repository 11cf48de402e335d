"""Simulated beamsplitter quantum random number generator, extractors and test battery."""

__version__ = "0.1.0"
