"""cubex: exact construction and verification of cubical polytopes and balls."""

__version__ = "0.1.0"
