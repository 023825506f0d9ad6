"""Recovery of nearby exceptional parameter values for polynomial systems."""

__version__ = "0.1.0"
