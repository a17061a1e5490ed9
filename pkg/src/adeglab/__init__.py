"""Exact tools for approximate degree, dual witnesses and hardness amplification."""

__version__ = "0.1.0"
