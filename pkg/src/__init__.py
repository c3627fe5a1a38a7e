"""Euler-Maruyama experiments for SDEs with irregular drift."""

__version__ = "1.0.0"
