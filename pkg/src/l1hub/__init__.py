"""Continuous hub location under the Manhattan metric."""

__version__ = "0.1.0"
