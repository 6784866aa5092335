"""Numerical audits of modulus-based Bloch-type membership criteria."""

__version__ = "0.1.0"
