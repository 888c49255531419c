"""Basket Pricer - polynomial-expansion pricing of two-asset basket options."""

__version__ = "0.1.0"
