"""Monomialization of germs of analytic maps along a monomial valuation."""
__version__ = "0.1.0"
