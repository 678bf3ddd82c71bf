"""Utility Functions and Helpers

This package contains utility functions and helper classes:
- Logging utilities
- File system and artifact helpers
- Composite Gauss-Legendre quadrature
"""
