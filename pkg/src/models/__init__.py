"""Data Models for towerctl

This package contains data models and structures:
- Spectral systems, eigenmodes and tower vectors
- Time signals and generalized inputs
- Model states, observability setups and experiment configurations
- Result records
"""
