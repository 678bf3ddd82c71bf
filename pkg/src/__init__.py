"""
towerctl - spectral-truncation toolkit for linear control systems with irregular inputs.

This package computes generalized final states and state curves for distributional
inputs on truncated modal expansions, Sobolev-tower and dual norms, observability
constants and minimum-norm controls, together with the concrete heat, wave and
coupled heat-wave models.

Modules import each other as top-level names (models, services, errors, logger), so the
entry point and the test suite put src/ and utils/ on sys.path.
"""

__version__ = "1.0.0"
