"""Service Layer for towerctl

This package contains the numerical services and their configuration:
- Spectral core (semigroups, tower norms, observation maps)
- Time function spaces and the duality engine
- Model zoo, wave characteristics and the heat-wave eigen-solver
- Observability, configuration and the experiment runner
"""

# Modules are imported where needed; they expect src/ and utils/ on sys.path
from .numerics_config import numerics_config, NumericsConfig

__all__ = [
    'numerics_config',
    'NumericsConfig',
]
