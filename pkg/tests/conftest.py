"""Shared fixtures for the towerctl test suite."""

import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT))
sys.path.insert(0, str(ROOT / "src"))
sys.path.insert(0, str(ROOT / "utils"))

from models.spectral_system import Branch, Eigenmode, SpectralSystem  # noqa: E402
from services.model_zoo import make_neumann_heat, make_neumann_wave, make_toy  # noqa: E402
from services.numerics_config import numerics_config  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def toy():
    return make_toy()


@pytest.fixture
def stable_mode():
    """Single mode mu = -1 with trace 1."""
    return SpectralSystem((Eigenmode(0, -1.0, [1.0]),), growth_bound=0.0, input_dim=1,
                          name='stable_mode')


@pytest.fixture
def heat_small():
    return make_neumann_heat(6)


@pytest.fixture
def wave_small():
    return make_neumann_wave(4)


@pytest.fixture
def jordan_system():
    """Two-member chain at mu = -0.5 next to a simple mode, inputs in C^2."""
    modes = (
        Eigenmode(0, -0.5, [1.0, 0.0], branch=Branch.JORDAN, chain=(0, 1)),
        Eigenmode(1, -0.5, [0.5, 1.0], branch=Branch.JORDAN, chain=(0, 1)),
        Eigenmode(2, -2.0, [0.0, 1.0]),
    )
    return SpectralSystem(modes, growth_bound=0.0, input_dim=2, name='jordan')


@pytest.fixture(autouse=True)
def restore_numerics():
    """Undo knob changes made by a test."""
    yield
    numerics_config.reset()
