import numpy as np
import pytest

from kickctl.model import build_custom, build_flat_band


@pytest.fixture
def single_mode():
    """One mode at detuning 1 with V = 0.1; the hand-calculation workhorse."""
    return build_custom(0.0, [(1.0, 0.1)])


@pytest.fixture
def single_mode_weak():
    """Same geometry at V = 0.02 for tighter perturbative regimes."""
    return build_custom(0.0, [(1.0, 0.02)])


@pytest.fixture
def two_mode():
    """Two asymmetric modes with complex couplings."""
    return build_custom(0.3, [(1.1, 0.02 + 0.01j), (-0.7, 0.015j)])


@pytest.fixture(scope="session")
def flat_band():
    """201 modes across a width-20 band at V = 0.02 (golden-rule regime)."""
    return build_flat_band(201, 20.0, 0.02)


@pytest.fixture
def rng():
    return np.random.default_rng(20260815)
