import sys
from pathlib import Path

import pytest

# Add the src directory to Python path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root / "src"))

from refractlib import BrownianRisk, CramerLundbergExp, JumpDiffusionPhaseType, RefractedModel  # noqa: E402


@pytest.fixture
def cl_model():
    """Cramer-Lundberg model with c = 9, eta = 5, alpha = 1."""
    return CramerLundbergExp(9.0, 5.0, 1.0)


@pytest.fixture
def cl_refracted(cl_model):
    """The Cramer-Lundberg model refracted with delta = 3."""
    return RefractedModel(cl_model, 3.0)


@pytest.fixture
def brownian_model():
    """Brownian model with c = 6, sigma = 6."""
    return BrownianRisk(6.0, 6.0)


@pytest.fixture
def brownian_refracted(brownian_model):
    """The Brownian model refracted with delta = 2."""
    return RefractedModel(brownian_model, 2.0)


@pytest.fixture
def erlang_model():
    """Pure-jump phase-type model with Erlang(2, 2) claims, mean claim 1."""
    return JumpDiffusionPhaseType(9.0, 0.0, 5.0, (1.0, 0.0), ((-2.0, 2.0), (0.0, -2.0)))


@pytest.fixture
def exponential_phase_type():
    """Phase-type model with a single exponential phase, the same law as cl_model."""
    return JumpDiffusionPhaseType(9.0, 0.0, 5.0, (1.0,), ((-1.0,),))
