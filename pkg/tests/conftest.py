import numpy as np
import pytest

from bsesolve import BseHamiltonian, GeneratorSpec, generate

#: eigenvalue of the 2x2 reference case A=[2], B=[0.5]: lambda^2 = A^2 - B^2
LAM2 = np.sqrt(3.75)


@pytest.fixture
def ham2() -> BseHamiltonian:
    """m=1 case with closed-form spectrum +-sqrt(3.75)."""
    return BseHamiltonian(np.array([[2.0]]), np.array([[0.5]]))


@pytest.fixture
def ham_small() -> BseHamiltonian:
    return generate(GeneratorSpec(m=8, seed=11))


@pytest.fixture
def ham_mid() -> BseHamiltonian:
    return generate(GeneratorSpec(m=16, seed=5))
