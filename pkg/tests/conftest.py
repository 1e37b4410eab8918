# ./tests/conftest.py

import numpy as np
import pytest

from src.bsa.models import Basis, DomainGrid, FunctionFamily, MeasureGrid, ParameterGrid, SampledProblem
from src.datos_sinteticos.generador_problemas import GeneradorProblemas


@pytest.fixture(scope="session")
def generador():
    return GeneradorProblemas(seed=42)


@pytest.fixture(scope="session")
def corpus(generador):
    return generador.corpus()


@pytest.fixture(scope="session")
def chebyshev(generador):
    """x² desde {1, x} en 1001 puntos de [−1, 1]."""
    return generador.chebyshev_x2()


@pytest.fixture(scope="session")
def simetrica(generador):
    """{x, −x} contra constantes en 201 puntos."""
    return generador.simetrica_constantes()


@pytest.fixture(scope="session")
def simetrica_l2(generador):
    return generador.simetrica_l2()


@pytest.fixture
def problema_minimo():
    """|A| = 1, |X| = 2, n = 1, d = 1."""
    etiquetas = ["p", "q"]
    return SampledProblem(
        domain=DomainGrid(labels=etiquetas, coords=[0.0, 1.0]),
        family=FunctionFamily(params=ParameterGrid(labels=["f"]), point_labels=etiquetas, values=[[1.0, 3.0]]),
        basis=Basis(point_labels=etiquetas, values=[[1.0, 1.0]]),
    )


@pytest.fixture
def medida_tres_puntos():
    return MeasureGrid(point_labels=["s0", "s1", "s2"], weights=np.ones(3), p=2.0)
