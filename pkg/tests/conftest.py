"""
Shared fixtures: seeded generators, random states and trig polynomials
"""

import logging
from collections.abc import Iterator

import numpy as np
import pytest

from torus_que.constants import LOGGER_NAME
from torus_que.diophantine import RealTarget
from torus_que.hilbert import StateVector
from torus_que.observables import TrigPolynomial, random_trig_polynomial

SEED = 20240611


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(SEED)


@pytest.fixture
def alpha() -> tuple[RealTarget, RealTarget]:
    return RealTarget.sqrt(2), RealTarget.sqrt(3)


@pytest.fixture
def cosine_shear() -> TrigPolynomial:
    """V(p) = 2 cos(2 pi p)"""
    return TrigPolynomial.from_terms([((1, 0), 1.0), ((-1, 0), 1.0)])


def random_state(rng: np.random.Generator, n: int) -> StateVector:
    values = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return StateVector(values).normalized()


def random_poly(
    rng: np.random.Generator, terms: int = 6, radius: int = 3
) -> TrigPolynomial:
    return random_trig_polynomial(rng, terms, radius)


@pytest.fixture
def package_logger() -> Iterator[logging.Logger]:
    """The torus_que logger, with handlers removed after the test"""
    logger = logging.getLogger(LOGGER_NAME)
    yield logger
    for handler in list(logger.handlers):
        handler.close()
        logger.removeHandler(handler)
