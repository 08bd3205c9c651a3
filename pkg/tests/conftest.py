import numpy as np
import pytest

from models.control import ControlFunction, Piece, RangeContract, Shape
from services.corpus import corpus_registry


@pytest.fixture(scope="session")
def registry():
    return corpus_registry()


@pytest.fixture(scope="session")
def example17(registry):
    return registry["example17"]


@pytest.fixture(scope="session")
def browder(registry):
    return registry["browder"]


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(scope="session")
def reich_only_beta():
    """0 at t=0, 1 - t on (0, 1/2], 1/2 beyond: (R) holds, (MT) fails at 0."""
    return ControlFunction.piecewise(
        [
            Piece(lo=0.0, hi=0.0, shape=Shape.constant(0.0)),
            Piece(lo=0.0, hi=0.5, lo_closed=False, hi_closed=True, shape=Shape.affine(-1.0, 1.0)),
            Piece(lo=0.5, lo_closed=False, shape=Shape.constant(0.5)),
        ],
        "reich_only",
        RangeContract.BETA,
    )
