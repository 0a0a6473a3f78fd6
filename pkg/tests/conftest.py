import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from blgeo.datum import collapse_datum, hoelder_datum, loomis_whitney_datum, young_triple_datum
from blgeo.verify import random_simple_datum, sample_rng

DATA = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture
def hoelder():
    return hoelder_datum()


@pytest.fixture
def lw():
    return loomis_whitney_datum()


@pytest.fixture
def young():
    return young_triple_datum()


@pytest.fixture
def collapse():
    return collapse_datum()


@pytest.fixture
def data_dir():
    return DATA


def simple_data(count, seed=7):
    """One generic datum per draw, covering every family of the generator."""
    return [random_simple_datum(sample_rng(seed, i)) for i in range(count)]


def random_spd(rng, n, cond=100.0):
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    lam = cond ** rng.uniform(0, 1, n)
    return (Q * lam) @ Q.T
