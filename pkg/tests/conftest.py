import numpy as np
import pytest

from gqt.quat import MU_I, MU_SYM, PureUnitQuaternion


def rand_q(rng, *shape):
    return rng.standard_normal(tuple(shape) + (4,))


def rand_mu(rng):
    return PureUnitQuaternion(*rng.standard_normal(3))


def rel_err(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    den = np.linalg.norm(b.ravel())
    return np.linalg.norm((a - b).ravel()) / (den if den > 0 else 1.0)


def mu_set(rng, count=5):
    """``count`` axes starting with i and the symmetric axis."""
    mus = [MU_I, MU_SYM]
    while len(mus) < count:
        mus.append(rand_mu(rng))
    return mus


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
