import os
import shutil
import tempfile

import numpy as np

from magicwit import bell, optimize
from magicwit.algebra import pauli_vector


def quick_config(restarts=8, seed=7, **kw):
    return optimize.OptimizerConfig(restarts=restarts, seed=seed, **kw)


def random_inequality(rng, dims, settings=None):
    settings = settings or (2,) * len(dims)
    return bell.BellInequality(rng.normal(size=tuple(dims) + tuple(settings)), dims, settings)


def random_behavior(rng, dims, settings=None):
    settings = settings or (2,) * len(dims)
    p = rng.uniform(size=tuple(dims) + tuple(settings))
    p /= p.sum(axis=tuple(range(len(dims))))
    return bell.Behavior(p, dims, settings)


def bell_pair():
    psi = np.zeros(4, dtype=complex)
    psi[0] = psi[3] = 1 / np.sqrt(2)
    return psi


def chsh_optimal_measurements():
    """Z and X for party one, (Z +/- X)/sqrt(2) for party two."""
    z = np.array([0, 0, 1.0])
    x = np.array([1.0, 0, 0])
    return optimize.MeasurementSet.from_bloch([[z, x], [(z + x) / np.sqrt(2), (z - x) / np.sqrt(2)]])


def bloch_op(u):
    return sum(c * p for c, p in zip(u, pauli_vector()))


def temp_dir():
    return tempfile.mkdtemp(prefix='magicwit-test-')


def remove(path):
    if os.path.exists(path):
        shutil.rmtree(path)
