"""Shared fixtures.

The expensive objects (filling scans on 1x8 and 1x12) are session-scoped and
cached across test modules, so the acceptance suite and the functional
invariants pay for each scan once.
"""

from __future__ import annotations

import numpy as np
import pytest

from qedft import (
    HubbardModel,
    OptimizerConfig,
    chain,
    ed_filling_scan,
    functional_from_scan,
    vqe_filling_scan,
)

SCAN_OPTIMIZER = OptimizerConfig(restarts=1, seed=11)


@pytest.fixture(scope="session")
def ed8_scans():
    """1x8 exact filling scans keyed by U."""
    lattice = chain(8)
    cache = {}

    def get(u: float):
        if u not in cache:
            cache[u] = ed_filling_scan(HubbardModel(lattice=lattice, t=1.0, u=u))
        return cache[u]

    return get


@pytest.fixture(scope="session")
def ed8_functionals(ed8_scans):
    cache = {}

    def get(u: float):
        if u not in cache:
            cache[u] = functional_from_scan(ed8_scans(u), 8)
        return cache[u]

    return get


@pytest.fixture(scope="session")
def vqe8_functionals():
    """1x8 VQE functionals keyed by (U, depth)."""
    lattice = chain(8)
    cache = {}

    def get(u: float, depth: int):
        key = (u, depth)
        if key not in cache:
            model = HubbardModel(lattice=lattice, t=1.0, u=u)
            scan = vqe_filling_scan(model, depth, config=SCAN_OPTIMIZER)
            cache[key] = functional_from_scan(scan, 8)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def ed12_u4_functional():
    lattice = chain(12)
    scan = ed_filling_scan(HubbardModel(lattice=lattice, t=1.0, u=4.0))
    return functional_from_scan(scan, 12)


@pytest.fixture(scope="session")
def vqe12_functionals():
    """1x12 VQE functionals keyed by (U, depth).  Each scan takes minutes."""
    lattice = chain(12)
    cache = {}

    def get(u: float, depth: int):
        key = (u, depth)
        if key not in cache:
            model = HubbardModel(lattice=lattice, t=1.0, u=u)
            scan = vqe_filling_scan(model, depth, config=SCAN_OPTIMIZER)
            cache[key] = functional_from_scan(scan, 12)
        return cache[key]

    return get


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
