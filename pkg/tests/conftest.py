"""Shared fixtures: benchmark models and randomized admissible systems."""

from __future__ import annotations

import numpy as np
import pytest

from frontkit.kernels import DelayKernel
from frontkit.models import LotkaVolterraModel
from frontkit.waves import solve_wave


@pytest.fixture(scope="session")
def benchmark_model() -> LotkaVolterraModel:
    """Two-species competition benchmark (no delay, wave speed 1)."""
    return LotkaVolterraModel.undelayed((0.0001, 0.05), (0.1, 0.5),
                                        ((1.0, 0.55), (0.75, 1.0)))


@pytest.fixture(scope="session")
def benchmark_delayed_model() -> LotkaVolterraModel:
    diag = DelayKernel.from_atoms([(-5.0, 0.4), (0.0, 0.6)])
    off = DelayKernel.point_mass(0.0, tau=5.0)
    return LotkaVolterraModel(d=(0.0001, 0.05), r=(0.1, 0.5),
                              c=((1.0, 0.1), (0.1, 1.0)),
                              kernels=((diag, off), (off, diag)))


@pytest.fixture(scope="session")
def benchmark_solution(benchmark_model):
    """Converged benchmark wave at c = 1 (solver frame), reused suite-wide."""
    return solve_wave(benchmark_model, 1.0)


def random_admissible_model(rng: np.random.Generator, n: int = 2,
                            delayed: bool = False) -> LotkaVolterraModel:
    """Random competition model with positive equilibrium and, when asked,
    distributed diagonal delays with instantaneous weight in [0.5, 1)."""
    while True:
        d = tuple(rng.uniform(0.3, 1.5, n))
        r = tuple(rng.uniform(0.3, 1.5, n))
        c = rng.uniform(0.0, 0.45, (n, n))
        np.fill_diagonal(c, rng.uniform(0.8, 1.25, n))
        if delayed:
            kernels = []
            for i in range(n):
                row = []
                for j in range(n):
                    if i == j:
                        a = rng.uniform(0.55, 0.95)
                        tau = rng.uniform(0.5, 3.0)
                        row.append(DelayKernel.from_atoms([(-tau, 1.0 - a), (0.0, a)]))
                    else:
                        row.append(DelayKernel.point_mass(0.0))
                kernels.append(tuple(row))
            model = LotkaVolterraModel(d, r, tuple(tuple(map(float, rw)) for rw in c),
                                       tuple(kernels))
        else:
            model = LotkaVolterraModel.undelayed(d, r, c)
        u_star = np.linalg.solve(np.asarray(model.c), np.ones(n))
        if np.all(u_star > 0.05):
            return model
