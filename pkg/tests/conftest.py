"""Shared fixtures and independent numerical oracles.

The oracle functions below recompute smoothed curves, distances, and
sums of squared distances from the defining formulas with plain NumPy
and Simpson quadrature. They deliberately avoid the package's own
closed forms so that agreement is evidence, not circularity.
"""
from __future__ import annotations

import numpy as np
import pytest
from scipy.integrate import simpson

from ppdepth import KernelSpec, PointProcess

SIMPSON_GRID = 8192


@pytest.fixture(scope="session")
def default_spec() -> KernelSpec:
    return KernelSpec(c1=1.0, c2=10.0, T=100.0)


@pytest.fixture(scope="session")
def ipp_spec() -> KernelSpec:
    return KernelSpec(c1=1.0, c2=25.0, T=100.0)


def oracle_curve(events: np.ndarray, grid: np.ndarray, spec: KernelSpec) -> np.ndarray:
    """Smoothed curve by direct summation of Gaussian bumps."""
    if len(events) == 0:
        return np.zeros_like(grid)
    diff = grid[:, None] - np.asarray(events)[None, :]
    return spec.c1 * np.exp(-spec.c2 * diff * diff / (spec.T * spec.T)).sum(axis=1)


def oracle_lp_distance(
    x: np.ndarray, y: np.ndarray, spec: KernelSpec, p: float = 2.0, n: int = SIMPSON_GRID
) -> float:
    """L^p distance between smoothed curves via Simpson quadrature."""
    grid = np.linspace(0.0, spec.T, n + 1)
    gap = np.abs(oracle_curve(x, grid, spec) - oracle_curve(y, grid, spec))
    return float(simpson(gap**p, x=grid) ** (1.0 / p))


def oracle_ssd(t: np.ndarray, sample: list[np.ndarray], spec: KernelSpec, n: int = SIMPSON_GRID) -> float:
    """Sum of squared L2 distances from t to every sample member."""
    grid = np.linspace(0.0, spec.T, n + 1)
    ft = oracle_curve(t, grid, spec)
    total = 0.0
    for events in sample:
        gap = ft - oracle_curve(events, grid, spec)
        total += float(simpson(gap * gap, x=grid))
    return total


def random_events(rng: np.random.Generator, max_k: int = 12, T: float = 100.0) -> np.ndarray:
    """Sorted event vector with uniform cardinality in [0, max_k]."""
    k = int(rng.integers(0, max_k + 1))
    return np.sort(rng.uniform(0.0, T, k))


def as_process(events: np.ndarray, T: float = 100.0, **kwargs) -> PointProcess:
    return PointProcess(np.asarray(events, dtype=float), T=T, **kwargs)
