import functools

import numpy as np
import pytest

import wdspectral as W
from wdspectral.metrics import GridField

ACCEPTANCE_LINES = []


@functools.lru_cache(maxsize=None)
def oscillator_solution(N, k, chi=4.0):
    spec = W.BasisSpec("oscillator", N)
    system = W.galerkin_matrix(spec, W.PotentialSpec(k=k), W.QuadratureSettings())
    return system, W.solve(system, W.coherent_coefficients(chi, N))


@functools.lru_cache(maxsize=None)
def fourier_solution(N, k, L, chi=4.0):
    spec = W.BasisSpec("fourier", N, L=L)
    system = W.galerkin_matrix(spec, W.PotentialSpec(k=k), W.QuadratureSettings())
    return system, W.solve(system, W.coherent_coefficients(chi, N))


@functools.lru_cache(maxsize=None)
def grid_of(kind, N, k, L=None):
    if kind == "oscillator":
        sol = oscillator_solution(N, k)[1]
    else:
        sol = fourier_solution(N, k, L)[1]
    return GridField.from_function(sol.evaluate)


@functools.lru_cache(maxsize=None)
def reference_grid():
    return W.reference_k0(4.0)


def record(criterion, ok, detail):
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
