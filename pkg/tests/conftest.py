"""Shared builders for the test suite."""

import numpy as np
import pytest

from decotherm.liouville import LindbladTerm, build_superoperator


def random_density_matrix(rng, n, min_eig=0.0):
    """Wishart-style random state; blend toward maximally mixed for full rank."""
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = g @ g.conj().T
    rho /= np.trace(rho).real
    if min_eig > 0.0:
        rho = (1.0 - min_eig * n) * rho + min_eig * np.eye(n)
    return rho


def random_hermitian(rng, n, scale=1.0):
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * (g + g.conj().T) / 2.0


def random_unitary(rng, n):
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_dephasing_gamma(rng, n, scale=1.0):
    """Hermitian coefficient matrix with zero diagonal (pure-decoherence form)."""
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    gamma = scale * (g + g.conj().T) / 2.0
    np.fill_diagonal(gamma, 0.0)
    return gamma


def thermalizing_qubit(omega0=1.0, beta=1.0, gamma0=0.4):
    """Detailed-balance qubit generator and its Gibbs fixed point.

    Basis convention: index 0 is the sigma_z eigenvalue -1 (energy
    -omega0/2), so the lowering operator is |0><1|.
    """
    sz = np.diag([-1.0, 1.0]).astype(complex)
    h = 0.5 * omega0 * sz
    lower = np.zeros((2, 2), dtype=complex)
    lower[0, 1] = 1.0
    raise_op = lower.conj().T
    rate_down = gamma0
    rate_up = gamma0 * np.exp(-beta * omega0)
    superop = build_superoperator(
        h, [LindbladTerm(rate_down, lower), LindbladTerm(rate_up, raise_op)]
    )
    weights = np.exp(-beta * np.diag(h).real)
    gibbs = np.diag(weights / weights.sum()).astype(complex)
    return superop, h, gibbs


@pytest.fixture(scope="session")
def fig1_params():
    from decotherm import ModelParams, SpectralDensity, Temperature

    return ModelParams(
        omega0=1.0,
        density=SpectralDensity.ohmic(1.0, 1.0),
        temperature=Temperature.finite(1.0),
    )


@pytest.fixture(scope="session")
def fig1_state():
    return np.array([[0.25, 0.25], [0.25, 0.75]], dtype=complex)


@pytest.fixture(scope="session")
def fig1_trace(fig1_params, fig1_state):
    """Reference trace on the default figure grid (t_max 20, dt 0.01)."""
    from decotherm import TimeGrid, dephasing_thermo_trace

    trace = dephasing_thermo_trace(fig1_params, fig1_state, TimeGrid(20.0, 0.01))
    trace.validate()
    return trace


@pytest.fixture(scope="session")
def fig1_fine_trace(fig1_params, fig1_state):
    """Fine-grid trace (t_max 10, dt 1e-3) for pointwise entropy checks."""
    from decotherm import TimeGrid, dephasing_thermo_trace

    trace = dephasing_thermo_trace(fig1_params, fig1_state, TimeGrid(10.0, 1e-3))
    trace.validate()
    return trace
