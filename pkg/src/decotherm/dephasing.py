"""Exactly solvable qubit pure-dephasing model.

A qubit with Hamiltonian (omega0/2) sigma_z coupled through sigma_z to a
bosonic bath. Populations in the sigma_z eigenbasis are frozen; the
coherence evolves as

    rho01(t) = rho01(0) * exp(i omega0 t) * exp(-eta(t))

with the decoherence exponent eta(t) from :mod:`decotherm.spectral`. The
same dynamics obeys the exact time-local master equation

    d rho / dt = -i [(omega0/2) sigma_z, rho] + Gamma(t) (sigma_z rho sigma_z - rho)

with Gamma(t) = d eta / dt / 2, which is what the generic integrator here
cross-checks.

Basis convention, fixed package-wide: index 0 is the sigma_z eigenvalue
-1, index 1 is +1, so ``SIGMA_Z = diag(-1, +1)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import IntegrationDriftError, ValidationError
from .linops import check_density_matrix, unvec, vec
from .liouville import LindbladTerm, Superoperator, build_superoperator
from .spectral import (
    DEFAULT_TOL,
    SpectralDensity,
    Temperature,
    decoherence_eta,
    frequency_integrals,
    rate_gamma,
)

logger = logging.getLogger(__name__)

SIGMA_Z = np.diag([-1.0, 1.0]).astype(complex)


@dataclass(frozen=True)
class ModelParams:
    """Qubit frequency plus the bath coupling profile and temperature."""

    omega0: float
    density: SpectralDensity
    temperature: Temperature

    def __post_init__(self):
        if not math.isfinite(self.omega0):
            raise ValidationError("omega0 must be finite")

    def hamiltonian(self) -> np.ndarray:
        return 0.5 * self.omega0 * SIGMA_Z


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid on [0, t_end]; the step must divide t_end."""

    t_end: float
    step: float

    def __post_init__(self):
        if not (self.t_end > 0 and self.step > 0):
            raise ValidationError("t_end and step must be positive")
        n = round(self.t_end / self.step)
        if n < 1 or abs(n * self.step - self.t_end) > 1e-9 * max(self.t_end, 1.0):
            raise ValidationError(
                f"step {self.step} does not divide t_end {self.t_end}"
            )

    @property
    def n_steps(self) -> int:
        return round(self.t_end / self.step)

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_end, self.n_steps + 1)


def _coherence_states(rho0: np.ndarray, phases: np.ndarray) -> list:
    """Assemble states with populations of rho0 and coherence rho01(0) * phases."""
    out = []
    for ph in phases:
        rho = rho0.copy()
        rho[0, 1] = rho0[0, 1] * ph
        rho[1, 0] = np.conj(rho[0, 1])
        out.append(rho)
    return out


def analytic_state(
    params: ModelParams,
    rho0: np.ndarray,
    t: float,
    tol: float = DEFAULT_TOL,
) -> np.ndarray:
    """Exact reduced state at time t for an initial state in the sigma_z basis."""
    rho0 = check_density_matrix(rho0)
    if rho0.shape != (2, 2):
        raise ValidationError("the model state is a qubit (2 x 2)")
    if t < 0:
        raise ValidationError("t must be >= 0")
    eta = decoherence_eta(params.density, params.temperature, t, tol)
    phase = np.exp(1j * params.omega0 * t - eta)
    return _coherence_states(rho0, np.array([phase]))[0]


def analytic_trajectory(
    params: ModelParams,
    rho0: np.ndarray,
    grid: TimeGrid,
    tol: float = DEFAULT_TOL,
) -> list:
    """Exact trajectory [(t, rho(t)), ...] on a time grid (one shared quadrature)."""
    rho0 = check_density_matrix(rho0)
    if rho0.shape != (2, 2):
        raise ValidationError("the model state is a qubit (2 x 2)")
    ts = grid.times
    etas = decoherence_eta(params.density, params.temperature, ts, tol)
    phases = np.exp(1j * params.omega0 * ts - etas)
    states = _coherence_states(rho0, phases)
    return list(zip(ts.tolist(), states))


def exact_generator(params: ModelParams, t: float, tol: float = DEFAULT_TOL) -> Superoperator:
    """The exact time-local generator at time t (minimal-dissipation form)."""
    if t < 0:
        raise ValidationError("t must be >= 0")
    gamma = rate_gamma(params.density, params.temperature, t, tol)
    return build_superoperator(
        params.hamiltonian(), [LindbladTerm(rate=gamma, operator=SIGMA_Z)]
    )


class TabulatedGenerator:
    """Generator callable backed by a rate table on a grid.

    The rate Gamma(t) and its derivative are evaluated once on the grid
    nodes and interpolated with a cubic Hermite spline for off-grid times
    (integrator substeps); the uniform grid makes the interval lookup a
    constant-time index computation. The interpolation error is checked in
    tests against direct quadrature, not assumed.
    """

    def __init__(self, params: ModelParams, grid: TimeGrid, tol: float = DEFAULT_TOL):
        ts = grid.times
        tables = frequency_integrals(
            ("gamma", "gamma_dot"), params.density, params.temperature, ts, tol
        )
        self._gammas = tables["gamma"]
        self._slopes = tables["gamma_dot"]
        self._step = grid.step
        self._t_end = grid.t_end
        self._commutator = build_superoperator(params.hamiltonian()).matrix
        self._dissipator = (
            build_superoperator(np.zeros((2, 2)), [LindbladTerm(1.0, SIGMA_Z)])
        ).matrix
        self.params = params

    def rate(self, t: float) -> float:
        """Cubic Hermite interpolation of the tabulated rate."""
        if not 0.0 <= t <= self._t_end * (1 + 1e-12):
            raise ValidationError(f"t = {t} outside the tabulated range")
        h = self._step
        i = min(int(t / h), len(self._gammas) - 2)
        s = t / h - i
        s2, s3 = s * s, s * s * s
        return (
            (2.0 * s3 - 3.0 * s2 + 1.0) * self._gammas[i]
            + (s3 - 2.0 * s2 + s) * h * self._slopes[i]
            + (-2.0 * s3 + 3.0 * s2) * self._gammas[i + 1]
            + (s3 - s2) * h * self._slopes[i + 1]
        )

    def spline(self) -> CubicHermiteSpline:
        """The same interpolant as a scipy spline (for vectorized use)."""
        ts = np.linspace(0.0, self._t_end, len(self._gammas))
        return CubicHermiteSpline(ts, self._gammas, self._slopes)

    def matrix_at(self, t: float) -> np.ndarray:
        """Generator matrix without the wrapper (integrator hot path)."""
        return self._commutator + self.rate(t) * self._dissipator

    def __call__(self, t: float) -> Superoperator:
        return Superoperator(self.matrix_at(t), validate=False)


def integrate_tcl(
    generator,
    rho0: np.ndarray,
    grid: TimeGrid,
    positivity_tol: float = 1e-8,
) -> list:
    """Integrate d rho/dt = L(t)[rho] with the classic fourth-order scheme.

    ``generator`` is a callable t -> Superoperator. Every step output is
    re-Hermitized and trace-renormalized (drift is logged); eigenvalues
    below ``-positivity_tol`` abort with a hint to shrink the step.
    """
    rho0 = check_density_matrix(rho0)
    n = rho0.shape[0]
    ts = grid.times
    h = grid.step
    matrix_at = getattr(generator, "matrix_at", None)
    if matrix_at is None:
        matrix_at = lambda t: generator(t).matrix  # noqa: E731

    y = vec(rho0).astype(complex)
    states = [rho0.copy()]
    max_trace_drift = 0.0
    max_herm_drift = 0.0
    for k in range(len(ts) - 1):
        t = ts[k]
        l_full = matrix_at(t)
        l_half = matrix_at(t + 0.5 * h)
        l_next = matrix_at(t + h)
        k1 = l_full @ y
        k2 = l_half @ (y + 0.5 * h * k1)
        k3 = l_half @ (y + 0.5 * h * k2)
        k4 = l_next @ (y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

        rho = unvec(y, n)
        herm_drift = float(np.max(np.abs(rho - rho.conj().T)))
        rho = 0.5 * (rho + rho.conj().T)
        tr = float(np.trace(rho).real)
        trace_drift = abs(tr - 1.0)
        rho = rho / tr
        max_trace_drift = max(max_trace_drift, trace_drift)
        max_herm_drift = max(max_herm_drift, herm_drift)
        y = vec(rho)
        states.append(rho)

    smallest = np.linalg.eigvalsh(np.stack(states))[:, 0]
    worst = int(np.argmin(smallest))
    if smallest[worst] < -positivity_tol:
        raise IntegrationDriftError(
            f"state eigenvalue {smallest[worst]:.3e} below -{positivity_tol:.1e} "
            f"at t = {ts[worst]:.6g}; use a smaller step"
        )
    logger.debug(
        "integrate_tcl drift: max |tr - 1| = %.3e, max hermiticity = %.3e",
        max_trace_drift,
        max_herm_drift,
    )
    return list(zip(ts.tolist(), states))
