"""Thermodynamic ledgers for time-local open-system dynamics.

Local (minimal-dissipation) entropy production and first law, Clausius
variants with an optional renormalized-temperature fit, and the global
bath-energy bookkeeping in its two first-law conventions (interaction
energy assigned to the system, "elb", or kept out of it, "lp").

Sign conventions: heat is positive into the system, work is positive when
done on the system. Entropies are in nats. Integrated series accumulate
rates with the trapezoidal rule on the trajectory grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import (
    ConsistencyError,
    UnsupportedCombinationError,
    ValidationError,
)
from .linops import (
    EIGENVALUE_CLIP,
    matrix_log_hermitian,
    relative_entropy,
    von_neumann_entropy,
)
from .liouville import Superoperator
from .spectral import DEFAULT_TOL, SpectralDensity, Temperature, interaction_energy

CONVENTIONS = ("local", "elb", "lp")

TRACE_COLUMNS = (
    "t", "S", "sigma_loc", "Sigma_loc", "U_loc", "W_loc", "Q_loc",
    "Q_gl", "Sigma_gl", "U_elb", "W_elb", "U_lp", "W_lp",
)


class ThermoRecord(NamedTuple):
    t: float
    S: float
    sigma_loc: float
    Sigma_loc: float
    U_loc: float
    W_loc: float
    Q_loc: float
    Q_gl: float
    Sigma_gl: float
    U_elb: float
    W_elb: float
    U_lp: float
    W_lp: float


@dataclass
class ThermoTrace:
    """Column-oriented record of every first- and second-law quantity.

    Columns for conventions that were not requested hold NaN. ``validate``
    re-checks first-law closure per convention and the time ordering.
    """

    t: np.ndarray
    S: np.ndarray
    sigma_loc: np.ndarray
    Sigma_loc: np.ndarray
    U_loc: np.ndarray
    W_loc: np.ndarray
    Q_loc: np.ndarray
    Q_gl: np.ndarray
    Sigma_gl: np.ndarray
    U_elb: np.ndarray
    W_elb: np.ndarray
    U_lp: np.ndarray
    W_lp: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.t)

    def record(self, i: int) -> ThermoRecord:
        return ThermoRecord(*(float(getattr(self, c)[i]) for c in TRACE_COLUMNS))

    def __iter__(self):
        return (self.record(i) for i in range(len(self)))

    def column(self, name: str) -> np.ndarray:
        if name not in TRACE_COLUMNS:
            raise ValidationError(f"unknown column {name!r}")
        return getattr(self, name)

    def validate(self, closure_tol: float = 1e-8) -> None:
        if np.any(np.diff(self.t) <= 0):
            raise ValidationError("times are not strictly increasing")
        closures = {
            "local": (self.U_loc, self.W_loc, self.Q_loc),
            "elb": (self.U_elb, self.W_elb, self.Q_gl),
            "lp": (self.U_lp, self.W_lp, self.Q_gl),
        }
        for name, (u, w, q) in closures.items():
            if np.all(np.isnan(u)):
                continue
            gap = np.max(np.abs((u - u[0]) - (w + q)))
            if not gap <= closure_tol:
                raise ConsistencyError(
                    f"first-law closure violated for {name!r}: max gap {gap:.3e}"
                )


def _trajectory_arrays(traj: Sequence) -> tuple:
    ts = np.array([float(t) for t, _ in traj])
    states = [np.asarray(rho, dtype=complex) for _, rho in traj]
    if len(ts) < 2 or np.any(np.diff(ts) <= 0):
        raise ValidationError("trajectory needs at least two strictly increasing times")
    return ts, states


def _cumtrapz(rates: np.ndarray, ts: np.ndarray) -> np.ndarray:
    out = np.zeros_like(rates)
    out[1:] = np.cumsum(0.5 * (rates[1:] + rates[:-1]) * np.diff(ts))
    return out


def _log_state(rho: np.ndarray, regularize: bool, what: str) -> np.ndarray:
    lam = np.linalg.eigvalsh(rho)
    if lam[0] <= EIGENVALUE_CLIP:
        if not regularize:
            raise ValidationError(
                f"{what} is rank deficient (min eigenvalue {lam[0]:.3e}); "
                "pass regularize=True to blend in 1e-12 of the maximally mixed state"
            )
        n = rho.shape[0]
        eps = 1e-12
        rho = (1.0 - eps) * rho + eps * np.eye(n) / n
    return matrix_log_hermitian(rho)


def local_entropy_production_rate(
    superop: Superoperator,
    rho: np.ndarray,
    rho_star: np.ndarray,
    ifp_tol: float = 1e-8,
    regularize: bool = False,
) -> float:
    """Instantaneous entropy production rate against a fixed point.

        sigma = -Tr(L[rho] ln rho) + Tr(L[rho] ln rho_star)

    ``rho_star`` must be annihilated by the generator within ``ifp_tol``
    (relative to the generator norm). Rank-deficient states raise unless
    ``regularize`` is set.
    """
    residual = np.max(np.abs(superop(rho_star)))
    scale = max(float(np.max(np.abs(superop.matrix))), 1e-300)
    if residual > ifp_tol * scale:
        raise ValidationError(
            f"rho_star is not a fixed point: |L[rho_star]| = {residual:.3e} "
            f"exceeds {ifp_tol:.1e} x |L| = {ifp_tol * scale:.3e}"
        )
    rho_dot = superop(rho)
    log_rho = _log_state(rho, regularize, "rho")
    log_star = _log_state(rho_star, regularize, "rho_star")
    value = -np.trace(rho_dot @ log_rho) + np.trace(rho_dot @ log_star)
    return float(value.real)


def local_entropy_production(
    traj: Sequence,
    generator: Callable[[float], Superoperator],
    ifp,
    consistency_tol: float = 1e-6,
    regularize: bool = False,
):
    """Entropy production rate and its trapezoidal integral along a trajectory.

    ``ifp`` is either a constant state or a callable t -> state giving the
    instantaneous fixed point to measure against. For a constant fixed
    point the integral is cross-checked against the endpoint identity

        Sigma(t) = D(rho(0) || rho*) - D(rho(t) || rho*)

    and a disagreement above ``consistency_tol`` raises
    :class:`ConsistencyError`.
    """
    ts, states = _trajectory_arrays(traj)
    ifp_of = ifp if callable(ifp) else (lambda _t: ifp)
    rates = np.array(
        [
            local_entropy_production_rate(
                generator(t), rho, ifp_of(t), regularize=regularize
            )
            for t, rho in zip(ts, states)
        ]
    )
    integral = _cumtrapz(rates, ts)
    if not callable(ifp):
        d0 = relative_entropy(states[0], ifp)
        endpoint = np.array(
            [d0 - relative_entropy(rho, ifp) for rho in states]
        )
        gap = float(np.max(np.abs(integral - endpoint)))
        if gap > consistency_tol:
            raise ConsistencyError(
                f"entropy production integral disagrees with the endpoint "
                f"relative-entropy identity by {gap:.3e} (> {consistency_tol:.1e}); "
                "refine the time grid"
            )
    return rates, integral


@dataclass
class FirstLawSeries:
    internal_energy: np.ndarray
    work: np.ndarray
    heat: np.ndarray
    work_rate: np.ndarray
    heat_rate: np.ndarray


def local_first_law(
    effective_h: Callable[[float], np.ndarray],
    traj: Sequence,
    generator: Callable[[float], Superoperator],
    closure_tol: float = 1e-8,
) -> FirstLawSeries:
    """Internal energy, work and heat with the effective Hamiltonian K(t).

        U(t) = Tr(K rho),  dW = Tr(dK/dt rho) dt,  dQ = Tr(K L[rho]) dt

    dK/dt is taken by central differences of K on the trajectory grid
    (one-sided at the ends). The first-law closure dU = W + Q is asserted
    within ``closure_tol``.
    """
    ts, states = _trajectory_arrays(traj)
    ks = [np.asarray(effective_h(t), dtype=complex) for t in ts]

    k_dots = [None] * len(ts)
    k_dots[0] = (ks[1] - ks[0]) / (ts[1] - ts[0])
    k_dots[-1] = (ks[-1] - ks[-2]) / (ts[-1] - ts[-2])
    for i in range(1, len(ts) - 1):
        k_dots[i] = (ks[i + 1] - ks[i - 1]) / (ts[i + 1] - ts[i - 1])

    u = np.array([np.trace(k @ rho).real for k, rho in zip(ks, states)])
    work_rate = np.array(
        [np.trace(kd @ rho).real for kd, rho in zip(k_dots, states)]
    )
    heat_rate = np.array(
        [
            np.trace(k @ generator(t)(rho)).real
            for t, k, rho in zip(ts, ks, states)
        ]
    )
    work = _cumtrapz(work_rate, ts)
    heat = _cumtrapz(heat_rate, ts)
    gap = float(np.max(np.abs((u - u[0]) - (work + heat))))
    if gap > closure_tol:
        raise ConsistencyError(
            f"local first-law closure gap {gap:.3e} exceeds {closure_tol:.1e}"
        )
    return FirstLawSeries(
        internal_energy=u, work=work, heat=heat,
        work_rate=work_rate, heat_rate=heat_rate,
    )


def _fit_renormalized_beta(k: np.ndarray, rho_star: np.ndarray, residual_tol: float):
    """Fit ln rho_star = -beta_r K + const; None when not a Gibbs state of K."""
    lam_k, v = np.linalg.eigh(k)
    spread = float(lam_k[-1] - lam_k[0])
    if spread <= 1e-12 * max(1.0, abs(float(lam_k[-1]))):
        return None  # K proportional to identity: beta_r unidentifiable
    m = v.conj().T @ rho_star @ v
    off = m - np.diag(np.diag(m))
    if np.max(np.abs(off)) > residual_tol:
        return None  # fixed point does not commute with K
    p = np.diag(m).real
    if np.any(p <= 0.0):
        return None
    log_p = np.log(p)
    k_c = lam_k - lam_k.mean()
    beta_r = -float(k_c @ (log_p - log_p.mean())) / float(k_c @ k_c)
    fitted = -beta_r * lam_k
    fitted += log_p.mean() - fitted.mean()
    if np.max(np.abs(fitted - log_p)) > residual_tol:
        return None
    return beta_r


def clausius_variants(
    traj: Sequence,
    generator: Callable[[float], Superoperator],
    heat_rate: np.ndarray,
    beta: float,
    effective_h: Callable[[float], np.ndarray],
    ifp,
    fit_residual_tol: float = 1e-8,
    regularize: bool = False,
):
    """Clausius entropy production rate and the renormalized-temperature fit.

    Returns ``(sigma_cl, beta_r)`` where ``sigma_cl(t) = dS/dt - beta *
    dQ/dt`` uses the given bath temperature, and ``beta_r`` is a list with
    one entry per time: the fitted inverse temperature for which the fixed
    point is a Gibbs state of K(t), or None when the fit is unsupported
    (non-commuting fixed point, K proportional to identity, or residual
    above ``fit_residual_tol``).
    """
    ts, states = _trajectory_arrays(traj)
    heat_rate = np.asarray(heat_rate, dtype=float)
    if heat_rate.shape != ts.shape:
        raise ValidationError("heat_rate length does not match trajectory")
    ifp_of = ifp if callable(ifp) else (lambda _t: ifp)

    entropy_rate = np.array(
        [
            -np.trace(generator(t)(rho) @ _log_state(rho, regularize, "rho")).real
            for t, rho in zip(ts, states)
        ]
    )
    sigma_cl = entropy_rate - beta * heat_rate
    beta_r = [
        _fit_renormalized_beta(
            np.asarray(effective_h(t), dtype=complex), ifp_of(t), fit_residual_tol
        )
        for t in ts
    ]
    return sigma_cl, beta_r


def global_quantities(
    density: SpectralDensity,
    temperature: Temperature,
    traj: Sequence,
    tol: float = DEFAULT_TOL,
):
    """Bath-energy heat and Clausius entropy production for the dephasing model.

        Q_gl(t) = <H_I>_t,   Sigma_gl(t) = Delta S(t) - beta Q_gl(t)

    Undefined in the zero-temperature mode (no beta to weigh the heat).
    """
    if temperature.is_zero:
        raise UnsupportedCombinationError(
            "global entropy production needs a finite temperature"
        )
    ts, states = _trajectory_arrays(traj)
    q_gl = interaction_energy(density, ts, tol)
    entropies = np.array([von_neumann_entropy(rho) for rho in states])
    sigma_gl = (entropies - entropies[0]) - temperature.beta * q_gl
    return q_gl, sigma_gl


def global_first_law(
    density: SpectralDensity,
    traj: Sequence,
    variant: str,
    h_system: np.ndarray,
    tol: float = DEFAULT_TOL,
    closure_tol: float = 1e-10,
):
    """Internal energy and work for the global conventions.

    ``elb`` counts the interaction energy as system energy: U(t) =
    <H_S>_t + <H_I>_t and W = 0 for time-independent Hamiltonians. ``lp``
    keeps the bare system energy: U(t) = <H_S>_t, and work is fixed by
    first-law closure W = Delta U - Q_gl. Both closures are computed from
    independently evaluated sides and asserted within ``closure_tol``.
    """
    if variant not in ("elb", "lp"):
        raise ValidationError(f"variant must be 'elb' or 'lp', got {variant!r}")
    ts, states = _trajectory_arrays(traj)
    h_system = np.asarray(h_system, dtype=complex)
    q_gl = interaction_energy(density, ts, tol)
    hs_expect = np.array([np.trace(h_system @ rho).real for rho in states])

    if variant == "elb":
        u = hs_expect + q_gl
        w = np.zeros_like(u)
    else:
        u = hs_expect.copy()
        w = (u - u[0]) - q_gl
    gap = float(np.max(np.abs((u - u[0]) - (w + q_gl))))
    if gap > closure_tol:
        raise ConsistencyError(
            f"global first-law closure gap {gap:.3e} exceeds {closure_tol:.1e} "
            f"for variant {variant!r}"
        )
    return u, w


def dephasing_thermo_trace(
    params,
    rho0: np.ndarray,
    grid,
    conventions: Sequence[str] = CONVENTIONS,
    ifp: np.ndarray | None = None,
    tol: float = DEFAULT_TOL,
    consistency_tol: float | None = None,
) -> ThermoTrace:
    """Full thermodynamic trace of the exactly solvable model on a grid.

    The trajectory is the analytic solution; the generator is the exact
    master equation with the rate tabulated once on the grid. ``ifp``
    defaults to the maximally mixed state (any diagonal state is a fixed
    point; the entropy production is choice independent). The consistency
    tolerance for the rate-vs-endpoint check defaults to
    ``max(1e-6, 0.5 * step^2)``, the trapezoidal error scale of the grid.
    """
    from .dephasing import TabulatedGenerator, analytic_trajectory
    from .liouville import effective_hamiltonian

    unknown = [c for c in conventions if c not in CONVENTIONS]
    if unknown:
        raise ValidationError(f"unknown conventions {unknown}")
    if consistency_tol is None:
        consistency_tol = max(1e-6, 0.5 * grid.step**2)

    traj = analytic_trajectory(params, rho0, grid, tol)
    ts, states = _trajectory_arrays(traj)
    generator = TabulatedGenerator(params, grid, tol)
    entropies = np.array([von_neumann_entropy(rho) for rho in states])

    nan = np.full(len(ts), np.nan)
    cols = {name: nan.copy() for name in TRACE_COLUMNS if name not in ("t", "S")}

    if "local" in conventions:
        star = np.eye(2, dtype=complex) / 2.0 if ifp is None else ifp
        rates, integral = local_entropy_production(
            traj, generator, star, consistency_tol=consistency_tol
        )
        first = local_first_law(
            lambda t: effective_hamiltonian(generator(t)), traj, generator
        )
        cols["sigma_loc"], cols["Sigma_loc"] = rates, integral
        cols["U_loc"], cols["W_loc"], cols["Q_loc"] = (
            first.internal_energy, first.work, first.heat,
        )

    if "elb" in conventions or "lp" in conventions:
        q_gl, sigma_gl = global_quantities(params.density, params.temperature, traj, tol)
        cols["Q_gl"], cols["Sigma_gl"] = q_gl, sigma_gl
        h_s = params.hamiltonian()
        if "elb" in conventions:
            cols["U_elb"], cols["W_elb"] = global_first_law(
                params.density, traj, "elb", h_s, tol
            )
        if "lp" in conventions:
            cols["U_lp"], cols["W_lp"] = global_first_law(
                params.density, traj, "lp", h_s, tol
            )

    trace = ThermoTrace(
        t=ts,
        S=entropies,
        metadata={
            "omega0": params.omega0,
            "density": params.density,
            "temperature": params.temperature,
            "conventions": tuple(conventions),
            "step": grid.step,
        },
        **cols,
    )
    return trace
